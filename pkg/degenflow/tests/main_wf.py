# **************************************************************************
# *
# * Authors:     degenflow developers
# *
# * This program is free software; you can redistribute it and/or modify
# * it under the terms of the GNU General Public License as published by
# * the Free Software Foundation; either version 3 of the License, or
# * (at your option) any later version.
# *
# * This program is distributed in the hope that it will be useful,
# * but WITHOUT ANY WARRANTY; without even the implied warranty of
# * MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# * GNU General Public License for more details.
# *
# * You should have received a copy of the GNU General Public License
# * along with this program; if not, write to the Free Software
# * Foundation, Inc., 59 Temple Place, Suite 330, Boston, MA
# * 02111-1307  USA
# *
# **************************************************************************
# General imports
import os

# Scipion em imports
from pyworkflow.tests import setupTestProject, BaseTest
from pyworkflow.utils import yellowStr, redStr

# Plugin imports
from ..protocols import ProtDegenFlowSource, ProtDegenFlowPrimal, ProtDegenFlowDual, ProtDegenFlowGap, \
    ProtDegenFlowDiagnostics, ProtDegenFlowTraffic, ProtDegenFlowExperiment
from ..utils.io import writeJson


class TestDegenFlowWorkflow(BaseTest):
    """ Source, primal and dual solves, gap, diagnostics and traffic as Scipion protocols. """

    @classmethod
    def setUpClass(cls):
        setupTestProject(cls)
        cls._runSource()

    @classmethod
    def _runSource(cls):
        cls.protSource = cls.newProtocol(
            ProtDegenFlowSource,
            sourceName=0, amplitude=1.0, nx=32, ny=32)
        cls.launchProtocol(cls.protSource, wait=True)
        if getattr(cls.protSource, 'outputSource', None) is None:
            raise AssertionError(redStr('There was an error creating the source field.'))

    @classmethod
    def _runPrimal(cls):
        protPrimal = cls.newProtocol(ProtDegenFlowPrimal, q=2.0)
        protPrimal.inputSource.set(cls.protSource)
        protPrimal.inputSource.setExtended('outputSource')
        cls.launchProtocol(protPrimal, wait=True)
        return protPrimal

    @classmethod
    def _runDual(cls):
        protDual = cls.newProtocol(ProtDegenFlowDual, q=2.0, tol=1e-7)
        protDual.inputSource.set(cls.protSource)
        protDual.inputSource.setExtended('outputSource')
        cls.launchProtocol(protDual, wait=True)
        return protDual

    def _runGap(self, protPrimal, protDual):
        protGap = self.newProtocol(ProtDegenFlowGap)
        protGap.inputPrimal.set(protPrimal)
        protGap.inputPrimal.setExtended('outputPrimal')
        protGap.inputDual.set(protDual)
        protGap.inputDual.setExtended('outputDual')
        self.launchProtocol(protGap, wait=True)
        return protGap

    def testSolvesAndGap(self):
        protPrimal = self._runPrimal()
        protDual = self._runDual()
        primal = getattr(protPrimal, 'outputPrimal', None)
        dual = getattr(protDual, 'outputDual', None)
        self.assertIsNotNone(primal)
        self.assertIsNotNone(dual)
        self.assertTrue(dual.isConverged())
        self.assertEqual(primal.getGrid(), self.protSource.outputSource.getGrid())

        gap = getattr(self._runGap(protPrimal, protDual), 'outputGap', None)
        self.assertIsNotNone(gap)
        print(yellowStr(f'Relative duality gap {gap.getRelativeGap()}'))
        self.assertLessEqual(abs(gap.getRelativeGap()), 1e-4)

    def testDiagnostics(self):
        protPrimal = self._runPrimal()
        protDiag = self.newProtocol(ProtDegenFlowDiagnostics, eps0=0.5, floorCells=2, directionCount=8)
        protDiag.inputPrimal.set(protPrimal)
        protDiag.inputPrimal.setExtended('outputPrimal')
        self.launchProtocol(protDiag, wait=True)
        report = getattr(protDiag, 'outputReport', None)
        self.assertIsNotNone(report)
        self.assertEqual(report.getRadius(), 0.25)
        self.assertTrue(os.path.isfile(report.getFileName()))
        self.assertEqual(len(report.getReport()['slices']), 3 * (1 + 8))

    def testTraffic(self):
        protDual = self._runDual()
        protTraffic = self.newProtocol(ProtDegenFlowTraffic, controlCurve=True)
        protTraffic.inputDual.set(protDual)
        protTraffic.inputDual.setExtended('outputDual')
        self.launchProtocol(protTraffic, wait=True)
        plan = getattr(protTraffic, 'outputTraffic', None)
        self.assertIsNotNone(plan)
        self.assertEqual(plan.getNumberOfCurves(), 32 * 16 + 1)
        audit = plan.getAudit()
        self.assertIsNotNone(audit)
        self.assertTrue(any(entry['control'] and entry['ratio'] > 1.05 for entry in audit['entries']))


class TestDegenFlowExperiment(BaseTest):
    """ A whole configuration file run through a single protocol. """

    @classmethod
    def setUpClass(cls):
        setupTestProject(cls)
        os.makedirs(cls.getOutputPath(), exist_ok=True)
        cls.configFile = writeJson(os.path.join(cls.getOutputPath(), 'experiment.json'), {
            'grid': {'nx': 16, 'ny': 16},
            'potential': {'kind': 'power_q', 'q': 2.0},
            'source': {'name': 'two-blocks'},
            'pipeline': ['primal', 'dual', 'gap'],
            'dual': {'tol': 1e-7}})

    def test(self):
        protExperiment = self.newProtocol(ProtDegenFlowExperiment, configFile=self.configFile)
        self.launchProtocol(protExperiment, wait=True)
        for name in ('outputPrimal', 'outputDual', 'outputGap'):
            self.assertIsNotNone(getattr(protExperiment, name, None), f'Missing {name}')
        self.assertLessEqual(abs(protExperiment.outputGap.getRelativeGap()), 1e-4)
