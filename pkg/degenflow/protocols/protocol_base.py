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

"""
Common machinery of the degenflow protocols. Each protocol writes an experiment
configuration into its extra directory, runs the requested stage through the
degenflow command line and registers the stage summary as its output.
"""

# General imports
import os

# Scipion em imports
from pwem.protocols import EMProtocol
from pyworkflow.protocol.params import EnumParam, FloatParam, PathParam, LEVEL_ADVANCED

# Plugin imports
from .. import Plugin
from ..constants import POTENTIAL_DIC, POWER_Q, CUSTOM_TABLE, CONFIG_FILE, SUMMARY_FILE, STAGE_PRIMAL, STAGE_DUAL, \
    STAGE_GAP, STAGE_DIAGNOSE, STAGE_TRAFFIC
from ..objects import PrimalSolutionFile, DualSolutionFile, GapCertificate, ContinuityReportFile, \
    TrafficPlanFile
from ..utils.experiment import ExperimentConfig
from ..utils.io import writeJson, readJson

STAGE_OUTPUTS = {STAGE_PRIMAL: ('outputPrimal', PrimalSolutionFile),
                 STAGE_DUAL: ('outputDual', DualSolutionFile),
                 STAGE_GAP: ('outputGap', GapCertificate),
                 STAGE_DIAGNOSE: ('outputReport', ContinuityReportFile),
                 STAGE_TRAFFIC: ('outputTraffic', TrafficPlanFile)}


def stageAttributes(stage, summary):
    """ Attributes of the output object of a stage, read from its summary """
    if stage == STAGE_PRIMAL:
        return {'energy': summary['energy']}
    if stage == STAGE_DUAL:
        return {'objective': summary['objective'], 'converged': summary['converged']}
    if stage == STAGE_GAP:
        return {'gap': summary['gap'], 'relativeGap': summary['relative_gap']}
    if stage == STAGE_DIAGNOSE:
        return {'centerX': summary['center'][0], 'centerY': summary['center'][1], 'radius': summary['R0']}
    return {'numberOfCurves': summary['curves'], 'auditPassed': summary['audit_passed']}


class ProtDegenFlowBase(EMProtocol):
    """ Base protocol running one degenflow stage on the outputs of previous protocols. """
    _stage = None

    def _definePotentialParams(self, form):
        form.addParam('potentialKind', EnumParam, default=0, choices=list(POTENTIAL_DIC.values()),
                      label='Potential: ',
                      help='power_q: H(z) = (1/q)(|z| - 1)_+^q, degenerate on the closed unit disk.\n'
                           'custom-table: radial force profile phi(r) read from a two column text file, '
                           'zero up to r = 1 and nondecreasing.')
        form.addParam('q', FloatParam, default=2.0, label='Exponent q: ', condition='potentialKind==0',
                      help='Growth exponent of the potential, q > 1. The traffic cost grows like i^(p-1) '
                           'with 1/p + 1/q = 1.')
        form.addParam('tableFile', PathParam, label='Force profile table: ', condition='potentialKind==1',
                      help='Text file with two columns (r, phi(r)) starting at r = 0.')
        form.addParam('hessCap', FloatParam, default=10.0, label='Hessian cap: ', expertLevel=LEVEL_ADVANCED,
                      help='Largest admissible Hessian eigenvalue over the working gradient range.')

    def _defineThreadsSection(self, form):
        form.addParallelSection(threads=1, mpi=0)

    # --------------------------- STEPS functions --------------------
    def _insertAllSteps(self):
        self._insertFunctionStep('writeConfigStep')
        self._insertFunctionStep('runStageStep')
        self._insertFunctionStep('createOutputStep')

    def writeConfigStep(self):
        writeJson(self.getConfigFile(), self.buildConfig())

    def runStageStep(self):
        self.info('Running degenflow stage {} in {}'.format(self._stage or 'pipeline', self.getRunDir()))
        Plugin.runDegenFlow(self, self.getRunDir(), threads=self.numberOfThreads.get())

    def createOutputStep(self):
        name, cls = STAGE_OUTPUTS[self._stage]
        attributes = stageAttributes(self._stage, self.getStageSummary())
        output = cls(filename=self.getStageFile(SUMMARY_FILE), **attributes)
        self._defineOutputs(**{name: output})

    # --------------------------- INFO functions --------------------
    def _validate(self):
        errors = []
        if self.numberOfMpi > 1:
            errors.append('MPI cannot be selected, use threads instead.')
        if self.hasPotentialParams() and self.potentialKind.get() == 1 and not os.path.exists(self.getTableFile()):
            errors.append('The force profile table {} does not exist.'.format(self.getTableFile()))
        if not errors:
            try:
                errors += ExperimentConfig.validate(self.buildConfig(), self.getRunDir())
            except (OSError, ValueError, KeyError) as e:
                errors.append(str(e))
        return errors

    def _summary(self):
        summary = []
        if os.path.exists(self.getStageFile(SUMMARY_FILE)):
            for key, value in self.getStageSummary().items():
                if isinstance(value, (int, float, str, bool)):
                    summary.append('{}: {}'.format(key, value))
        return summary

    # --------------------------- Utils functions --------------------
    def getRunDir(self):
        return os.path.abspath(self._getExtraPath())

    def getConfigFile(self):
        return os.path.join(self.getRunDir(), CONFIG_FILE)

    def getStageFile(self, fn):
        return os.path.join(self.getRunDir(), self._stage, fn)

    def getStageSummary(self):
        return readJson(self.getStageFile(SUMMARY_FILE))

    def hasPotentialParams(self):
        return hasattr(self, 'potentialKind')

    def getTableFile(self):
        return os.path.abspath(self.tableFile.get())

    def getPotentialDict(self):
        kind = POTENTIAL_DIC[self.potentialKind.get()]
        potential = {'kind': kind, 'hess_cap': self.hessCap.get()}
        if kind == POWER_Q:
            potential['q'] = self.q.get()
        elif kind == CUSTOM_TABLE:
            with open(self.getTableFile()) as f:
                potential['table'] = [[float(v) for v in line.split()[:2]] for line in f
                                      if line.strip() and not line.startswith('#')]
        return potential

    def parseFloats(self, text):
        """ Floats of a comma or space separated string """
        return [float(v) for v in text.replace(',', ' ').split()]

    def baseConfig(self, sourceFile, grid, potential, artifacts=None):
        return {'grid': grid, 'potential': potential, 'source': {'file': sourceFile},
                'pipeline': [self._stage], 'artifacts': artifacts or {}, 'out_dir': '.'}

    def buildConfig(self):
        """ Experiment configuration running the stage of this protocol """
        raise NotImplementedError
