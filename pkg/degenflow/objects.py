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
import pwem.objects.data as data
from pyworkflow.object import Float, Integer, String, Boolean

# Plugin imports
from .constants import CONFIG_FILE
from .utils.grid import Grid2D
from .utils.io import readField, readJson
from .utils.potentials import PotentialSpec


class DegenFlowSource(data.EMFile):
    """A mean-zero source field sampled at the cell centers of a rectangular grid"""
    def __init__(self, **kwargs):
        data.EMFile.__init__(self, **kwargs)
        self._sourceName = String(kwargs.get('sourceName', None))
        self._nx = Integer(kwargs.get('nx', None))
        self._ny = Integer(kwargs.get('ny', None))
        self._lx = Float(kwargs.get('lx', None))
        self._ly = Float(kwargs.get('ly', None))
        self._smoothness = String(kwargs.get('smoothness', None))
        self._meanRemoved = Float(kwargs.get('meanRemoved', None))

    def __str__(self):
        return '{} ({} x {} cells, {})'.format(self.getSourceName(), self._nx, self._ny, self.getSmoothness())

    def getSourceName(self):
        return self._sourceName.get()

    def getSmoothness(self):
        return self._smoothness.get()

    def getMeanRemoved(self):
        return self._meanRemoved.get()

    def getGrid(self):
        return Grid2D(nx=self._nx.get(), ny=self._ny.get(), lx=self._lx.get(), ly=self._ly.get())

    def getGridDict(self):
        return self.getGrid().toDict()

    def getField(self):
        return readField(self.getFileName())


class DegenFlowStageOutput(data.EMFile):
    """Output of one experiment stage: the summary.json of the stage directory inside a run directory"""
    _stage = None

    def __init__(self, **kwargs):
        data.EMFile.__init__(self, **kwargs)

    def getStageDir(self):
        return os.path.dirname(self.getFileName())

    def getRunDir(self):
        return os.path.dirname(self.getStageDir())

    def getSummary(self):
        return readJson(self.getFileName())

    def getConfig(self):
        return readJson(os.path.join(self.getRunDir(), CONFIG_FILE))

    def getGrid(self):
        return Grid2D.fromDict(self.getConfig()['grid'])

    def getPotential(self):
        return PotentialSpec.fromDict(self.getConfig().get('potential', {}))

    def getSourceFile(self):
        """Source field the stage was computed from, copied into the run directory"""
        return os.path.join(self.getRunDir(), 'source', 'source.dfield')

    def getStageFile(self, fn):
        return os.path.join(self.getStageDir(), fn)

    def getField(self, name):
        return readField(self.getStageFile(name + '.dfield'))


class PrimalSolutionFile(DegenFlowStageOutput):
    """Minimizer u of the degenerate energy with its flux sigma = grad H(grad u)"""
    _stage = 'primal'

    def __init__(self, **kwargs):
        DegenFlowStageOutput.__init__(self, **kwargs)
        self._energy = Float(kwargs.get('energy', None))

    def getEnergy(self):
        return self._energy.get()

    def getSolution(self):
        return self.getField('u')

    def getFlux(self):
        return self.getField('sigma')


class DualSolutionFile(DegenFlowStageOutput):
    """Minimal flux sigmaBar of the dual problem, div sigmaBar = f"""
    _stage = 'dual'

    def __init__(self, **kwargs):
        DegenFlowStageOutput.__init__(self, **kwargs)
        self._objective = Float(kwargs.get('objective', None))
        self._converged = Boolean(kwargs.get('converged', None))

    def getObjective(self):
        return self._objective.get()

    def isConverged(self):
        return self._converged.get()

    def getFlux(self):
        return self.getField('sigma_bar')


class GapCertificate(DegenFlowStageOutput):
    """Primal energy, dual objective and their sum for a primal/dual pair"""
    _stage = 'gap'

    def __init__(self, **kwargs):
        DegenFlowStageOutput.__init__(self, **kwargs)
        self._gap = Float(kwargs.get('gap', None))
        self._relativeGap = Float(kwargs.get('relativeGap', None))

    def getGap(self):
        return self._gap.get()

    def getRelativeGap(self):
        return self._relativeGap.get()


class ContinuityReportFile(DegenFlowStageOutput):
    """Scale by scale continuity diagnostics of the truncated gradient"""
    _stage = 'diagnose'

    def __init__(self, **kwargs):
        DegenFlowStageOutput.__init__(self, **kwargs)
        self._centerX = Float(kwargs.get('centerX', None))
        self._centerY = Float(kwargs.get('centerY', None))
        self._radius = Float(kwargs.get('radius', None))

    def getCenter(self):
        return self._centerX.get(), self._centerY.get()

    def getRadius(self):
        return self._radius.get()

    def getReport(self):
        return readJson(self.getStageFile('report.json'))


class TrafficPlanFile(DegenFlowStageOutput):
    """Curves realising the minimal flux, their traffic intensity and the equilibrium audit"""
    _stage = 'traffic'

    def __init__(self, **kwargs):
        DegenFlowStageOutput.__init__(self, **kwargs)
        self._numberOfCurves = Integer(kwargs.get('numberOfCurves', None))
        self._auditPassed = Boolean(kwargs.get('auditPassed', None))

    def getNumberOfCurves(self):
        return self._numberOfCurves.get()

    def auditPassed(self):
        return self._auditPassed.get()

    def getCurvesFile(self):
        return self.getStageFile('curves.csv')

    def getAudit(self):
        auditFile = self.getStageFile('audit.json')
        return readJson(auditFile) if os.path.exists(auditFile) else None
