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
from pwem.protocols import EMProtocol
from pyworkflow.protocol.params import EnumParam, FloatParam, IntParam, PathParam, LEVEL_ADVANCED
from pyworkflow.utils import Message

# Plugin imports
from ..constants import SOURCE_DIC, GAUSSIAN_DIPOLE, ANNULAR_RING, SUMMARY_FILE
from ..objects import DegenFlowSource
from ..utils.grid import Grid2D
from ..utils.io import writeField, writeJson, readJson
from ..utils.sources import builtinSources, fileSource, checkSourceParams
from ..utils.errors import DegenFlowError

OUTPUTATTRIBUTE = 'outputSource'


class ProtDegenFlowSource(EMProtocol):
    """
    Samples a balanced source field f on a rectangular grid. The built-in sources are
    evaluated at cell centers; every source is shifted to zero mean.
    """
    _label = 'source field'
    _possibleOutputs = {OUTPUTATTRIBUTE: DegenFlowSource}

    def _defineParams(self, form):
        form.addSection(label=Message.LABEL_INPUT)
        form.addParam('fromFile', EnumParam, default=0, choices=['Built-in', 'File'], label='Source origin: ',
                      display=EnumParam.DISPLAY_HLIST,
                      help='Built-in analytic sources or a scalar .dfield file.')
        form.addParam('sourceFile', PathParam, label='Source field file: ', condition='fromFile==1',
                      help='Scalar field written by degenflow; its grid is used.')
        form.addParam('sourceName', EnumParam, default=0, choices=list(SOURCE_DIC.values()),
                      label='Built-in source: ', condition='fromFile==0')
        form.addParam('amplitude', FloatParam, default=1.0, label='Amplitude: ', condition='fromFile==0')
        form.addParam('width', FloatParam, default=0.1, label='Bump width: ',
                      condition='fromFile==0 and sourceName==2',
                      help='Standard deviation of the two Gaussian bumps.')
        form.addParam('separation', FloatParam, default=0.4, label='Bump separation: ',
                      condition='fromFile==0 and sourceName==2')
        form.addParam('innerRadius', FloatParam, default=0.15, label='Disk radius: ',
                      condition='fromFile==0 and sourceName==3')
        form.addParam('ringInner', FloatParam, default=0.3, label='Ring inner radius: ',
                      condition='fromFile==0 and sourceName==3')
        form.addParam('ringOuter', FloatParam, default=0.4, label='Ring outer radius: ',
                      condition='fromFile==0 and sourceName==3')

        group = form.addGroup('Grid', condition='fromFile==0')
        group.addParam('nx', IntParam, default=64, label='Cells along x: ')
        group.addParam('ny', IntParam, default=64, label='Cells along y: ')
        group.addParam('lx', FloatParam, default=1.0, label='Length along x: ', expertLevel=LEVEL_ADVANCED)
        group.addParam('ly', FloatParam, default=1.0, label='Length along y: ', expertLevel=LEVEL_ADVANCED)

    # --------------------------- STEPS functions --------------------
    def _insertAllSteps(self):
        self._insertFunctionStep('createSourceStep')
        self._insertFunctionStep('createOutputStep')

    def createSourceStep(self):
        if self.fromFile.get() == 1:
            source = fileSource(os.path.abspath(self.sourceFile.get()))
        else:
            source = builtinSources(self.getSourceName(), self.getGrid(), self.getSourceParams())
        writeField(self.getSourceFile(), source.field)
        writeJson(self._getExtraPath(SUMMARY_FILE), source.toSummary())

    def createOutputStep(self):
        summary = readJson(self._getExtraPath(SUMMARY_FILE))
        g = self.getGrid() if self.fromFile.get() == 0 else fileSource(self.getSourceFile()).field.grid
        output = DegenFlowSource(filename=self.getSourceFile(), sourceName=summary['name'],
                                 nx=g.nx, ny=g.ny, lx=g.lx, ly=g.ly, smoothness=summary['smoothness'],
                                 meanRemoved=summary['mean_removed'])
        self._defineOutputs(**{OUTPUTATTRIBUTE: output})

    # --------------------------- INFO functions --------------------
    def _validate(self):
        errors = []
        if self.fromFile.get() == 1:
            if not os.path.exists(self.sourceFile.get() or ''):
                errors.append('The source file does not exist.')
            return errors
        try:
            checkSourceParams(self.getSourceName(), self.getSourceParams(), self.getGrid())
        except DegenFlowError as e:
            errors += getattr(e, 'errors', [str(e)])
        except ValueError as e:
            errors.append(str(e))
        return errors

    def _summary(self):
        summary = []
        if os.path.exists(self._getExtraPath(SUMMARY_FILE)):
            data = readJson(self._getExtraPath(SUMMARY_FILE))
            summary.append('Source {} ({}), removed mean {:.3e}, positive mass {:.4f}'.format(
                data['name'], data['smoothness'], data['mean_removed'], data['mass_plus']))
        return summary

    # --------------------------- Utils functions --------------------
    def getSourceFile(self):
        return os.path.abspath(self._getExtraPath('source.dfield'))

    def getSourceName(self):
        return SOURCE_DIC[self.sourceName.get()]

    def getGrid(self):
        return Grid2D(nx=self.nx.get(), ny=self.ny.get(), lx=self.lx.get(), ly=self.ly.get())

    def getSourceParams(self):
        name = self.getSourceName()
        params = {'amplitude': self.amplitude.get()}
        if name == GAUSSIAN_DIPOLE:
            params.update({'width': self.width.get(), 'separation': self.separation.get()})
        elif name == ANNULAR_RING:
            params.update({'inner': self.innerRadius.get(), 'ring': [self.ringInner.get(), self.ringOuter.get()]})
        return params
