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

# Scipion em imports
from pyworkflow.protocol.params import PointerParam, FloatParam, IntParam, BooleanParam, LEVEL_ADVANCED
from pyworkflow.utils import Message

# Plugin imports
from .protocol_base import ProtDegenFlowBase
from ..constants import STAGE_DUAL, DUAL_TOL, DUAL_MAXITER, DUAL_STEP
from ..objects import DualSolutionFile

OUTPUTATTRIBUTE = 'outputDual'


class ProtDegenFlowDual(ProtDegenFlowBase):
    """
    Computes the minimal flux sigmaBar of the dual problem: minimize the conjugate
    potential of sigma subject to div sigma = f, by Douglas-Rachford splitting.
    """
    _label = 'dual solve'
    _stage = STAGE_DUAL
    _possibleOutputs = {OUTPUTATTRIBUTE: DualSolutionFile}

    def _defineParams(self, form):
        form.addSection(label=Message.LABEL_INPUT)
        form.addParam('inputSource', PointerParam, pointerClass='DegenFlowSource', label='Input source: ')
        self._definePotentialParams(form)

        form.addSection(label='Solver')
        form.addParam('tol', FloatParam, default=DUAL_TOL, label='Tolerance: ',
                      help='Weighted change of the iterate below which the splitting stops.')
        form.addParam('maxIter', IntParam, default=DUAL_MAXITER, label='Maximum iterations: ')
        form.addParam('step', FloatParam, default=DUAL_STEP, label='Splitting step: ', expertLevel=LEVEL_ADVANCED)
        form.addParam('adaptive', BooleanParam, default=False, label='Balance residuals: ',
                      expertLevel=LEVEL_ADVANCED,
                      help='Rescale the step when primal and dual residuals drift apart.')
        form.addParam('allowIncomplete', BooleanParam, default=False, label='Keep unconverged iterate: ',
                      expertLevel=LEVEL_ADVANCED,
                      help='Register the last iterate instead of failing at the iteration cap.')
        self._defineThreadsSection(form)

    # --------------------------- INFO functions --------------------
    def _citations(self):
        return ['LionsMercier1979']

    # --------------------------- Utils functions --------------------
    def buildConfig(self):
        source = self.inputSource.get()
        config = self.baseConfig(source.getFileName(), source.getGridDict(), self.getPotentialDict())
        config['dual'] = {'tol': self.tol.get(), 'max_iter': self.maxIter.get(), 'step': self.step.get(),
                          'adaptive': self.adaptive.get(), 'allow_incomplete': self.allowIncomplete.get()}
        return config
