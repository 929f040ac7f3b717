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
from pyworkflow.protocol.params import PointerParam, FloatParam, IntParam, StringParam, LEVEL_ADVANCED
from pyworkflow.utils import Message, redStr

# Plugin imports
from .protocol_base import ProtDegenFlowBase
from ..constants import STAGE_PRIMAL, EPS_SCHEDULE, PRIMAL_TOL, PRIMAL_MAXITER
from ..objects import PrimalSolutionFile

OUTPUTATTRIBUTE = 'outputPrimal'


class ProtDegenFlowPrimal(ProtDegenFlowBase):
    """
    Minimizes the degenerate energy of a source field with Neumann boundary conditions.
    A decreasing schedule of quadratic regularizations is followed by an unregularized
    Newton stage; the output holds u, the flux sigma = grad H(grad u) and the energy.
    """
    _label = 'primal solve'
    _stage = STAGE_PRIMAL
    _possibleOutputs = {OUTPUTATTRIBUTE: PrimalSolutionFile}

    def _defineParams(self, form):
        form.addSection(label=Message.LABEL_INPUT)
        form.addParam('inputSource', PointerParam, pointerClass='DegenFlowSource', label='Input source: ',
                      help='Balanced source field f.')
        self._definePotentialParams(form)

        form.addSection(label='Solver')
        form.addParam('tol', FloatParam, default=PRIMAL_TOL, label='Gradient tolerance: ',
                      help='Stop each stage once the energy gradient norm is below this value.')
        form.addParam('maxIter', IntParam, default=PRIMAL_MAXITER, label='Newton iterations per stage: ')
        form.addParam('epsSchedule', StringParam, default=' '.join('{:g}'.format(e) for e in EPS_SCHEDULE),
                      label='Regularization schedule: ', expertLevel=LEVEL_ADVANCED,
                      help='Strictly decreasing positive values of the quadratic regularization.')
        form.addParam('seed', IntParam, default=-1, label='Initial guess seed: ', expertLevel=LEVEL_ADVANCED,
                      help='Random initial guess with this seed, zero initial guess when negative.')
        self._defineThreadsSection(form)

    # --------------------------- INFO functions --------------------
    def _summary(self):
        summary = ProtDegenFlowBase._summary(self)
        if summary and not self.getStageSummary().get('hess_cap_ok', True):
            summary.append(redStr('Warning: the Hessian bound exceeds the configured cap.'))
        return summary

    def _citations(self):
        return ['Beckmann1952']

    # --------------------------- Utils functions --------------------
    def buildConfig(self):
        source = self.inputSource.get()
        config = self.baseConfig(source.getFileName(), source.getGridDict(), self.getPotentialDict())
        config['primal'] = {'tol': self.tol.get(), 'max_iter': self.maxIter.get(),
                            'eps_schedule': self.parseFloats(self.epsSchedule.get())}
        if self.seed.get() >= 0:
            config['primal']['seed'] = self.seed.get()
        return config
