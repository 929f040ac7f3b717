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
from pyworkflow.protocol.params import PointerParam
from pyworkflow.utils import Message

# Plugin imports
from .protocol_base import ProtDegenFlowBase
from ..constants import STAGE_GAP, STAGE_PRIMAL, STAGE_DUAL
from ..objects import GapCertificate

OUTPUTATTRIBUTE = 'outputGap'


class ProtDegenFlowGap(ProtDegenFlowBase):
    """
    Certifies a primal/dual pair: evaluates the primal energy, the dual objective
    and their sum, which vanishes at the optimum and is never negative for a feasible flux.
    """
    _label = 'duality gap'
    _stage = STAGE_GAP
    _possibleOutputs = {OUTPUTATTRIBUTE: GapCertificate}

    def _defineParams(self, form):
        form.addSection(label=Message.LABEL_INPUT)
        form.addParam('inputPrimal', PointerParam, pointerClass='PrimalSolutionFile', label='Primal solution: ')
        form.addParam('inputDual', PointerParam, pointerClass='DualSolutionFile', label='Dual solution: ',
                      help='Must come from the same source, grid and potential as the primal solution.')
        self._defineThreadsSection(form)

    # --------------------------- INFO functions --------------------
    def _validate(self):
        errors = []
        primal, dual = self.inputPrimal.get(), self.inputDual.get()
        primalConfig, dualConfig = primal.getConfig(), dual.getConfig()
        if primalConfig['grid'] != dualConfig['grid']:
            errors.append('Primal and dual solutions live on different grids.')
        if primal.getPotential() != dual.getPotential():
            errors.append('Primal and dual solutions use different potentials.')
        return errors or ProtDegenFlowBase._validate(self)

    # --------------------------- Utils functions --------------------
    def buildConfig(self):
        primal, dual = self.inputPrimal.get(), self.inputDual.get()
        primalConfig = primal.getConfig()
        return self.baseConfig(primal.getSourceFile(), primalConfig['grid'], primalConfig.get('potential', {}),
                               artifacts={STAGE_PRIMAL: primal.getStageDir(), STAGE_DUAL: dual.getStageDir()})
