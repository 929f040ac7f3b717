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
from pyworkflow.protocol.params import PointerParam, FloatParam, IntParam, StringParam, BooleanParam, \
    LEVEL_ADVANCED
from pyworkflow.utils import Message

# Plugin imports
from .protocol_base import ProtDegenFlowBase
from ..constants import STAGE_DIAGNOSE, STAGE_PRIMAL, DECAY_FACTOR, F_SURPLUS, ENERGY_CONST, DELTA_LIST, \
    DIRECTION_COUNT, FLOOR_CELLS
from ..objects import ContinuityReportFile

OUTPUTATTRIBUTE = 'outputReport'


class ProtDegenFlowDiagnostics(ProtDegenFlowBase):
    """
    Measures, scale by scale on a shrinking family of balls, whether the truncated
    gradient (grad u - delta e)_+ and the excess modulus (|grad u| - 1 - delta)_+ lose
    oscillation or energy. Fits a logarithmic modulus of continuity per delta and
    evaluates the continuity of the flux through the composition |grad H(grad u)|.
    """
    _label = 'regularity diagnostics'
    _stage = STAGE_DIAGNOSE
    _possibleOutputs = {OUTPUTATTRIBUTE: ContinuityReportFile}

    def _defineParams(self, form):
        form.addSection(label=Message.LABEL_INPUT)
        form.addParam('inputPrimal', PointerParam, pointerClass='PrimalSolutionFile', label='Primal solution: ')
        form.addParam('autoCenter', BooleanParam, default=True, label='Automatic ball center: ',
                      help='Center the balls where the excess modulus peaks away from the boundary.')
        form.addParam('centerX', FloatParam, default=0.5, label='Center x: ', condition='not autoCenter')
        form.addParam('centerY', FloatParam, default=0.5, label='Center y: ', condition='not autoCenter')
        form.addParam('radius', FloatParam, default=0.25, label='Initial radius R0: ', condition='not autoCenter',
                      help='Radius of the largest ball; the ball must fit inside the domain.')

        form.addSection(label='Scales')
        form.addParam('eps0', FloatParam, default=0.5, label='Radius ratio eps0: ',
                      help='Ratio between consecutive radii, in (0, 1). Smaller values resolve fewer scales.')
        form.addParam('decayFactor', FloatParam, default=DECAY_FACTOR, label='Oscillation decay factor: ')
        form.addParam('deltaList', StringParam, default=' '.join('{:g}'.format(d) for d in DELTA_LIST),
                      label='Truncation levels delta: ', help='Strictly decreasing positive values.')
        form.addParam('directionCount', IntParam, default=DIRECTION_COUNT, label='Directions: ',
                      help='Unit directions e used for the truncated gradient, at least 8.')
        form.addParam('composition', BooleanParam, default=True, label='Flux composition diagnostic: ')
        form.addParam('fSurplus', FloatParam, default=F_SURPLUS, label='Integrability surplus: ',
                      expertLevel=LEVEL_ADVANCED)
        form.addParam('energyConst', FloatParam, default=ENERGY_CONST, label='Energy smallness constant: ',
                      expertLevel=LEVEL_ADVANCED)
        form.addParam('floorCells', IntParam, default=FLOOR_CELLS, label='Smallest radius in cells: ',
                      expertLevel=LEVEL_ADVANCED)
        self._defineThreadsSection(form)

    # --------------------------- INFO functions --------------------
    def _summary(self):
        summary = []
        if self.hasAttribute(OUTPUTATTRIBUTE):
            data = self.getStageSummary()
            summary.append('Center ({:.3f}, {:.3f}), R0 = {:.3f}, source {}'.format(
                data['center'][0], data['center'][1], data['R0'], data['source_class']))
            for piece in data['excess']:
                tallies = ', '.join('{} {}'.format(k, v) for k, v in piece['tallies'].items())
                summary.append('delta {}: {}, fitted c = {}'.format(piece['delta'], tallies, piece['c_fit']))
        return summary

    def _citations(self):
        return ['DeGiorgi1957']

    # --------------------------- Utils functions --------------------
    def buildConfig(self):
        primal = self.inputPrimal.get()
        primalConfig = primal.getConfig()
        config = self.baseConfig(primal.getSourceFile(), primalConfig['grid'], primalConfig.get('potential', {}),
                                 artifacts={STAGE_PRIMAL: primal.getStageDir()})
        diagnostics = {'eps0': self.eps0.get(), 'decay_factor': self.decayFactor.get(),
                       'f_surplus': self.fSurplus.get(), 'energy_const': self.energyConst.get(),
                       'delta_list': self.parseFloats(self.deltaList.get()),
                       'direction_count': self.directionCount.get(), 'floor_cells': self.floorCells.get(),
                       'composition': self.composition.get()}
        if not self.autoCenter.get():
            diagnostics.update({'center': [self.centerX.get(), self.centerY.get()], 'radius': self.radius.get()})
        config['diagnostics'] = diagnostics
        return config
