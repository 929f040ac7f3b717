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
from pyworkflow.utils import Message, redStr

# Plugin imports
from .protocol_base import ProtDegenFlowBase
from ..constants import STAGE_TRAFFIC, STAGE_DUAL, TRACE_DT, KAPPA_REL, MAX_REFINEMENTS, AUDIT_SLACK, \
    AUDIT_PASS_FRACTION, AUDIT_SAMPLES
from ..objects import TrafficPlanFile

OUTPUTATTRIBUTE = 'outputTraffic'


class ProtDegenFlowTraffic(ProtDegenFlowBase):
    """
    Builds a traffic plan from a minimal flux: particles seeded on the positive part of
    the source follow sigmaBar divided by the interpolated density until they reach the
    negative part. The curves are deposited into a traffic intensity and, optionally,
    audited against the equilibrium condition that every used path is a geodesic for
    the congestion metric.
    """
    _label = 'traffic plan'
    _stage = STAGE_TRAFFIC
    _possibleOutputs = {OUTPUTATTRIBUTE: TrafficPlanFile}

    def _defineParams(self, form):
        form.addSection(label=Message.LABEL_INPUT)
        form.addParam('inputDual', PointerParam, pointerClass='DualSolutionFile', label='Minimal flux: ')
        form.addParam('dt', FloatParam, default=TRACE_DT, label='Time step: ',
                      help='Step of the fourth order Runge-Kutta integration over t in [0, 1].')
        form.addParam('maxRefinements', IntParam, default=MAX_REFINEMENTS, label='Step halvings: ',
                      expertLevel=LEVEL_ADVANCED,
                      help='Times a step longer than one cell is halved before the particle goes into transit.')
        form.addParam('kappaRel', FloatParam, default=KAPPA_REL, label='Relative density floor: ',
                      expertLevel=LEVEL_ADVANCED)

        form.addSection(label='Audit')
        form.addParam('runAudit', BooleanParam, default=True, label='Run equilibrium audit: ')
        form.addParam('slack', FloatParam, default=AUDIT_SLACK, label='Cost slack: ', condition='runAudit')
        form.addParam('passFraction', FloatParam, default=AUDIT_PASS_FRACTION, label='Pass fraction: ',
                      condition='runAudit', help='Mass fraction of curves that must be near geodesic.')
        form.addParam('samples', IntParam, default=AUDIT_SAMPLES, label='Audited curves: ', condition='runAudit')
        form.addParam('seed', IntParam, default=0, label='Sampling seed: ', condition='runAudit',
                      expertLevel=LEVEL_ADVANCED)
        form.addParam('controlCurve', BooleanParam, default=False, label='Add control curve: ',
                      condition='runAudit', expertLevel=LEVEL_ADVANCED,
                      help='Adds a weightless zig-zag curve that the audit must flag.')
        self._defineThreadsSection(form)

    # --------------------------- INFO functions --------------------
    def _validate(self):
        errors = []
        if self.runAudit.get() and not 0 < self.passFraction.get() <= 1:
            errors.append('The pass fraction must lie in (0, 1].')
        return errors or ProtDegenFlowBase._validate(self)

    def _summary(self):
        summary = []
        if self.hasAttribute(OUTPUTATTRIBUTE):
            data = self.getStageSummary()
            summary.append('{} curves, truncated weight {:.3e}, terminal error {:.3e}'.format(
                data['curves'], data['truncated_weight'], data['terminal_error']))
            if data.get('pass_fraction') is not None:
                line = 'Equilibrium audit {} with pass fraction {:.3f}'.format(
                    'passed' if data['audit_passed'] else 'failed', data['pass_fraction'])
                summary.append(line if data['audit_passed'] else redStr(line))
        return summary

    def _citations(self):
        return ['Wardrop1952', 'Sethian1996']

    # --------------------------- Utils functions --------------------
    def buildConfig(self):
        dual = self.inputDual.get()
        dualConfig = dual.getConfig()
        config = self.baseConfig(dual.getSourceFile(), dualConfig['grid'], dualConfig.get('potential', {}),
                                 artifacts={STAGE_DUAL: dual.getStageDir()})
        config['traffic'] = {'trace': {'dt': self.dt.get(), 'kappa_rel': self.kappaRel.get(),
                                       'max_refinements': self.maxRefinements.get()},
                             'audit': {'slack': self.slack.get(), 'pass_fraction': self.passFraction.get(),
                                       'samples': self.samples.get(), 'seed': self.seed.get()},
                             'run_audit': self.runAudit.get(), 'control_curve': self.controlCurve.get()}
        return config
