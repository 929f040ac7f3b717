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
import numpy as np

# Scipion em imports
import pyworkflow.viewer as pwviewer
import pyworkflow.protocol.params as params
from pwem.viewers import EmPlotter

# Plugin imports
from ..protocols import ProtDegenFlowTraffic
from .viewer_fields import plotScalar


def readCurves(curvesFile):
    """ Points of every curve in a curves.csv file, keyed by curve id """
    rows = np.loadtxt(curvesFile, delimiter=',', skiprows=1, ndmin=2)
    curves = {}
    for cid in np.unique(rows[:, 0]).astype(int):
        curves[cid] = rows[rows[:, 0] == cid][:, 2:4]
    return curves


class DegenFlowTrafficViewer(pwviewer.ProtocolViewer):
    """ Visualize the traffic plan and its equilibrium audit """
    _label = 'Viewer traffic plan'
    _targets = [ProtDegenFlowTraffic]

    def __init__(self, **args):
        super().__init__(**args)

    def _defineParams(self, form):
        form.addSection(label='Visualization of the traffic plan')
        group = form.addGroup('Plan')
        group.addParam('displayIntensity', params.LabelParam, label='Traffic intensity and curves: ')
        group.addParam('maxCurves', params.IntParam, default=200, label='Curves drawn: ',
                       help='At most this many curves are drawn over the intensity.')
        group = form.addGroup('Audit')
        group.addParam('displayAudit', params.LabelParam, label='Cost ratios: ',
                       help='Ratio between the cost of each audited curve and the geodesic distance.')

    def _getVisualizeDict(self):
        return {
          'displayIntensity': self._showIntensity,
          'displayAudit': self._showAudit
        }

    def _showIntensity(self, paramName=None):
        output = self.protocol.outputTraffic
        plotter = EmPlotter(windowTitle='Traffic intensity')
        ax = plotter.createSubPlot('Traffic intensity', 'x', 'y')
        plotScalar(ax, output.getField('intensity'), cmap='inferno')
        curves = readCurves(output.getCurvesFile())
        for cid in sorted(curves)[:self.maxCurves.get()]:
            ax.plot(curves[cid][:, 0], curves[cid][:, 1], color='c', linewidth=0.5)
        return [plotter]

    def _showAudit(self, paramName=None):
        audit = self.protocol.outputTraffic.getAudit()
        if not audit:
            return [self.errorMessage('The equilibrium audit was not run.', title='Missing audit')]
        ratios = [e['ratio'] for e in audit['entries'] if not e['control']]
        controls = [e['ratio'] for e in audit['entries'] if e['control']]
        plotter = EmPlotter(windowTitle='Equilibrium audit')
        ax = plotter.createSubPlot('Pass fraction {:.3f}'.format(audit['pass_fraction']),
                                   'path cost / geodesic distance', 'curves')
        ax.hist(ratios, bins=30)
        for ratio in controls:
            ax.axvline(ratio, color='r', linestyle='--')
        ax.axvline(1.0 + self.protocol.slack.get(), color='k')
        return [plotter]
