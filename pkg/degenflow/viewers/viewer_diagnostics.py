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
from ..protocols import ProtDegenFlowDiagnostics
from .viewer_fields import plotScalar


class DegenFlowDiagnosticsViewer(pwviewer.ProtocolViewer):
    """ Visualize the scale by scale continuity report """
    _label = 'Viewer regularity diagnostics'
    _targets = [ProtDegenFlowDiagnostics]

    def __init__(self, **args):
        super().__init__(**args)

    def _defineParams(self, form):
        form.addSection(label='Visualization of the continuity report')
        group = form.addGroup('Scales')
        group.addParam('displayOscillation', params.LabelParam, label='Oscillation decay: ',
                       help='Oscillation of the excess modulus against the ball radius, one curve per delta. '
                            'Scales where no alternative holds are marked with crosses.')
        group.addParam('displayModulus', params.LabelParam, label='Moduli of continuity: ',
                       help='Modulus of the flux composition next to the excess and the directional '
                            'truncations.')
        group = form.addGroup('Fields')
        group.addParam('displayExcess', params.LabelParam, label='Excess modulus: ')
        group.addParam('displayEllipticity', params.LabelParam, label='Smallest Hessian eigenvalue: ')

    def _getVisualizeDict(self):
        return {
          'displayOscillation': self._showOscillation,
          'displayModulus': self._showModulus,
          'displayExcess': self._showExcess,
          'displayEllipticity': self._showEllipticity
        }

    def _showOscillation(self, paramName=None):
        report = self.protocol.outputReport.getReport()
        plotter = EmPlotter(windowTitle='Oscillation decay')
        ax = plotter.createSubPlot('Excess oscillation', 'radius', 'oscillation')
        for piece in report['slices']:
            if piece['label'] != 'excess':
                continue
            radii, osc = np.asarray(piece['radii']), np.asarray(piece['oscillations'])
            ax.loglog(radii, np.maximum(osc, 1e-16), marker='o', label='delta = {}'.format(piece['delta']))
            none = [r['n'] for r in piece['records'] if r['none']]
            if none:
                ax.plot(radii[none], np.maximum(osc[none], 1e-16), 'kx', markersize=10)
        ax.legend()
        return [plotter]

    def _showModulus(self, paramName=None):
        table = self.protocol.outputReport.getReport().get('composition')
        if not table:
            return [self.errorMessage('The flux composition diagnostic was not computed.',
                                      title='Missing diagnostic')]
        plotter = EmPlotter(windowTitle='Moduli of continuity')
        ax = plotter.createSubPlot('Moduli of continuity', 'radius', 'modulus')
        radii = table['radii']
        for entry in table['truncations']:
            ax.plot(radii, entry['modulus'], color='0.75', linewidth=0.8)
        ax.plot(radii, table['excess'], 'b-o', label='excess')
        ax.plot(radii, table['composition'], 'r-s', label='flux composition')
        ax.legend()
        return [plotter]

    def _showExcess(self, paramName=None):
        plotter = EmPlotter(windowTitle='Excess modulus')
        ax = plotter.createSubPlot('Excess modulus', 'x', 'y')
        plotScalar(ax, self.protocol.outputReport.getField('excess'), cmap='magma')
        cx, cy = self.protocol.outputReport.getCenter()
        ax.plot([cx], [cy], 'c+', markersize=12)
        return [plotter]

    def _showEllipticity(self, paramName=None):
        plotter = EmPlotter(windowTitle='Ellipticity')
        plotScalar(plotter.createSubPlot('Smallest Hessian eigenvalue', 'x', 'y'),
                   self.protocol.outputReport.getField('lambda_min'))
        return [plotter]
