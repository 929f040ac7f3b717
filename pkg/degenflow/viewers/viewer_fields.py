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
from ..protocols import ProtDegenFlowSource, ProtDegenFlowPrimal, ProtDegenFlowDual
from ..objects import DegenFlowSource
from ..utils.io import readField


def plotScalar(ax, field, cmap='viridis'):
    """ Draws a cell centered field on its physical extent and returns the image """
    g = field.grid
    image = ax.imshow(np.asarray(field.values), origin='lower', extent=[0, g.lx, 0, g.ly], cmap=cmap)
    ax.figure.colorbar(image, ax=ax, shrink=0.8)
    return image


def plotQuiver(ax, field, stride=None):
    g = field.grid
    stride = stride or max(1, max(g.nx, g.ny) // 24)
    X, Y = g.centers()
    values = field.centered()
    ax.quiver(X[::stride, ::stride], Y[::stride, ::stride], values[::stride, ::stride, 0],
              values[::stride, ::stride, 1], color='k')


class DegenFlowFieldsViewer(pwviewer.ProtocolViewer):
    """ Visualize the source, the primal potential u and the fluxes """
    _label = 'Viewer degenflow fields'
    _targets = [ProtDegenFlowSource, ProtDegenFlowPrimal, ProtDegenFlowDual]

    def __init__(self, **args):
        super().__init__(**args)

    def _defineParams(self, form):
        form.addSection(label='Visualization of fields')
        group = form.addGroup('Fields')
        group.addParam('displaySource', params.LabelParam, label='Display source f: ')
        group.addParam('displayPotential', params.LabelParam, label='Display potential u: ',
                       help='Only available for primal solutions.')
        group.addParam('displayFlux', params.LabelParam, label='Display flux: ',
                       help='Flux magnitude with arrows of the flux direction.')

    def _getVisualizeDict(self):
        return {
          'displaySource': self._showSource,
          'displayPotential': self._showPotential,
          'displayFlux': self._showFlux
        }

    def _showSource(self, paramName=None):
        if isinstance(self.protocol, ProtDegenFlowSource):
            field = self.protocol.outputSource.getField()
        else:
            field = readField(self.getOutput().getSourceFile())
        plotter = EmPlotter(windowTitle='Source')
        plotScalar(plotter.createSubPlot('Source f', 'x', 'y'), field, cmap='RdBu_r')
        return [plotter]

    def _showPotential(self, paramName=None):
        if not isinstance(self.protocol, ProtDegenFlowPrimal):
            return [self.errorMessage('Only primal solutions carry a potential.', title='Missing field')]
        plotter = EmPlotter(windowTitle='Potential')
        plotScalar(plotter.createSubPlot('u', 'x', 'y'), self.getOutput().getSolution())
        return [plotter]

    def _showFlux(self, paramName=None):
        if isinstance(self.protocol, ProtDegenFlowSource):
            return [self.errorMessage('A source has no flux.', title='Missing field')]
        flux = self.getOutput().getFlux()
        plotter = EmPlotter(windowTitle='Flux')
        ax = plotter.createSubPlot('Flux magnitude', 'x', 'y')
        plotScalar(ax, flux.magnitude(), cmap='magma')
        plotQuiver(ax, flux)
        return [plotter]

    def getOutput(self):
        if isinstance(self.protocol, ProtDegenFlowPrimal):
            return self.protocol.outputPrimal
        if isinstance(self.protocol, ProtDegenFlowDual):
            return self.protocol.outputDual
        return self.protocol.outputSource


class DegenFlowSourceViewer(pwviewer.Viewer):
    """ Quick look at a source object """
    _label = 'Viewer degenflow source'
    _targets = [DegenFlowSource]
    _environments = [pwviewer.DESKTOP_TKINTER]

    def _visualize(self, obj, **kwargs):
        plotter = EmPlotter(windowTitle=str(obj))
        plotScalar(plotter.createSubPlot(obj.getSourceName(), 'x', 'y'), obj.getField(), cmap='RdBu_r')
        return [plotter]
