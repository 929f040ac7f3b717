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

"""
This wizard locates the ball center of the regularity diagnostics on the primal
solution: the cell where the excess modulus peaks at least a quarter of the
shortest side away from the boundary. It fills the center and the initial radius.
"""

# Imports
import pyworkflow.wizard as pwizard

from ..protocols import ProtDegenFlowDiagnostics
from ..utils.grid import gradient
from ..utils.regularity import diagnosticCenter


class DiagnosticCenterWizard(pwizard.Wizard):
    """Fill center and radius with the automatic choice for the input primal solution"""
    _targets = [(ProtDegenFlowDiagnostics, ['centerX', 'centerY', 'radius'])]

    def show(self, form, *params):
        protocol = form.protocol
        primal = protocol.inputPrimal.get()
        if primal is None:
            form.showError('Select a primal solution first.')
            return
        g = primal.getGrid()
        (cx, cy), radius = diagnosticCenter(g, gradient(g, primal.getSolution()))
        form.setVar('centerX', round(cx, 6))
        form.setVar('centerY', round(cy, 6))
        form.setVar('radius', round(radius, 6))