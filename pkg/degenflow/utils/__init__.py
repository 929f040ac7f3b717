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

from .errors import *
from .grid import Grid2D, ScalarField, VectorField, CornerField, gradient, divergence
from .io import readField, writeField, readJson, writeJson, exportCsv
from .potentials import PotentialSpec
from .primal import PrimalParams, PrimalSolution, solvePrimal
from .dual import DualParams, DualSolution, solveDual, dualityGap
from .regularity import DiagnosticsConfig, continuityReport, diagnosticCenter
from .sources import builtinSources, fileSource
from .traffic import TraceParams, AuditParams, traceCurves, depositIntensity, wardropAudit, geodesicDistance
from .experiment import ExperimentConfig, runExperiment
