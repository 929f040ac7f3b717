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

import numpy as np

#################################### POTENTIALS ############

POWER_Q, CUSTOM_TABLE = 'power_q', 'custom-table'
POTENTIAL_KINDS = [POWER_Q, CUSTOM_TABLE]

# Working radius used when no gradient range is known
WORKING_RADIUS = 4.0
# Radial samples used to certify Hessian bounds
RADIAL_SAMPLES = 4001
# Multiplicative safety on the sampled Hessian floor
FLOOR_SAFETY = 1.0 - 1e-9
PROX_TOL = 1e-12
LEGENDRE_SAMPLES = 20001

#################################### GRID ############

MIN_CELLS = 4
POISSON_TOL = 1e-10
POISSON_MAXITER = 500

SCALAR, VECTOR, CORNER = 'scalar', 'vector', 'corner'
FIELD_TYPES = [SCALAR, VECTOR, CORNER]
FIELD_EXT = '.dfield'

#################################### SOLVERS ############

EPS_SCHEDULE = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]
PRIMAL_TOL = 1e-9
PRIMAL_MAXITER = 100
ARMIJO_C = 1e-4
ARMIJO_MAXHALVINGS = 40

DUAL_TOL = 1e-9
DUAL_MAXITER = 20000
DUAL_STEP = 1.0
BALANCE_EVERY = 50
BALANCE_RATIO = 10.0

#################################### DIAGNOSTICS ############

EPS0 = 0.3
DECAY_FACTOR = 7.0 / 8.0
F_SURPLUS = 1.0
ENERGY_CONST = 0.01
DELTA_LIST = [0.5, 0.25, 0.1]
DIRECTION_COUNT = 16
FLOOR_CELLS = 4
MODULUS_LADDER = 8
RECURSION_TOL = 1e-6

ALT_DECAY, ALT_ENERGY, ALT_SMALL = 'decay', 'energy', 'small'

SMOOTH, PIECEWISE, FROM_FILE = 'smooth', 'piecewise-constant', 'file'

#################################### TRAFFIC ############

TRACE_DT = 1.0 / 256
KAPPA_REL = 1e-6
SEED_THRESHOLD = 1e-12
MAX_REFINEMENTS = 3
# Transit substeps allowed per coarse step, in units of nx + ny
TRANSIT_CAP_FACTOR = 4
EXACT_RADIUS_CELLS = 8
AUDIT_SLACK = 0.05
AUDIT_PASS_FRACTION = 0.95
AUDIT_SAMPLES = 64

CURVE_FLAG_BOUNDARY = 'boundary'
CURVE_FLAG_TRANSIT = 'transit'
CURVE_FLAG_CLAMPED = 'clamped'
CURVE_FLAG_CONTROL = 'control'

#################################### EXPERIMENTS ############

STAGE_PRIMAL, STAGE_DUAL, STAGE_GAP, STAGE_DIAGNOSE, STAGE_TRAFFIC = \
    'primal', 'dual', 'gap', 'diagnose', 'traffic'
STAGES = [STAGE_PRIMAL, STAGE_DUAL, STAGE_GAP, STAGE_DIAGNOSE, STAGE_TRAFFIC]
STAGE_REQUIRES = {STAGE_PRIMAL: [], STAGE_DUAL: [], STAGE_GAP: [STAGE_PRIMAL, STAGE_DUAL],
                  STAGE_DIAGNOSE: [STAGE_PRIMAL], STAGE_TRAFFIC: [STAGE_DUAL]}

TWO_BLOCKS, CHECKER, GAUSSIAN_DIPOLE, ANNULAR_RING = \
    'two-blocks', 'four-quadrant-checker', 'gaussian-dipole', 'annular-ring'
BUILTIN_SOURCES = [TWO_BLOCKS, CHECKER, GAUSSIAN_DIPOLE, ANNULAR_RING]

MANIFEST_FILE = 'manifest.json'
ERROR_FILE = 'error.json'
SUMMARY_FILE = 'summary.json'
CONFIG_FILE = 'config.json'

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

CURVES_CSV_HEADER = ['curve_id', 't', 'x', 'y', 'weight']
REPORT_CSV_HEADER = ['slice', 'delta', 'direction', 'n', 'radius', 'oscillation', 'energy',
                     'decay', 'energy_alt', 'small', 'none']

#################################### PROTOCOL DICTS ############

SOURCE_DIC = {i: name for i, name in enumerate(BUILTIN_SOURCES)}
POTENTIAL_DIC = {0: POWER_Q, 1: CUSTOM_TABLE}

DEGENFLOW_DIC = {'name': 'degenflow', 'threads': 'DEGENFLOW_THREADS'}


def unitDirections(count: int) -> np.ndarray:
    """ Unit vectors uniformly spread over the circle, e1 first. """
    angles = 2.0 * np.pi * np.arange(count) / count
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)
