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
Analytic sources evaluated at cell centers and made mean-zero, plus sources read
from field files.
"""

# General imports
import logging
from dataclasses import dataclass, field

import numpy as np

# Plugin imports
from ..constants import TWO_BLOCKS, CHECKER, GAUSSIAN_DIPOLE, ANNULAR_RING, BUILTIN_SOURCES, SMOOTH, \
    PIECEWISE, FROM_FILE, SCALAR
from .errors import UnknownSource, ConfigInvalid
from .grid import Grid2D, ScalarField
from .io import readField

logger = logging.getLogger(__name__)

DEFAULT_PARAMS = {
    TWO_BLOCKS: {'amplitude': 1.0},
    CHECKER: {'amplitude': 1.0},
    GAUSSIAN_DIPOLE: {'amplitude': 1.0, 'width': 0.1, 'separation': 0.4, 'weights': [1.0, 1.0]},
    ANNULAR_RING: {'amplitude': 1.0, 'inner': 0.15, 'ring': [0.3, 0.4]},
}


@dataclass
class SourceField:
    """ Mean-zero source with the amount removed and its smoothness class. """
    field: ScalarField
    name: str
    smoothness: str
    meanRemoved: float = 0.0
    params: dict = field(default_factory=dict)

    def toSummary(self) -> dict:
        return {'name': self.name, 'smoothness': self.smoothness, 'mean_removed': self.meanRemoved,
                'params': self.params, 'mass_plus': float(np.sum(np.maximum(self.field.values, 0))
                                                          * self.field.grid.cellArea)}


def _meanZero(values: np.ndarray):
    mean = float(np.mean(values))
    return values - mean, mean


def checkSourceParams(name: str, params: dict, g: Grid2D) -> dict:
    merged = dict(DEFAULT_PARAMS[name])
    unknown = set(params) - set(merged)
    if unknown:
        raise ConfigInvalid([f'source.params.{k} is not a parameter of {name}' for k in sorted(unknown)])
    merged.update(params)
    errors = []
    if not merged['amplitude'] >= 0:
        errors.append('source.params.amplitude must be >= 0')
    half = 0.5 * min(g.lx, g.ly)
    if name == GAUSSIAN_DIPOLE:
        if not 0 < merged['width'] <= half:
            errors.append(f'source.params.width must lie in (0, {half:g}]')
        if not 0 < merged['separation'] < g.lx:
            errors.append(f'source.params.separation must lie in (0, {g.lx:g})')
        if len(merged['weights']) != 2 or min(merged['weights']) <= 0:
            errors.append('source.params.weights must be two positive numbers')
    elif name == ANNULAR_RING:
        r1, (r2, r3) = merged['inner'], merged['ring']
        if not 0 < r1 < r2 < r3 <= half:
            errors.append(f'source.params need 0 < inner < ring[0] < ring[1] <= {half:g}')
    if errors:
        raise ConfigInvalid(errors)
    return merged


def builtinSources(name: str, g: Grid2D, params: dict = None) -> SourceField:
    """
    Evaluates a named source at the cell centers and subtracts its mean:
    two-blocks (+a left half, -a right half), four-quadrant-checker (+a on the
    diagonal quadrants), gaussian-dipole (two opposite Gaussian bumps on the
    horizontal midline) and annular-ring (+a on a central disk balanced by a ring).
    """
    if name not in BUILTIN_SOURCES:
        raise UnknownSource(f'Unknown source {name!r}, expected one of {BUILTIN_SOURCES}', name=name)
    params = checkSourceParams(name, params or {}, g)
    X, Y = g.centers()
    a = float(params['amplitude'])
    cx, cy = 0.5 * g.lx, 0.5 * g.ly
    smoothness = PIECEWISE
    if name == TWO_BLOCKS:
        values = np.where(X < cx, a, -a)
    elif name == CHECKER:
        values = np.where((X < cx) == (Y < cy), a, -a)
    elif name == GAUSSIAN_DIPOLE:
        s, d = params['width'], 0.5 * params['separation']
        w1, w2 = params['weights']
        bump = lambda x0: np.exp(-((X - x0) ** 2 + (Y - cy) ** 2) / (2.0 * s ** 2)) / (2.0 * np.pi * s ** 2)
        values = a * (w1 * bump(cx - d) - w2 * bump(cx + d))
        smoothness = SMOOTH
    else:
        dist = np.hypot(X - cx, Y - cy)
        disk = dist <= params['inner']
        ring = (dist >= params['ring'][0]) & (dist <= params['ring'][1])
        if not disk.any() or not ring.any():
            raise ConfigInvalid(['source.params: annular ring is not resolved by the grid'])
        values = np.where(disk, a, 0.0) - np.where(ring, a * disk.sum() / ring.sum(), 0.0)
    values, mean = _meanZero(values.astype(float))
    logger.info('Source %s on %dx%d: removed mean %.3e', name, g.nx, g.ny, mean)
    return SourceField(field=ScalarField(g, values), name=name, smoothness=smoothness, meanRemoved=mean,
                       params=params)


def fileSource(path: str) -> SourceField:
    field_ = readField(path)
    if not isinstance(field_, ScalarField):
        raise ConfigInvalid([f'source.file: {path} does not hold a {SCALAR} field'])
    values, mean = _meanZero(np.array(field_.values))
    return SourceField(field=ScalarField(field_.grid, values), name=path, smoothness=FROM_FILE, meanRemoved=mean)
