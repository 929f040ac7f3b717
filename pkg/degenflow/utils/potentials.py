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
Radial degenerate potentials H(z) = h(|z|) whose Hessian vanishes on the unit ball,
their forces F = grad H, Hessians, Legendre conjugates and proximal maps.

All evaluation functions are vectorized: a point argument is any array whose
last axis has length 2.
"""

# General imports
import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

# Plugin imports
from ..constants import POWER_Q, CUSTOM_TABLE, POTENTIAL_KINDS, WORKING_RADIUS, RADIAL_SAMPLES, \
    FLOOR_SAFETY, PROX_TOL, LEGENDRE_SAMPLES
from .errors import DegenerateKink, NotElliptic, Unsupported, InversionFailed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PotentialSpec:
    """
    Immutable description of a degenerate potential.

    kind 'power_q' is H(z) = (1/q)(|z|-1)_+^q. kind 'custom-table' reads the radial
    force profile phi(r) = |F(z)| at |z| = r from `table` (pairs (r, phi)), which must be
    zero up to r = 1 and nondecreasing. A positive regEps adds (regEps/2)|z|^2.
    """
    kind: str = POWER_Q
    q: float = 2.0
    regEps: float = 0.0
    hessCap: float = 10.0
    table: Optional[Tuple[Tuple[float, float], ...]] = field(default=None, compare=True)

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f'Unknown potential kind "{self.kind}", expected one of {POTENTIAL_KINDS}')
        if not self.q > 1:
            raise ValueError(f'Exponent q must be > 1, got {self.q}')
        if self.regEps < 0:
            raise ValueError(f'Regularization must be >= 0, got {self.regEps}')
        if not self.hessCap > 0:
            raise ValueError(f'Hessian cap must be > 0, got {self.hessCap}')
        if self.kind == CUSTOM_TABLE:
            self._checkTable()

    def _checkTable(self):
        if not self.table or len(self.table) < 2:
            raise ValueError('A custom-table potential needs at least two (r, phi) samples')
        radii, values = np.asarray(self.table, dtype=float).T
        if radii[0] != 0.0 or np.any(np.diff(radii) <= 0):
            raise ValueError('Table radii must start at 0 and increase strictly')
        if np.any(values[radii <= 1.0] != 0.0):
            raise ValueError('Table profile must vanish on [0, 1]')
        if np.any(np.diff(values) < 0):
            raise ValueError('Table profile must be nondecreasing')

    @property
    def p(self) -> float:
        """ Conjugate exponent, 1/p + 1/q = 1. """
        return self.q / (self.q - 1.0)

    def withRegularization(self, regEps: float) -> 'PotentialSpec':
        return replace(self, regEps=float(regEps))

    def unregularized(self) -> 'PotentialSpec':
        return replace(self, regEps=0.0)

    def hasClosedConjugate(self) -> bool:
        return self.kind == POWER_Q and self.regEps == 0.0

    def toDict(self) -> dict:
        out = {'kind': self.kind, 'q': self.q, 'reg_eps': self.regEps, 'hess_cap': self.hessCap}
        if self.table is not None:
            out['table'] = [list(row) for row in self.table]
        return out

    @classmethod
    def fromDict(cls, data: dict) -> 'PotentialSpec':
        table = data.get('table')
        if table is not None:
            table = tuple((float(r), float(v)) for r, v in table)
        return cls(kind=data.get('kind', POWER_Q), q=float(data.get('q', 2.0)),
                   regEps=float(data.get('reg_eps', 0.0)), hessCap=float(data.get('hess_cap', 10.0)),
                   table=table)


# --------------------------- Radial profile --------------------
def _tableArrays(spec: PotentialSpec):
    radii, values = np.asarray(spec.table, dtype=float).T
    slopes = np.diff(values) / np.diff(radii)
    # Potential at the nodes, exact for a piecewise linear profile
    nodeH = np.concatenate([[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(radii))])
    return radii, values, slopes, nodeH


def _tableSegment(spec: PotentialSpec, r: np.ndarray):
    radii, values, slopes, nodeH = _tableArrays(spec)
    idx = np.clip(np.searchsorted(radii, r, side='right') - 1, 0, len(slopes) - 1)
    return radii[idx], values[idx], slopes[idx], nodeH[idx]


def radialForce(spec: PotentialSpec, r) -> np.ndarray:
    """ Unregularized force magnitude phi(r) = h'(r). """
    r = np.asarray(r, dtype=float)
    if spec.kind == POWER_Q:
        return np.maximum(r - 1.0, 0.0) ** (spec.q - 1.0)
    r0, v0, s0, _ = _tableSegment(spec, r)
    return v0 + s0 * (r - r0)


def radialStiffness(spec: PotentialSpec, r) -> np.ndarray:
    """ Unregularized phi'(r), the Hessian eigenvalue along z. """
    r = np.asarray(r, dtype=float)
    if spec.kind == POWER_Q:
        excess = np.maximum(r - 1.0, 0.0)
        with np.errstate(divide='ignore'):
            slope = (spec.q - 1.0) * excess ** (spec.q - 2.0)
        return np.where(r > 1.0, slope, 0.0)
    return _tableSegment(spec, r)[2]


def radialPotential(spec: PotentialSpec, r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if spec.kind == POWER_Q:
        return np.maximum(r - 1.0, 0.0) ** spec.q / spec.q
    r0, v0, s0, h0 = _tableSegment(spec, r)
    dr = r - r0
    return h0 + v0 * dr + 0.5 * s0 * dr ** 2


# --------------------------- Pointwise evaluation --------------------
def _norms(z):
    z = np.asarray(z, dtype=float)
    return z, np.linalg.norm(z, axis=-1)


def evalPotential(spec: PotentialSpec, z) -> np.ndarray:
    z, r = _norms(z)
    return radialPotential(spec, r) + 0.5 * spec.regEps * r ** 2


def evalForce(spec: PotentialSpec, z) -> np.ndarray:
    """ F(z) = phi(|z|) z/|z| + regEps z, with F(0) = 0. """
    z, r = _norms(z)
    scale = np.divide(radialForce(spec, r), r, out=np.zeros_like(r), where=r > 0)
    return (scale + spec.regEps)[..., None] * z


def evalHessian(spec: PotentialSpec, z) -> np.ndarray:
    """
    D^2 H(z) = phi'(r) zz^T/r^2 + phi(r)/r (I - zz^T/r^2) + regEps I, shape (..., 2, 2).
    """
    z, r = _norms(z)
    if spec.kind == POWER_Q and spec.q < 2 and spec.regEps == 0 and np.any(r == 1.0):
        raise DegenerateKink(f'Hessian of H_(q) with q={spec.q} is undefined on |z| = 1')
    safe = np.where(r > 0, r, 1.0)
    unit = np.where((r > 0)[..., None], z / safe[..., None], 0.0)
    normal = radialStiffness(spec, r)
    tangential = np.divide(radialForce(spec, r), r, out=np.zeros_like(r), where=r > 0)
    outer = unit[..., :, None] * unit[..., None, :]
    eye = np.broadcast_to(np.eye(2), outer.shape)
    return normal[..., None, None] * outer + tangential[..., None, None] * (eye - outer) + \
        spec.regEps * eye


def _radialSample(delta: float, radius: float) -> np.ndarray:
    lower = 1.0 + delta
    return np.linspace(lower, max(radius, lower), RADIAL_SAMPLES)


def ellipticityFloor(spec: PotentialSpec, delta: float, radius: float = WORKING_RADIUS) -> float:
    """
    Certified lower bound c_delta of the smallest Hessian eigenvalue on
    {1 + delta <= |z| <= radius}.
    """
    if not delta > 0:
        raise ValueError(f'delta must be > 0, got {delta}')
    r = _radialSample(delta, radius)
    smallest = np.minimum(radialStiffness(spec, r), radialForce(spec, r) / r) + spec.regEps
    floor = float(np.min(smallest))
    if floor <= 0:
        raise NotElliptic(f'Sampled Hessian floor {floor:g} is not positive for delta={delta}', delta=delta)
    return floor * FLOOR_SAFETY


def hessianBound(spec: PotentialSpec, radius: float = WORKING_RADIUS) -> float:
    """ Largest Hessian eigenvalue sampled on |z| <= radius, the upper constant of the sandwich. """
    r = np.linspace(0.0, radius, RADIAL_SAMPLES)[1:]
    largest = np.maximum(radialStiffness(spec, r), radialForce(spec, r) / r) + spec.regEps
    return float(np.max(largest))


def workingRadius(maxGradient: float) -> float:
    return max(WORKING_RADIUS, 2.0 * float(maxGradient))


# --------------------------- Conjugate and prox --------------------
def evalConjugate(spec: PotentialSpec, sigma, strict: bool = False) -> np.ndarray:
    """
    H*(sigma) = |sigma| + (1/p)|sigma|^p for the pure power potential. Other
    potentials fall back to the numerical transform unless strict is set.
    """
    _, s = _norms(sigma)
    if spec.hasClosedConjugate():
        return s + s ** spec.p / spec.p
    if strict:
        raise Unsupported(f'No closed-form conjugate for {spec.kind} with reg_eps={spec.regEps}')
    logger.warning('Using the numerical Legendre transform for a %s potential', spec.kind)
    return numericalConjugate(spec, sigma)


def numericalConjugate(spec: PotentialSpec, sigma, rMax: Optional[float] = None) -> np.ndarray:
    """ sup_z (z.sigma - H(z)), reduced to a radial search and refined per sample. """
    _, s = _norms(sigma)
    flat = np.atleast_1d(s).ravel()
    if rMax is None:
        rMax = 1.5 * float(np.max(invertRadial(spec, flat), initial=1.0)) + 1.0
    grid = np.linspace(0.0, rMax, LEGENDRE_SAMPLES)
    hGrid = radialPotential(spec, grid) + 0.5 * spec.regEps * grid ** 2
    step = grid[1] - grid[0]
    values = np.empty_like(flat)
    for i, si in enumerate(flat):
        k = int(np.argmax(grid * si - hGrid))
        best = grid[k] * si - hGrid[k]
        lo, hi = max(0.0, grid[k] - step), min(rMax, grid[k] + step)
        res = minimize_scalar(lambda t: -(t * si - radialPotential(spec, t) - 0.5 * spec.regEps * t ** 2),
                              bounds=(lo, hi), method='bounded', options={'xatol': 1e-12})
        values[i] = max(best, -float(res.fun))
    return values.reshape(np.shape(s))


def proxConjugate(spec: PotentialSpec, sigma0, tau: float) -> np.ndarray:
    """
    argmin_sigma 1/2|sigma - sigma0|^2 + tau (|sigma| + |sigma|^p / p).

    The minimizer is radial, s* sigma0/|sigma0|, and vanishes when |sigma0| <= tau;
    otherwise s* is the root of s - s0 + tau (1 + s^(p-1)) found by bisection.
    """
    if not tau > 0:
        raise ValueError(f'Prox step must be > 0, got {tau}')
    if not spec.hasClosedConjugate():
        raise Unsupported('The proximal map is only available for the unregularized power potential')
    sigma0, s0 = _norms(sigma0)
    p = spec.p
    lo = np.zeros_like(s0)
    hi = np.maximum(s0 - tau, 0.0)
    for _ in range(200):
        if np.all(hi - lo <= PROX_TOL):
            break
        mid = 0.5 * (lo + hi)
        positive = mid - s0 + tau * (1.0 + mid ** (p - 1.0)) > 0
        hi = np.where(positive, mid, hi)
        lo = np.where(positive, lo, mid)
    star = np.where(s0 > tau, 0.5 * (lo + hi), 0.0)
    scale = np.divide(star, s0, out=np.zeros_like(s0), where=s0 > 0)
    return scale[..., None] * sigma0


# --------------------------- Force inversion --------------------
def invertRadial(spec: PotentialSpec, a) -> np.ndarray:
    """ Radius r with phi(r) + regEps r = a (smallest such r for a = 0). """
    a = np.asarray(a, dtype=float)
    if spec.kind == POWER_Q and spec.regEps == 0:
        return np.where(a > 0, 1.0 + a ** (1.0 / (spec.q - 1.0)), 0.0)

    def profile(r):
        return radialForce(spec, r) + spec.regEps * r

    hi = np.full(a.shape, 2.0)
    for _ in range(64):
        short = profile(hi) < a
        if not np.any(short):
            break
        hi = np.where(short, 2.0 * hi, hi)
    else:
        raise InversionFailed('Force profile does not reach the requested magnitude')
    lo = np.zeros_like(hi)
    for _ in range(200):
        if np.all(hi - lo <= 1e-13 * np.maximum(hi, 1.0)):
            break
        mid = 0.5 * (lo + hi)
        above = profile(mid) >= a
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return np.where(a > 0, hi, 0.0)


def invertForce(spec: PotentialSpec, a) -> np.ndarray:
    """ A gradient z with F(z) = a; the origin is returned for a = 0. """
    a, norm = _norms(a)
    r = invertRadial(spec, norm)
    scale = np.divide(r, norm, out=np.zeros_like(norm), where=norm > 0)
    return scale[..., None] * a


def gammaDelta(spec: PotentialSpec, a, delta: float, e: Sequence[float] = (1.0, 0.0)) -> np.ndarray:
    """ h_{1+delta}(z.e) with F(z) = a. Lipschitz in a with constant 1/c_delta. """
    if not delta > 0:
        raise ValueError(f'delta must be > 0, got {delta}')
    z = invertForce(spec, a)
    return np.maximum(z @ np.asarray(e, dtype=float) - (1.0 + delta), 0.0)
