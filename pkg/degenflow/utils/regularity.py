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
Measurements on discrete solutions: truncations of the gradient above the dead
zone, oscillation decay over nested balls, annulus Dirichlet energies, the three
alternatives per scale, logarithmic modulus fits, the De Giorgi recursion and
moduli of continuity of compositions g(grad u).
"""

# General imports
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

# Plugin imports
from ..constants import EPS0, DECAY_FACTOR, F_SURPLUS, ENERGY_CONST, DELTA_LIST, DIRECTION_COUNT, FLOOR_CELLS, \
    RECURSION_TOL, SMOOTH, unitDirections
from .errors import EmptyRegion, RegionOutOfDomain, UnresolvedScales, DegenerateFit, NotVanishingOnBall
from .grid import Grid2D, ScalarField, VectorField, checkGrid, ballRegion, annulusRegion, ballFits
from .potentials import PotentialSpec, evalForce, evalHessian, gammaDelta

logger = logging.getLogger(__name__)

# Modulus ladder in units of the largest spacing
MODULUS_RADII = (1, 2, 3, 4, 6, 8, 12, 16)


@dataclass(frozen=True)
class DiagnosticsConfig:
    eps0: float = EPS0
    decayFactor: float = DECAY_FACTOR
    # Integrability surplus of f; beta = surplus / (2 + surplus)
    fSurplus: float = F_SURPLUS
    energyConst: float = ENERGY_CONST
    deltaList: Tuple[float, ...] = tuple(DELTA_LIST)
    directionCount: int = DIRECTION_COUNT
    floorCells: int = FLOOR_CELLS
    margin: int = 2

    def __post_init__(self):
        object.__setattr__(self, 'deltaList', tuple(float(d) for d in self.deltaList))
        if not 0 < self.eps0 < 1:
            raise ValueError(f'eps0 must lie in (0, 1), got {self.eps0}')
        if not 0 < self.decayFactor < 1:
            raise ValueError(f'Decay factor must lie in (0, 1), got {self.decayFactor}')
        if not self.fSurplus > 0 or not self.energyConst > 0:
            raise ValueError('Integrability surplus and energy constant must be > 0')
        deltas = self.deltaList
        if not deltas or deltas[-1] <= 0 or any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError(f'delta list must decrease strictly and stay positive, got {deltas}')
        if self.directionCount < 8:
            raise ValueError(f'At least 8 directions are needed, got {self.directionCount}')

    @property
    def beta(self) -> float:
        return self.fSurplus / (2.0 + self.fSurplus)

    @classmethod
    def fromDict(cls, data: dict) -> 'DiagnosticsConfig':
        return cls(eps0=float(data.get('eps0', EPS0)), decayFactor=float(data.get('decay_factor', DECAY_FACTOR)),
                   fSurplus=float(data.get('f_surplus', F_SURPLUS)),
                   energyConst=float(data.get('energy_const', ENERGY_CONST)),
                   deltaList=tuple(data.get('delta_list', DELTA_LIST)),
                   directionCount=int(data.get('direction_count', DIRECTION_COUNT)),
                   floorCells=int(data.get('floor_cells', FLOOR_CELLS)), margin=int(data.get('margin', 2)))


# --------------------------- Pointwise functionals --------------------
def _unit(e) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-12:
        raise ValueError(f'Direction {e} is not a unit vector')
    return e


def computeTruncation(g: Grid2D, gradu: VectorField, e: Sequence[float], delta: float) -> ScalarField:
    """ (grad u . e - (1 + delta))_+ at cell centers. """
    checkGrid(g, gradu.grid)
    if delta < 0:
        raise ValueError(f'delta must be >= 0, got {delta}')
    return ScalarField(g, np.maximum(gradu.centered() @ _unit(e) - (1.0 + delta), 0.0))


def fluxTruncation(g: Grid2D, spec: PotentialSpec, gradu: VectorField, e: Sequence[float],
                   delta: float) -> ScalarField:
    """ gamma_delta of the flux F(grad u) at cell centers, the same field as computeTruncation. """
    checkGrid(g, gradu.grid)
    return ScalarField(g, gammaDelta(spec, evalForce(spec, gradu.centered()), delta, _unit(e)))


def computeExcessModulus(g: Grid2D, gradu: VectorField, delta: float) -> ScalarField:
    """ (|grad u| - (1 + delta))_+, the supremum over directions of the truncations. """
    checkGrid(g, gradu.grid)
    if delta < 0:
        raise ValueError(f'delta must be >= 0, got {delta}')
    return ScalarField(g, np.maximum(np.linalg.norm(gradu.centered(), axis=-1) - (1.0 + delta), 0.0))


def coefficientField(g: Grid2D, spec: PotentialSpec, gradu: VectorField) -> Tuple[ScalarField, ScalarField]:
    """ Smallest and largest eigenvalue of a(x) = D^2H(grad u(x)) at cell centers. """
    checkGrid(g, gradu.grid)
    eig = np.linalg.eigvalsh(evalHessian(spec, gradu.centered()))
    return ScalarField(g, eig[..., 0]), ScalarField(g, eig[..., -1])


def oscillation(field: ScalarField, region: np.ndarray) -> float:
    values = field.values[region]
    if values.size == 0:
        raise EmptyRegion('Oscillation over an empty region')
    return float(values.max() - values.min())


def dirichletEnergy(g: Grid2D, field: ScalarField, region: np.ndarray) -> float:
    """ Sum over faces with both neighbours in the region of (difference / spacing)^2 cellArea. """
    checkGrid(g, field.grid)
    if not np.any(region):
        raise EmptyRegion('Dirichlet energy over an empty region')
    v = field.values
    inX = region[:, :-1] & region[:, 1:]
    inY = region[:-1, :] & region[1:, :]
    ex = np.sum((np.diff(v, axis=1)[inX] / g.hx) ** 2)
    ey = np.sum((np.diff(v, axis=0)[inY] / g.hy) ** 2)
    return float((ex + ey) * g.cellArea)


# --------------------------- Scales --------------------
@dataclass(frozen=True)
class ScaleRecord:
    n: int
    radius: float
    oscillation: float
    nextOscillation: float
    energy: float
    decay: bool
    energyAlt: bool
    small: bool

    @property
    def none(self) -> bool:
        return not (self.decay or self.energyAlt or self.small)

    def toDict(self) -> dict:
        return {'n': self.n, 'radius': self.radius, 'oscillation': self.oscillation,
                'next_oscillation': self.nextOscillation, 'energy': self.energy, 'decay': self.decay,
                'energy_alt': self.energyAlt, 'small': self.small, 'none': self.none}


@dataclass
class ScaleSlice:
    """ Classification of one field over the nested balls around a center. """
    label: str
    center: Tuple[float, float]
    radii: List[float]
    oscillations: List[float]
    records: List[ScaleRecord]
    delta: Optional[float] = None
    direction: Optional[Tuple[float, float]] = None
    cFit: Optional[float] = None
    residual: Optional[float] = None
    # Field positive on every cell of the coarsest ball
    active: Optional[bool] = None

    @property
    def tallies(self) -> dict:
        return {'j': sum(r.decay for r in self.records), 'h': sum(r.energyAlt for r in self.records),
                'k': sum(r.small for r in self.records), 'none': sum(r.none for r in self.records)}

    def noneScales(self) -> List[int]:
        return [r.n for r in self.records if r.none]

    def toDict(self) -> dict:
        return {'label': self.label, 'center': list(self.center), 'delta': self.delta,
                'direction': None if self.direction is None else list(self.direction),
                'radii': self.radii, 'oscillations': self.oscillations,
                'records': [r.toDict() for r in self.records], 'tallies': self.tallies,
                'none_scales': self.noneScales(), 'c_fit': self.cFit, 'residual': self.residual,
                'active': self.active}


def scaleRadii(g: Grid2D, R0: float, cfg: DiagnosticsConfig) -> List[float]:
    floor = cfg.floorCells * max(g.hx, g.hy)
    radii = []
    r = float(R0)
    while r >= floor:
        radii.append(r)
        r *= cfg.eps0
    return radii


def classifyScales(g: Grid2D, field: ScalarField, center: Sequence[float], R0: float,
                   cfg: DiagnosticsConfig = DiagnosticsConfig(), label: str = 'field') -> ScaleSlice:
    """
    Records, for the nested balls B_n of radius R0 eps0^n, the oscillation M_n, the
    energy of the annulus B_n minus B_{n+1} and which alternative holds: decay
    (M_{n+1} <= decayFactor M_n), energy (E_n >= energyConst M_n^2) or small (M_n <= R_n^beta).
    """
    checkGrid(g, field.grid)
    center = (float(center[0]), float(center[1]))
    if not ballFits(g, center, R0):
        raise RegionOutOfDomain(f'Ball of radius {R0:g} around {center} leaves the domain', center=list(center))
    radii = scaleRadii(g, R0, cfg)
    if len(radii) < 3:
        raise UnresolvedScales(f'Only {len(radii)} scales between {R0:g} and the {cfg.floorCells}-cell floor')
    balls = [ballRegion(g, center, r) for r in radii]
    osc = [oscillation(field, b) for b in balls]
    records = []
    for n in range(len(radii) - 1):
        annulus = annulusRegion(g, center, radii[n + 1], radii[n])
        energy = dirichletEnergy(g, field, annulus)
        records.append(ScaleRecord(n=n, radius=radii[n], oscillation=osc[n], nextOscillation=osc[n + 1],
                                   energy=energy, decay=osc[n + 1] <= cfg.decayFactor * osc[n],
                                   energyAlt=energy >= cfg.energyConst * osc[n] ** 2,
                                   small=osc[n] <= radii[n] ** cfg.beta))
    return ScaleSlice(label=label, center=center, radii=radii, oscillations=osc, records=records)


def fitLogModulus(pairs: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """
    Least squares fit of M = C |ln R|^(-1/2) through the origin.
    Returns C and the relative RMS residual.
    """
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or len(pairs) < 3:
        raise ValueError('At least three (R, M) pairs are needed')
    R, M = pairs[:, 0], pairs[:, 1]
    if np.any(R <= 0) or np.any(R >= 1):
        raise ValueError('Radii must lie in (0, 1)')
    if np.all(R == R[0]):
        raise DegenerateFit('All radii are equal')
    x = np.abs(np.log(R)) ** -0.5
    coeff = np.linalg.lstsq(x[:, None], M, rcond=None)[0]
    cFit = max(float(coeff[0]), 0.0)
    scale = float(np.sqrt(np.mean(M ** 2)))
    residual = float(np.sqrt(np.mean((M - cFit * x) ** 2))) / scale if scale > 0 else 0.0
    return cFit, residual


def fitSlice(piece: ScaleSlice) -> ScaleSlice:
    pairs = [(r, m) for r, m in zip(piece.radii, piece.oscillations) if r < 1]
    if len(pairs) >= 3:
        piece.cFit, piece.residual = fitLogModulus(pairs)
    return piece


# --------------------------- De Giorgi recursion --------------------
def degiorgiThreshold(c: float, b: float, beta: float) -> float:
    """ Largest Y1 for which Y_{n+1} = c b^n Y_n^(1+beta) is guaranteed to vanish. """
    return c ** (-1.0 / beta) * b ** (-(beta + 1.0) / beta ** 2)


def degiorgiRecursion(c: float, b: float, beta: float, Y1: float, nMax: int,
                      tol: float = RECURSION_TOL) -> Tuple[List[float], bool]:
    """
    Iterates Y_{n+1} = c b^n Y_n^(1+beta) for nMax steps starting from Y_1.
    Converged means the last term is below tol * Y1 (or zero); the sequence stops
    early once it overflows.
    """
    if not (c > 0 and b > 0 and beta > 0) or Y1 < 0 or nMax < 2:
        raise ValueError('Recursion needs c, b, beta > 0, Y1 >= 0 and nMax >= 2')
    seq = [float(Y1)]
    y = np.float64(Y1)
    with np.errstate(over='ignore', invalid='ignore'):
        for n in range(1, nMax + 1):
            y = np.float64(c) * np.float64(b) ** n * y ** (1.0 + beta)
            if not np.isfinite(y):
                seq.append(float('inf'))
                return seq, False
            seq.append(float(y))
    last = seq[-1]
    return seq, bool(last == 0.0 or last <= tol * Y1)


# --------------------------- Moduli of continuity --------------------
def interiorMask(g: Grid2D, margin: int) -> np.ndarray:
    mask = np.zeros(g.shape, dtype=bool)
    mask[margin:g.ny - margin, margin:g.nx - margin] = True
    return mask


def modulusOfContinuity(g: Grid2D, field: ScalarField, radii: Sequence[float],
                        mask: Optional[np.ndarray] = None) -> np.ndarray:
    """ omega(r) = max |v(x) - v(y)| over cell pairs in the mask at center distance <= r. """
    checkGrid(g, field.grid)
    v = field.values
    mask = np.ones(g.shape, dtype=bool) if mask is None else mask
    rMax = max(radii)
    mi, mj = int(rMax // g.hx), int(rMax // g.hy)
    offsets = []
    for dj in range(0, mj + 1):
        for di in range(-mi, mi + 1):
            if (dj == 0 and di <= 0):
                continue
            dist = np.hypot(di * g.hx, dj * g.hy)
            if dist <= rMax:
                offsets.append((dist, dj, di))
    offsets.sort()
    best = []
    for dist, dj, di in offsets:
        a = v[:g.ny - dj, max(0, -di):g.nx - max(0, di)]
        b = v[dj:, max(0, di):g.nx + min(0, di)]
        both = mask[:g.ny - dj, max(0, -di):g.nx - max(0, di)] & mask[dj:, max(0, di):g.nx + min(0, di)]
        diff = np.abs(a - b)[both]
        best.append(float(diff.max()) if diff.size else 0.0)
    dists = np.array([o[0] for o in offsets])
    running = np.maximum.accumulate(best) if best else np.zeros(0)
    out = []
    for r in radii:
        k = np.searchsorted(dists, r, side='right')
        out.append(float(running[k - 1]) if k > 0 else 0.0)
    return np.array(out)


def _checkVanishing(gfun: Callable):
    radii = np.linspace(0.0, 1.0, 21)
    angles = np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False)
    R, A = np.meshgrid(radii, angles)
    samples = np.stack([R * np.cos(A), R * np.sin(A)], axis=-1)
    values = np.asarray(gfun(samples), dtype=float)
    if np.any(np.abs(values) > 1e-12):
        raise NotVanishingOnBall(f'g reaches {np.max(np.abs(values)):.3e} inside the unit ball')


def compositionDiagnostic(g: Grid2D, gradu: VectorField, gfun: Callable,
                          cfg: DiagnosticsConfig = DiagnosticsConfig()) -> dict:
    """
    Modulus table of g(grad u) next to the moduli of the excess (|grad u| - 1)_+ and
    of the directional truncations (grad u . e - 1)_+, on the interior cells.
    """
    checkGrid(g, gradu.grid)
    _checkVanishing(gfun)
    h = max(g.hx, g.hy)
    radii = [k * h for k in MODULUS_RADII if k * h <= 0.25 * min(g.lx, g.ly)]
    mask = interiorMask(g, cfg.margin)
    composed = ScalarField(g, np.asarray(gfun(gradu.centered()), dtype=float))
    table = {'radii': radii,
             'composition': modulusOfContinuity(g, composed, radii, mask).tolist(),
             'excess': modulusOfContinuity(g, computeExcessModulus(g, gradu, 0.0), radii, mask).tolist(),
             'truncations': []}
    for e in unitDirections(cfg.directionCount):
        omega = modulusOfContinuity(g, computeTruncation(g, gradu, e, 0.0), radii, mask)
        table['truncations'].append({'direction': e.tolist(), 'modulus': omega.tolist()})
    return table


# --------------------------- Report --------------------
@dataclass
class ContinuityReport:
    center: Tuple[float, float]
    R0: float
    config: DiagnosticsConfig
    slices: List[ScaleSlice] = field(default_factory=list)
    sourceClass: str = SMOOTH
    composition: Optional[dict] = None
    ellipticFraction: Optional[dict] = None
    fluxConsistency: Optional[dict] = None

    def directionSpread(self, delta: float) -> Optional[float]:
        """
        Relative spread (max - min) / max of the fitted constants over the directional
        slices of delta that are active on the whole coarsest ball. None without any.
        """
        values = [s.cFit for s in self.slices if s.direction is not None and s.delta == delta
                  and s.active and s.cFit is not None]
        if not values or max(values) == 0:
            return None
        return (max(values) - min(values)) / max(values)

    def toDict(self) -> dict:
        cfg = self.config
        return {'center': list(self.center), 'R0': self.R0, 'source_class': self.sourceClass,
                'config': {'eps0': cfg.eps0, 'decay_factor': cfg.decayFactor, 'beta': cfg.beta,
                           'energy_const': cfg.energyConst, 'delta_list': list(cfg.deltaList),
                           'direction_count': cfg.directionCount},
                'slices': [s.toDict() for s in self.slices],
                'direction_spread': {str(d): self.directionSpread(d) for d in cfg.deltaList},
                'composition': self.composition, 'elliptic_fraction': self.ellipticFraction,
                'flux_consistency': self.fluxConsistency}

    def csvRows(self) -> List[list]:
        rows = []
        for s in self.slices:
            direction = '' if s.direction is None else f'{s.direction[0]:.6f};{s.direction[1]:.6f}'
            for r in s.records:
                rows.append([s.label, '' if s.delta is None else s.delta, direction, r.n, repr(r.radius),
                             repr(r.oscillation), repr(r.energy), int(r.decay), int(r.energyAlt),
                             int(r.small), int(r.none)])
        return rows


def continuityReport(g: Grid2D, gradu: VectorField, center: Sequence[float], R0: float,
                     cfg: DiagnosticsConfig = DiagnosticsConfig(), sourceClass: str = SMOOTH,
                     spec: Optional[PotentialSpec] = None, gfun: Optional[Callable] = None) -> ContinuityReport:
    report = ContinuityReport(center=(float(center[0]), float(center[1])), R0=float(R0), config=cfg,
                              sourceClass=sourceClass)
    coarsest = ballRegion(g, report.center, R0)
    for delta in cfg.deltaList:
        excess = computeExcessModulus(g, gradu, delta)
        piece = classifyScales(g, excess, center, R0, cfg, label='excess')
        piece.delta, piece.active = delta, bool(np.all(excess.values[coarsest] > 0))
        report.slices.append(fitSlice(piece))
        for e in unitDirections(cfg.directionCount):
            trunc = computeTruncation(g, gradu, e, delta)
            piece = classifyScales(g, trunc, center, R0, cfg, label='direction')
            piece.delta, piece.direction = delta, (float(e[0]), float(e[1]))
            piece.active = bool(np.all(trunc.values[coarsest] > 0))
            report.slices.append(fitSlice(piece))
    if spec is not None:
        lamMin, _ = coefficientField(g, spec, gradu)
        norms = np.linalg.norm(gradu.centered(), axis=-1)
        report.ellipticFraction = {str(d): float(np.mean(lamMin.values[norms >= 1.0 + d] > 0))
                                   if np.any(norms >= 1.0 + d) else None for d in cfg.deltaList}
        report.fluxConsistency = {}
        for delta in cfg.deltaList:
            worst = max(float(np.abs(computeTruncation(g, gradu, e, delta).values -
                                     fluxTruncation(g, spec, gradu, e, delta).values).max())
                        for e in unitDirections(cfg.directionCount))
            report.fluxConsistency[str(delta)] = worst
            if worst > 1e-8:
                logger.warning('Truncation and flux inversion differ by %.3e at delta=%g', worst, delta)
    if gfun is not None:
        report.composition = compositionDiagnostic(g, gradu, gfun, cfg)
    logger.info('Continuity report: %d slices around %s', len(report.slices), report.center)
    return report


def diagnosticCenter(g: Grid2D, gradu: VectorField,
                     margin: Optional[float] = None) -> Tuple[Tuple[float, float], float]:
    """
    Center of the cell with the largest excess |grad u| - 1 among the cells at least
    margin away from the boundary, and that margin as the default outer radius.
    """
    checkGrid(g, gradu.grid)
    margin = 0.25 * min(g.lx, g.ly) if margin is None else margin
    X, Y = g.centers()
    inner = np.minimum(np.minimum(X, g.lx - X), np.minimum(Y, g.ly - Y)) >= margin
    if not inner.any():
        raise RegionOutOfDomain(f'No cell lies {margin:g} away from the boundary')
    excess = np.where(inner, np.linalg.norm(gradu.centered(), axis=-1) - 1.0, -np.inf)
    j, i = np.unravel_index(int(np.argmax(excess)), g.shape)
    return (float(X[j, i]), float(Y[j, i])), margin
