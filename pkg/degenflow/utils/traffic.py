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
Congested traffic built from an optimal flux: integral curves of
sigma_hat(t, x) = sigma_bar(x) / ((1 - t) f+(x) + t f-(x)) carrying the mass of f+ onto f-,
their deposited traffic intensity and a Wardrop audit against fast marching distances.
"""

# General imports
import csv
import heapq
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

# Plugin imports
from ..constants import TRACE_DT, KAPPA_REL, SEED_THRESHOLD, MAX_REFINEMENTS, TRANSIT_CAP_FACTOR, \
    EXACT_RADIUS_CELLS, AUDIT_SLACK, AUDIT_PASS_FRACTION, AUDIT_SAMPLES, CURVE_FLAG_BOUNDARY, CURVE_FLAG_TRANSIT, \
    CURVE_FLAG_CLAMPED, CURVE_FLAG_CONTROL, CURVES_CSV_HEADER
from .errors import OutOfDomain, InfeasibleFlux, StepTooLarge, EmptyPlan, NonpositiveMetric
from .grid import Grid2D, ScalarField, VectorField, checkGrid, checkCompatible, divergence, toCorners

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TraceParams:
    dt: float = TRACE_DT
    kappaRel: float = KAPPA_REL
    seedThreshold: float = SEED_THRESHOLD
    maxRefinements: int = MAX_REFINEMENTS
    # 0 means TRANSIT_CAP_FACTOR * (nx + ny)
    transitCap: int = 0
    feasibilityTol: float = 1e-6

    def __post_init__(self):
        if not 0 < self.dt <= 0.5:
            raise ValueError(f'Trace step must lie in (0, 0.5], got {self.dt}')
        if not self.kappaRel > 0:
            raise ValueError(f'Density floor must be > 0, got {self.kappaRel}')
        if self.maxRefinements < 0 or self.transitCap < 0:
            raise ValueError('Refinement count and transit cap must be >= 0')

    @classmethod
    def fromDict(cls, data: dict) -> 'TraceParams':
        return cls(dt=float(data.get('dt', TRACE_DT)), kappaRel=float(data.get('kappa_rel', KAPPA_REL)),
                   seedThreshold=float(data.get('seed_threshold', SEED_THRESHOLD)),
                   maxRefinements=int(data.get('max_refinements', MAX_REFINEMENTS)),
                   transitCap=int(data.get('transit_cap', 0)),
                   feasibilityTol=float(data.get('feasibility_tol', 1e-6)))


@dataclass(frozen=True)
class AuditParams:
    slack: float = AUDIT_SLACK
    passFraction: float = AUDIT_PASS_FRACTION
    samples: int = AUDIT_SAMPLES
    seed: int = 0
    # Exponent of the default congestion cost g(i) = 1 + i^(p - 1)
    p: float = 2.0

    @classmethod
    def fromDict(cls, data: dict) -> 'AuditParams':
        return cls(slack=float(data.get('slack', AUDIT_SLACK)),
                   passFraction=float(data.get('pass_fraction', AUDIT_PASS_FRACTION)),
                   samples=int(data.get('samples', AUDIT_SAMPLES)), seed=int(data.get('seed', 0)),
                   p=float(data.get('p', 2.0)))


@dataclass
class TracedCurve:
    cid: int
    startCell: Tuple[int, int]
    weight: float
    times: np.ndarray
    points: np.ndarray
    flags: List[str] = field(default_factory=list)

    @property
    def truncated(self) -> bool:
        return CURVE_FLAG_BOUNDARY in self.flags

    @property
    def isControl(self) -> bool:
        return CURVE_FLAG_CONTROL in self.flags

    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))


@dataclass
class WardropEntry:
    cid: int
    cost: float
    distance: float
    ratio: float
    weight: float
    control: bool = False

    def toDict(self) -> dict:
        return {'curve_id': self.cid, 'path_cost': self.cost, 'geodesic_distance': self.distance,
                'ratio': self.ratio, 'weight': self.weight, 'control': self.control}


@dataclass
class TrafficPlan:
    grid: Grid2D
    curves: List[TracedCurve] = field(default_factory=list)
    intensity: Optional[ScalarField] = None
    terminalError: float = 0.0
    wardrop: List[WardropEntry] = field(default_factory=list)
    passFraction: Optional[float] = None
    auditPassed: Optional[bool] = None

    def totalWeight(self) -> float:
        return float(sum(c.weight for c in self.curves if not c.isControl))

    def truncatedWeight(self) -> float:
        return float(sum(c.weight for c in self.curves if c.truncated and not c.isControl))

    def flagged(self, slack: float = AUDIT_SLACK) -> List[int]:
        return [e.cid for e in self.wardrop if e.ratio > 1.0 + slack]

    def toSummary(self) -> dict:
        counts = {}
        for c in self.curves:
            for flag in c.flags:
                counts[flag] = counts.get(flag, 0) + 1
        return {'curves': len(self.curves), 'total_weight': self.totalWeight(),
                'truncated_weight': self.truncatedWeight(), 'terminal_error': self.terminalError,
                'flags': counts, 'pass_fraction': self.passFraction, 'audit_passed': self.auditPassed,
                'flagged_curves': self.flagged()}

    def auditDict(self) -> dict:
        return {'pass_fraction': self.passFraction, 'passed': self.auditPassed,
                'entries': [e.toDict() for e in self.wardrop]}

    def csvRows(self) -> List[list]:
        rows = []
        for c in self.curves:
            for t, (x, y) in zip(c.times, c.points):
                rows.append([c.cid, repr(float(t)), repr(float(x)), repr(float(y)), repr(c.weight)])
        return rows


def writeCurvesCsv(plan: TrafficPlan, path: str) -> str:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(CURVES_CSV_HEADER)
        writer.writerows(plan.csvRows())
    return path


# --------------------------- Source splitting --------------------
def splitSource(f: ScalarField) -> Tuple[ScalarField, ScalarField]:
    checkCompatible(f.grid, f)
    return ScalarField(f.grid, np.maximum(f.values, 0.0)), ScalarField(f.grid, np.maximum(-f.values, 0.0))


# --------------------------- Interpolated flow --------------------
class FlowField:
    """ Bilinear sigma_bar from its corner co-location and bilinear cell densities with a floor. """

    def __init__(self, g: Grid2D, sigmaBar: VectorField, fplus: ScalarField, fminus: ScalarField, kappa: float):
        for other in (sigmaBar.grid, fplus.grid, fminus.grid):
            checkGrid(g, other)
        if not kappa > 0:
            raise ValueError(f'Density floor must be > 0, got {kappa}')
        self.grid, self.kappa = g, kappa
        corners = toCorners(g, sigmaBar)
        xc, yc = np.linspace(0.0, g.lx, g.nx + 1), np.linspace(0.0, g.ly, g.ny + 1)
        self._sx = RegularGridInterpolator((yc, xc), corners.x)
        self._sy = RegularGridInterpolator((yc, xc), corners.y)
        self._xm = (np.arange(g.nx) + 0.5) * g.hx
        self._ym = (np.arange(g.ny) + 0.5) * g.hy
        self._fp = RegularGridInterpolator((self._ym, self._xm), fplus.values)
        self._fm = RegularGridInterpolator((self._ym, self._xm), fminus.values)

    def clip(self, points: np.ndarray) -> np.ndarray:
        return np.stack([np.clip(points[:, 0], 0.0, self.grid.lx), np.clip(points[:, 1], 0.0, self.grid.ly)], axis=1)

    def velocity(self, points: np.ndarray) -> np.ndarray:
        yx = self.clip(points)[:, ::-1]
        return np.stack([self._sx(yx), self._sy(yx)], axis=1)

    def density(self, t, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        yx = np.stack([np.clip(points[:, 1], self._ym[0], self._ym[-1]),
                       np.clip(points[:, 0], self._xm[0], self._xm[-1])], axis=1)
        rho = (1.0 - t) * self._fp(yx) + t * self._fm(yx)
        clamped = rho < self.kappa
        return np.maximum(rho, self.kappa), clamped

    def __call__(self, t, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        rho, clamped = self.density(t, points)
        return self.velocity(points) / rho[:, None], clamped


def sigmaHat(sigmaBar: VectorField, fplus: ScalarField, fminus: ScalarField, t: float, x: Sequence[float],
             kappa: float) -> np.ndarray:
    g = sigmaBar.grid
    if not 0.0 <= t <= 1.0:
        raise ValueError(f'Time must lie in [0, 1], got {t}')
    if not g.contains(x):
        raise OutOfDomain(f'Point {tuple(x)} lies outside the domain')
    flow = FlowField(g, sigmaBar, fplus, fminus, kappa)
    value, clamped = flow(t, np.asarray([x], dtype=float))
    if clamped[0]:
        logger.debug('Density clamped to %g at %s, t=%g', kappa, tuple(x), t)
    return value[0]


# --------------------------- Tracing --------------------
def _rk4(flow: FlowField, t: float, p: np.ndarray, dt: float):
    k1, c1 = flow(t, p)
    k2, c2 = flow(t + 0.5 * dt, p + 0.5 * dt * k1)
    k3, c3 = flow(t + 0.5 * dt, p + 0.5 * dt * k2)
    k4, c4 = flow(t + dt, p + dt * k3)
    return p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), c1 | c2 | c3 | c4


def _withinCell(g: Grid2D, step: np.ndarray) -> np.ndarray:
    return (np.abs(step[:, 0]) <= g.hx) & (np.abs(step[:, 1]) <= g.hy)


class _Recorder:
    """ Vertex rows (curve, t, x, y) gathered over the whole trace. """

    def __init__(self):
        self.rows = []

    def add(self, pids, t, points):
        pids = np.asarray(pids)
        self.rows.append(np.column_stack([pids, np.broadcast_to(t, pids.shape), points[:, 0], points[:, 1]]))

    def curves(self, n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
        rows = np.concatenate(self.rows)
        rows = rows[np.lexsort((rows[:, 1], rows[:, 0]))]
        bounds = np.searchsorted(rows[:, 0], np.arange(n + 1) - 0.5)
        return [(rows[a:b, 1], rows[a:b, 2:]) for a, b in zip(bounds[:-1], bounds[1:])]


def _transit(flow: FlowField, g: Grid2D, pids: np.ndarray, p: np.ndarray, t0: float, t1: float, cap: int,
             recorder: _Recorder):
    """
    Advances particles through [t0, t1] along the extended field (sigma_bar, rho) in
    substeps of at most half a cell, which follows the same trajectory with time as a
    dependent variable.
    """
    t = np.full(len(p), t0)
    clampedAny = np.zeros(len(p), dtype=bool)
    live = np.ones(len(p), dtype=bool)
    for _ in range(cap):
        idx = np.flatnonzero(live)
        if not idx.size:
            return p, clampedAny
        q, tq = p[idx], t[idx]

        def extended(tt, pts):
            rho, cl = flow.density(tt, pts)
            return flow.velocity(pts), rho, cl

        v, rho, cl = extended(tq, q)
        with np.errstate(divide='ignore'):
            ds = 0.5 * np.minimum(g.hx / np.abs(v[:, 0]), g.hy / np.abs(v[:, 1]))
        ds = np.minimum(ds, (t1 - tq) / rho)
        v2, r2, c2 = extended(tq + 0.5 * ds * rho, q + 0.5 * ds[:, None] * v)
        v3, r3, c3 = extended(tq + 0.5 * ds * r2, q + 0.5 * ds[:, None] * v2)
        v4, r4, c4 = extended(tq + ds * r3, q + ds[:, None] * v3)
        q = flow.clip(q + ds[:, None] / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4))
        tq = np.minimum(tq + ds / 6.0 * (rho + 2.0 * r2 + 2.0 * r3 + r4), t1)
        done = tq >= t1 - 1e-14
        tq[done] = t1
        p[idx], t[idx] = q, tq
        clampedAny[idx] |= cl | c2 | c3 | c4
        inner = ~done
        if np.any(inner):
            recorder.add(pids[idx[inner]], tq[inner], q[inner])
        live[idx[done]] = False
    stuck = pids[live]
    raise StepTooLarge(f'{len(stuck)} curves did not cross the step ending at t={t1:g} within {cap} substeps',
                       curves=stuck.tolist())


def _checkFeasible(g: Grid2D, sigmaBar: VectorField, fplus: ScalarField, fminus: ScalarField, tol: float):
    f = fplus.values - fminus.values
    residual = np.sum(np.abs(divergence(g, sigmaBar).values - f)) * g.cellArea
    scale = max(np.sum(fplus.values + fminus.values) * g.cellArea, 1e-300)
    if residual > tol * scale and residual > 1e-14:
        raise InfeasibleFlux(f'div(sigma) misses f+ - f- by {residual / scale:.3e} (relative L1)',
                             residual=float(residual / scale))


def traceCurves(sigmaBar: VectorField, fplus: ScalarField, fminus: ScalarField,
                params: TraceParams = TraceParams()) -> TrafficPlan:
    """
    One curve per cell with f+ above the seed threshold, started at the cell center with
    weight f+ cellArea and integrated over [0, 1] by fixed step RK4. Steps longer than a
    cell are halved up to maxRefinements times; particles still too fast go through a
    transit and are flagged. Curves reaching the boundary stop there and deposit nothing.
    """
    g = sigmaBar.grid
    if np.any(fplus.values < 0) or np.any(fminus.values < 0):
        raise ValueError('f+ and f- must be nonnegative')
    _checkFeasible(g, sigmaBar, fplus, fminus, params.feasibilityTol)
    fp = fplus.values
    seeds = np.argwhere(fp > params.seedThreshold)
    plan = TrafficPlan(grid=g)
    if not seeds.size:
        logger.info('No seed above %g, empty traffic plan', params.seedThreshold)
        return plan

    flow = FlowField(g, sigmaBar, fplus, fminus, params.kappaRel * float(fp.max()))
    X, Y = g.centers()
    n = len(seeds)
    pos = np.stack([X[seeds[:, 0], seeds[:, 1]], Y[seeds[:, 0], seeds[:, 1]]], axis=1)
    weights = fp[seeds[:, 0], seeds[:, 1]] * g.cellArea
    active = np.ones(n, dtype=bool)
    boundary = np.zeros(n, dtype=bool)
    transit = np.zeros(n, dtype=bool)
    clamped = np.zeros(n, dtype=bool)
    cap = params.transitCap or TRANSIT_CAP_FACTOR * (g.nx + g.ny)
    recorder = _Recorder()
    recorder.add(np.arange(n), 0.0, pos)

    nSteps = max(1, int(round(1.0 / params.dt)))
    dt = 1.0 / nSteps
    for k in range(nSteps):
        t0 = k * dt
        pending = np.flatnonzero(active)
        if not pending.size:
            break
        for level in range(params.maxRefinements + 1):
            sub = 2 ** level
            h = dt / sub
            p = pos[pending].copy()
            fine = np.ones(len(pending), dtype=bool)
            cl = np.zeros(len(pending), dtype=bool)
            trail = []
            for s in range(sub):
                q, c = _rk4(flow, t0 + s * h, p, h)
                fine &= _withinCell(g, q - p)
                cl |= c
                p = q
                trail.append(p.copy())
            accepted = pending[fine]
            for s, pts in enumerate(trail[:-1]):
                recorder.add(accepted, t0 + (s + 1) * h, flow.clip(pts[fine]))
            pos[accepted] = p[fine]
            clamped[accepted] |= cl[fine]
            pending = pending[~fine]
            if not pending.size:
                break
        if pending.size:
            transit[pending] = True
            logger.debug('Transit of %d curves at t=%g', len(pending), t0)
            pos[pending], cl = _transit(flow, g, pending, pos[pending].copy(), t0, t0 + dt, cap, recorder)
            clamped[pending] |= cl

        stepped = np.flatnonzero(active)
        inside = flow.clip(pos[stepped])
        hit = np.any(np.abs(inside - pos[stepped]) > 1e-9 * max(g.hx, g.hy), axis=1)
        pos[stepped] = inside
        recorder.add(stepped, t0 + dt, inside)
        boundary[stepped[hit]] = True
        active[stepped[hit]] = False

    for cid, (times, points) in enumerate(recorder.curves(n)):
        flags = [name for name, mask in ((CURVE_FLAG_BOUNDARY, boundary), (CURVE_FLAG_TRANSIT, transit),
                                         (CURVE_FLAG_CLAMPED, clamped)) if mask[cid]]
        plan.curves.append(TracedCurve(cid=cid, startCell=(int(seeds[cid, 0]), int(seeds[cid, 1])),
                                       weight=float(weights[cid]), times=times, points=points, flags=flags))
    plan.terminalError = terminalError(g, plan, fminus)
    logger.info('Traced %d curves: %d truncated at the boundary, %d in transit, terminal error %.3e',
                n, int(boundary.sum()), int(transit.sum()), plan.terminalError)
    return plan


def terminalDeposit(g: Grid2D, plan: TrafficPlan) -> ScalarField:
    """ Mass of the curve endpoints per cell, skipping truncated and control curves. """
    mass = np.zeros(g.nx * g.ny)
    kept = [c for c in plan.curves if not c.truncated and not c.isControl]
    if kept:
        cells = g.cellOf(np.array([c.points[-1] for c in kept]))
        mass = np.bincount(cells[:, 0] * g.nx + cells[:, 1], weights=[c.weight for c in kept],
                           minlength=g.nx * g.ny)
    return ScalarField(g, mass.reshape(g.shape))


def terminalError(g: Grid2D, plan: TrafficPlan, fminus: ScalarField) -> float:
    """ L1 distance between the endpoint deposit and f- cellArea, relative to the mass of f-. """
    target = fminus.values * g.cellArea
    mismatch = float(np.sum(np.abs(terminalDeposit(g, plan).values - target)))
    total = float(np.sum(target))
    return mismatch / total if total > 0 else mismatch


# --------------------------- Deposition --------------------
def _pieces(g: Grid2D, a: np.ndarray, b: np.ndarray):
    """
    Splits segments a -> b into pieces lying in a single cell.
    Returns the segment index, the flat cell index and the length of every piece.
    """
    d = b - a
    m = np.maximum(1, np.ceil(np.max(np.abs(d) / [g.hx, g.hy], axis=1))).astype(int)
    seg = np.repeat(np.arange(len(a)), m)
    k = np.arange(len(seg)) - np.repeat(np.cumsum(m) - m, m)
    p0 = a[seg] + (k / m[seg])[:, None] * d[seg]
    dp = d[seg] / m[seg][:, None]
    c0, c1 = g.cellOf(p0), g.cellOf(p0 + dp)
    with np.errstate(divide='ignore', invalid='ignore'):
        tx = np.where(c0[:, 1] != c1[:, 1], (np.maximum(c0[:, 1], c1[:, 1]) * g.hx - p0[:, 0]) / dp[:, 0], 0.0)
        ty = np.where(c0[:, 0] != c1[:, 0], (np.maximum(c0[:, 0], c1[:, 0]) * g.hy - p0[:, 1]) / dp[:, 1], 0.0)
    cuts = np.sort(np.column_stack([np.zeros(len(seg)), np.clip(tx, 0, 1), np.clip(ty, 0, 1),
                                    np.ones(len(seg))]), axis=1)
    mids = 0.5 * (cuts[:, :-1] + cuts[:, 1:])
    lengths = np.diff(cuts, axis=1) * np.linalg.norm(dp, axis=1)[:, None]
    cells = g.cellOf(p0[:, None, :] + mids[..., None] * dp[:, None, :])
    flat = cells[..., 0] * g.nx + cells[..., 1]
    return np.repeat(seg, 3), flat.ravel(), lengths.ravel()


def depositIntensity(plan: TrafficPlan, g: Grid2D) -> ScalarField:
    """ i_Q: every curve adds weight * (length inside a cell) / cellArea to that cell. """
    curves = [c for c in plan.curves if not c.isControl]
    if not curves:
        raise EmptyPlan('Traffic plan holds no curve')
    a = np.concatenate([c.points[:-1] for c in curves])
    b = np.concatenate([c.points[1:] for c in curves])
    w = np.concatenate([np.full(len(c.points) - 1, c.weight) for c in curves])
    if not len(a):
        return ScalarField(g, np.zeros(g.shape))
    seg, cells, lengths = _pieces(g, a, b)
    values = np.bincount(cells, weights=w[seg] * lengths / g.cellArea, minlength=g.nx * g.ny)
    return ScalarField(g, values.reshape(g.shape))


def intensityMismatch(intensity: ScalarField, sigmaBar: VectorField) -> float:
    """ ||i_Q - |sigma_bar| ||_1 / ||sigma_bar||_1 over the cells. """
    magnitude = sigmaBar.magnitude().values
    scale = float(np.sum(magnitude))
    return float(np.sum(np.abs(intensity.values - magnitude))) / scale if scale > 0 else 0.0


# --------------------------- Fast marching --------------------
def _sourceCells(g: Grid2D, sources) -> np.ndarray:
    sources = np.asarray(sources)
    if sources.dtype == bool:
        sources = np.argwhere(sources)
    sources = np.atleast_2d(sources).astype(int)
    if not sources.size:
        raise ValueError('At least one source cell is needed')
    if np.any(sources < 0) or np.any(sources[:, 0] >= g.ny) or np.any(sources[:, 1] >= g.nx):
        raise OutOfDomain('Source cell outside the grid')
    return sources


def _eikonalUpdate(a: float, b: float, m: float, hx: float, hy: float) -> float:
    if not np.isfinite(a):
        return b + m * hy
    if not np.isfinite(b):
        return a + m * hx
    A = 1.0 / hx ** 2 + 1.0 / hy ** 2
    B = -2.0 * (a / hx ** 2 + b / hy ** 2)
    C = a ** 2 / hx ** 2 + b ** 2 / hy ** 2 - m ** 2
    disc = B * B - 4.0 * A * C
    if disc >= 0:
        t = (-B + np.sqrt(disc)) / (2.0 * A)
        if t >= max(a, b):
            return t
    return min(a + m * hx, b + m * hy)


def geodesicDistance(metric: ScalarField, sources, exactRadius: Optional[float] = None) -> ScalarField:
    """
    First order fast marching for |grad d| = metric with d = 0 on the source cells.
    Cells within exactRadius of a source start from the trapezoid rule for the metric
    along the straight segment to the source.
    """
    g = metric.grid
    m = metric.values
    if np.any(m <= 0):
        raise NonpositiveMetric(f'Metric reaches {float(m.min()):g}')
    sources = _sourceCells(g, sources)
    hx, hy = g.hx, g.hy
    exactRadius = EXACT_RADIUS_CELLS * max(hx, hy) if exactRadius is None else exactRadius

    dist = np.full(g.shape, np.inf)
    X, Y = g.centers()
    for j, i in sources:
        straight = np.hypot(X - X[j, i], Y - Y[j, i])
        local = 0.5 * (m[j, i] + m) * straight
        near = straight <= exactRadius
        dist[near] = np.minimum(dist[near], local[near])
        dist[j, i] = 0.0
    frozen = np.zeros(g.shape, dtype=bool)
    heap = [(dist[j, i], j, i) for j, i in np.argwhere(np.isfinite(dist))]
    heapq.heapify(heap)
    ny, nx = g.shape
    while heap:
        d, j, i = heapq.heappop(heap)
        if frozen[j, i] or d > dist[j, i]:
            continue
        frozen[j, i] = True
        for jj, ii in ((j - 1, i), (j + 1, i), (j, i - 1), (j, i + 1)):
            if not (0 <= jj < ny and 0 <= ii < nx) or frozen[jj, ii]:
                continue
            a = min(dist[jj, ii - 1] if ii > 0 and frozen[jj, ii - 1] else np.inf,
                    dist[jj, ii + 1] if ii < nx - 1 and frozen[jj, ii + 1] else np.inf)
            b = min(dist[jj - 1, ii] if jj > 0 and frozen[jj - 1, ii] else np.inf,
                    dist[jj + 1, ii] if jj < ny - 1 and frozen[jj + 1, ii] else np.inf)
            t = _eikonalUpdate(a, b, m[jj, ii], hx, hy)
            if t < dist[jj, ii]:
                dist[jj, ii] = t
                heapq.heappush(heap, (t, jj, ii))
    return ScalarField(g, dist)


# --------------------------- Wardrop audit --------------------
def defaultCongestion(p: float) -> Callable:
    """ g(i) = 1 + i^(p - 1). """
    return lambda i: 1.0 + np.power(np.maximum(i, 0.0), p - 1.0)


def pathCost(g: Grid2D, points: np.ndarray, metric: np.ndarray) -> float:
    """ Integral of the cellwise metric along a polyline. """
    if len(points) < 2:
        return 0.0
    _, cells, lengths = _pieces(g, points[:-1], points[1:])
    return float(np.sum(metric.ravel()[cells] * lengths))


def _sampleAt(g: Grid2D, values: np.ndarray, point: np.ndarray) -> float:
    xm = (np.arange(g.nx) + 0.5) * g.hx
    ym = (np.arange(g.ny) + 0.5) * g.hy
    interp = RegularGridInterpolator((ym, xm), values)
    return float(interp([[np.clip(point[1], ym[0], ym[-1]), np.clip(point[0], xm[0], xm[-1])]])[0])


def wardropAudit(plan: TrafficPlan, intensity: ScalarField, gfun: Optional[Callable] = None,
                 params: AuditParams = AuditParams()) -> List[WardropEntry]:
    """
    Compares the cost of sampled curves under the metric gfun(i_Q) with the fast marching
    distance between their endpoints. Control curves are always audited and stay out of
    the pass fraction.
    """
    g = plan.grid
    checkGrid(g, intensity.grid)
    if not plan.curves:
        raise EmptyPlan('Traffic plan holds no curve')
    gfun = gfun or defaultCongestion(params.p)
    metric = np.asarray(gfun(intensity.values), dtype=float)
    if np.any(metric <= 0):
        raise NonpositiveMetric(f'Congestion metric reaches {float(metric.min()):g}')
    metricField = ScalarField(g, metric)

    regular = [c for c in plan.curves if not c.isControl and len(c.points) > 1]
    if len(regular) > params.samples:
        rng = np.random.default_rng(params.seed)
        picked = np.sort(rng.choice(len(regular), size=params.samples, replace=False))
        regular = [regular[k] for k in picked]
    audited = regular + [c for c in plan.curves if c.isControl]

    entries = []
    for c in audited:
        distance = _sampleAt(g, geodesicDistance(metricField, [c.startCell]).values, c.points[-1])
        if distance < min(g.hx, g.hy) * float(metric.min()):
            continue
        cost = pathCost(g, c.points, metric)
        entries.append(WardropEntry(cid=c.cid, cost=cost, distance=distance, ratio=cost / distance,
                                    weight=c.weight, control=c.isControl))
    weighted = [(e.weight, e.ratio <= 1.0 + params.slack) for e in entries if not e.control]
    total = sum(w for w, _ in weighted)
    plan.wardrop = entries
    plan.passFraction = sum(w for w, ok in weighted if ok) / total if total > 0 else None
    plan.auditPassed = plan.passFraction is not None and plan.passFraction >= params.passFraction
    flagged = plan.flagged(params.slack)
    if flagged:
        logger.warning('Wardrop audit flags curves %s', flagged)
    logger.info('Wardrop audit over %d curves: pass fraction %s', len(entries), plan.passFraction)
    return entries


def controlCurve(plan: TrafficPlan, base: int = 0, teeth: int = 8, amplitude: Optional[float] = None) -> TracedCurve:
    """
    Zig-zag between the endpoints of a traced curve, appended to the plan with zero weight.
    The default amplitude makes it about 40% longer than the straight chord.
    """
    g = plan.grid
    regular = [c for c in plan.curves if not c.isControl]
    if not regular:
        raise EmptyPlan('Traffic plan holds no curve to shadow')
    ref = regular[base]
    start, end = ref.points[0], ref.points[-1]
    chord = end - start
    length = float(np.linalg.norm(chord))
    if length == 0:
        raise ValueError(f'Curve {ref.cid} does not move')
    normal = np.array([-chord[1], chord[0]]) / length
    amplitude = length / (2 * teeth) if amplitude is None else amplitude
    s = np.linspace(0.0, 1.0, 2 * teeth + 1)
    offsets = np.where(np.arange(len(s)) % 2 == 1, amplitude, 0.0) * np.where(np.arange(len(s)) % 4 == 3, -1, 1)
    points = start + s[:, None] * chord + offsets[:, None] * normal
    points = np.stack([np.clip(points[:, 0], 0, g.lx), np.clip(points[:, 1], 0, g.ly)], axis=1)
    curve = TracedCurve(cid=max(c.cid for c in plan.curves) + 1, startCell=ref.startCell, weight=0.0,
                        times=s, points=points, flags=[CURVE_FLAG_CONTROL])
    plan.curves.append(curve)
    return curve
