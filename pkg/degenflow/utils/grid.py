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
Uniform staggered (MAC) grid on the rectangle [0, lx] x [0, ly].

Scalars live at cell centers as arrays of shape (ny, nx), x-components of
vector fields on vertical faces (ny, nx + 1), y-components on horizontal
faces (ny + 1, nx), and co-located vectors at cell corners (ny + 1, nx + 1).
Row j is the y index, column i the x index, so a row-major flatten has x
running fastest.
"""

# General imports
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import fft
from scipy.sparse.linalg import LinearOperator, cg

# Plugin imports
from ..constants import MIN_CELLS, POISSON_TOL, POISSON_MAXITER
from .errors import GridMismatch, IncompatibleSource, SolverStagnation, RegionOutOfDomain, EmptyRegion

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < MIN_CELLS or self.ny < MIN_CELLS:
            raise ValueError(f'Grid needs at least {MIN_CELLS} cells per side, got {self.nx}x{self.ny}')
        if not (self.lx > 0 and self.ly > 0):
            raise ValueError(f'Grid side lengths must be positive, got {self.lx}x{self.ly}')

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def cellArea(self) -> float:
        return self.hx * self.hy

    @property
    def shape(self):
        return self.ny, self.nx

    def centers(self):
        """ Cell center coordinates (X, Y), each of shape (ny, nx). """
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y)

    def contains(self, point) -> bool:
        x, y = point
        return 0.0 <= x <= self.lx and 0.0 <= y <= self.ly

    def cellOf(self, points) -> np.ndarray:
        """ (j, i) index pairs of the cells holding each point, clipped to the grid. """
        points = np.asarray(points, dtype=float)
        i = np.clip(np.floor(points[..., 0] / self.hx).astype(int), 0, self.nx - 1)
        j = np.clip(np.floor(points[..., 1] / self.hy).astype(int), 0, self.ny - 1)
        return np.stack([j, i], axis=-1)

    def toDict(self) -> dict:
        return {'nx': self.nx, 'ny': self.ny, 'lx': self.lx, 'ly': self.ly}

    @classmethod
    def fromDict(cls, data: dict) -> 'Grid2D':
        return cls(nx=int(data['nx']), ny=int(data['ny']), lx=float(data.get('lx', 1.0)),
                   ly=float(data.get('ly', 1.0)))


def _frozen(values, shape, name) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != tuple(shape):
        arr = arr.reshape(shape) if arr.size == int(np.prod(shape)) else arr
    if arr.shape != tuple(shape):
        raise GridMismatch(f'{name} has shape {arr.shape}, grid expects {tuple(shape)}')
    if not np.all(np.isfinite(arr)):
        raise ValueError(f'{name} contains non finite values')
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'values', _frozen(self.values, self.grid.shape, 'Scalar field'))

    def total(self) -> float:
        """ Integral over the domain. """
        return float(np.sum(self.values) * self.grid.cellArea)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def norm(self) -> float:
        """ Discrete L2 norm. """
        return float(np.sqrt(np.sum(self.values ** 2) * self.grid.cellArea))


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: Grid2D
    x: np.ndarray
    y: np.ndarray
    neumann: bool = False

    def __post_init__(self):
        g = self.grid
        object.__setattr__(self, 'x', _frozen(self.x, (g.ny, g.nx + 1), 'x-component'))
        object.__setattr__(self, 'y', _frozen(self.y, (g.ny + 1, g.nx), 'y-component'))
        if self.neumann and (np.any(self.x[:, [0, -1]] != 0) or np.any(self.y[[0, -1], :] != 0)):
            raise ValueError('A zero normal flux field must vanish on boundary faces')

    @classmethod
    def zeros(cls, g: Grid2D) -> 'VectorField':
        return cls(g, np.zeros((g.ny, g.nx + 1)), np.zeros((g.ny + 1, g.nx)), neumann=True)

    def clamped(self) -> 'VectorField':
        """ Copy with boundary normal components set to zero. """
        x, y = self.x.copy(), self.y.copy()
        x[:, [0, -1]] = 0.0
        y[[0, -1], :] = 0.0
        return VectorField(self.grid, x, y, neumann=True)

    def __add__(self, other: 'VectorField') -> 'VectorField':
        checkGrid(self.grid, other.grid)
        return VectorField(self.grid, self.x + other.x, self.y + other.y,
                           neumann=self.neumann and other.neumann)

    def __sub__(self, other: 'VectorField') -> 'VectorField':
        checkGrid(self.grid, other.grid)
        return VectorField(self.grid, self.x - other.x, self.y - other.y,
                           neumann=self.neumann and other.neumann)

    def norm(self) -> float:
        return float(np.sqrt(faceInner(self.grid, self, self)))

    def centered(self) -> np.ndarray:
        """ Face averages at cell centers, shape (ny, nx, 2). """
        cx = 0.5 * (self.x[:, :-1] + self.x[:, 1:])
        cy = 0.5 * (self.y[:-1, :] + self.y[1:, :])
        return np.stack([cx, cy], axis=-1)

    def magnitude(self) -> ScalarField:
        return ScalarField(self.grid, np.linalg.norm(self.centered(), axis=-1))


@dataclass(frozen=True, eq=False)
class CornerField:
    """ Vectors co-located at the (ny + 1) x (nx + 1) cell corners. """
    grid: Grid2D
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        shape = (self.grid.ny + 1, self.grid.nx + 1)
        object.__setattr__(self, 'x', _frozen(self.x, shape, 'corner x-component'))
        object.__setattr__(self, 'y', _frozen(self.y, shape, 'corner y-component'))

    def stacked(self) -> np.ndarray:
        return np.stack([self.x, self.y], axis=-1)

    @classmethod
    def fromStacked(cls, g: Grid2D, values: np.ndarray) -> 'CornerField':
        return cls(g, values[..., 0], values[..., 1])


def checkGrid(g: Grid2D, other: Grid2D):
    if g != other:
        raise GridMismatch(f'Grid {other} does not match {g}')


def checkCompatible(g: Grid2D, f: ScalarField, tol: float = 1e-10):
    """ Raises IncompatibleSource unless sum(f) cellArea vanishes. """
    checkGrid(g, f.grid)
    scale = max(1.0, float(np.sum(np.abs(f.values))) * g.cellArea)
    if abs(f.total()) > tol * scale:
        raise IncompatibleSource(f'Source integrates to {f.total():.3e}, expected 0', total=f.total())


# --------------------------- Differential operators --------------------
def gradient(g: Grid2D, u: ScalarField, neumann: bool = False) -> VectorField:
    """
    Face differences of adjacent cell values. Boundary faces are zero for the
    Neumann variant and copy the nearest interior face otherwise.
    """
    checkGrid(g, u.grid)
    v = u.values
    gx = np.zeros((g.ny, g.nx + 1))
    gy = np.zeros((g.ny + 1, g.nx))
    gx[:, 1:-1] = np.diff(v, axis=1) / g.hx
    gy[1:-1, :] = np.diff(v, axis=0) / g.hy
    if not neumann:
        gx[:, 0], gx[:, -1] = gx[:, 1], gx[:, -2]
        gy[0, :], gy[-1, :] = gy[1, :], gy[-2, :]
    return VectorField(g, gx, gy, neumann=neumann)


def divergence(g: Grid2D, s: VectorField) -> ScalarField:
    checkGrid(g, s.grid)
    return ScalarField(g, np.diff(s.x, axis=1) / g.hx + np.diff(s.y, axis=0) / g.hy)


def faceInner(g: Grid2D, s: VectorField, t: VectorField) -> float:
    return float((np.sum(s.x * t.x) + np.sum(s.y * t.y)) * g.cellArea)


def cellInner(g: Grid2D, u: ScalarField, v: ScalarField) -> float:
    return float(np.sum(u.values * v.values) * g.cellArea)


# --------------------------- Corner co-location --------------------
def cornerWeights(g: Grid2D) -> np.ndarray:
    """ Trapezoid weights of the corners, summing to the domain area. """
    wx = np.ones(g.nx + 1)
    wy = np.ones(g.ny + 1)
    wx[[0, -1]] = 0.5
    wy[[0, -1]] = 0.5
    return g.cellArea * wy[:, None] * wx[None, :]


def toCorners(g: Grid2D, s: VectorField) -> CornerField:
    """ Averages each component over the two faces touching a corner along its own line. """
    checkGrid(g, s.grid)
    cx = np.empty((g.ny + 1, g.nx + 1))
    cx[1:-1, :] = 0.5 * (s.x[:-1, :] + s.x[1:, :])
    cx[0, :], cx[-1, :] = s.x[0, :], s.x[-1, :]
    cy = np.empty((g.ny + 1, g.nx + 1))
    cy[:, 1:-1] = 0.5 * (s.y[:, :-1] + s.y[:, 1:])
    cy[:, 0], cy[:, -1] = s.y[:, 0], s.y[:, -1]
    return CornerField(g, cx, cy)


def fromCorners(g: Grid2D, t: CornerField) -> VectorField:
    """
    Weighted adjoint of toCorners restricted to zero normal flux:
    sum_c w_c toCorners(s)_c . t_c equals faceInner(s, fromCorners(t)) for every Neumann s.
    """
    checkGrid(g, t.grid)
    sx = np.zeros((g.ny, g.nx + 1))
    sy = np.zeros((g.ny + 1, g.nx))
    sx[:, 1:-1] = 0.5 * (t.x[:-1, 1:-1] + t.x[1:, 1:-1])
    sy[1:-1, :] = 0.5 * (t.y[1:-1, :-1] + t.y[1:-1, 1:])
    return VectorField(g, sx, sy, neumann=True)


def cornerInner(g: Grid2D, a: CornerField, b: CornerField) -> float:
    return float(np.sum(cornerWeights(g) * (a.x * b.x + a.y * b.y)))


# --------------------------- Neumann Poisson --------------------
class NeumannPoisson:
    """
    Solver for -div(A grad phi) = b with zero normal flux and mean-zero phi, where A is
    the identity or, when averaged, the face-corner-face smoothing fromCorners(toCorners(.)).

    Conjugate gradients run on the mean-zero subspace, preconditioned with the
    cosine-transform diagonalization of the operator.
    """

    def __init__(self, g: Grid2D, averaged: bool = False, tol: float = POISSON_TOL,
                 maxiter: int = POISSON_MAXITER, workers: Optional[int] = None):
        self.grid = g
        self.averaged = averaged
        self.tol = tol
        self.maxiter = maxiter
        self.workers = workers
        self.lastIterations = 0
        self._eigen = self._eigenvalues()
        n = g.nx * g.ny
        self._operator = LinearOperator((n, n), matvec=self._apply, dtype=float)
        self._preconditioner = LinearOperator((n, n), matvec=self._precondition, dtype=float)

    def _eigenvalues(self) -> np.ndarray:
        g = self.grid
        kx = np.pi * np.arange(g.nx) / (2 * g.nx)
        ky = np.pi * np.arange(g.ny) / (2 * g.ny)
        lamx = 4.0 / g.hx ** 2 * np.sin(kx) ** 2
        lamy = 4.0 / g.hy ** 2 * np.sin(ky) ** 2
        if self.averaged:
            eig = lamx[None, :] * np.cos(ky)[:, None] ** 2 + lamy[:, None] * np.cos(kx)[None, :] ** 2
        else:
            eig = lamx[None, :] + lamy[:, None]
        eig[0, 0] = np.inf
        return eig

    def applyField(self, phi: ScalarField) -> ScalarField:
        g = self.grid
        flux = gradient(g, phi, neumann=True)
        if self.averaged:
            flux = fromCorners(g, toCorners(g, flux))
        div = divergence(g, flux)
        return ScalarField(g, -div.values)

    def _apply(self, vec: np.ndarray) -> np.ndarray:
        return self.applyField(ScalarField(self.grid, vec.reshape(self.grid.shape))).values.ravel()

    def _precondition(self, vec: np.ndarray) -> np.ndarray:
        coeffs = fft.dctn(vec.reshape(self.grid.shape), type=2, norm='ortho', workers=self.workers)
        return fft.idctn(coeffs / self._eigen, type=2, norm='ortho', workers=self.workers).ravel()

    def solve(self, rhs: ScalarField) -> ScalarField:
        """ Mean-zero phi with -div(A grad phi) = rhs - mean(rhs). """
        checkGrid(self.grid, rhs.grid)
        b = (rhs.values - rhs.values.mean()).ravel()
        bnorm = float(np.linalg.norm(b))
        if bnorm == 0.0:
            self.lastIterations = 0
            return ScalarField(self.grid, np.zeros(self.grid.shape))
        iterations = []
        x, info = cg(self._operator, b, rtol=self.tol, atol=0.0, maxiter=self.maxiter,
                     M=self._preconditioner, callback=iterations.append)
        self.lastIterations = len(iterations)
        if info != 0:
            raise SolverStagnation(f'CG did not reach {self.tol:g} in {self.maxiter} iterations',
                                   iterations=self.lastIterations)
        x = x - x.mean()
        return ScalarField(self.grid, x.reshape(self.grid.shape))


def projectDivergence(g: Grid2D, s: VectorField, f: ScalarField,
                      solver: Optional[NeumannPoisson] = None) -> VectorField:
    """
    Closest zero-normal-flux field to s with divergence f: s + grad(phi) with
    div(grad phi) = f - div(s).
    """
    checkGrid(g, s.grid)
    checkCompatible(g, f)
    solver = solver or NeumannPoisson(g)
    base = s.clamped()
    residual = ScalarField(g, divergence(g, base).values - f.values)
    phi = solver.solve(residual)
    return base + gradient(g, phi, neumann=True)


# --------------------------- Regions --------------------
def _distances(g: Grid2D, center) -> np.ndarray:
    cx, cy = (float(c) for c in center)
    if not g.contains((cx, cy)):
        raise RegionOutOfDomain(f'Center ({cx:g}, {cy:g}) lies outside the domain', center=[cx, cy])
    X, Y = g.centers()
    return np.hypot(X - cx, Y - cy)


def ballRegion(g: Grid2D, center: Sequence[float], r: float) -> np.ndarray:
    """ Boolean (ny, nx) mask of the cells whose centers lie in the closed ball. """
    if not r > 0:
        raise ValueError(f'Radius must be > 0, got {r}')
    if r < 0.5 * min(g.hx, g.hy):
        raise EmptyRegion(f'Radius {r:g} is below half a cell')
    mask = _distances(g, center) <= r
    if not mask.any():
        raise EmptyRegion(f'No cell center within {r:g} of {tuple(center)}')
    return mask


def annulusRegion(g: Grid2D, center: Sequence[float], rIn: float, rOut: float) -> np.ndarray:
    if not 0 <= rIn < rOut:
        raise ValueError(f'Annulus needs 0 <= r_in < r_out, got {rIn}, {rOut}')
    dist = _distances(g, center)
    mask = (dist > rIn) & (dist <= rOut)
    if not mask.any():
        raise EmptyRegion(f'Annulus {rIn:g} < r <= {rOut:g} holds no cell center')
    return mask


def ballFits(g: Grid2D, center: Sequence[float], r: float) -> bool:
    cx, cy = center
    return cx - r >= 0 and cy - r >= 0 and cx + r <= g.lx and cy + r <= g.ly
