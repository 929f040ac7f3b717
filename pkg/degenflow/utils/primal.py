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
Primal problem min sum_c w_c H_eps(grad u)_c + sum f u cellArea, solved by damped
Newton with a decreasing regularization schedule and a final unregularized stage.

Gradients are evaluated at cell corners, where both components are co-located by
averaging the adjacent faces; face fluxes are recovered with grid.fromCorners, so
that the residual of the first order condition is exactly f - div(sigma).
"""

# General imports
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import spsolve

# Plugin imports
from ..constants import EPS_SCHEDULE, PRIMAL_TOL, PRIMAL_MAXITER, ARMIJO_C, ARMIJO_MAXHALVINGS
from .errors import LineSearchFailure, MaxIterations
from .grid import Grid2D, ScalarField, VectorField, CornerField, checkGrid, checkCompatible, cornerWeights, \
    fromCorners, divergence
from .potentials import PotentialSpec, evalPotential, evalForce, evalHessian, hessianBound, workingRadius

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrimalParams:
    tol: float = PRIMAL_TOL
    maxIter: int = PRIMAL_MAXITER
    epsSchedule: Tuple[float, ...] = tuple(EPS_SCHEDULE)
    armijo: float = ARMIJO_C
    maxHalvings: int = ARMIJO_MAXHALVINGS
    # Random initial guess when set, zero otherwise
    seed: Optional[int] = None
    initScale: float = 1.0

    def __post_init__(self):
        schedule = tuple(float(e) for e in self.epsSchedule)
        if not schedule or any(e <= 0 for e in schedule) or any(b >= a for a, b in zip(schedule, schedule[1:])):
            raise ValueError(f'Regularization schedule must be positive and decreasing, got {schedule}')
        object.__setattr__(self, 'epsSchedule', schedule)
        if not self.tol > 0 or self.maxIter < 1:
            raise ValueError('Tolerance must be > 0 and the iteration cap >= 1')

    @classmethod
    def fromDict(cls, data: dict) -> 'PrimalParams':
        return cls(tol=float(data.get('tol', PRIMAL_TOL)), maxIter=int(data.get('max_iter', PRIMAL_MAXITER)),
                   epsSchedule=tuple(data.get('eps_schedule', EPS_SCHEDULE)),
                   armijo=float(data.get('armijo', ARMIJO_C)),
                   maxHalvings=int(data.get('max_halvings', ARMIJO_MAXHALVINGS)),
                   seed=data.get('seed'), initScale=float(data.get('init_scale', 1.0)))


@dataclass(frozen=True, eq=False)
class PrimalSolution:
    u: ScalarField
    sigma: VectorField
    energy: float
    gradNorm: float
    epsSchedule: Tuple[float, ...]
    iterations: int
    cornerFlux: Optional[CornerField] = None
    history: Tuple[float, ...] = field(default_factory=tuple)
    maxGradient: float = 0.0
    hessianBound: float = 0.0
    # Final-stage energy with spec.regEps, set only when it is positive
    regularizedEnergy: Optional[float] = None

    def toSummary(self, spec: Optional[PotentialSpec] = None) -> dict:
        summary = {'energy': self.energy, 'grad_norm': self.gradNorm, 'iterations': self.iterations,
                   'eps_schedule': list(self.epsSchedule), 'max_gradient': self.maxGradient,
                   'hessian_bound': self.hessianBound}
        if self.regularizedEnergy is not None:
            summary['regularized_energy'] = self.regularizedEnergy
        if spec is not None:
            summary['hess_cap_ok'] = bool(self.hessianBound <= spec.hessCap)
        return summary


class CornerGradient:
    """ Sparse corner gradient J = R G (cells to corners) with its trapezoid weights. """

    def __init__(self, g: Grid2D):
        self.grid = g
        dx = _difference(g.nx, g.hx)
        dy = _difference(g.ny, g.hy)
        ax = _faceAverage(g.nx)
        ay = _faceAverage(g.ny)
        gx = sps.kron(sps.identity(g.ny), dx)
        gy = sps.kron(dy, sps.identity(g.nx))
        self.jx = (sps.kron(ay, sps.identity(g.nx + 1)) @ gx).tocsr()
        self.jy = (sps.kron(sps.identity(g.ny + 1), ax) @ gy).tocsr()
        self.weights = cornerWeights(g).ravel()

    def apply(self, u: np.ndarray) -> np.ndarray:
        return np.stack([self.jx @ u, self.jy @ u], axis=-1)

    def adjoint(self, t: np.ndarray) -> np.ndarray:
        """ J^T W t for corner vectors t of shape (corners, 2). """
        return self.jx.T @ (self.weights * t[:, 0]) + self.jy.T @ (self.weights * t[:, 1])

    def hessian(self, blocks: np.ndarray) -> sps.csc_matrix:
        w = self.weights
        hxx = sps.diags(w * blocks[:, 0, 0])
        hxy = sps.diags(w * blocks[:, 0, 1])
        hyy = sps.diags(w * blocks[:, 1, 1])
        jx, jy = self.jx, self.jy
        cross = jx.T @ hxy @ jy
        return (jx.T @ hxx @ jx + cross + cross.T + jy.T @ hyy @ jy).tocsc()

    def laplacian(self) -> sps.csc_matrix:
        return (self.jx.T @ sps.diags(self.weights) @ self.jx +
                self.jy.T @ sps.diags(self.weights) @ self.jy).tocsc()

    def fluxField(self, t: np.ndarray) -> Tuple[CornerField, VectorField]:
        g = self.grid
        corner = CornerField(g, t[:, 0].reshape(g.ny + 1, g.nx + 1), t[:, 1].reshape(g.ny + 1, g.nx + 1))
        return corner, fromCorners(g, corner)


def _difference(n: int, h: float) -> sps.csr_matrix:
    """ (n + 1) x n face differences, zero rows on the two boundary faces. """
    rows = np.repeat(np.arange(1, n), 2)
    cols = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1).ravel()
    vals = np.tile([-1.0 / h, 1.0 / h], n - 1)
    return sps.csr_matrix((vals, (rows, cols)), shape=(n + 1, n))


def _faceAverage(n: int) -> sps.csr_matrix:
    """ (n + 1) x n average of the faces touching each corner along a line. """
    rows = np.concatenate([[0], np.repeat(np.arange(1, n), 2), [n]])
    cols = np.concatenate([[0], np.stack([np.arange(n - 1), np.arange(1, n)], axis=1).ravel(), [n - 1]])
    vals = np.concatenate([[1.0], np.full(2 * (n - 1), 0.5), [1.0]])
    return sps.csr_matrix((vals, (rows, cols)), shape=(n + 1, n))


# --------------------------- Energy --------------------
def _energy(op: CornerGradient, spec: PotentialSpec, u: np.ndarray, fvec: np.ndarray) -> float:
    z = op.apply(u)
    return float(np.sum(op.weights * evalPotential(spec, z)) + op.grid.cellArea * np.dot(fvec, u))


def primalEnergy(g: Grid2D, spec: PotentialSpec, u: ScalarField, f: ScalarField,
                 op: Optional[CornerGradient] = None) -> float:
    """ sum_c w_c H_eps(grad u)_c + sum f u cellArea. """
    checkGrid(g, u.grid)
    checkCompatible(g, f)
    op = op or CornerGradient(g)
    return _energy(op, spec, u.values.ravel(), f.values.ravel())


# --------------------------- Newton --------------------
def _newtonStage(op: CornerGradient, spec: PotentialSpec, u: np.ndarray, fvec: np.ndarray,
                 params: PrimalParams, shift: float, history: list, final: bool):
    """ Damped Newton on the energy of spec; shift adds shift * J^T W J to the Hessian only. """
    g = op.grid
    area = g.cellArea
    n = u.size
    ones = sps.csc_matrix(np.ones((n, 1)))
    lap = op.laplacian() if shift > 0 else None
    energy = _energy(op, spec, u, fvec)
    for it in range(1, params.maxIter + 1):
        z = op.apply(u)
        grad = op.adjoint(evalForce(spec, z)) + area * fvec
        gradNorm = float(np.linalg.norm(grad) / np.sqrt(area))
        logger.debug('eps=%g it=%d energy=%.15g grad=%.3e', spec.regEps, it, energy, gradNorm)
        if gradNorm <= params.tol:
            return u, energy, gradNorm, it - 1
        hess = op.hessian(evalHessian(spec, z))
        if lap is not None:
            hess = hess + shift * lap
        system = sps.bmat([[hess, ones], [ones.T, None]], format='csc')
        step = spsolve(system, np.concatenate([-grad, [0.0]]))[:n]
        slope = float(np.dot(grad, step))
        if not slope < 0:
            raise LineSearchFailure(f'Newton direction is not a descent direction (slope {slope:.3e})',
                                    regEps=spec.regEps, iteration=it)
        # Slopes below round-off only require a non-increasing energy
        roundoff = -slope <= 1e-12 * max(1.0, abs(energy))
        sufficient = 0.0 if roundoff else params.armijo
        t = 1.0
        for _ in range(params.maxHalvings):
            trial = u + t * step
            trialEnergy = _energy(op, spec, trial, fvec)
            if trialEnergy <= energy + sufficient * t * slope:
                break
            t *= 0.5
        else:
            if roundoff:
                logger.info('Stage eps=%g stalled at round-off after %d iterations (residual %.3e)',
                            spec.regEps, it - 1, gradNorm)
                return u, energy, gradNorm, it - 1
            raise LineSearchFailure(f'Armijo backtracking failed after {params.maxHalvings} halvings',
                                    regEps=spec.regEps, iteration=it)
        u, energy = trial, trialEnergy
        history.append(energy)
    z = op.apply(u)
    grad = op.adjoint(evalForce(spec, z)) + area * fvec
    gradNorm = float(np.linalg.norm(grad) / np.sqrt(area))
    if gradNorm <= params.tol or not final:
        if gradNorm > params.tol:
            logger.warning('Stage eps=%g stopped at the iteration cap with residual %.3e', spec.regEps, gradNorm)
        return u, energy, gradNorm, params.maxIter
    raise MaxIterations(f'Newton did not converge in {params.maxIter} iterations (residual {gradNorm:.3e})',
                        regEps=spec.regEps, residual=gradNorm)


def solvePrimal(g: Grid2D, spec: PotentialSpec, f: ScalarField,
                params: PrimalParams = PrimalParams()) -> PrimalSolution:
    """
    Runs the regularization schedule, warm starting each stage, then a final stage on
    the unregularized energy with the Hessian shifted by the smallest eps. Returns the
    mean-zero u, the corner flux F(J u) and its face redistribution sigma.
    The reported energy uses the unregularized potential, regularizedEnergy the
    one with spec.regEps when it is positive.
    """
    checkCompatible(g, f)
    checkGrid(g, f.grid)
    op = CornerGradient(g)
    fvec = f.values.ravel() - f.values.mean()
    if params.seed is None:
        u = np.zeros(g.nx * g.ny)
    else:
        u = params.initScale * np.random.default_rng(params.seed).standard_normal(g.nx * g.ny)
    u -= u.mean()

    base = spec.unregularized()
    history, total = [], 0
    for eps in params.epsSchedule:
        u, energy, gradNorm, its = _newtonStage(op, base.withRegularization(spec.regEps + eps), u, fvec,
                                                params, 0.0, history, final=False)
        total += its
        logger.info('Regularized stage eps=%g: %d iterations, residual %.3e', eps, its, gradNorm)
    target = base.withRegularization(spec.regEps)
    u, energy, gradNorm, its = _newtonStage(op, target, u, fvec, params, params.epsSchedule[-1],
                                            history, final=True)
    total += its
    u -= u.mean()
    logger.info('Final stage: %d iterations, residual %.3e, energy %.12g', its, gradNorm, energy)

    z = op.apply(u)
    cornerFlux, sigma = op.fluxField(evalForce(base, z))
    maxGradient = float(np.max(np.linalg.norm(z, axis=-1), initial=0.0))
    return PrimalSolution(u=ScalarField(g, u.reshape(g.shape)), sigma=sigma,
                          energy=_energy(op, base, u, fvec), gradNorm=gradNorm,
                          epsSchedule=tuple(params.epsSchedule) + (spec.regEps,), iterations=total,
                          cornerFlux=cornerFlux, history=tuple(history), maxGradient=maxGradient,
                          hessianBound=hessianBound(base, workingRadius(maxGradient)),
                          regularizedEnergy=_energy(op, target, u, fvec) if spec.regEps > 0 else None)


def feasibilityResidual(g: Grid2D, sigma: VectorField, f: ScalarField) -> float:
    """ L2 norm of div(sigma) - f. """
    div = divergence(g, sigma)
    return float(np.sqrt(np.sum((div.values - f.values) ** 2) * g.cellArea))
