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
Dual problem min sum_c w_c (|tau_c| + |tau_c|^p / p) subject to div(sigma) = f, where
sigma = fromCorners(tau) is the face redistribution of the corner flux tau.

Douglas-Rachford splitting alternates the radial prox of the integrand at the
corners with the exact weighted projection onto the divergence constraint.
"""

# General imports
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

# Plugin imports
from ..constants import DUAL_TOL, DUAL_MAXITER, DUAL_STEP, BALANCE_EVERY, BALANCE_RATIO, POISSON_TOL
from .errors import MaxIterations
from .grid import Grid2D, ScalarField, VectorField, CornerField, NeumannPoisson, checkGrid, checkCompatible, \
    cornerWeights, fromCorners, toCorners, divergence, gradient
from .potentials import PotentialSpec, evalConjugate, proxConjugate
from .primal import PrimalSolution, primalEnergy, feasibilityResidual

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualParams:
    tol: float = DUAL_TOL
    maxIter: int = DUAL_MAXITER
    step: float = DUAL_STEP
    adaptive: bool = False
    # Return the last iterate instead of raising at the iteration cap
    allowIncomplete: bool = False
    poissonTol: float = POISSON_TOL

    def __post_init__(self):
        if not (self.tol > 0 and self.step > 0) or self.maxIter < 1:
            raise ValueError('Dual tolerance and step must be > 0 and the iteration cap >= 1')

    @classmethod
    def fromDict(cls, data: dict) -> 'DualParams':
        return cls(tol=float(data.get('tol', DUAL_TOL)), maxIter=int(data.get('max_iter', DUAL_MAXITER)),
                   step=float(data.get('step', DUAL_STEP)), adaptive=bool(data.get('adaptive', False)),
                   allowIncomplete=bool(data.get('allow_incomplete', False)),
                   poissonTol=float(data.get('poisson_tol', POISSON_TOL)))


@dataclass(frozen=True, eq=False)
class DualSolution:
    sigmaBar: VectorField
    objective: float
    feasResidual: float
    iterations: int
    cornerFlux: Optional[CornerField] = None
    converged: bool = True
    step: float = DUAL_STEP

    def toSummary(self) -> dict:
        return {'objective': self.objective, 'feas_residual': self.feasResidual, 'iterations': self.iterations,
                'converged': self.converged, 'step': self.step}


class DivergenceProjector:
    """ W-orthogonal projection of corner fluxes onto {tau : div(fromCorners(tau)) = f}. """

    def __init__(self, g: Grid2D, f: ScalarField, tol: float = POISSON_TOL):
        self.grid = g
        self.f = f
        self.poisson = NeumannPoisson(g, averaged=True, tol=tol)

    def __call__(self, tau: np.ndarray) -> np.ndarray:
        g = self.grid
        sigma = fromCorners(g, CornerField.fromStacked(g, tau))
        residual = ScalarField(g, divergence(g, sigma).values - self.f.values)
        phi = self.poisson.solve(residual)
        return tau + toCorners(g, gradient(g, phi, neumann=True)).stacked()


def dualObjective(g: Grid2D, spec: PotentialSpec, tau: CornerField) -> float:
    return float(np.sum(cornerWeights(g) * evalConjugate(spec, tau.stacked())))


def solveDual(g: Grid2D, spec: PotentialSpec, f: ScalarField, params: DualParams = DualParams()) -> DualSolution:
    checkGrid(g, f.grid)
    checkCompatible(g, f)
    if spec.p > 2:
        logger.warning('Conjugate exponent p=%g exceeds 2, outside the range covered by the continuity theory',
                       spec.p)
    weights = cornerWeights(g)[..., None]

    def wnorm(t):
        return float(np.sqrt(np.sum(weights * t ** 2)))

    project = DivergenceProjector(g, f, tol=params.poissonTol)
    gamma = params.step
    z = np.zeros((g.ny + 1, g.nx + 1, 2))
    x = project(z)
    converged, it = False, 0
    for it in range(1, params.maxIter + 1):
        y = proxConjugate(spec, 2.0 * x - z, gamma)
        z = z + y - x
        xNew = project(z)
        change = wnorm(xNew - x)
        split = wnorm(y - x)
        x = xNew
        if it % 100 == 0:
            logger.debug('DR it=%d change=%.3e split=%.3e gamma=%g', it, change, split, gamma)
        if max(change, split) <= params.tol:
            converged = True
            break
        if params.adaptive and it % BALANCE_EVERY == 0:
            newGamma = gamma
            if split > BALANCE_RATIO * change:
                newGamma = 0.5 * gamma
            elif change > BALANCE_RATIO * split:
                newGamma = 2.0 * gamma
            if newGamma != gamma:
                z = x + (newGamma / gamma) * (z - x)
                gamma = newGamma

    if not converged:
        if not params.allowIncomplete:
            raise MaxIterations(f'Douglas-Rachford did not converge in {params.maxIter} iterations',
                                change=change, split=split)
        logger.warning('Dual solve stopped after %d iterations without converging', it)

    tau = CornerField.fromStacked(g, x)
    sigmaBar = fromCorners(g, tau)
    objective = dualObjective(g, spec, tau)
    feas = feasibilityResidual(g, sigmaBar, f)
    logger.info('Dual solve: %d iterations, objective %.12g, feasibility %.3e', it, objective, feas)
    return DualSolution(sigmaBar=sigmaBar, objective=objective, feasResidual=feas, iterations=it,
                        cornerFlux=tau, converged=converged, step=gamma)


def dualityGap(g: Grid2D, spec: PotentialSpec, primal: PrimalSolution, dual: DualSolution,
               f: ScalarField) -> float:
    """
    P + D with P the unregularized primal energy of u and D the dual objective of the
    corner flux. Nonnegative up to the feasibility error of the dual flux.
    """
    for field in (primal.u, primal.sigma, dual.sigmaBar, f):
        checkGrid(g, field.grid)
    base = spec.unregularized()
    tau = dual.cornerFlux if dual.cornerFlux is not None else toCorners(g, dual.sigmaBar)
    return primalEnergy(g, base, primal.u, f) + dualObjective(g, base, tau)


def gapReport(g: Grid2D, spec: PotentialSpec, primal: PrimalSolution, dual: DualSolution,
              f: ScalarField) -> dict:
    base = spec.unregularized()
    energy = primalEnergy(g, base, primal.u, f)
    gap = dualityGap(g, spec, primal, dual, f)
    objective = gap - energy
    scale = max(abs(energy), abs(objective), 1.0)
    sigmaNorm = dual.sigmaBar.norm()
    difference = (primal.sigma - dual.sigmaBar).norm()
    return {'primal_energy': energy, 'dual_objective': objective, 'gap': gap, 'relative_gap': gap / scale,
            'flux_difference': difference / sigmaNorm if sigmaNorm > 0 else difference}
