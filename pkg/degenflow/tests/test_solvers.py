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
# General imports
import numpy as np

# Scipion em imports
from pyworkflow.tests import BaseTest
from pyworkflow.utils import yellowStr

# Plugin imports
from ..constants import TWO_BLOCKS, CHECKER, GAUSSIAN_DIPOLE, EPS_SCHEDULE
from ..utils.errors import IncompatibleSource, MaxIterations
from ..utils.grid import Grid2D, ScalarField, VectorField
from ..utils.potentials import PotentialSpec
from ..utils.primal import PrimalParams, solvePrimal, feasibilityResidual
from ..utils.dual import DualParams, solveDual, dualityGap, gapReport
from ..utils.sources import builtinSources


def triangularFlux(g: Grid2D, a: float) -> np.ndarray:
    """ Exact face flux of the two-blocks source: a x on the left half, a (1 - x) on the right. """
    k = np.arange(g.nx + 1)
    return a * g.hx * np.minimum(k, g.nx - k).astype(float)


def twoBlocks(n: int, a: float = 1.0) -> ScalarField:
    return builtinSources(TWO_BLOCKS, Grid2D(n, n), {'amplitude': a}).field


class TestPrimal(BaseTest):
    """ Regularized Newton solver of the primal problem. """

    def testZeroSource(self):
        g = Grid2D(16, 16)
        sol = solvePrimal(g, PotentialSpec(), ScalarField(g, np.zeros(g.shape)))
        self.assertEqual(np.abs(sol.u.values).max(), 0.0)
        self.assertEqual(sol.sigma.norm(), 0.0)
        self.assertEqual(sol.energy, 0.0)

    def testQuasiOneDimensionalFlux(self):
        f = twoBlocks(32)
        g = f.grid
        sol = solvePrimal(g, PotentialSpec(q=2.0), f)
        exact = triangularFlux(g, 1.0)
        self.assertLessEqual(np.abs(sol.sigma.x - exact[None, :]).max(), 0.02 * 0.5)
        self.assertLess(np.abs(sol.sigma.y).max(), 1e-8)
        self.assertLess(feasibilityResidual(g, sol.sigma, f), 1e-7)
        # The solution does not depend on y
        self.assertLess(np.abs(sol.u.values - sol.u.values[:1, :]).max(), 1e-8)

    def testEnergyDecreases(self):
        f = builtinSources(CHECKER, Grid2D(16, 16), {'amplitude': 4.0}).field
        sol = solvePrimal(f.grid, PotentialSpec(q=2.0), f)
        self.assertLess(feasibilityResidual(f.grid, sol.sigma, f), 1e-7)
        self.assertGreater(sol.maxGradient, 1.0)
        self.assertLess(sol.energy, 0.0)
        self.assertEqual(sol.epsSchedule[-1], 0.0)

    def testRandomStart(self):
        f = twoBlocks(16, 2.0)
        spec = PotentialSpec(q=2.0)
        zero = solvePrimal(f.grid, spec, f)
        random = solvePrimal(f.grid, spec, f, PrimalParams(seed=11))
        self.assertAlmostEqual(zero.energy, random.energy, places=8)
        self.assertLess((zero.sigma - random.sigma).norm(), 1e-6)

    def testEnergyHistoryMonotone(self):
        g = Grid2D(64, 64)
        f = builtinSources(GAUSSIAN_DIPOLE, g, {'amplitude': 4.0}).field
        sol = solvePrimal(g, PotentialSpec(q=2.0), f)
        steps = np.diff(np.asarray(sol.history))
        slack = 1e-12 * max(1.0, abs(sol.energy))
        print(yellowStr(f'Largest energy increase over {steps.size} Newton steps: {steps.max():.3e}'))
        # Lowering the regularization lowers the energy, so the whole history is nonincreasing
        self.assertLessEqual(steps.max(), slack)
        self.assertLessEqual(sol.history[-1], sol.history[0])

    def testHalvedSchedule(self):
        f = twoBlocks(32)
        g, spec = f.grid, PotentialSpec(q=2.0)
        default = solvePrimal(g, spec, f)
        halved = solvePrimal(g, spec, f, PrimalParams(epsSchedule=tuple(0.5 * e for e in EPS_SCHEDULE)))
        self.assertEqual(halved.epsSchedule[0], 0.5 * EPS_SCHEDULE[0])
        self.assertLessEqual((default.sigma - halved.sigma).norm(), 1e-3)

    def testRegularizedEnergy(self):
        f = twoBlocks(16, 2.0)
        plain = solvePrimal(f.grid, PotentialSpec(q=2.0), f)
        self.assertIsNone(plain.regularizedEnergy)
        self.assertNotIn('regularized_energy', plain.toSummary())

        sol = solvePrimal(f.grid, PotentialSpec(q=2.0, regEps=1e-2), f)
        summary = sol.toSummary()
        self.assertEqual(sol.epsSchedule[-1], 1e-2)
        # The quadratic term only adds energy at the same u
        self.assertGreater(sol.regularizedEnergy, sol.energy)
        self.assertEqual(summary['energy'], sol.energy)
        self.assertEqual(summary['regularized_energy'], sol.regularizedEnergy)

    def testInvalidInputs(self):
        g = Grid2D(8, 8)
        with self.assertRaises(IncompatibleSource):
            solvePrimal(g, PotentialSpec(), ScalarField(g, np.ones(g.shape)))
        with self.assertRaises(ValueError):
            PrimalParams(epsSchedule=(1e-3, 1e-2))
        with self.assertRaises(ValueError):
            PrimalParams(tol=0.0)


class TestDual(BaseTest):
    """ Douglas-Rachford solver of the dual problem and the duality gap. """

    def testZeroSource(self):
        g = Grid2D(16, 16)
        sol = solveDual(g, PotentialSpec(), ScalarField(g, np.zeros(g.shape)))
        self.assertTrue(sol.converged)
        self.assertEqual(sol.sigmaBar.norm(), 0.0)
        self.assertEqual(sol.objective, 0.0)

    def testFeasibleFlux(self):
        f = builtinSources(CHECKER, Grid2D(16, 16), {'amplitude': 2.0}).field
        sol = solveDual(f.grid, PotentialSpec(q=2.0), f, DualParams(tol=1e-6, maxIter=5000, allowIncomplete=True))
        self.assertIsInstance(sol.sigmaBar, VectorField)
        self.assertTrue(sol.sigmaBar.neumann)
        self.assertLess(feasibilityResidual(f.grid, sol.sigmaBar, f), 1e-8)

    def testIterationCap(self):
        f = twoBlocks(16)
        with self.assertRaises(MaxIterations):
            solveDual(f.grid, PotentialSpec(), f, DualParams(maxIter=1))
        sol = solveDual(f.grid, PotentialSpec(), f, DualParams(maxIter=1, allowIncomplete=True))
        self.assertFalse(sol.converged)
        self.assertEqual(sol.iterations, 1)

    def testQuasiOneDimensionalGap(self):
        f = twoBlocks(32)
        g, spec = f.grid, PotentialSpec(q=2.0)
        primal = solvePrimal(g, spec, f)
        dual = solveDual(g, spec, f, DualParams(tol=1e-8))
        report = gapReport(g, spec, primal, dual, f)
        print(yellowStr(f'Quasi-1D gap on 32x32: {report}'))
        self.assertGreaterEqual(dualityGap(g, spec, primal, dual, f), -1e-8)
        self.assertLessEqual(abs(report['relative_gap']), 1e-4)
        self.assertLessEqual(report['flux_difference'], 1e-3)
        exact = triangularFlux(g, 1.0)
        self.assertLessEqual(np.abs(dual.sigmaBar.x - exact[None, :]).max(), 0.02 * 0.5)

    def testPointwiseExtremality(self):
        f = twoBlocks(32)
        g, spec = f.grid, PotentialSpec(q=2.0)
        primal = solvePrimal(g, spec, f)
        dual = solveDual(g, spec, f, DualParams(tol=1e-8))
        tau = dual.cornerFlux.stacked()
        force = primal.cornerFlux.stacked()
        size = np.linalg.norm(tau, axis=-1)
        active = size > 0.05
        error = np.linalg.norm(tau - force, axis=-1)[active] / size[active]
        print(yellowStr(f'Relative corner flux mismatch on {active.sum()} corners: {error.max():.3e}'))
        self.assertGreater(active.sum(), 0)
        self.assertLessEqual(error.max(), 0.05)

    def testTruncatedGap(self):
        f = twoBlocks(32)
        g, spec = f.grid, PotentialSpec(q=2.0)
        primal = solvePrimal(g, spec, f)
        converged = solveDual(g, spec, f, DualParams(tol=1e-8))
        truncated = solveDual(g, spec, f, DualParams(maxIter=10, allowIncomplete=True))
        self.assertFalse(truncated.converged)
        self.assertGreater(dualityGap(g, spec, primal, truncated, f), dualityGap(g, spec, primal, converged, f))


class TestQuasiOneDimensionalAcceptance(BaseTest):
    """ Two-blocks source with q = 2 on the 128 x 128 grid. """

    def test(self):
        f = twoBlocks(128)
        g, spec = f.grid, PotentialSpec(q=2.0)
        primal = solvePrimal(g, spec, f)
        exact = triangularFlux(g, 1.0)
        error = np.abs(primal.sigma.x - exact[None, :]).max()
        print(yellowStr(f'Primal flux error {error:.3e} against the peak 0.5'))
        self.assertLessEqual(error, 0.02 * 0.5)

        dual = solveDual(g, spec, f)
        report = gapReport(g, spec, primal, dual, f)
        print(yellowStr(f'Gap report: {report}'))
        self.assertGreaterEqual(report['gap'], -1e-8)
        self.assertLessEqual(report['relative_gap'], 1e-4)
        self.assertLessEqual(report['flux_difference'], 1e-3)
