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
import os, shutil, tempfile
import numpy as np

# Scipion em imports
from pyworkflow.tests import BaseTest

# Plugin imports
from ..utils.errors import GridMismatch, IncompatibleSource, RegionOutOfDomain, EmptyRegion
from ..utils.grid import Grid2D, ScalarField, VectorField, CornerField, gradient, divergence, faceInner, \
    cellInner, toCorners, fromCorners, cornerInner, NeumannPoisson, projectDivergence, checkCompatible, \
    ballRegion, annulusRegion
from ..utils.io import writeField, readField, exportCsv, writeRegion, readRegion
from ..utils.primal import feasibilityResidual


def randomNeumann(rng, g):
    x = rng.standard_normal((g.ny, g.nx + 1))
    y = rng.standard_normal((g.ny + 1, g.nx))
    x[:, [0, -1]] = 0.0
    y[[0, -1], :] = 0.0
    return VectorField(g, x, y, neumann=True)


def randomMeanZero(rng, g):
    values = rng.standard_normal(g.shape)
    return ScalarField(g, values - values.mean())


class TestGrid(BaseTest):
    """ Staggered operators, Poisson solves and regions. """

    def setUp(self):
        self.rng = np.random.default_rng(7)
        self.grid = Grid2D(24, 16, lx=1.5, ly=1.0)

    def testGridChecks(self):
        with self.assertRaises(ValueError):
            Grid2D(2, 8)
        with self.assertRaises(ValueError):
            Grid2D(8, 8, lx=0.0)
        g = self.grid
        with self.assertRaises(GridMismatch):
            ScalarField(g, np.zeros((g.nx, g.nx)))
        with self.assertRaises(ValueError):
            ScalarField(g, np.full(g.shape, np.nan))
        with self.assertRaises(GridMismatch):
            gradient(Grid2D(8, 8), ScalarField(g, np.zeros(g.shape)))

    def testGradientDivergenceAdjoint(self):
        g = self.grid
        for _ in range(5):
            u = randomMeanZero(self.rng, g)
            s = randomNeumann(self.rng, g)
            lhs = faceInner(g, gradient(g, u, neumann=True), s)
            rhs = -cellInner(g, u, divergence(g, s))
            self.assertLessEqual(abs(lhs - rhs), 1e-12 * max(1.0, abs(lhs)))

    def testCornerAdjoint(self):
        g = self.grid
        for _ in range(5):
            s = randomNeumann(self.rng, g)
            t = CornerField(g, self.rng.standard_normal((g.ny + 1, g.nx + 1)),
                            self.rng.standard_normal((g.ny + 1, g.nx + 1)))
            lhs = cornerInner(g, toCorners(g, s), t)
            rhs = faceInner(g, s, fromCorners(g, t))
            self.assertLessEqual(abs(lhs - rhs), 1e-12 * max(1.0, abs(lhs)))

    def testCompatibility(self):
        g = self.grid
        checkCompatible(g, randomMeanZero(self.rng, g))
        with self.assertRaises(IncompatibleSource):
            checkCompatible(g, ScalarField(g, np.ones(g.shape)))
        with self.assertRaises(IncompatibleSource):
            projectDivergence(g, VectorField.zeros(g), ScalarField(g, np.ones(g.shape)))

    def testPoissonSolve(self):
        g = self.grid
        for averaged in (False, True):
            solver = NeumannPoisson(g, averaged=averaged)
            rhs = randomMeanZero(self.rng, g)
            phi = solver.solve(rhs)
            residual = solver.applyField(phi).values - rhs.values
            self.assertLess(np.linalg.norm(residual), 1e-8 * np.linalg.norm(rhs.values))
            self.assertAlmostEqual(phi.mean(), 0.0, places=12)
        self.assertEqual(NeumannPoisson(g).solve(ScalarField(g, np.zeros(g.shape))).norm(), 0.0)

    def testProjectDivergence(self):
        g = self.grid
        f = randomMeanZero(self.rng, g)
        s = VectorField(g, self.rng.standard_normal((g.ny, g.nx + 1)), self.rng.standard_normal((g.ny + 1, g.nx)))
        projected = projectDivergence(g, s, f)
        self.assertTrue(projected.neumann)
        self.assertLessEqual(feasibilityResidual(g, projected, f), 1e-10 * max(1.0, f.norm()))
        # The correction is orthogonal to divergence free fields
        curl = np.zeros((g.ny + 1, g.nx + 1))
        curl[1:-1, 1:-1] = self.rng.standard_normal((g.ny - 1, g.nx - 1))
        free = VectorField(g, np.diff(curl, axis=0) / g.hy, -np.diff(curl, axis=1) / g.hx, neumann=True)
        self.assertLess(np.abs(divergence(g, free).values).max(), 1e-9)
        correction = projected - s.clamped()
        self.assertLess(abs(faceInner(g, correction, free)), 1e-8 * correction.norm() * free.norm())

    def testProjectionIdempotent(self):
        g = self.grid
        f = randomMeanZero(self.rng, g)
        s = VectorField(g, self.rng.standard_normal((g.ny, g.nx + 1)), self.rng.standard_normal((g.ny + 1, g.nx)))
        once = projectDivergence(g, s, f)
        twice = projectDivergence(g, once, f)
        self.assertLessEqual((twice - once).norm(), 1e-9 * max(1.0, once.norm()))

    def testLaplacianOfQuadratic(self):
        g = self.grid
        X, Y = g.centers()
        u = ScalarField(g, 0.5 * X ** 2 + Y ** 2)
        lap = divergence(g, gradient(g, u)).values
        self.assertLess(np.abs(lap[1:-1, 1:-1] - 3.0).max(), 1e-9)

    def testRegions(self):
        g = Grid2D(16, 16)
        ball = ballRegion(g, (0.5, 0.5), 0.25)
        X, Y = g.centers()
        self.assertTrue(np.array_equal(ball, np.hypot(X - 0.5, Y - 0.5) <= 0.25))
        ring = annulusRegion(g, (0.5, 0.5), 0.125, 0.25)
        self.assertFalse(np.any(ring & ballRegion(g, (0.5, 0.5), 0.125)))
        self.assertTrue(np.array_equal(ring | ballRegion(g, (0.5, 0.5), 0.125), ball))
        with self.assertRaises(RegionOutOfDomain):
            ballRegion(g, (1.5, 0.5), 0.25)
        with self.assertRaises(EmptyRegion):
            ballRegion(g, (0.5, 0.5), 0.01)
        with self.assertRaises(ValueError):
            ballRegion(g, (0.5, 0.5), 0.0)
        fine = ballRegion(Grid2D(64, 64), (0.5, 0.5), 0.25)
        self.assertLessEqual(abs(fine.sum() / 4096 - np.pi * 0.0625) / (np.pi * 0.0625), 0.05)


class TestFieldFiles(BaseTest):
    """ Field, region and CSV files. """

    def setUp(self):
        self.tmpDir = tempfile.mkdtemp(prefix='degenflow-io-')
        self.rng = np.random.default_rng(3)

    def tearDown(self):
        shutil.rmtree(self.tmpDir, ignore_errors=True)

    def testFieldFile(self):
        g = Grid2D(6, 5, lx=1.2)
        s = randomNeumann(self.rng, g)
        back = readField(writeField(os.path.join(self.tmpDir, 's.dfield'), s))
        self.assertIsInstance(back, VectorField)
        self.assertEqual(back.grid, g)
        self.assertTrue(back.neumann)
        self.assertTrue(np.array_equal(back.x, s.x) and np.array_equal(back.y, s.y))

    def testExportCsv(self):
        g = Grid2D(6, 5)
        s = randomNeumann(self.rng, g)
        path = exportCsv(s, os.path.join(self.tmpDir, 's.csv'))
        with open(path) as fh:
            rows = fh.read().splitlines()
        self.assertEqual(rows[0], 'component,j,i,x,y,value')
        self.assertEqual(len(rows) - 1, g.ny * (g.nx + 1) + (g.ny + 1) * g.nx)
        component, j, i, x, y, value = rows[2].split(',')
        self.assertEqual((component, int(j), int(i)), ('x', 0, 1))
        self.assertEqual(float(value), s.x[0, 1])
        self.assertAlmostEqual(float(x), g.hx)

    def testRegionFile(self):
        g = Grid2D(8, 8)
        mask = ballRegion(g, (0.5, 0.5), 0.3)
        g2, back = readRegion(writeRegion(os.path.join(self.tmpDir, 'ball.json'), g, mask))
        self.assertEqual(g2, g)
        self.assertTrue(np.array_equal(back, mask))
