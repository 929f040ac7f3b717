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

# Plugin imports
from ..constants import CUSTOM_TABLE
from ..utils.errors import DegenerateKink, NotElliptic, Unsupported
from ..utils.potentials import PotentialSpec, evalPotential, evalForce, evalHessian, evalConjugate, \
    numericalConjugate, proxConjugate, invertForce, gammaDelta, ellipticityFloor, hessianBound

# Same profile as H_(2): phi(r) = r - 1 past the unit ball
LINEAR_TABLE = ((0.0, 0.0), (1.0, 0.0), (5.0, 4.0))


def randomVectors(rng, n, scale):
    angles = rng.uniform(0, 2 * np.pi, n)
    radii = rng.uniform(0, scale, n)
    return np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=-1)


class TestPotentials(BaseTest):
    """ Pointwise potential, conjugate and force inversion checks. """

    def setUp(self):
        self.rng = np.random.default_rng(1234)

    def testForceVanishesOnUnitBall(self):
        for q in (1.5, 2.0, 3.0):
            spec = PotentialSpec(q=q)
            z = randomVectors(self.rng, 500, 1.0)
            self.assertEqual(np.abs(evalForce(spec, z)).max(), 0.0)
            self.assertEqual(np.abs(evalPotential(spec, z)).max(), 0.0)

    def testForceIsPotentialGradient(self):
        spec = PotentialSpec(q=3.0)
        z = randomVectors(self.rng, 100, 3.0)
        step = 1e-6
        for k, e in enumerate(np.eye(2)):
            numeric = (evalPotential(spec, z + step * e) - evalPotential(spec, z - step * e)) / (2 * step)
            self.assertLess(np.abs(numeric - evalForce(spec, z)[:, k]).max(), 1e-6)

    def testClosedConjugateMatchesLegendre(self):
        # p = 1.5 and p = 2
        for q in (3.0, 2.0):
            spec = PotentialSpec(q=q)
            sigma = randomVectors(self.rng, 200, 3.0)
            error = np.abs(evalConjugate(spec, sigma) - numericalConjugate(spec, sigma)).max()
            self.assertLessEqual(error, 1e-4, f'Conjugate mismatch {error:.2e} for q={q}')

    def testFenchelYoungEquality(self):
        spec = PotentialSpec(q=2.5)
        z = randomVectors(self.rng, 300, 4.0)
        sigma = evalForce(spec, z)
        lhs = evalPotential(spec, z) + evalConjugate(spec, sigma)
        self.assertLess(np.abs(lhs - np.sum(z * sigma, axis=-1)).max(), 1e-10)

    def testProxConjugate(self):
        spec = PotentialSpec(q=2.0)
        tau = 0.3
        sigma0 = randomVectors(self.rng, 400, 3.0)
        out = proxConjugate(spec, sigma0, tau)
        s0 = np.linalg.norm(sigma0, axis=-1)
        s = np.linalg.norm(out, axis=-1)

        self.assertEqual(s[s0 <= tau].max(initial=0.0), 0.0)
        moving = s0 > tau
        optimality = s[moving] - s0[moving] + tau * (1.0 + s[moving] ** (spec.p - 1.0))
        self.assertLess(np.abs(optimality).max(), 1e-10)
        cross = sigma0[moving, 0] * out[moving, 1] - sigma0[moving, 1] * out[moving, 0]
        self.assertLess(np.abs(cross).max(), 1e-12)

    def testProxBeatsRadialPerturbations(self):
        spec = PotentialSpec(q=2.0)
        tau = 0.3
        sigma0 = randomVectors(self.rng, 50, 3.0)
        out = proxConjugate(spec, sigma0, tau)

        def objective(sigma):
            return evalConjugate(spec, sigma) + np.sum((sigma - sigma0) ** 2, axis=-1) / (2.0 * tau)

        best = objective(out)
        radial = sigma0 / np.linalg.norm(sigma0, axis=-1)[:, None]
        for xi in self.rng.uniform(-0.1, 0.1, 100):
            self.assertTrue(np.all(best <= objective(out + xi * radial) + 1e-12))

    def testHessianExamples(self):
        spec = PotentialSpec(q=2.0)
        z = np.array([2.0, 0.0])
        self.assertTrue(np.allclose(evalHessian(spec, z), np.diag([1.0, 0.5]), atol=1e-14))
        step = 1e-6
        jacobian = np.stack([(evalForce(spec, z + step * e) - evalForce(spec, z - step * e)) / (2 * step)
                             for e in np.eye(2)], axis=-1)
        self.assertTrue(np.allclose(jacobian, np.diag([1.0, 0.5]), atol=1e-8))
        regular = PotentialSpec(q=2.0, regEps=0.1)
        self.assertTrue(np.allclose(evalHessian(regular, np.zeros(2)), np.diag([0.1, 0.1]), atol=1e-15))

    def testRegularizedHessianFloor(self):
        for q in (2.0, 3.0):
            spec = PotentialSpec(q=q, regEps=0.2)
            self.assertGreaterEqual(ellipticityFloor(spec, 0.01), 0.2)
            z = randomVectors(self.rng, 500, 4.0)
            smallest = np.linalg.eigvalsh(evalHessian(spec, z))[:, 0]
            self.assertGreaterEqual(smallest.min(), 0.2 - 1e-12)
        self.assertGreaterEqual(ellipticityFloor(PotentialSpec(q=1.5, regEps=0.2), 0.01), 0.2)

    def testStrongMonotonicity(self):
        for q in (2.0, 3.0):
            spec = PotentialSpec(q=q)
            z, w = randomVectors(self.rng, 2000, 4.0), randomVectors(self.rng, 2000, 4.0)
            inner = np.sum((evalForce(spec, z) - evalForce(spec, w)) * (z - w), axis=-1)
            self.assertGreaterEqual(inner.min(), -1e-12)
            for delta in (0.1, 0.5):
                floor = ellipticityFloor(spec, delta)
                angle = self.rng.uniform(0, 2 * np.pi)
                e, normal = np.array([np.cos(angle), np.sin(angle)]), np.array([-np.sin(angle), np.cos(angle)])
                # Both points in the half-space {x.e >= 1 + delta} and inside the working radius
                along = 1.0 + delta + self.rng.uniform(0.0, 2.0, (2, 2000))
                across = self.rng.uniform(-1.5, 1.5, (2, 2000))
                z = along[0][:, None] * e + across[0][:, None] * normal
                w = along[1][:, None] * e + across[1][:, None] * normal
                inner = np.sum((evalForce(spec, z) - evalForce(spec, w)) * (z - w), axis=-1)
                gap = inner - floor * np.sum((z - w) ** 2, axis=-1)
                self.assertGreaterEqual(gap.min(), -1e-12, f'q={q}, delta={delta}')

    def testProxNeedsClosedConjugate(self):
        with self.assertRaises(Unsupported):
            proxConjugate(PotentialSpec(q=2.0, regEps=1e-3), np.ones((3, 2)), 0.1)
        with self.assertRaises(ValueError):
            proxConjugate(PotentialSpec(), np.ones((3, 2)), 0.0)

    def testStrictConjugate(self):
        with self.assertRaises(Unsupported):
            evalConjugate(PotentialSpec(kind=CUSTOM_TABLE, table=LINEAR_TABLE), np.ones((2, 2)), strict=True)

    def testCustomTableMatchesPower(self):
        table = PotentialSpec(kind=CUSTOM_TABLE, table=LINEAR_TABLE)
        power = PotentialSpec(q=2.0)
        z = randomVectors(self.rng, 500, 6.0)
        self.assertLess(np.abs(evalPotential(table, z) - evalPotential(power, z)).max(), 1e-12)
        self.assertLess(np.abs(evalForce(table, z) - evalForce(power, z)).max(), 1e-12)

    def testInvalidSpecs(self):
        with self.assertRaises(ValueError):
            PotentialSpec(q=1.0)
        with self.assertRaises(ValueError):
            PotentialSpec(regEps=-1.0)
        with self.assertRaises(ValueError):
            PotentialSpec(kind=CUSTOM_TABLE, table=((0.0, 0.0), (1.0, 0.5), (2.0, 1.0)))
        with self.assertRaises(ValueError):
            PotentialSpec(kind='cubic')

    def testHessianKink(self):
        with self.assertRaises(DegenerateKink):
            evalHessian(PotentialSpec(q=1.5), np.array([[1.0, 0.0]]))
        # Regularized and q >= 2 potentials are fine on the sphere
        evalHessian(PotentialSpec(q=1.5, regEps=1e-3), np.array([[1.0, 0.0]]))
        hess = evalHessian(PotentialSpec(q=2.0), np.array([[0.0, 1.0]]))
        self.assertTrue(np.all(np.isfinite(hess)))

    def testEllipticityFloor(self):
        self.assertAlmostEqual(1.0 / ellipticityFloor(PotentialSpec(q=2.0), 1.0), 2.0, places=6)
        self.assertAlmostEqual(ellipticityFloor(PotentialSpec(q=3.0), 0.1), 0.01 / 1.1, places=8)
        with self.assertRaises(ValueError):
            ellipticityFloor(PotentialSpec(), 0.0)
        flat = PotentialSpec(kind=CUSTOM_TABLE, table=((0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 1.0)))
        with self.assertRaises(NotElliptic):
            ellipticityFloor(flat, 0.5)

    def testHessianBound(self):
        # H_(2) has Hessian eigenvalues 1 and (r - 1)/r
        self.assertAlmostEqual(hessianBound(PotentialSpec(q=2.0)), 1.0, places=12)
        self.assertAlmostEqual(hessianBound(PotentialSpec(q=3.0), radius=4.0), 6.0, places=9)

    def testInvertForce(self):
        for spec in (PotentialSpec(q=3.0), PotentialSpec(q=1.5, regEps=0.01),
                     PotentialSpec(kind=CUSTOM_TABLE, table=LINEAR_TABLE)):
            a = randomVectors(self.rng, 200, 3.0)
            self.assertLess(np.abs(evalForce(spec, invertForce(spec, a)) - a).max(), 1e-9)
        self.assertEqual(np.abs(invertForce(PotentialSpec(), np.zeros((1, 2)))).max(), 0.0)

    def testGammaDeltaLipschitz(self):
        for q in (2.0, 3.0):
            spec = PotentialSpec(q=q)
            for delta in (0.1, 0.5, 1.0):
                bound = 1.0 / ellipticityFloor(spec, delta)
                a1 = self.rng.uniform(-3, 3, (100000, 2))
                a2 = a1 + self.rng.normal(0, 0.05, (100000, 2))
                angle = self.rng.uniform(0, 2 * np.pi)
                e = (np.cos(angle), np.sin(angle))
                ratio = np.abs(gammaDelta(spec, a1, delta, e) - gammaDelta(spec, a2, delta, e)) / \
                    np.linalg.norm(a1 - a2, axis=-1)
                self.assertLessEqual(ratio.max(), bound * (1 + 1e-9), f'q={q}, delta={delta}')
        with self.assertRaises(ValueError):
            gammaDelta(PotentialSpec(), np.ones((1, 2)), 0.0)
