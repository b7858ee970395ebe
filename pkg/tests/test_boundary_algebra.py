import unittest

import numpy as np
from scipy.stats import unitary_group

from dirac_weyl.boundary_algebra import (
    AdmissiblePair,
    BoundaryScheme,
    BoundarySubspace,
    Completion,
    PhiParameter,
    canonical_frame,
    canonical_J,
    complete_pair,
    gamma_maps,
    green_identity_residual,
    pair_from_theta,
    same_subspace,
    theta_cross,
    theta_from_pair,
)
from dirac_weyl.dirac_core import SignatureMatrix
from dirac_weyl.settings import Settings
from dirac_weyl.utils import AdmissibilityError, ContractViolation, UnsupportedFrameError

SETTINGS = Settings()


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


class TestSubspaces(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_theta_cross_dimension_and_involution(self):
        for n in (2, 4, 6):
            J = SignatureMatrix.canonical(n // 2)
            for k in range(n + 1):
                theta = (BoundarySubspace.span(random_complex(self.rng, n, k)) if k
                         else BoundarySubspace.zero(n))
                cross = theta_cross(theta, J)
                self.assertEqual(cross.dim, n - theta.dim)
                self.assertTrue(same_subspace(theta_cross(cross, J), theta, 1e-8))

    def test_cross_of_dirichlet(self):
        # θ = {y1 = 0} is Lagrangian for the canonical J
        J = SignatureMatrix.canonical(1)
        theta = BoundarySubspace.span(np.array([[0.0], [1.0]]))
        self.assertTrue(same_subspace(theta_cross(theta, J), theta, 1e-12))

    def test_span_of_nothing(self):
        self.assertEqual(BoundarySubspace.span(np.zeros((3, 2))).dim, 0)

    def test_rejects_non_orthonormal(self):
        with self.assertRaises(ContractViolation):
            BoundarySubspace(np.array([[1.0], [1.0]]))


class TestPairs(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(5)

    def test_rank_deficient(self):
        with self.assertRaises(AdmissibilityError) as cm:
            AdmissiblePair(np.diag([1.0, 0.0]), np.zeros((2, 2)), SETTINGS)
        self.assertEqual(cm.exception.rank, 1)
        with self.assertRaises(AdmissibilityError):
            AdmissiblePair(np.zeros((1, 1)), np.zeros((1, 1)), SETTINGS)

    def test_shape_mismatch(self):
        with self.assertRaises(ContractViolation):
            AdmissiblePair(np.eye(2), np.eye(3), SETTINGS)

    def test_pair_theta_roundtrip(self):
        for p in (1, 2, 3):
            pair = AdmissiblePair(random_complex(self.rng, p, p), random_complex(self.rng, p, p), SETTINGS)
            theta = theta_from_pair(pair)
            self.assertEqual(theta.dim, p)
            again = theta_from_pair(pair_from_theta(theta, SETTINGS))
            self.assertTrue(same_subspace(theta, again, 1e-8))

    def test_pair_from_theta_dimension(self):
        with self.assertRaises(ContractViolation):
            pair_from_theta(BoundarySubspace.full(4), SETTINGS)

    def test_phi_must_be_hermitian(self):
        with self.assertRaises(ContractViolation):
            PhiParameter(np.array([[0, 1], [0, 0]]))
        pair = AdmissiblePair.from_phi(PhiParameter.scalar(0.3, 2))
        np.testing.assert_allclose(pair.C1, np.cos(0.3) * np.eye(2))
        np.testing.assert_allclose(pair.C2, np.sin(0.3) * np.eye(2))


class TestCompletion(unittest.TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(17)

    def test_random_pairs(self):
        for p in (1, 2, 3):
            J = SignatureMatrix.canonical(p)
            for _ in range(10):
                C1, C2 = random_complex(self.rng, p, p), random_complex(self.rng, p, p)
                pair = AdmissiblePair(C1, C2, SETTINGS)
                comp = complete_pair(pair, J, SETTINGS)
                self.assertLess(comp.residual(J), 1e-10)
                C1, C2, _, _ = comp.blocks("B")
                np.testing.assert_array_equal(C1, pair.C1)
                np.testing.assert_array_equal(C2, pair.C2)

    def test_lagrangian_pair_is_symplectic(self):
        J = SignatureMatrix.canonical(2)
        comp = complete_pair(AdmissiblePair(np.eye(2), np.zeros((2, 2)), SETTINGS), J, SETTINGS)
        self.assertEqual(comp.method, "symplectic")
        np.testing.assert_array_equal(comp.X, comp.Y)

    def test_non_lagrangian_pair_uses_complement(self):
        J = SignatureMatrix.canonical(1)
        comp = complete_pair(AdmissiblePair([[1.0]], [[1j]], SETTINGS), J, SETTINGS)
        self.assertEqual(comp.method, "complement")
        self.assertLess(comp.residual(J), 1e-10)

    def test_needs_canonical_form(self):
        with self.assertRaises(UnsupportedFrameError):
            complete_pair(AdmissiblePair([[1.0]], [[0.0]], SETTINGS), SignatureMatrix.diag_i(1), SETTINGS)

    def test_rotation(self):
        comp = Completion.from_phi(PhiParameter(np.array([[0.2, 0.1j], [-0.1j, -0.4]])), SETTINGS)
        self.assertTrue(comp.is_unitary_rotation)
        self.assertLess(comp.residual(SignatureMatrix.canonical(2)), 1e-12)

    def test_invalid_completion(self):
        J = SignatureMatrix.canonical(1)
        with self.assertRaises(ContractViolation):
            Completion(np.eye(2), 2 * np.eye(2), J, settings=SETTINGS)

    def test_gamma_maps(self):
        comp = Completion.identity(SignatureMatrix.canonical(1))
        g0, g1 = gamma_maps(comp, np.array([2.0, 3.0]))
        self.assertEqual((g0[0], g1[0]), (2.0, 3.0))
        with self.assertRaises(ContractViolation):
            gamma_maps(comp, np.array([1.0, 2.0]), side="C")


class TestCanonicalFrame(unittest.TestCase):
    def assert_canonical(self, J):
        U = canonical_frame(J, SETTINGS)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(J.n), atol=1e-12)
        np.testing.assert_allclose(U.conj().T @ J.matrix @ U, canonical_J(J.p), atol=1e-12)

    def test_named_forms(self):
        for p in (1, 2):
            self.assert_canonical(SignatureMatrix.canonical(p))
            self.assert_canonical(SignatureMatrix.diag_i(p))
            self.assert_canonical(SignatureMatrix.diag_minus_i(p))

    def test_general_form(self):
        V = unitary_group.rvs(4, random_state=3)
        J = SignatureMatrix(V @ SignatureMatrix.diag_i(2).matrix @ V.conj().T, tol=1e-10)
        self.assert_canonical(J)

    def test_unequal_kappa(self):
        J = SignatureMatrix(1j * np.diag([1.0, 1.0, 1.0, -1.0]))
        with self.assertRaises(ContractViolation):
            canonical_frame(J, SETTINGS)

    def test_scheme_defaults_to_identity(self):
        scheme = BoundaryScheme.build(SignatureMatrix.diag_minus_i(1), settings=SETTINGS)
        self.assertEqual(scheme.completion.method, "identity")
        self.assertEqual(scheme.theta.dim, 1)
        self.assertSetEqual(set(scheme.echo()), {"completion", "frame"})


class TestGreenIdentity(unittest.TestCase):
    def test_free_decaying_solutions(self):
        # J = [[0, -1], [1, 0]], Q = 0: F solves at λ = i, G at conj(μ) = 2i
        comp = Completion.identity(SignatureMatrix.canonical(1))

        def F(xs):
            return np.exp(-xs)[:, None] * np.array([-1j, 1.0])[None, :]

        def G(xs):
            return np.exp(-2 * xs)[:, None] * np.array([1.0, 1j])[None, :]

        self.assertLess(green_identity_residual(comp, 1j, F, -2j, G, (0.0, 30.0), SETTINGS), 1e-8)


if __name__ == '__main__':
    unittest.main()
