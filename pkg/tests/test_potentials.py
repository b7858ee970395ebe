import unittest

import numpy as np

from dirac_weyl.potentials import (
    BlockPotential,
    ConstantPotential,
    ExpDecayPotential,
    SampledPotential,
    family_names,
    make_potential,
)
from dirac_weyl.utils import PotentialError, matrix_to_pairs, pairs_to_matrix, pluralize


class TestFamilies(unittest.TestCase):
    def test_registry(self):
        self.assertListEqual(family_names(), ["constant", "exp_decay", "nls_offdiag", "sampled", "zero"])

    def test_unknown_family(self):
        with self.assertRaises(PotentialError) as cm:
            make_potential("coulomb", 2)
        self.assertIn("zero", str(cm.exception))

    def test_exp_decay(self):
        Q = make_potential("exp_decay", 2, {"matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]], "mu": 2.0})
        np.testing.assert_allclose(Q(1.0), np.exp(-2.0) * np.diag([1, -1]))
        np.testing.assert_allclose(Q(-1.0), Q(1.0))
        self.assertEqual(Q.breakpoints, (0.0,))
        self.assertFalse(Q.is_constant)
        self.assertTrue(ExpDecayPotential(np.eye(2), mu=0).is_constant)

    def test_nls_shape(self):
        Q = make_potential("nls_offdiag", 4, {"q": [[[1, 0], [0.3, 0]], [[0.3, 0], [0.5, 0]]]})
        q = np.array([[1, 0.3], [0.3, 0.5]])
        np.testing.assert_allclose(Q(0.0)[:2, 2:], -1j * q)
        np.testing.assert_allclose(Q(0.0)[2:, :2], -1j * q)
        self.assertTrue(Q.is_constant)

    def test_nls_needs_symmetric_q(self):
        with self.assertRaises(PotentialError):
            make_potential("nls_offdiag", 4, {"q": [[1, 2], [0, 1]]})
        with self.assertRaises(PotentialError):
            make_potential("nls_offdiag", 3)

    def test_dimension_mismatch(self):
        with self.assertRaises(PotentialError):
            make_potential("constant", 4, {"matrix": [[1, 0], [0, 1]]})

    def test_non_finite_rejected(self):
        with self.assertRaises(PotentialError):
            make_potential("constant", 2, {"matrix": [[float("nan"), 0], [0, 1]]})
        with self.assertRaises(PotentialError):
            SampledPotential([0.0, 1.0], [np.eye(2), np.full((2, 2), np.inf)])

    def test_zero_takes_no_params(self):
        with self.assertRaises(PotentialError):
            make_potential("zero", 2, {"mu": 1})


class TestSampled(unittest.TestCase):
    def test_linear_interpolation_and_clamping(self):
        Q = SampledPotential([0.0, 2.0], [np.zeros((2, 2)), 2 * np.eye(2)], order=1)
        np.testing.assert_allclose(Q(1.0), np.eye(2))
        np.testing.assert_allclose(Q(5.0), 2 * np.eye(2))

    def test_repeated_abscissa_is_a_jump(self):
        xs = [0.0, 1.0, 1.0, 2.0]
        values = [np.zeros((1, 1)), np.zeros((1, 1)), np.ones((1, 1)), np.ones((1, 1))]
        Q = SampledPotential(xs, values, order=1)
        self.assertEqual(Q.breakpoints, (1.0,))
        self.assertAlmostEqual(Q(0.999)[0, 0], 0.0)
        self.assertAlmostEqual(Q(1.001)[0, 0], 1.0)

    def test_from_params_roundtrip(self):
        Q = SampledPotential([0.0, 1.0, 2.0], [np.eye(2), 2 * np.eye(2), 1j * np.eye(2)])
        again = make_potential("sampled", 2, Q.params())
        np.testing.assert_allclose(again(0.5), Q(0.5))

    def test_invalid(self):
        with self.assertRaises(PotentialError):
            SampledPotential([0.0], [np.eye(2)])
        with self.assertRaises(PotentialError):
            SampledPotential([1.0, 0.0], [np.eye(2), np.eye(2)])
        with self.assertRaises(PotentialError):
            make_potential("sampled", 2, {"xs": [0, 1]})


class TestDerived(unittest.TestCase):
    def test_adjoint_reflected_conjugated(self):
        Q0 = np.array([[1, 2j], [0, 1 - 1j]])
        Q = ExpDecayPotential(Q0, mu=1.0)
        np.testing.assert_allclose(Q.adjoint()(0.5), Q(0.5).conj().T)
        np.testing.assert_allclose(Q.reflected()(-0.5), Q(0.5))
        U = np.array([[0, 1], [1, 0]])
        np.testing.assert_allclose(Q.conjugated(U)(0.0), U @ Q0 @ U)
        self.assertEqual(Q.reflected().breakpoints, (0.0,))

    def test_block(self):
        Q = ConstantPotential(np.array([[1j, 0], [0, 1]]))
        block = BlockPotential(Q)(0.0)
        np.testing.assert_allclose(block, block.conj().T)
        self.assertEqual(block.shape, (4, 4))

    def test_split(self):
        Q = ConstantPotential(np.array([[1 + 2j, 3], [1j, 0]]))
        np.testing.assert_allclose(Q.q1(0) + 1j * Q.q2(0), Q(0))
        np.testing.assert_allclose(Q.q2(0), Q.q2(0).conj().T)


class TestCodec(unittest.TestCase):
    def test_pairs(self):
        mat = np.array([[1 + 2j, -3.5], [0, 1j]])
        self.assertEqual(matrix_to_pairs(mat)[0][0], [1.0, 2.0])
        np.testing.assert_array_equal(pairs_to_matrix(matrix_to_pairs(mat)), mat)
        np.testing.assert_array_equal(pairs_to_matrix([[1, [0, 1]]]), np.array([[1, 1j]]))

    def test_bad_pairs(self):
        with self.assertRaises(ValueError):
            pairs_to_matrix([[[1, 2, 3]]])
        with self.assertRaises(ValueError):
            pairs_to_matrix([])

    def test_pluralize(self):
        self.assertEqual(pluralize(1, "row"), "row")
        self.assertEqual(pluralize([1, 2], "row"), "rows")
        self.assertEqual(pluralize(0, "λ-value"), "λ-values")


if __name__ == '__main__':
    unittest.main()
