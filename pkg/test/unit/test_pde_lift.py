from unittest import TestCase, main

import numpy as np
from numpy.testing import assert_allclose

from finite_qrf import utils
from finite_qrf.errors import DimensionMismatchError, PreconditionError
from finite_qrf.integral import OperatorField, constant_field
from finite_qrf.operators import PAULI, Operator, identity
from finite_qrf.pde_lift import (
    DifferenceOperator,
    GridAction,
    LiftedOperator,
    duality_residual,
    forward_difference,
    fourier_mode_annihilator,
    kernel_basis,
    kernel_membership,
    kernel_preservation_residual,
    lift_apply,
    periodic_grid,
    symmetry_action_on_solutions,
    translation_action,
)
from finite_qrf.symmetry import cyclic_group


def wave_field(size: int = 4) -> OperatorField:
    return OperatorField(periodic_grid(size), [Operator(1j**p * PAULI["Z"]) for p in range(size)])


class DifferenceOperatorTest(TestCase):
    def test_forward_difference(self):
        d = forward_difference(4)
        assert_allclose([1, 1, 1, -3], d([0, 1, 2, 3]), atol=1e-12)

    def test_shape_must_match_grid(self):
        with self.assertRaises(DimensionMismatchError):
            DifferenceOperator(periodic_grid(3), np.eye(4))

    def test_kernel_basis(self):
        basis = kernel_basis(forward_difference(4))
        self.assertEqual((4, 1), basis.shape)
        assert_allclose(np.ones(4) / 2, np.abs(basis[:, 0]), atol=1e-12)
        mode = kernel_basis(fourier_mode_annihilator(4, 1))[:, 0]
        assert_allclose(1j * mode[0], mode[1], atol=1e-12)


class LiftTest(TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(5)

    def test_duality(self):
        values = []
        for _ in range(4):
            matrix = self.rng.normal(size=(2, 2)) + 1j * self.rng.normal(size=(2, 2))
            values.append(Operator(matrix))
        field = OperatorField(periodic_grid(4), values)
        self.assertLess(duality_residual(fourier_mode_annihilator(4, 3), field), 1e-12)
        self.assertLess(LiftedOperator(forward_difference(4), 2).duality_residual(field), 1e-12)

    def test_constant_field_solves_forward_difference(self):
        field = constant_field(periodic_grid(4), Operator(PAULI["X"]))
        membership = kernel_membership(forward_difference(4), field)
        self.assertTrue(membership.member)
        self.assertLess(membership.residual, 1e-12)

    def test_wave_field(self):
        self.assertTrue(kernel_membership(fourier_mode_annihilator(4, 1), wave_field()).member)
        membership = kernel_membership(forward_difference(4), wave_field())
        self.assertFalse(membership.member)
        self.assertAlmostEqual(np.sqrt(2), membership.residual)

    def test_lift_apply_entrywise(self):
        lifted = lift_apply(forward_difference(4), wave_field())
        assert_allclose((1j - 1) * PAULI["Z"], lifted.value(0).matrix, atol=1e-12)

    def test_lifted_operator_dimension(self):
        lifted = LiftedOperator(forward_difference(4), 3)
        with self.assertRaises(DimensionMismatchError):
            lifted(wave_field())

    def test_field_on_other_grid(self):
        with self.assertRaises(DimensionMismatchError):
            lift_apply(forward_difference(3), wave_field())


class GridSymmetryTest(TestCase):
    def test_translations_preserve_kernels(self):
        action = translation_action(4)
        self.assertLess(kernel_preservation_residual(forward_difference(4), action), 1e-12)
        self.assertLess(kernel_preservation_residual(fourier_mode_annihilator(4, 1), action), 1e-12)

    def test_shifted_wave(self):
        t = fourier_mode_annihilator(4, 1)
        shifted = symmetry_action_on_solutions(t, translation_action(4), wave_field(), 1)
        for p in range(4):
            assert_allclose(1j ** (p + 1) * PAULI["Z"], shifted.value(p).matrix, atol=1e-12)
        self.assertTrue(kernel_membership(t, shifted).member)

    def test_action_not_preserving_kernel(self):
        swap = GridAction(cyclic_group(2), periodic_grid(4), [[0, 1], [1, 0], [2, 2], [3, 3]])
        with self.assertRaises(PreconditionError) as context:
            symmetry_action_on_solutions(fourier_mode_annihilator(4, 1), swap, wave_field(), 1)
        self.assertGreater(context.exception.residual, 0.1)

    def test_near_solution_leaving_the_kernel(self):
        t = DifferenceOperator(periodic_grid(3), np.diag([0, 1, 100]))
        swap = GridAction(cyclic_group(2), periodic_grid(3), [[0, 0], [1, 2], [2, 1]])
        zero = Operator(np.zeros((2, 2)))
        near = OperatorField(periodic_grid(3), [Operator(PAULI["Z"]), Operator(5e-4 * PAULI["Z"]), zero])
        self.assertTrue(kernel_membership(t, near, 1e-3).member)
        self.assertIs(near.values[1], symmetry_action_on_solutions(t, swap, near, 0, 1e-3).values[1])
        with self.assertRaises(PreconditionError) as context:
            symmetry_action_on_solutions(t, swap, near, 1, 1e-3)
        self.assertAlmostEqual(0.05, context.exception.residual)
        off = OperatorField(periodic_grid(3), [zero, Operator(PAULI["X"]), zero])
        moved = symmetry_action_on_solutions(t, swap, off, 1, 1e-3)
        assert_allclose(PAULI["X"], moved.value(2).matrix)

    def test_invalid_grid_actions(self):
        with self.assertRaises(PreconditionError):
            GridAction(cyclic_group(2), periodic_grid(2), [[0, 0], [1, 0]])
        with self.assertRaises(DimensionMismatchError):
            GridAction(cyclic_group(2), periodic_grid(3), [[0, 1], [1, 0]])

    def test_on_field(self):
        field = OperatorField(periodic_grid(2), [identity(2), Operator(PAULI["Y"])])
        action = translation_action(2)
        assert_allclose(PAULI["Y"], action.on_field(field, 1).value(0).matrix)
        assert_allclose([2, 1], action.on_scalars([1, 2], 1))


class SeededLiftPropertiesTest(TestCase):
    def test_entrywise_lift_matches_duality_on_random_inputs(self):
        rng = utils.seed_everything(5)
        for trial in range(50):
            grid = periodic_grid(2 + trial % 5)
            t = DifferenceOperator(grid, utils.random_matrix(len(grid), len(grid), rng))
            field = utils.random_field(grid, 1 + trial % 3, rng)
            with self.subTest(trial=trial):
                self.assertLess(duality_residual(t, field), 1e-10)


if __name__ == "__main__":
    main()
