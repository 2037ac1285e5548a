from unittest import TestCase, main

import numpy as np
from numpy.testing import assert_allclose

from finite_qrf.errors import DimensionMismatchError, InvariantViolationError, PreconditionError
from finite_qrf.group_frames import (
    GroupFrame,
    SystemAction,
    condition_on_frame_state,
    duality_check,
    equivariance_residual,
    external_frame_transform,
    gauge_relational_local_observable,
    group_space,
    ideal_group_frame,
    invariance_violation,
    localizability_curve,
    localizability_family,
    orbit_identity_residual,
    origin_shift_residual,
    reduce_frame,
    reduction_residual,
    relational_local_observable,
    relative_state,
    relative_state_from_measure,
    relative_state_covariance_residual,
    relativize,
    restrict,
    restriction_factorization_residual,
    translation_field,
    unit_preservation_residual,
)
from finite_qrf.integral import OperatorField
from finite_qrf.measure import Povm, ideal_povm
from finite_qrf.operators import (
    PAULI,
    Operator,
    State,
    basis_projector,
    identity,
    maximally_mixed,
    pure_state,
    unitary_channel,
)
from finite_qrf.symmetry import (
    Torsor,
    UnitaryRep,
    cyclic_group,
    dihedral_group,
    direct_product,
    regular_representation,
    subgroup_from_elements,
    trivial_representation,
)


def random_state(rng: np.random.Generator, dim: int) -> State:
    matrix = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    matrix = matrix @ matrix.conj().T
    return State(matrix / np.trace(matrix))


def random_hermitian(rng: np.random.Generator, dim: int) -> Operator:
    matrix = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return Operator(matrix + matrix.conj().T)


class Z2FrameTest(TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(3)
        self.z2 = cyclic_group(2)
        self.sys = SystemAction(UnitaryRep(self.z2, [PAULI["I"], PAULI["X"]]))
        self.frame = ideal_group_frame(self.z2)

    def test_ideal_frame_is_sharp(self):
        self.assertTrue(self.frame.is_sharp())
        self.assertEqual(2, self.frame.dim)
        self.assertIs(self.z2, self.frame.covariance_group)

    def test_non_covariant_frame_is_rejected(self):
        with self.assertRaises(InvariantViolationError) as context:
            GroupFrame(self.z2, trivial_representation(self.z2, 2), ideal_povm(group_space(self.z2)), name="fixed")
        self.assertEqual("covariance", context.exception.invariant)
        self.assertAlmostEqual(1.0, context.exception.violation)

    def test_relative_state(self):
        rho = pure_state([1, 0])
        assert_allclose(rho.matrix, relative_state(rho, pure_state([1, 0]), self.frame, self.sys).matrix, atol=1e-12)
        mixed = relative_state(rho, maximally_mixed(2), self.frame, self.sys)
        assert_allclose(np.eye(2) / 2, mixed.matrix, atol=1e-12)

    def test_relative_state_from_measure(self):
        rho = pure_state([1, 0])
        weighted = relative_state_from_measure(rho, [0.25, 0.75], self.sys)
        assert_allclose(np.diag([0.25, 0.75]), weighted.matrix, atol=1e-12)
        with self.assertRaises(DimensionMismatchError):
            relative_state_from_measure(rho, [1.0], self.sys)

    def test_relativize_is_invariant_and_dual(self):
        for _ in range(5):
            a = random_hermitian(self.rng, 2)
            rho, omega = random_state(self.rng, 2), random_state(self.rng, 2)
            self.assertLess(invariance_violation(a, self.frame, self.sys), 1e-12)
            self.assertLess(duality_check(rho, omega, a, self.frame, self.sys), 1e-12)
            self.assertLess(orbit_identity_residual(rho, omega, a, self.frame, self.sys), 1e-12)
            self.assertLess(relative_state_covariance_residual(rho, omega, self.frame, self.sys), 1e-12)
            self.assertLess(restriction_factorization_residual(a, omega, self.frame, self.sys), 1e-12)

    def test_relativize_of_z(self):
        relativized = relativize(Operator(PAULI["Z"]), self.frame, self.sys)
        expected = np.kron(PAULI["Z"], np.diag([1, 0])) - np.kron(PAULI["Z"], np.diag([0, 1]))
        assert_allclose(expected, relativized.matrix, atol=1e-12)

    def test_unit_preservation(self):
        self.assertLess(unit_preservation_residual(self.frame, self.sys), 1e-12)

    def test_system_on_other_group(self):
        other = SystemAction(trivial_representation(cyclic_group(2), 2))
        with self.assertRaises(DimensionMismatchError):
            relativize(identity(2), self.frame, other)

    def test_localizability_curve(self):
        family = localizability_family(pure_state([1, 0]), [0.0, 0.125, 0.25, 0.5, 1.0])
        curve = localizability_curve(Operator(PAULI["Z"]), self.frame, self.sys, family)
        assert_allclose([0.0, 0.125, 0.25, 0.5, 1.0], curve, atol=1e-12)
        with self.assertRaises(ValueError):
            localizability_curve(Operator(PAULI["Z"]), self.frame, self.sys, [])

    def test_restrict(self):
        omega = State(np.diag([0.25, 0.75]))
        restricted = restrict(Operator(PAULI["Z"]), omega, self.frame, self.sys)
        assert_allclose(-0.5 * PAULI["Z"], restricted.matrix, atol=1e-12)

    def test_condition_on_frame_state_dimension(self):
        with self.assertRaises(DimensionMismatchError):
            condition_on_frame_state(identity(3), pure_state([1, 0]), 2)

    def test_origin_shift(self):
        torsor = Torsor(self.z2, {"p": 0, "q": 1})
        rho = random_state(self.rng, 2)
        self.assertLess(origin_shift_residual(rho, {"p": 0.3, "q": 0.7}, torsor, 1, self.sys), 1e-12)


class ExternalTransformTest(TestCase):
    def setUp(self):
        self.z2 = cyclic_group(2)
        self.sys = SystemAction(UnitaryRep(self.z2, [PAULI["I"], PAULI["X"]]))
        self.frame = ideal_group_frame(self.z2)
        shifted = Povm(group_space(self.z2), [basis_projector(1, 2), basis_projector(0, 2)])
        self.frame_prime = GroupFrame(self.z2, regular_representation(self.z2), shifted, name="shifted")
        self.swap = unitary_channel(Operator(PAULI["X"]))

    def test_swap_relates_frames(self):
        self.assertLess(equivariance_residual(self.swap, self.frame, self.frame_prime), 1e-12)
        residual = external_frame_transform(Operator(PAULI["Z"]), self.frame, self.frame_prime, self.swap, self.sys)
        self.assertLess(residual, 1e-12)

    def test_mismatching_observable(self):
        with self.assertRaises(PreconditionError) as context:
            external_frame_transform(Operator(PAULI["Z"]), self.frame, self.frame, self.swap, self.sys)
        self.assertAlmostEqual(1.0, context.exception.residual)

    def test_frames_on_different_groups(self):
        other = ideal_group_frame(cyclic_group(2))
        with self.assertRaises(DimensionMismatchError):
            equivariance_residual(self.swap, self.frame, other)


class DihedralFrameTest(TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)
        sd = dihedral_group(4)
        self.d4 = sd.product
        self.reflection = sd.embed_acting(1)
        self.rep = regular_representation(self.d4)
        self.sys = SystemAction(self.rep)
        self.frame = ideal_group_frame(self.d4)

    def permutation_channel(self, images):
        matrix = np.zeros((self.d4.order, self.d4.order), dtype=complex)
        matrix[np.arange(self.d4.order), images] = 1.0
        return unitary_channel(Operator(matrix))

    def test_left_multiplication_relates_frames(self):
        images = [int(i) for i in self.d4.mul[self.reflection]]
        povm = Povm(group_space(self.d4), [basis_projector(i, self.d4.order) for i in images])
        frame_prime = GroupFrame(self.d4, self.rep, povm, name="reflected")
        psi = self.permutation_channel(images)
        self.assertLess(equivariance_residual(psi, self.frame, frame_prime), 1e-12)
        for _ in range(3):
            a = random_hermitian(self.rng, self.d4.order)
            self.assertLess(external_frame_transform(a, self.frame, frame_prime, psi, self.sys), 1e-12)

    def test_right_multiplication_is_not_equivariant(self):
        psi = self.permutation_channel([int(i) for i in self.d4.mul[:, self.reflection]])
        self.assertGreaterEqual(equivariance_residual(psi, self.frame, self.frame), 1.0 - 1e-12)
        with self.assertRaises(PreconditionError):
            external_frame_transform(random_hermitian(self.rng, self.d4.order), self.frame, self.frame, psi,
                                     self.sys)

    def test_origin_shift_by_every_element(self):
        torsor = Torsor(self.d4, {f"x{g}": g for g in self.d4.elements})
        weights = self.rng.dirichlet(np.ones(self.d4.order))
        measure = {f"x{g}": w for g, w in zip(self.d4.elements, weights)}
        rho = random_state(self.rng, self.d4.order)
        for h in self.d4.elements:
            self.assertLess(origin_shift_residual(rho, measure, torsor, h, self.sys), 1e-12)


class ReductionTest(TestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)
        self.z4 = cyclic_group(4)
        self.inclusion = subgroup_from_elements(self.z4, [0, 2], name="evens")
        self.sub_frame = ideal_group_frame(self.inclusion.sub)
        self.sys = SystemAction(regular_representation(self.z4))

    def test_reduced_frame(self):
        reduced = reduce_frame(self.sub_frame, self.inclusion)
        self.assertIs(self.z4, reduced.group)
        self.assertIs(self.inclusion.sub, reduced.covariance_group)
        assert_allclose(np.zeros((2, 2)), reduced.povm.effect(1).matrix)
        assert_allclose(basis_projector(1, 2).matrix, reduced.povm.effect(2).matrix)

    def test_reduction_residual(self):
        a = random_hermitian(self.rng, 4)
        self.assertLess(reduction_residual(a, self.sub_frame, self.inclusion, self.sys), 1e-12)
        reduced = reduce_frame(self.sub_frame, self.inclusion)
        self.assertLess(invariance_violation(a, reduced, self.sys), 1e-12)

    def test_inclusion_must_start_at_sub_frame(self):
        with self.assertRaises(DimensionMismatchError):
            reduce_frame(ideal_group_frame(cyclic_group(2)), self.inclusion)


class LocalObservableTest(TestCase):
    def test_relational_local_observable(self):
        z2 = cyclic_group(2)
        frame = ideal_group_frame(z2)
        field = OperatorField(group_space(z2), [Operator(PAULI["Z"]), Operator(PAULI["X"])])
        local = relational_local_observable(field, frame, State(np.diag([0.25, 0.75])))
        assert_allclose(0.25 * PAULI["Z"] + 0.75 * PAULI["X"], local.matrix, atol=1e-12)
        assert_allclose(PAULI["Z"], relational_local_observable(field, frame, pure_state([1, 0])).matrix, atol=1e-12)

    def test_translation_field(self):
        d4 = dihedral_group(4)
        sys = SystemAction(regular_representation(d4.product))
        a = basis_projector(0, 8)
        field = translation_field(a, d4, sys)
        self.assertEqual(4, len(field.space))
        assert_allclose(basis_projector(1, 8).matrix, field.value(1).matrix, atol=1e-12)
        with self.assertRaises(DimensionMismatchError):
            translation_field(a, d4, SystemAction(regular_representation(cyclic_group(8))))

    def test_gauge_relational_local_observable(self):
        z2 = cyclic_group(2)
        frame = ideal_group_frame(direct_product(z2, z2))
        field = OperatorField(group_space(z2), [Operator(PAULI["Z"]), Operator(PAULI["X"])])
        gauge = UnitaryRep(z2, [PAULI["I"], PAULI["X"]])
        local = gauge_relational_local_observable(field, frame, maximally_mixed(4), gauge)
        assert_allclose(0.5 * PAULI["X"], local.matrix, atol=1e-12)
        with self.assertRaises(DimensionMismatchError):
            gauge_relational_local_observable(field, ideal_group_frame(z2), maximally_mixed(2), gauge)


if __name__ == "__main__":
    main()
