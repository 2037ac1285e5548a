from unittest import TestCase, main

import numpy as np
from numpy.testing import assert_allclose

from finite_qrf.errors import DimensionMismatchError, InvalidElementError, InvariantViolationError
from finite_qrf.operators import PAULI, Operator, basis_projector, pure_state
from finite_qrf.symmetry import (
    FiniteGroup,
    SemidirectProduct,
    SubgroupInclusion,
    Torsor,
    UnitaryRep,
    act_on_operator,
    act_on_state,
    cyclic_group,
    dihedral_group,
    direct_product,
    duality_pairing_residual,
    factorize_semidirect,
    identity_inclusion,
    left_cosets,
    regular_representation,
    representation_violation,
    restrict_representation,
    subgroup_from_elements,
    symmetric_group,
    tensor_representation,
    trivial_inclusion,
)


class FiniteGroupTest(TestCase):
    def test_cyclic_group(self):
        z4 = cyclic_group(4)
        self.assertEqual(4, z4.order)
        self.assertEqual(3, z4.multiply(1, 2))
        self.assertEqual(3, z4.inverse(1))
        self.assertEqual(0, z4.product(1, 1, 1, 1))
        self.assertTrue(z4.is_abelian())

    def test_invalid_tables(self):
        with self.assertRaises(InvariantViolationError) as context:
            FiniteGroup([[0, 2], [2, 0]])
        self.assertEqual("closure", context.exception.invariant)
        with self.assertRaises(InvariantViolationError) as context:
            FiniteGroup([[0, 1], [1, 1]])
        self.assertEqual("inverse", context.exception.invariant)
        with self.assertRaises(InvariantViolationError) as context:
            FiniteGroup([[1, 0], [0, 1]])
        self.assertEqual("identity", context.exception.invariant)

    def test_invalid_element(self):
        z2 = cyclic_group(2)
        with self.assertRaises(InvalidElementError):
            z2.multiply(0, 2)
        with self.assertRaises(InvalidElementError):
            z2.index("missing")

    def test_symmetric_group(self):
        s3 = symmetric_group(3)
        self.assertEqual(6, s3.order)
        self.assertFalse(s3.is_abelian())
        self.assertEqual((0, 1, 2), s3.labels[s3.identity])
        # (1, 0, 2) o (0, 2, 1) = (1, 2, 0)
        self.assertEqual(s3.index((1, 2, 0)), s3.multiply(s3.index((1, 0, 2)), s3.index((0, 2, 1))))

    def test_direct_product(self):
        group = direct_product(cyclic_group(2), cyclic_group(3))
        self.assertEqual(6, group.order)
        self.assertEqual((1, 2), group.labels[1 * 3 + 2])
        self.assertEqual(1 * 3 + 0, group.multiply(1 * 3 + 1, 0 * 3 + 2))
        self.assertTrue(group.is_abelian())


class SubgroupTest(TestCase):
    def test_subgroup_from_elements(self):
        inclusion = subgroup_from_elements(cyclic_group(4), [0, 2], name="evens")
        self.assertEqual(2, inclusion.sub.order)
        self.assertEqual([0, 2], inclusion.image)
        self.assertTrue(inclusion.contains(2))
        self.assertFalse(inclusion.contains(1))
        self.assertEqual(1, inclusion.preimage(2))
        with self.assertRaises(InvalidElementError):
            inclusion.preimage(3)

    def test_subgroup_not_closed(self):
        with self.assertRaises(InvariantViolationError) as context:
            subgroup_from_elements(cyclic_group(4), [0, 1])
        self.assertEqual("closure", context.exception.invariant)

    def test_inclusion_must_be_homomorphism(self):
        with self.assertRaises(InvariantViolationError) as context:
            SubgroupInclusion(cyclic_group(2), cyclic_group(4), [0, 1])
        self.assertEqual("homomorphism", context.exception.invariant)
        with self.assertRaises(InvariantViolationError) as context:
            SubgroupInclusion(cyclic_group(2), cyclic_group(4), [2, 0])
        self.assertEqual("identity", context.exception.invariant)

    def test_identity_and_trivial_inclusion(self):
        z3 = cyclic_group(3)
        self.assertEqual([0, 1, 2], identity_inclusion(z3).image)
        self.assertEqual([0], trivial_inclusion(z3).image)

    def test_left_cosets_in_s3(self):
        s3 = symmetric_group(3)
        inclusion = subgroup_from_elements(s3, [0, 1])
        cosets, coset_of = left_cosets(inclusion)
        self.assertEqual([(0, 1), (2, 3), (4, 5)], cosets)
        self.assertEqual([0, 0, 1, 1, 2, 2], coset_of.tolist())


class RepresentationTest(TestCase):
    def test_regular_representation_moves_projectors(self):
        s3 = symmetric_group(3)
        rep = regular_representation(s3)
        self.assertEqual(6, rep.dim)
        self.assertLess(representation_violation(rep), 1e-12)
        for x in s3.elements:
            for g in s3.elements:
                moved = act_on_operator(rep, basis_projector(x, 6), g)
                assert_allclose(basis_projector(s3.multiply(x, g), 6).matrix, moved.matrix, atol=1e-12)

    def test_non_homomorphism_is_rejected(self):
        with self.assertRaises(InvariantViolationError) as context:
            UnitaryRep(cyclic_group(3), [[[1]], [[-1]], [[1]]], name="bad")
        self.assertEqual("homomorphism", context.exception.invariant)
        self.assertAlmostEqual(2.0, context.exception.violation)

    def test_wrong_number_of_matrices(self):
        with self.assertRaises(InvariantViolationError):
            UnitaryRep(cyclic_group(2), [np.eye(2)])

    def test_non_unitary_matrix(self):
        with self.assertRaises(InvariantViolationError) as context:
            UnitaryRep(cyclic_group(2), [np.eye(2), 2 * np.eye(2)], name="scaled")
        self.assertEqual("unitarity", context.exception.invariant)
        self.assertEqual("scaled", context.exception.object_path)

    def test_representation_violation_of_unchecked_rep(self):
        rep = UnitaryRep.unchecked(cyclic_group(2), [np.eye(2), 1j * np.eye(2)])
        self.assertAlmostEqual(2.0, representation_violation(rep))

    def test_restrict_and_tensor(self):
        z4 = cyclic_group(4)
        phases = UnitaryRep(z4, [np.diag([1, 1j**g]) for g in z4.elements])
        inclusion = subgroup_from_elements(z4, [0, 2])
        restricted = restrict_representation(phases, inclusion)
        assert_allclose(PAULI["Z"], restricted(1).matrix, atol=1e-12)
        product = tensor_representation(phases, regular_representation(z4))
        self.assertEqual(8, product.dim)
        self.assertLess(representation_violation(product), 1e-12)
        with self.assertRaises(DimensionMismatchError):
            tensor_representation(phases, regular_representation(cyclic_group(4)))

    def test_action_duality(self):
        z2 = cyclic_group(2)
        flip = UnitaryRep(z2, [PAULI["I"], PAULI["X"]])
        rho = pure_state([1, 0])
        moved = act_on_state(flip, 1, rho)
        assert_allclose(pure_state([0, 1]).matrix, moved.matrix, atol=1e-12)
        a = Operator([[0.3, 1 - 2j], [1 + 2j, -1.0]])
        self.assertLess(duality_pairing_residual(flip, rho, a), 1e-12)
        with self.assertRaises(DimensionMismatchError):
            act_on_operator(flip, Operator(np.eye(3)), 1)


class SemidirectProductTest(TestCase):
    def test_dihedral_group(self):
        d4 = dihedral_group(4)
        group = d4.product
        self.assertEqual(8, group.order)
        self.assertFalse(group.is_abelian())
        self.assertEqual((1, 1), factorize_semidirect(d4, 5))
        for g in group.elements:
            t, l = factorize_semidirect(d4, g)
            self.assertEqual(g, group.multiply(d4.embed_normal(t), d4.embed_acting(l)))

    def test_reflection_inverts_rotations(self):
        d4 = dihedral_group(4)
        group = d4.product
        reflection = d4.embed_acting(1)
        rotation = d4.embed_normal(1)
        conjugated = group.product(reflection, rotation, group.inverse(reflection))
        self.assertEqual(d4.embed_normal(3), conjugated)

    def test_invalid_action(self):
        with self.assertRaises(InvariantViolationError):
            SemidirectProduct(cyclic_group(3), cyclic_group(2), [[0, 1, 2], [0, 1, 1]])
        with self.assertRaises(InvariantViolationError):
            SemidirectProduct(cyclic_group(3), cyclic_group(2), [[0, 2, 1], [0, 2, 1]])


class TorsorTest(TestCase):
    def test_shift_origin(self):
        torsor = Torsor(cyclic_group(3), {"a": 0, "b": 1, "c": 2})
        self.assertEqual("a", torsor.origin())
        self.assertEqual("c", torsor.act(2, "a"))
        shifted = torsor.shift_origin(1)
        self.assertEqual("b", shifted.origin())
        self.assertEqual(2, shifted.coordinates["a"])
        self.assertEqual("c", shifted.act(2, "a"))

    def test_coordinates_must_be_bijection(self):
        with self.assertRaises(InvariantViolationError):
            Torsor(cyclic_group(2), {"a": 0, "b": 0})


if __name__ == "__main__":
    main()
