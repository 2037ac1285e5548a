from unittest import TestCase, main

import numpy as np
from numpy.testing import assert_allclose

from finite_qrf.bundles import (
    FrameMorphism,
    LocalSection,
    QuantumField,
    ideal_bundle_frame,
    identity_morphism,
    relativize_field,
)
from finite_qrf.errors import DimensionMismatchError, PreconditionError
from finite_qrf.geometry import (
    FrameBundleModel,
    PathFrame,
    factorize_point,
    gr_coupled_relativize,
    indefinite_geometry_probabilities,
    isometric_frame_transform,
    metric_from_section,
    metric_sub_bundle,
    path_restricted_observable,
    reduced_restriction,
    sector_equation_weights,
    stratify,
)
from finite_qrf.measure import SampleSpace, ideal_povm
from finite_qrf.names import (
    classification_diffeomorphism,
    classification_isometry,
    variant_indefinite_orientation,
    variant_lifted,
    variant_on_section,
    variant_stationary_subgroup,
)
from finite_qrf.operators import Operator, State, basis_projector, identity, maximally_mixed, unitary_channel
from finite_qrf.pde_lift import DifferenceOperator
from finite_qrf.symmetry import regular_representation, subgroup_from_elements, symmetric_group

DIAGONAL = np.arange(1, 7)
# Right multiplication by the transposition (0, 2, 1) swaps 0<->1, 2<->3 and 4<->5 in S3.
ORIENTED_DIAGONAL = [2, 1, 4, 3, 6, 5]


class GeometryTestCase(TestCase):
    def setUp(self):
        s3 = symmetric_group(3)
        self.model = FrameBundleModel(["x", "y"], subgroup_from_elements(s3, [0, 1], name="H"), name="fb")
        self.bundle = self.model.bundle
        self.tetrad = LocalSection(self.bundle, {"x": ("x", 0), "y": ("y", 0)}, name="tetrad")
        self.frame = ideal_bundle_frame(self.bundle, self.tetrad)
        self.field = QuantumField({"x": identity(6), "y": Operator(np.diag(DIAGONAL))},
                                  regular_representation(self.model.big_group), name="phi")


class FrameBundleModelTest(GeometryTestCase):
    def test_sectors(self):
        self.assertEqual([(0, 1), (2, 3), (4, 5)], self.model.sectors)
        self.assertEqual(1, self.model.sector(("x", 3)))
        self.assertEqual(4, self.model.representative(2))

    def test_stratify(self):
        strata = stratify(self.model, "y")
        self.assertEqual([[("y", 0), ("y", 1)], [("y", 2), ("y", 3)], [("y", 4), ("y", 5)]], strata)

    def test_factorize_point(self):
        self.assertEqual(("x", 1, 1), factorize_point(self.model, ("x", 3)))
        self.assertEqual(("y", 0, 0), factorize_point(self.model, ("y", 0)))

    def test_metric_from_section(self):
        mixed = LocalSection(self.bundle, {"x": ("x", 0), "y": ("y", 2)}, name="mixed")
        self.assertEqual({"x": 0, "y": 0}, metric_from_section(self.model, self.tetrad))
        self.assertEqual({"x": 0, "y": 1}, metric_from_section(self.model, mixed))

    def test_metric_sub_bundle(self):
        mixed = LocalSection(self.bundle, {"x": ("x", 0), "y": ("y", 2)}, name="mixed")
        sub = metric_sub_bundle(self.model, mixed)
        self.assertEqual(("y", 2), sub.embedding[("y", 0)])
        self.assertEqual(("y", 3), sub.embedding[("y", 1)])
        self.assertEqual(("x", 0), sub.tetrad("x"))


class ProbabilitiesTest(GeometryTestCase):
    def test_maximally_mixed_state(self):
        probabilities = indefinite_geometry_probabilities(self.model, self.frame, maximally_mixed(12))
        self.assertEqual(6, len(probabilities.cells))
        for weight in probabilities.cells.values():
            self.assertAlmostEqual(1 / 6, weight)
        self.assertEqual(9, len(probabilities.assignments))
        self.assertAlmostEqual(1 / 3, probabilities.assignments[(0, 2)])
        self.assertAlmostEqual(0.5, probabilities.base_marginal("x"))

    def test_localized_state(self):
        probabilities = indefinite_geometry_probabilities(self.model, self.frame, basis_projector(9, 12))
        self.assertAlmostEqual(1.0, probabilities.cells[("y", 1)])
        self.assertAlmostEqual(1.0, probabilities.assignments[(0, 1)])
        self.assertAlmostEqual(0.0, probabilities.assignments[(0, 0)])


class PathObservableTest(GeometryTestCase):
    def setUp(self):
        super().setUp()
        self.path = {0: "x", 1: "y"}
        self.on_parameters = PathFrame([0, 1], self.path, ideal_povm(SampleSpace([0, 1])),
                                       lift={0: ("x", 0), 1: ("y", 1)})
        self.pairs = SampleSpace([(0, 0), (0, 1), (1, 0), (1, 1)])

    def test_on_section(self):
        observable = path_restricted_observable(self.on_parameters, self.model, self.tetrad, self.field,
                                                State(np.diag([0.5, 0.5])), variant_on_section)
        assert_allclose(np.diag((1 + DIAGONAL) / 2), observable.matrix, atol=1e-12)

    def test_lifted(self):
        observable = path_restricted_observable(self.on_parameters, self.model, self.tetrad, self.field,
                                                basis_projector(1, 2), variant_lifted)
        assert_allclose(np.diag(ORIENTED_DIAGONAL), observable.matrix, atol=1e-12)

    def test_lifted_without_lift(self):
        pf = PathFrame([0, 1], self.path, ideal_povm(SampleSpace([0, 1])))
        with self.assertRaises(PreconditionError):
            path_restricted_observable(pf, self.model, self.tetrad, self.field, basis_projector(1, 2), variant_lifted)

    def test_indefinite_orientation(self):
        pf = PathFrame([0, 1], self.path, ideal_povm(self.pairs))
        observable = path_restricted_observable(pf, self.model, self.tetrad, self.field, basis_projector(3, 4),
                                                variant_indefinite_orientation)
        assert_allclose(np.diag(ORIENTED_DIAGONAL), observable.matrix, atol=1e-12)
        with self.assertRaises(PreconditionError):
            path_restricted_observable(pf, self.model, self.tetrad, self.field, basis_projector(3, 4),
                                       variant_on_section)

    def test_stationary_subgroup(self):
        stationary = subgroup_from_elements(self.model.little_group, [0], name="K")
        pf = PathFrame([0, 1], self.path, ideal_povm(self.pairs), stationary=stationary)
        with self.assertRaises(PreconditionError):
            path_restricted_observable(pf, self.model, self.tetrad, self.field, basis_projector(0, 4),
                                       variant_stationary_subgroup)
        narrow = PathFrame([0, 1], self.path, ideal_povm(SampleSpace([(0, 0), (1, 0)])), stationary=stationary)
        observable = path_restricted_observable(narrow, self.model, self.tetrad, self.field, basis_projector(1, 2),
                                                variant_stationary_subgroup)
        assert_allclose(np.diag(DIAGONAL), observable.matrix, atol=1e-12)

    def test_unknown_variant(self):
        with self.assertRaises(ValueError):
            path_restricted_observable(self.on_parameters, self.model, self.tetrad, self.field,
                                       basis_projector(1, 2), "sideways")

    def test_lift_must_lie_over_path(self):
        with self.assertRaises(PreconditionError):
            PathFrame([0, 1], self.path, ideal_povm(SampleSpace([0, 1])), lift={0: ("y", 0), 1: ("y", 1)})


class IsometryTest(GeometryTestCase):
    def test_identity_is_isometry(self):
        result = isometric_frame_transform(identity_morphism(self.frame), self.model, self.field)
        self.assertEqual(classification_isometry, result.classification)
        self.assertLess(result.residual, 1e-12)

    def test_left_rotation_is_diffeomorphism(self):
        group = self.model.big_group
        space = self.frame.space
        theta = {(p, w): (p, group.multiply(3, w)) for p, w in space}
        rotated = ideal_bundle_frame(self.bundle, LocalSection(self.bundle, {"x": ("x", 3), "y": ("y", 3)}))
        unitary = np.zeros((12, 12))
        for i, b in enumerate(space):
            unitary[i, space.index(theta[b])] = 1.0
        morphism = FrameMorphism(unitary_channel(Operator(unitary)), theta, self.frame, rotated, name="rotation")
        result = isometric_frame_transform(morphism, self.model, self.field)
        self.assertEqual(classification_diffeomorphism, result.classification)
        self.assertLess(result.residual, 1e-12)


class GrDegeneracyTest(GeometryTestCase):
    def setUp(self):
        super().setUp()
        grid = SampleSpace(["x", "y"])
        self.solved = DifferenceOperator(grid, np.zeros((2, 2)), name="solved")
        self.unsolved = DifferenceOperator(grid, np.eye(2), name="unsolved")

    def test_all_sectors_solved(self):
        equations = {s: self.solved for s in range(3)}
        coupled = gr_coupled_relativize(self.model, self.tetrad, self.frame, self.field, equations)
        assert_allclose(relativize_field(self.field, self.frame).matrix, coupled.matrix, atol=1e-12)

    def test_no_sector_solved(self):
        equations = {s: self.unsolved for s in range(3)}
        coupled = gr_coupled_relativize(self.model, self.tetrad, self.frame, self.field, equations)
        assert_allclose(np.zeros((72, 72)), coupled.matrix, atol=1e-12)

    def test_soft_weights(self):
        equations = {0: self.solved, 1: self.unsolved, 2: self.unsolved}
        weights = sector_equation_weights(self.model, self.field, equations, soft_width=6.0)
        self.assertAlmostEqual(1.0, weights[0])
        self.assertAlmostEqual(np.exp(-0.5), weights[1])
        self.assertEqual({0: 1.0, 1: 0.0, 2: 0.0}, sector_equation_weights(self.model, self.field, equations))

    def test_missing_equation(self):
        with self.assertRaises(PreconditionError):
            sector_equation_weights(self.model, self.field, {0: self.solved})


class ReducedRestrictionTest(GeometryTestCase):
    def test_agreement_inside_sub_bundle(self):
        result = reduced_restriction(self.model, self.tetrad, self.frame, self.field, basis_projector(7, 12))
        self.assertLess(result.residual, 1e-12)
        self.assertEqual(0.0, result.outside_mass)
        assert_allclose(np.diag(ORIENTED_DIAGONAL), result.full.matrix, atol=1e-12)

    def test_mass_outside_sub_bundle(self):
        with self.assertRaises(PreconditionError) as context:
            reduced_restriction(self.model, self.tetrad, self.frame, self.field, basis_projector(8, 12))
        self.assertAlmostEqual(1.0, context.exception.residual)

    def test_frame_on_other_section(self):
        other = LocalSection(self.bundle, {"x": ("x", 0), "y": ("y", 0)})
        with self.assertRaises(PreconditionError):
            reduced_restriction(self.model, other, self.frame, self.field, basis_projector(7, 12))

    def test_section_of_other_model(self):
        model = FrameBundleModel(["x", "y"], self.model.inclusion)
        with self.assertRaises(DimensionMismatchError):
            metric_from_section(model, self.tetrad)


if __name__ == "__main__":
    main()
