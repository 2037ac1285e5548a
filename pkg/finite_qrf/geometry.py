from logging import getLogger
from typing import Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from finite_qrf.bundles import (BundleFrame, FrameMorphism, LocalSection, PrincipalBundle, QuantumField,
                                apply_frame_morphism, fiber_coordinate, restrict_field, trivial_bundle)
from finite_qrf.errors import DimensionMismatchError, InvalidElementError, PreconditionError
from finite_qrf.integral import OperatorField, ov_integrate
from finite_qrf.measure import Povm, SampleSpace, born_measure
from finite_qrf.names import (classification_diffeomorphism, classification_isometry, path_variants, variant_lifted,
                              variant_on_section, variant_stationary_subgroup)
from finite_qrf.operators import Operator, zero
from finite_qrf.options import DEFAULT_TOLERANCE
from finite_qrf.pde_lift import DifferenceOperator, lift_apply
from finite_qrf.symmetry import Element, FiniteGroup, SubgroupInclusion, act_on_operator, left_cosets

logger = getLogger("finite_qrf_geometry")

BundlePoint = Tuple[Hashable, Element]


class FrameBundleModel:
    """
    A finite stand-in for the frame bundle of space-time: the product bundle M x G_L for a finite "big" group G_L
    together with a "little" subgroup H < G_L. Left cosets wH play the role of metrics at a point (metric sectors).
    """

    def __init__(self, base: Iterable[Hashable], inclusion: SubgroupInclusion, name: str = "frame-bundle"):
        """
        :param base: The base points.
        :param inclusion: The inclusion H -> G_L.
        :param name: A name used in messages.
        """
        self.inclusion = inclusion
        self.bundle: PrincipalBundle = trivial_bundle(base, inclusion.parent, name=name)
        self.sectors, self.coset_of = left_cosets(inclusion)
        self.name = name

    @property
    def big_group(self) -> FiniteGroup:
        return self.inclusion.parent

    @property
    def little_group(self) -> FiniteGroup:
        return self.inclusion.sub

    @property
    def base(self) -> SampleSpace:
        return self.bundle.base

    def sector(self, b: BundlePoint) -> int:
        return int(self.coset_of[b[1]])

    def representative(self, sector: int) -> Element:
        return self.sectors[sector][0]


def metric_from_section(model: FrameBundleModel, section: LocalSection) -> Dict[Hashable, int]:
    """
    The metric sector of every base point in the section's domain: the coset of the section's fiber element.
    """
    if section.bundle is not model.bundle:
        raise DimensionMismatchError("Section does not belong to the model's bundle.")
    return {p: model.sector(section(p)) for p in section.domain}


class MetricSubBundle(NamedTuple):
    sectors: Dict[Hashable, int]
    bundle: PrincipalBundle
    embedding: Dict[BundlePoint, BundlePoint]
    tetrad: LocalSection


def metric_sub_bundle(model: FrameBundleModel, section: LocalSection) -> MetricSubBundle:
    """
    The H-sub-bundle of the points in the section's sectors, {(p, w0(p) l) : l in H} with w0(p) the fiber element of
    the section, with its embedding into the frame bundle and the tetrad section (p, e) mapped onto the section.
    """
    sectors = metric_from_section(model, section)
    small = trivial_bundle(section.domain, model.little_group, name=f"{model.name}|{section.name}")
    embedding = {(p, l): (p, model.big_group.multiply(section(p)[1], model.inclusion(l))) for p, l in small.total}
    tetrad = LocalSection(small, {p: (p, model.little_group.identity) for p in section.domain},
                          name=f"tetrad({section.name})")
    return MetricSubBundle(sectors, small, embedding, tetrad)


def stratify(model: FrameBundleModel, p: Hashable) -> List[List[BundlePoint]]:
    """
    The partition of the fiber over p into metric sectors, in the order of the cosets.
    """
    model.base.index(p)
    return [[(p, w) for w in coset] for coset in model.sectors]


def factorize_point(model: FrameBundleModel, b: BundlePoint) -> Tuple[Hashable, int, Element]:
    """
    Writes b = (p, r l) with r the representative of its sector and l in H, returning (p, sector, l).
    """
    p, w = b
    sector = model.sector(b)
    group = model.big_group
    return p, sector, model.inclusion.preimage(group.multiply(group.inverse(model.representative(sector)), w))


class GeometryProbabilities(NamedTuple):
    cells: Dict[Tuple[Hashable, int], float]
    assignments: Dict[Tuple[int, ...], float]

    def base_marginal(self, p: Hashable) -> float:
        return sum(weight for (q, _), weight in self.cells.items() if q == p)


def indefinite_geometry_probabilities(model: FrameBundleModel, frame: BundleFrame,
                                      omega: Operator) -> GeometryProbabilities:
    """
    Probabilities of metric sectors under the frame state omega.

    :return: The Born probability of every (base point, sector) cell, which sum to one, and for every global
        sector assignment over U the probability mu_omega(B_g) of the corresponding sub-bundle's points.
    """
    if frame.bundle is not model.bundle:
        raise DimensionMismatchError("Frame does not live on the model's bundle.")
    measure = frame.measure(omega)
    region = frame.region
    cells = {(p, s): 0.0 for p in region for s in range(len(model.sectors))}
    for b, weight in zip(frame.space, measure):
        cells[(b[0], model.sector(b))] += float(weight)
    assignments = {}
    for assignment in np.ndindex(*([len(model.sectors)] * len(region))):
        assignments[tuple(int(s) for s in assignment)] = sum(cells[(p, s)] for p, s in zip(region, assignment))
    return GeometryProbabilities(cells, assignments)


class PathFrame:
    """
    A frame whose observable lives on a path: an ordered parameter set I, a path gamma: I -> M, an optional lift
    into the frame bundle and a POVM on I, or on pairs (t, l) of parameters and little-group elements.
    """

    def __init__(self, parameters: Sequence[Hashable], path: Mapping[Hashable, Hashable], povm: Povm,
                 lift: Optional[Mapping[Hashable, BundlePoint]] = None,
                 stationary: Optional[SubgroupInclusion] = None, name: str = "path"):
        self.parameters = SampleSpace(parameters)
        missing = [t for t in self.parameters if t not in path]
        if missing:
            raise InvalidElementError(f"{name}: path undefined at {missing}.")
        if lift is not None:
            for t in self.parameters:
                if lift[t][0] != path[t]:
                    raise PreconditionError(f"{name}: lift at {t!r} does not lie over the path.")
        self.path = dict(path)
        self.povm = povm
        self.lift = dict(lift) if lift is not None else None
        self.stationary = stationary
        self.name = name


def _oriented(field: QuantumField, model: FrameBundleModel, p: Hashable, l: Element) -> Operator:
    return act_on_operator(field.sys_rep, field(p), model.inclusion(l))


def path_restricted_observable(pf: PathFrame, model: FrameBundleModel, section: LocalSection, field: QuantumField,
                               omega: Operator, variant: str = variant_on_section) -> Operator:
    """
    The restriction of the field to the path, smeared against the path frame's Born measure.

    on-section: sum_t phi(gamma(t)) mu(t)
    lifted: sum_t phi(gamma(t)).c(t) mu(t), c(t) the fiber coordinate of the lift relative to the section
    indefinite-orientation: sum_{t, l} phi(gamma(t)).l mu(t, l)
    stationary-subgroup: as indefinite-orientation with l restricted to the stationary subgroup
    """
    if variant not in path_variants:
        raise ValueError(f"Unknown path variant {variant!r}, expected one of {path_variants}.")
    if field.sys_rep.group is not model.big_group:
        raise DimensionMismatchError("Field must carry a representation of the big group.")
    measure = born_measure(pf.povm, omega)
    total = zero(field.dim)
    if variant in (variant_on_section, variant_lifted):
        if pf.povm.space != pf.parameters:
            raise PreconditionError(f"Variant {variant} needs a POVM on the path parameters.")
        if variant == variant_lifted and pf.lift is None:
            raise PreconditionError("Lifted variant needs a lift of the path.")
        for t, weight in zip(pf.parameters, measure):
            value = field(pf.path[t])
            if variant == variant_lifted:
                value = act_on_operator(field.sys_rep, value, fiber_coordinate(model.bundle, section, pf.lift[t]))
            total = total + value * weight
        return total
    for point, weight in zip(pf.povm.space, measure):
        if not isinstance(point, tuple) or len(point) != 2 or point[0] not in pf.parameters:
            raise PreconditionError(f"Variant {variant} needs a POVM on (parameter, orientation) pairs.")
        t, l = point
        if variant == variant_stationary_subgroup:
            if pf.stationary is None:
                raise PreconditionError("Stationary variant needs a stationary subgroup.")
            if not pf.stationary.contains(l):
                raise PreconditionError(f"Orientation {l} is outside the stationary subgroup.")
        total = total + _oriented(field, model, pf.path[t], l) * weight
    return total


class IsometryClassification(NamedTuple):
    classification: str
    residual: float


def isometric_frame_transform(m: FrameMorphism, model: FrameBundleModel, field: QuantumField,
                              tol: float = DEFAULT_TOLERANCE) -> IsometryClassification:
    """
    Classifies a frame morphism on the frame bundle as an isometry when theta keeps every point in its metric
    sector, and as a general diffeomorphism otherwise, then measures the transformation identity.
    """
    if m.source.bundle is not model.bundle or m.target.bundle is not model.bundle:
        raise DimensionMismatchError("Morphism must act on the model's bundle.")
    preserving = all(model.sector(b) == model.sector(c) for b, c in m.theta.items())
    classification = classification_isometry if preserving else classification_diffeomorphism
    residual = apply_frame_morphism(m, field, tol)
    logger.debug("Morphism %s classified as %s.", m.name, classification)
    return IsometryClassification(classification, residual)


def _equation_weight(residual: float, tol: float, soft_width: Optional[float]) -> float:
    if soft_width is None:
        return 1.0 if residual <= tol else 0.0
    return float(np.exp(-residual**2 / (2 * soft_width**2)))


def sector_equation_weights(model: FrameBundleModel, field: QuantumField,
                            equations: Mapping[int, DifferenceOperator], tol: float = DEFAULT_TOLERANCE,
                            soft_width: Optional[float] = None) -> Dict[int, float]:
    """
    The weight of each metric sector: an indicator that the field solves the sector's equation, or a Gaussian in
    the equation's residual when a width is given.
    """
    weights = {}
    for sector in range(len(model.sectors)):
        if sector not in equations:
            raise PreconditionError(f"No equation declared for sector {sector}.")
        equation = equations[sector]
        solved = lift_apply(equation, field.on_space(equation.grid))
        residual = max(value.norm() for value in solved.values)
        weights[sector] = _equation_weight(residual, tol, soft_width)
    return weights


def gr_coupled_relativize(model: FrameBundleModel, section: LocalSection, frame: BundleFrame, field: QuantumField,
                          equations: Mapping[int, DifferenceOperator], tol: float = DEFAULT_TOLERANCE,
                          soft_width: Optional[float] = None) -> Operator:
    """
    sum_b delta_sector(b) phi(pi(b)).c(b) (x) E({b}), where delta is the weight of the sector of b from
    sector_equation_weights and c(b) the fiber coordinate relative to the section.
    """
    if frame.bundle is not model.bundle or section.bundle is not model.bundle:
        raise DimensionMismatchError("Frame and section must live on the model's bundle.")
    weights = sector_equation_weights(model, field, equations, tol, soft_width)
    values = [act_on_operator(field.sys_rep, field(b[0]), fiber_coordinate(model.bundle, section, b))
              * weights[model.sector(b)] for b in frame.space]
    return ov_integrate(OperatorField(frame.space, values), frame.povm)


class ReducedRestriction(NamedTuple):
    full: Operator
    reduced: Operator
    outside_mass: float

    @property
    def residual(self) -> float:
        return self.full.distance(self.reduced)


def reduced_restriction(model: FrameBundleModel, section: LocalSection, frame: BundleFrame, field: QuantumField,
                        omega: Operator, tol: float = DEFAULT_TOLERANCE) -> ReducedRestriction:
    """
    Restricts the field once in the full frame-bundle model and once in the reduced H-model of the section's
    metric, where the orientation of a sub-bundle point (p, l) is its tetrad coordinate l.

    :raises PreconditionError: if the Born measure of omega has mass outside the section's sub-bundle.
    """
    if frame.section is not section:
        raise PreconditionError("Frame must be oriented by the given section.")
    sub = metric_sub_bundle(model, section)
    measure = dict(zip(frame.space, frame.measure(omega)))
    inside = set(sub.embedding.values())
    outside = float(sum(weight for b, weight in measure.items() if b not in inside))
    if outside > tol:
        raise PreconditionError(f"Frame state has mass {outside} outside the section's metric sub-bundle.", outside)
    reduced = zero(field.dim)
    for (p, l), b in sub.embedding.items():
        coordinate = fiber_coordinate(sub.bundle, sub.tetrad, (p, l))
        reduced = reduced + _oriented(field, model, p, coordinate) * measure[b]
    return ReducedRestriction(restrict_field(field, frame, omega), reduced, outside)
