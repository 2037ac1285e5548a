from logging import getLogger
from typing import Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np
from numpy import ndarray

from finite_qrf.errors import DimensionMismatchError, InvalidElementError, InvariantViolationError, PreconditionError
from finite_qrf.integral import OperatorField, ov_integrate
from finite_qrf.measure import (CovariantPovm, Povm, SampleSpace, born_measure, check_covariance, compose_with_channel,
                                ideal_povm, is_sharp, point_measure, push_forward, total_variation)
from finite_qrf.operators import (Channel, Operator, apply_channel_heisenberg, compose_channels, identity_channel,
                                  lift_channel, matrix_units, zero)
from finite_qrf.options import DEFAULT_TOLERANCE
from finite_qrf.symmetry import (Element, FiniteGroup, SubgroupInclusion, UnitaryRep, act_on_operator,
                                 identity_inclusion, permutation_representation)

logger = getLogger("finite_qrf_bundles")


class PrincipalBundle:
    """
    A finite principal H-bundle: a total space of points with a projection onto a base and a free right action of
    H which preserves the fibers and is transitive on each of them.
    """

    def __init__(self, base: Iterable[Hashable], group: FiniteGroup, total: Iterable[Hashable],
                 proj: Mapping[Hashable, Hashable], action: Mapping[Hashable, Sequence[Hashable]],
                 name: str = "bundle"):
        """
        Initializes the bundle and checks local triviality fiber by fiber.
        :param base: The base points.
        :param group: The structure group H.
        :param total: The points of the total space.
        :param proj: The projection, proj[b] is the base point of b.
        :param action: action[b][g] is the point b.g, one entry per element index of H.
        :param name: A name used in messages.
        """
        self.base = SampleSpace(base)
        self.total = SampleSpace(total)
        self.group = group
        self.name = name
        try:
            self.proj = np.array([self.base.index(proj[b]) for b in self.total], dtype=int)
            table = np.array([[self.total.index(c) for c in action[b]] for b in self.total], dtype=int)
        except (KeyError, InvalidElementError) as error:
            raise InvariantViolationError("bundle-tables", f"projection or action is incomplete: {error}", name)
        if table.shape != (len(self.total), group.order):
            raise InvariantViolationError("bundle-tables", f"action table must have shape "
                                          f"{(len(self.total), group.order)}", name)
        self.action = table
        points = np.arange(len(self.total))
        if np.any(table[:, group.identity] != points):
            raise InvariantViolationError("action", "identity does not act trivially", name)
        # (b.g).h == b.(gh)
        if np.any(table[table, :] != table[:, group.mul]):
            raise InvariantViolationError("action", "action is not a right action", name)
        if np.any(self.proj[table] != self.proj[:, None]):
            raise InvariantViolationError("fiberwise", "action moves points between fibers", name)
        if any(len(set(row.tolist())) != group.order for row in table):
            raise InvariantViolationError("free", "action is not free", name)
        for p in range(len(self.base)):
            fiber = set(np.flatnonzero(self.proj == p).tolist())
            if not fiber or set(table[min(fiber), :].tolist()) != fiber:
                raise InvariantViolationError("local-triviality",
                                              f"fiber over {self.base.points[p]!r} is not a single orbit", name)
        table.setflags(write=False)
        self.proj.setflags(write=False)

    def project(self, b: Hashable) -> Hashable:
        return self.base.points[self.proj[self.total.index(b)]]

    def act(self, b: Hashable, g: Element) -> Hashable:
        return self.total.points[self.action[self.total.index(b), self.group.check_element(g)]]

    def fiber(self, p: Hashable) -> List[Hashable]:
        index = self.base.index(p)
        return [b for b, q in zip(self.total, self.proj) if q == index]

    def points_over(self, region: Iterable[Hashable]) -> List[Hashable]:
        """
        The points of pi^-1(region) in the order of the total space.
        """
        indices = {self.base.index(p) for p in region}
        return [b for b, q in zip(self.total, self.proj) if q in indices]


def trivial_bundle(base: Iterable[Hashable], group: FiniteGroup, name: str = "trivial") -> PrincipalBundle:
    """
    The product bundle M x H with points (p, w) and action (p, w).g = (p, wg).
    """
    base = list(base)
    total = [(p, w) for p in base for w in group.elements]
    proj = {b: b[0] for b in total}
    action = {(p, w): [(p, group.multiply(w, g)) for g in group.elements] for p, w in total}
    return PrincipalBundle(base, group, total, proj, action, name=name)


class LocalSection:
    """
    A right inverse of the projection over a region U of the base.
    """

    def __init__(self, bundle: PrincipalBundle, values: Mapping[Hashable, Hashable], name: str = "section"):
        for p, b in values.items():
            if bundle.project(b) != p:
                raise InvariantViolationError("section", f"point {b!r} does not lie over {p!r}", name)
        self.bundle = bundle
        self.values: Dict[Hashable, Hashable] = dict(values)
        self.name = name

    @property
    def domain(self) -> List[Hashable]:
        return [p for p in self.bundle.base if p in self.values]

    def __call__(self, p: Hashable) -> Hashable:
        if p not in self.values:
            raise InvalidElementError(f"{p!r} is outside the domain of {self.name}.")
        return self.values[p]


def orientation(bundle: PrincipalBundle, section: LocalSection, b: Hashable) -> Element:
    """
    The unique group element h with b.h = sigma(pi(b)).
    """
    target = bundle.total.index(section(bundle.project(b)))
    row = bundle.action[bundle.total.index(b)]
    return int(np.flatnonzero(row == target)[0])


def fiber_coordinate(bundle: PrincipalBundle, section: LocalSection, b: Hashable) -> Element:
    """
    The unique group element c with sigma(pi(b)).c = b, the inverse of the orientation.
    """
    return bundle.group.inverse(orientation(bundle, section, b))


def orientation_violations(bundle: PrincipalBundle, section: LocalSection) -> int:
    """
    Counts the points b over the domain of the section where b.h(b) misses sigma(pi(b)), plus the pairs (b, k)
    where h(b.k) differs from k^-1 h(b).
    """
    group = bundle.group
    violations = 0
    for b in bundle.points_over(section.domain):
        h = orientation(bundle, section, b)
        violations += bundle.act(b, h) != section(bundle.project(b))
        for k in group.elements:
            violations += orientation(bundle, section, bundle.act(b, k)) != group.multiply(group.inverse(k), h)
    return int(violations)


def transition_functions(bundle: PrincipalBundle, first: LocalSection, second: LocalSection) -> Dict[Hashable, Element]:
    """
    The gluing data t(p) with first(p).t(p) = second(p) on the overlap of both domains.
    """
    overlap = [p for p in first.domain if p in second.values]
    return {p: orientation(bundle, second, first(p)) for p in overlap}


def cocycle_violations(bundle: PrincipalBundle, sections: Sequence[LocalSection]) -> int:
    """
    Counts triple overlaps where t_ab(p) t_bc(p) differs from t_ac(p).
    """
    violations = 0
    for a in sections:
        for b in sections:
            for c in sections:
                t_ab, t_bc, t_ac = (transition_functions(bundle, a, b), transition_functions(bundle, b, c),
                                    transition_functions(bundle, a, c))
                for p in set(t_ab) & set(t_bc) & set(t_ac):
                    violations += bundle.group.multiply(t_ab[p], t_bc[p]) != t_ac[p]
    return violations


class BundleFrame:
    """
    A quantum reference frame on a principal bundle: a local section over U, a representation of the covariance
    group on the frame Hilbert space and a covariant POVM on pi^-1(U).
    """

    def __init__(self, bundle: PrincipalBundle, section: LocalSection, frame_rep: UnitaryRep, povm: Povm,
                 inclusion: Optional[SubgroupInclusion] = None, tol: float = DEFAULT_TOLERANCE, name: str = "frame"):
        """
        Initializes the frame and checks covariance E({b}).k = E({b.k}).
        :param bundle: The principal bundle.
        :param section: The local section fixing the gauge over U.
        :param frame_rep: The representation of the covariance group on the frame.
        :param povm: The frame observable, its sample points must be pi^-1(U) in the order of the total space.
        :param inclusion: (Optional) The covariance group's inclusion into the structure group, defaults to the
            identity.
        :param tol: The tolerance for the covariance invariant.
        :param name: A name used in messages.
        """
        inclusion = inclusion if inclusion is not None else identity_inclusion(bundle.group)
        if section.bundle is not bundle:
            raise DimensionMismatchError(f"{name}: section belongs to a different bundle.")
        if inclusion.parent is not bundle.group or inclusion.sub is not frame_rep.group:
            raise DimensionMismatchError(f"{name}: inclusion must embed the frame representation's group into H.")
        space = SampleSpace(bundle.points_over(section.domain))
        if povm.space != space:
            raise DimensionMismatchError(f"{name}: frame observable must be defined on pi^-1(U).")
        self.bundle = bundle
        self.section = section
        self.frame_rep = frame_rep
        self.povm = povm
        self.inclusion = inclusion
        self.name = name
        space_action = [[space.index(bundle.act(b, inclusion(k))) for k in frame_rep.group.elements] for b in space]
        self.observable = CovariantPovm(povm, frame_rep, space_action)
        report = check_covariance(self.observable, tol)
        if not report.passed:
            raise InvariantViolationError("covariance", f"E(b).g differs from E(b.g) by {report.violation} "
                                          f"at g={report.worst_element}, b={report.worst_point}", name,
                                          report.violation)

    @property
    def space(self) -> SampleSpace:
        return self.povm.space

    @property
    def region(self) -> List[Hashable]:
        return self.section.domain

    @property
    def dim(self) -> int:
        return self.povm.dim

    def measure(self, omega: Operator) -> ndarray:
        return born_measure(self.povm, omega)

    def is_sharp(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        return is_sharp(self.povm, tol)

    def is_ideal(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        """
        Ideal frames are sharp with rank-one effects, i.e. the observable is the basis projection of l^2(pi^-1(U)).
        """
        return self.is_sharp(tol) and self.dim == len(self.space) and all(
            abs(e.trace() - 1) <= tol for e in self.povm.effects)


def ideal_bundle_frame(bundle: PrincipalBundle, section: LocalSection, name: Optional[str] = None) -> BundleFrame:
    """
    The ideal frame on l^2(pi^-1(U)): H permutes the basis by its right action and the observable projects onto
    the basis states.
    """
    space = SampleSpace(bundle.points_over(section.domain))
    right_action = [[space.index(bundle.act(b, g)) for g in bundle.group.elements] for b in space]
    rep = permutation_representation(bundle.group, right_action, name=f"regular({bundle.name})")
    return BundleFrame(bundle, section, rep, ideal_povm(space), name=name or f"ideal({bundle.name})")


class QuantumField:
    """
    An operator-valued function on the base together with the action of the structure group on the system.
    """

    def __init__(self, values: Mapping[Hashable, Operator], sys_rep: UnitaryRep, name: str = "field"):
        if len(values) == 0:
            raise InvariantViolationError("field", "a field needs at least one value", name)
        if any(v.dim != sys_rep.dim for v in values.values()):
            raise DimensionMismatchError(f"{name}: all values must have the dimension {sys_rep.dim} of the system.")
        self.values: Dict[Hashable, Operator] = dict(values)
        self.sys_rep = sys_rep
        self.name = name

    @property
    def dim(self) -> int:
        return self.sys_rep.dim

    def __call__(self, p: Hashable) -> Operator:
        if p not in self.values:
            raise PreconditionError(f"{self.name} is undefined at {p!r}.")
        return self.values[p]

    def compose(self, phi: Mapping[Hashable, Hashable]) -> "QuantumField":
        """
        The field p -> self(phi(p)) on the domain of phi.
        """
        return QuantumField({p: self(q) for p, q in phi.items()}, self.sys_rep, name=f"{self.name}o")

    def on_space(self, space: SampleSpace) -> OperatorField:
        return OperatorField(space, [self(p) for p in space])


def _oriented_values(field: QuantumField, frame: BundleFrame) -> List[Operator]:
    if field.sys_rep.group is not frame.bundle.group:
        raise DimensionMismatchError("Field and frame must share the structure group.")
    bundle, section = frame.bundle, frame.section
    return [act_on_operator(field.sys_rep, field(bundle.project(b)), fiber_coordinate(bundle, section, b))
            for b in frame.space]


def relativize_field(field: QuantumField, frame: BundleFrame) -> Operator:
    """
    sum_b phi(pi(b)).c(b) (x) E({b}) over pi^-1(U), where c(b) is the fiber coordinate relative to the frame's
    section.
    """
    return ov_integrate(OperatorField(frame.space, _oriented_values(field, frame)), frame.povm)


def restrict_field(field: QuantumField, frame: BundleFrame, omega: Operator) -> Operator:
    """
    sum_b phi(pi(b)).c(b) mu_omega({b}).
    """
    measure = frame.measure(omega)
    total = zero(field.dim)
    for value, weight in zip(_oriented_values(field, frame), measure):
        total = total + value * weight
    return total


def field_invariance_violation(field: QuantumField, frame: BundleFrame) -> float:
    """
    max_k || Y(phi).(k, k) - Y(phi) || over the covariance group of the frame.
    """
    relativized = relativize_field(field, frame).matrix
    worst = 0.0
    for k in frame.frame_rep.group.elements:
        diagonal = np.kron(field.sys_rep(frame.inclusion(k)).matrix, frame.frame_rep(k).matrix)
        worst = max(worst, float(np.linalg.norm(diagonal.conj().T @ relativized @ diagonal - relativized, ord=2)))
    return worst


class LocalizationBound(NamedTuple):
    error: float
    bound: float


def localization_error_bound(field: QuantumField, frame: BundleFrame, omega: Operator,
                             p: Hashable) -> LocalizationBound:
    """
    Compares || Y_omega(phi) - phi(p) || with 2 TV(mu_omega, delta_sigma(p)) max_b ||phi(pi(b)).c(b)||.
    """
    measure = frame.measure(omega)
    distance = total_variation(measure, point_measure(frame.space, frame.section(p)))
    largest = max(value.norm() for value in _oriented_values(field, frame))
    error = restrict_field(field, frame, omega).distance(field(p))
    return LocalizationBound(error, 2 * distance * largest)


def reduce_bundle_frame(sub: BundleFrame, bundle: PrincipalBundle, inclusion: SubgroupInclusion,
                        embedding: Mapping[Hashable, Hashable], base_embedding: Mapping[Hashable, Hashable],
                        tol: float = DEFAULT_TOLERANCE) -> BundleFrame:
    """
    Transports a frame on a sub-bundle to the ambient bundle: the observable is pushed forward along the bundle
    embedding i and the section becomes i o sigma_R o j^-1.

    :param sub: The frame on the sub-bundle B_R -> M_R with structure group H_R.
    :param bundle: The ambient H-bundle.
    :param inclusion: The inclusion H_R -> H.
    :param embedding: The bundle embedding i: B_R -> B.
    :param base_embedding: The base embedding j: M_R -> M.
    :param tol: The tolerance for the covariance of the result.
    :return: The reduced frame, covariant under the covariance group of the sub-frame.
    """
    small = sub.bundle
    if inclusion.sub is not small.group or inclusion.parent is not bundle.group:
        raise DimensionMismatchError("Inclusion must embed the sub-bundle's group into the ambient group.")
    for b in small.total:
        if bundle.project(embedding[b]) != base_embedding[small.project(b)]:
            raise PreconditionError(f"pi o i differs from j o pi_R at {b!r}.")
        for h in small.group.elements:
            if embedding[small.act(b, h)] != bundle.act(embedding[b], inclusion(h)):
                raise PreconditionError(f"bundle embedding is not equivariant at {b!r}, {h}.")
    section = LocalSection(bundle, {base_embedding[p]: embedding[sub.section(p)] for p in sub.region},
                           name=f"{sub.section.name}^")
    space = SampleSpace(bundle.points_over(section.domain))
    povm = push_forward(sub.povm, embedding, target=space)
    composite = SubgroupInclusion(sub.frame_rep.group, bundle.group, [inclusion(h) for h in sub.inclusion.embed])
    return BundleFrame(bundle, section, sub.frame_rep, povm, composite, tol=tol, name=f"{sub.name}^")


def bundle_reduction_residual(field: QuantumField, sub: BundleFrame, reduced: BundleFrame,
                              inclusion: SubgroupInclusion, base_embedding: Mapping[Hashable, Hashable]) -> float:
    """
    || Y(phi|_{j(U_R)}) - sum_{b in pi_R^-1(U_R)} phi(j(pi_R(b))).c_R(b) (x) F_R({b}) ||, with the left side
    computed on the reduced frame and the right side on the sub-bundle.
    """
    small = sub.bundle
    values = [act_on_operator(field.sys_rep, field(base_embedding[small.project(b)]),
                              inclusion(fiber_coordinate(small, sub.section, b))) for b in sub.space]
    direct = ov_integrate(OperatorField(sub.space, values), sub.povm)
    return relativize_field(field, reduced).distance(direct)


class LocalAlgebraReport(NamedTuple):
    operators: List[Operator]
    span_dimension: int
    closure_dimension: int


def _span_basis(operators: Sequence[ndarray], tol: float) -> ndarray:
    if len(operators) == 0:
        return np.zeros((0, 0))
    stacked = np.stack([np.asarray(op).reshape(-1) for op in operators])
    _, singular_values, rows = np.linalg.svd(stacked, full_matrices=False)
    return rows[singular_values > tol]


def relational_local_algebra(field: QuantumField, frame: BundleFrame, states: Sequence[Operator],
                             tol: float = DEFAULT_TOLERANCE) -> LocalAlgebraReport:
    """
    The relational local observables Y_omega(phi) for a frame on a bundle with trivial structure group, with the
    dimension of their linear span and of the algebra they generate under products.
    """
    if frame.bundle.group.order != 1:
        raise PreconditionError("Relational local algebras need a frame with trivial structure group.")
    operators = [restrict_field(field, frame, omega) for omega in states]
    dim = field.dim
    basis = _span_basis([op.matrix for op in operators], tol)
    span_dimension = len(basis)
    closure = basis
    while True:
        matrices = [row.reshape(dim, dim) for row in closure]
        products = [a @ b for a in matrices for b in matrices]
        extended = _span_basis(matrices + products, tol)
        if len(extended) == len(closure):
            break
        closure = extended
    logger.debug("Local algebra: span %d, closure %d.", span_dimension, len(closure))
    return LocalAlgebraReport(operators, span_dimension, len(closure))


class FrameMorphism:
    """
    A morphism between bundle frames R -> R': a channel psi: B(H_R) -> B(H_R') in the Heisenberg picture and a
    fiber-preserving bundle map theta: pi^-1(U) -> pi^-1(U').
    """

    def __init__(self, psi: Channel, theta: Mapping[Hashable, Hashable], source: BundleFrame, target: BundleFrame,
                 name: str = "morphism"):
        if psi.dim_out != source.dim or psi.dim_in != target.dim:
            raise DimensionMismatchError(f"{name}: channel must map operators of the source frame to the target's.")
        missing = [b for b in source.space if b not in theta]
        if missing:
            raise InvariantViolationError("theta", f"theta is undefined at {missing}", name)
        self.psi = psi
        self.theta: Dict[Hashable, Hashable] = {b: theta[b] for b in source.space}
        self.source = source
        self.target = target
        self.name = name

    def base_map(self) -> Dict[Hashable, Hashable]:
        """
        phi_theta = pi' o theta o pi^-1, built from one fiber representative per base point.
        """
        source, target = self.source.bundle, self.target.bundle
        result = {}
        for b in self.source.space:
            p = source.project(b)
            result.setdefault(p, target.project(self.theta[b]))
        return result

    def violations(self) -> Dict[str, float]:
        """
        Measures every defining condition of a frame morphism. Combinatorial conditions count failing points.
        """
        source, target = self.source.bundle, self.target.bundle
        if source.group is not target.group:
            raise DimensionMismatchError("Frame morphisms need both bundles to share the structure group.")
        phi = self.base_map()
        images = set(self.theta.values())
        result = {
            "surjective": float(len(set(self.target.space) - images)),
            "in-target": float(len(images - set(self.target.space))),
            "well-defined": float(sum(target.project(self.theta[b]) != phi[source.project(b)]
                                      for b in self.source.space)),
        }
        result["equivariant"] = float(sum(self.theta.get(source.act(b, g)) != target.act(self.theta[b], g)
                                          for b in self.source.space for g in source.group.elements))
        result["sections"] = float(sum(phi[p] not in self.target.section.values
                                       or self.theta[self.source.section(p)] != self.target.section(phi[p])
                                       for p in self.source.region))
        if result["in-target"] == 0:
            transported = push_forward(compose_with_channel(self.psi, self.source.povm), self.theta,
                                       target=self.target.space)
            result["observable"] = max(t.distance(e) for t, e in zip(transported.effects, self.target.povm.effects))
        else:
            result["observable"] = float("inf")
        result["channel-equivariance"] = _channel_equivariance(self.psi, self.source, self.target)
        return result

    def validate(self, tol: float = DEFAULT_TOLERANCE):
        """
        :raises PreconditionError: naming the first condition which does not hold.
        """
        for condition, violation in self.violations().items():
            if violation > tol:
                raise PreconditionError(f"{self.name}: {condition} condition violated by {violation}.", violation)


def _channel_equivariance(psi: Channel, source: BundleFrame, target: BundleFrame) -> float:
    if source.frame_rep.group is not target.frame_rep.group:
        return float("inf")
    worst = 0.0
    for b in matrix_units(source.dim):
        image = apply_channel_heisenberg(psi, b)
        for k in source.frame_rep.group.elements:
            left = apply_channel_heisenberg(psi, act_on_operator(source.frame_rep, b, k))
            worst = max(worst, left.distance(act_on_operator(target.frame_rep, image, k)))
    return worst


def identity_morphism(frame: BundleFrame) -> FrameMorphism:
    return FrameMorphism(identity_channel(frame.dim), {b: b for b in frame.space}, frame, frame,
                         name="identity")


def compose_morphisms(second: FrameMorphism, first: FrameMorphism) -> FrameMorphism:
    """
    The morphism second o first: R -> R''.
    """
    if first.target is not second.source:
        raise DimensionMismatchError("Morphisms do not compose: target and source frames differ.")
    theta = {b: second.theta[c] for b, c in first.theta.items()}
    return FrameMorphism(compose_channels(first.psi, second.psi), theta, first.source, second.target,
                         name=f"{second.name}o{first.name}")


def apply_frame_morphism(m: FrameMorphism, field: QuantumField, tol: float = DEFAULT_TOLERANCE) -> float:
    """
    || Y^{R'}(phi) - (id (x) psi)(Y^R(phi o phi_theta)) || after validating the morphism.

    :raises PreconditionError: if a defining condition of the morphism does not hold.
    """
    m.validate(tol)
    target = relativize_field(field, m.target)
    pulled = field.compose(m.base_map())
    transformed = apply_channel_heisenberg(lift_channel(m.psi, field.dim), relativize_field(pulled, m.source))
    return target.distance(transformed)
