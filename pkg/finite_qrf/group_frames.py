from logging import getLogger
from typing import Dict, Hashable, List, Optional, Sequence

import numpy as np
from numpy import ndarray

from finite_qrf.errors import DimensionMismatchError, InvariantViolationError, PreconditionError
from finite_qrf.integral import OperatorField, ov_integrate
from finite_qrf.measure import (CovariantPovm, Povm, SampleSpace, born_measure, check_covariance, compose_with_channel,
                                ideal_povm, is_sharp, push_forward, right_translation_action, support)
from finite_qrf.operators import (Channel, Operator, State, apply_channel_heisenberg, expect, identity, lift_channel,
                                  matrix_units, maximally_mixed, partial_trace, tensor, zero)
from finite_qrf.options import DEFAULT_TOLERANCE
from finite_qrf.symmetry import (Element, FiniteGroup, SemidirectProduct, SubgroupInclusion, Torsor, UnitaryRep,
                                 act_on_operator, act_on_state, identity_inclusion, regular_representation,
                                 restrict_representation)

logger = getLogger("finite_qrf_group_frames")


class SystemAction:
    """
    The unitary action U_S(g) of the symmetry group on the system Hilbert space.
    """

    def __init__(self, rep: UnitaryRep):
        self.rep = rep

    @property
    def group(self) -> FiniteGroup:
        return self.rep.group

    @property
    def dim(self) -> int:
        return self.rep.dim

    def on_state(self, g: Element, rho: Operator) -> State:
        return act_on_state(self.rep, g, rho)

    def on_operator(self, a: Operator, g: Element) -> Operator:
        return act_on_operator(self.rep, a, g)


class GroupFrame:
    """
    A quantum reference frame for a finite group G: a Hilbert space carrying a unitary representation and a
    POVM on the elements of G which is covariant, E({x}).k = E({x.k}).

    The representation may be of a subgroup K of G (given by an inclusion); the frame is then only covariant
    under K. This is the situation after reducing a frame from a subgroup.
    """

    def __init__(self, group: FiniteGroup, frame_rep: UnitaryRep, povm: Povm,
                 inclusion: Optional[SubgroupInclusion] = None, tol: float = DEFAULT_TOLERANCE, name: str = "frame"):
        """
        Initializes the frame and checks covariance of the frame observable.
        :param group: The group G whose elements are the sample points of the POVM.
        :param frame_rep: The representation of the covariance group on the frame Hilbert space.
        :param povm: The frame observable on the elements of G, sample points are element indices.
        :param inclusion: (Optional) The inclusion of the covariance group into G, defaults to the identity.
        :param tol: The tolerance for the covariance invariant.
        :param name: A name used in messages.
        """
        inclusion = inclusion if inclusion is not None else identity_inclusion(group)
        if inclusion.parent is not group or inclusion.sub is not frame_rep.group:
            raise DimensionMismatchError(f"{name}: inclusion must embed the frame representation's group into G.")
        if povm.space != group_space(group):
            raise DimensionMismatchError(f"{name}: frame observable must be defined on the elements of {group.name}.")
        self.group = group
        self.frame_rep = frame_rep
        self.povm = povm
        self.inclusion = inclusion
        self.name = name
        self.observable = CovariantPovm(povm, frame_rep,
                                        right_translation_action(group.order, group.mul, inclusion.embed))
        report = check_covariance(self.observable, tol)
        if not report.passed:
            raise InvariantViolationError("covariance", f"E(x).g differs from E(x.g) by {report.violation} "
                                          f"at g={report.worst_element}, x={report.worst_point}", name,
                                          report.violation)

    @property
    def dim(self) -> int:
        return self.povm.dim

    @property
    def covariance_group(self) -> FiniteGroup:
        return self.frame_rep.group

    def measure(self, omega: Operator) -> ndarray:
        return born_measure(self.povm, omega)

    def is_sharp(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        return is_sharp(self.povm, tol)


def group_space(group: FiniteGroup) -> SampleSpace:
    return SampleSpace(group.elements)


def ideal_group_frame(group: FiniteGroup, name: Optional[str] = None) -> GroupFrame:
    """
    The ideal frame on l^2(G): the right-regular representation and the projectors onto the basis states.
    """
    return GroupFrame(group, regular_representation(group), ideal_povm(group_space(group)),
                      name=name or f"ideal({group.name})")


def _check_system(frame: GroupFrame, sys: SystemAction):
    if sys.group is not frame.group:
        raise DimensionMismatchError(f"System action is on {sys.group.name}, frame is on {frame.group.name}.")


def _covariance_system_rep(frame: GroupFrame, sys: SystemAction) -> UnitaryRep:
    return restrict_representation(sys.rep, frame.inclusion)


def relative_state_from_measure(rho: Operator, measure: Sequence[float], sys: SystemAction) -> State:
    """
    The state rho^(mu) = sum_g mu(g) g.rho given relative to a probability measure on the group.
    """
    if len(measure) != sys.group.order:
        raise DimensionMismatchError(f"Measure has {len(measure)} entries, group has order {sys.group.order}.")
    matrix = sum(weight * sys.on_state(g, rho).matrix for g, weight in zip(sys.group.elements, measure))
    return State.unchecked(matrix)


def relative_state(rho: Operator, omega: Operator, frame: GroupFrame, sys: SystemAction) -> State:
    """
    The system state relative to the frame state omega, rho^(omega) = sum_g mu_omega(g) g.rho.
    """
    _check_system(frame, sys)
    return relative_state_from_measure(rho, frame.measure(omega), sys)


def torsor_relative_state(rho: Operator, measure: Dict[Hashable, float], torsor: Torsor, sys: SystemAction) -> State:
    """
    rho^(mu) for a measure on a torsor, evaluated with the torsor coordinates relative to its current origin.
    """
    matrix = sum(weight * sys.on_state(torsor.coordinates[x], rho).matrix for x, weight in measure.items())
    return State.unchecked(matrix)


def origin_shift_residual(rho: Operator, measure: Dict[Hashable, float], torsor: Torsor, h: Element,
                          sys: SystemAction) -> float:
    """
    Moves the torsor origin by h and re-expresses the system state at the new origin as h.rho; the relative
    state must not change.
    """
    before = torsor_relative_state(rho, measure, torsor, sys)
    after = torsor_relative_state(sys.on_state(h, rho), measure, torsor.shift_origin(h), sys)
    return before.distance(after)


def translated_field(a: Operator, frame: GroupFrame, sys: SystemAction) -> OperatorField:
    """
    The operator field g -> a.g on the elements of the frame's group.
    """
    _check_system(frame, sys)
    return OperatorField(frame.povm.space, [sys.on_operator(a, g) for g in frame.group.elements])


def relativize(a: Operator, frame: GroupFrame, sys: SystemAction) -> Operator:
    """
    The relativization map sum_g (a.g) (x) E({g}) into the invariant operators on system (x) frame.
    """
    return ov_integrate(translated_field(a, frame, sys), frame.povm)


def invariance_violation(a: Operator, frame: GroupFrame, sys: SystemAction) -> float:
    """
    max_k || Y(a).(k, k) - Y(a) || over the covariance group, acting diagonally on system (x) frame.
    """
    relativized = relativize(a, frame, sys)
    system_rep = _covariance_system_rep(frame, sys)
    worst = 0.0
    for k in frame.covariance_group.elements:
        diagonal = np.kron(system_rep(k).matrix, frame.frame_rep(k).matrix)
        moved = diagonal.conj().T @ relativized.matrix @ diagonal
        worst = max(worst, float(np.linalg.norm(moved - relativized.matrix, ord=2)))
    return worst


def duality_check(rho: Operator, omega: Operator, a: Operator, frame: GroupFrame, sys: SystemAction) -> float:
    """
    |tr[rho^(omega) a] - tr[(rho (x) omega) Y(a)]|.
    """
    left = expect(relative_state(rho, omega, frame, sys), a)
    right = expect(tensor(rho, omega), relativize(a, frame, sys))
    return float(abs(left - right))


def orbit_identity_residual(rho: Operator, omega: Operator, a: Operator, frame: GroupFrame,
                            sys: SystemAction) -> float:
    """
    max_k |tr[(k.rho (x) k.omega) Y(a)] - tr[(rho (x) omega) Y(a)]|: expectations of relativized operators
    only depend on the orbit of the joint state.
    """
    relativized = relativize(a, frame, sys)
    system_rep = _covariance_system_rep(frame, sys)
    reference = expect(tensor(rho, omega), relativized)
    worst = 0.0
    for k in frame.covariance_group.elements:
        moved = tensor(act_on_state(system_rep, k, rho), act_on_state(frame.frame_rep, k, omega))
        worst = max(worst, abs(expect(moved, relativized) - reference))
    return float(worst)


def relative_state_covariance_residual(rho: Operator, omega: Operator, frame: GroupFrame, sys: SystemAction) -> float:
    """
    The larger of max_k ||(k.rho)^(k.omega) - rho^(omega)|| and max_k ||rho^(k.omega) - (k^-1.rho)^(omega)||.
    """
    system_rep = _covariance_system_rep(frame, sys)
    reference = relative_state(rho, omega, frame, sys)
    worst = 0.0
    for k in frame.covariance_group.elements:
        moved_omega = act_on_state(frame.frame_rep, k, omega)
        joint = relative_state(act_on_state(system_rep, k, rho), moved_omega, frame, sys)
        inverse = act_on_state(system_rep, frame.covariance_group.inverse(k), rho)
        shifted = relative_state(rho, moved_omega, frame, sys)
        worst = max(worst, joint.distance(reference), shifted.distance(relative_state(inverse, omega, frame, sys)))
    return worst


def restrict(a: Operator, omega: Operator, frame: GroupFrame, sys: SystemAction) -> Operator:
    """
    The restriction sum_g mu_omega(g) (a.g) of the relativized operator to the frame state omega.
    """
    _check_system(frame, sys)
    measure = frame.measure(omega)
    return Operator.unchecked(sum(weight * sys.on_operator(a, g).matrix for g, weight in enumerate(measure)))


def condition_on_frame_state(x: Operator, omega: Operator, system_dim: int) -> Operator:
    """
    Gamma_omega(X) = tr_frame[X (1 (x) omega)], the conditional expectation onto the system.
    """
    if x.dim != system_dim * omega.dim:
        raise DimensionMismatchError(f"Operator of dim {x.dim} is not on a {system_dim} x {omega.dim} composite.")
    product = Operator.unchecked(x.matrix @ np.kron(np.eye(system_dim), omega.matrix))
    return partial_trace(product, 1, (system_dim, omega.dim))


def restriction_factorization_residual(a: Operator, omega: Operator, frame: GroupFrame, sys: SystemAction) -> float:
    """
    || Gamma_omega(Y(a)) - restrict(a, omega) ||.
    """
    composed = condition_on_frame_state(relativize(a, frame, sys), omega, sys.dim)
    return composed.distance(restrict(a, omega, frame, sys))


def localizability_family(localized: Operator, parameters: Sequence[float]) -> List[State]:
    """
    The frame states (1 - t) omega_0 + t 1/d, from omega_0 at t = 0 to the maximally mixed state at t = 1.
    """
    mixed = maximally_mixed(localized.dim).matrix
    return [State.unchecked((1 - t) * localized.matrix + t * mixed) for t in parameters]


def localizability_curve(a: Operator, frame: GroupFrame, sys: SystemAction, family: Sequence[Operator]) -> ndarray:
    """
    The error curve || Y_omega_t(a) - a || along a family of frame states.
    """
    if len(family) == 0:
        raise ValueError("Localizability curve needs at least one frame state.")
    errors = np.array([restrict(a, omega, frame, sys).distance(a) for omega in family])
    logger.debug("Localizability curve: %s", errors)
    return errors


def reduce_frame(sub_frame: GroupFrame, inclusion: SubgroupInclusion, tol: float = DEFAULT_TOLERANCE) -> GroupFrame:
    """
    Promotes a frame for a subgroup G_R to a frame for G by pushing its observable forward along G_R -> G.
    The result is only covariant under the covariance group of the sub-frame.
    """
    if inclusion.sub is not sub_frame.group:
        raise DimensionMismatchError("Inclusion must start at the group of the sub-frame.")
    parent = inclusion.parent
    povm = push_forward(sub_frame.povm, lambda h: inclusion(h), target=group_space(parent))
    composite = SubgroupInclusion(sub_frame.covariance_group, parent,
                                  [inclusion(h) for h in sub_frame.inclusion.embed])
    return GroupFrame(parent, sub_frame.frame_rep, povm, composite, tol=tol, name=f"{sub_frame.name}^{parent.name}")


def reduction_residual(a: Operator, sub_frame: GroupFrame, inclusion: SubgroupInclusion, sys: SystemAction) -> float:
    """
    || sum_{g in G} (a.g) (x) E({g}) - sum_{h in G_R} (a.h) (x) F({h}) || for the reduced frame E of F.
    """
    reduced = relativize(a, reduce_frame(sub_frame, inclusion), sys)
    sub_sys = SystemAction(restrict_representation(sys.rep, inclusion))
    direct = relativize(a, sub_frame, sub_sys)
    return reduced.distance(direct)


def equivariance_residual(psi: Channel, source: GroupFrame, target: GroupFrame) -> float:
    """
    max over k and matrix units b of || psi(b.k) - psi(b).k ||, psi in the Heisenberg picture from the source
    frame's operators to the target frame's operators.
    """
    if source.covariance_group is not target.covariance_group:
        raise DimensionMismatchError("Both frames must be covariant under the same group.")
    worst = 0.0
    for b in matrix_units(source.dim):
        image = apply_channel_heisenberg(psi, b)
        for k in source.covariance_group.elements:
            left = apply_channel_heisenberg(psi, act_on_operator(source.frame_rep, b, k))
            right = act_on_operator(target.frame_rep, image, k)
            worst = max(worst, left.distance(right))
    return worst


def external_frame_transform(a: Operator, frame: GroupFrame, frame_prime: GroupFrame, psi: Channel,
                             sys: SystemAction, tol: float = DEFAULT_TOLERANCE) -> float:
    """
    || Y^{R'}(a) - (id (x) psi)(Y^R(a)) || for an equivariant channel psi relating the frame observables.

    :raises PreconditionError: if psi is not equivariant or E_{R'} differs from psi o E_R.
    """
    if psi.dim_out != frame.dim or psi.dim_in != frame_prime.dim:
        raise DimensionMismatchError("Channel must map operators of the first frame to operators of the second.")
    transported = compose_with_channel(psi, frame.povm)
    mismatch = max(t.distance(e) for t, e in zip(transported.effects, frame_prime.povm.effects))
    if mismatch > tol:
        raise PreconditionError(f"E_R' differs from psi o E_R by {mismatch}.", mismatch)
    equivariance = equivariance_residual(psi, frame, frame_prime)
    if equivariance > tol:
        raise PreconditionError(f"Channel is not equivariant, residual {equivariance}.", equivariance)
    target = relativize(a, frame_prime, sys)
    transformed = apply_channel_heisenberg(lift_channel(psi, sys.dim), relativize(a, frame, sys))
    return target.distance(transformed)


def translation_field(a: Operator, group: SemidirectProduct, sys: SystemAction) -> OperatorField:
    """
    The field x -> a.(x, e) over the translation part of a semidirect product.
    """
    if sys.group is not group.product:
        raise DimensionMismatchError("System action must be a representation of the semidirect product.")
    values = [sys.on_operator(a, group.pair_index(x, group.acting.identity)) for x in group.normal.elements]
    return OperatorField(group_space(group.normal), values)


def relational_local_observable(field: OperatorField, frame: GroupFrame, omega: Operator,
                                tol: float = DEFAULT_TOLERANCE) -> Operator:
    """
    The restriction sum_{x in U} field(x) mu_omega(x) of a field over the translations, where U is the support of
    the frame's Born measure.
    """
    if field.space != frame.povm.space:
        raise DimensionMismatchError("Field must be defined on the elements of the frame's group.")
    measure = frame.measure(omega)
    region = support(measure, field.space, tol)
    total = zero(field.dim)
    for x in region:
        total = total + field.value(x) * measure[field.space.index(x)]
    return total


def gauge_relational_local_observable(field: OperatorField, frame: GroupFrame, omega: Operator,
                                      gauge: UnitaryRep) -> Operator:
    """
    The gauge-extended local observable sum_{x, h} field(x).h mu_omega(x, h) for a frame on T x H.
    Sample points of the frame are indices x * |H| + h of the direct product.
    """
    gauge_order = gauge.group.order
    if frame.group.order != len(field.space) * gauge_order:
        raise DimensionMismatchError("Frame group must be the direct product of the field's space and the gauge group.")
    measure = frame.measure(omega)
    total = zero(field.dim)
    for index, weight in enumerate(measure):
        x, h = divmod(index, gauge_order)
        total = total + act_on_operator(gauge, field.values[x], h) * weight
    return total


def unit_preservation_residual(frame: GroupFrame, sys: SystemAction) -> float:
    """
    || Y(1) - 1 (x) 1 ||.
    """
    relativized = relativize(identity(sys.dim), frame, sys)
    return relativized.distance(identity(sys.dim * frame.dim))
