from logging import getLogger
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy import ndarray

from finite_qrf.errors import DimensionMismatchError, InvalidElementError, InvariantViolationError
from finite_qrf.operators import Channel, Effect, Operator, apply_channel_heisenberg, basis_projector, zero
from finite_qrf.options import DEFAULT_TOLERANCE
from finite_qrf.symmetry import UnitaryRep, act_on_operator

logger = getLogger("finite_qrf_measure")

PointMap = Union[Mapping[Hashable, Hashable], Callable[[Hashable], Hashable]]


class SampleSpace:
    """
    A finite ordered set of labels; the sigma-algebra is always the power set.
    """

    def __init__(self, points: Iterable[Hashable]):
        self.points: Tuple[Hashable, ...] = tuple(points)
        self._index = {point: i for i, point in enumerate(self.points)}
        if len(self._index) != len(self.points):
            raise InvariantViolationError("unique-labels", "sample space labels must be unique")

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, point: Hashable) -> bool:
        return point in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SampleSpace) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def index(self, point: Hashable) -> int:
        if point not in self._index:
            raise InvalidElementError(f"{point!r} is not a point of the sample space.")
        return self._index[point]

    def __repr__(self) -> str:
        return f"SampleSpace({list(self.points)})"


class Povm:
    """
    A normalized positive operator-valued measure on a finite sample space, given by its atomic effects.
    E(X) is the sum of the atomic effects of the points in X.
    """

    def __init__(self, space: SampleSpace, effects: Union[Mapping[Hashable, Operator], Sequence[Operator]],
                 tol: float = DEFAULT_TOLERANCE, name: str = "povm"):
        """
        Initializes the POVM and checks that every atomic effect is an effect and that they sum to the identity.
        :param space: The sample space.
        :param effects: The atomic effects, either keyed by label or in the order of the sample space.
        :param tol: The tolerance for the effect and normalization invariants.
        :param name: A name used in messages.
        """
        ordered = [effects[point] for point in space] if isinstance(effects, Mapping) else list(effects)
        if len(ordered) != len(space):
            raise InvariantViolationError("effects", f"expected {len(space)} effects, got {len(ordered)}", name)
        if len({e.dim for e in ordered}) > 1:
            raise DimensionMismatchError(f"{name}: atomic effects have different dimensions.")
        validated = []
        for point, effect in zip(space, ordered):
            try:
                validated.append(Effect(effect.matrix, tol=tol))
            except InvariantViolationError as error:
                raise error.at(f"{name}[{point}]")
        self.space = space
        self.effects: Tuple[Effect, ...] = tuple(validated)
        self.name = name
        violation = normalization_violation(self)
        if violation > tol:
            raise InvariantViolationError("normalization", f"effects sum to the identity only up to {violation}",
                                          name, violation)

    @classmethod
    def unchecked(cls, space: SampleSpace, effects: Sequence[Operator], name: str = "povm") -> "Povm":
        povm = cls.__new__(cls)
        povm.space = space
        povm.effects = tuple(Effect.unchecked(e.matrix) for e in effects)
        povm.name = name
        return povm

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    def effect(self, point: Hashable) -> Effect:
        return self.effects[self.space.index(point)]

    def effect_of_set(self, points: Iterable[Hashable]) -> Operator:
        """
        E(X) for a subset X of the sample space.
        """
        total = zero(self.dim)
        for point in points:
            total = total + self.effect(point)
        return total

    def as_array(self) -> ndarray:
        """
        The atomic effects stacked into an array of shape (points, dim, dim).
        """
        return np.stack([e.matrix for e in self.effects])


def normalization_violation(povm: Povm) -> float:
    return float(np.linalg.norm(povm.as_array().sum(axis=0) - np.eye(povm.dim), ord=2))


class CovariantPovm:
    """
    A POVM together with a unitary representation and a right action of the same group on the sample points.
    Covariance E({x}).g = E({x.g}) is verified by check_covariance rather than at construction.
    """

    def __init__(self, povm: Povm, rep: UnitaryRep, space_action: Union[ndarray, Sequence[Sequence[int]]]):
        """
        :param povm: The POVM.
        :param rep: The representation acting on the POVM's Hilbert space.
        :param space_action: space_action[x][g] is the index of the point x.g.
        """
        table = np.array(space_action, dtype=int)
        if table.shape != (len(povm.space), rep.group.order):
            raise DimensionMismatchError(f"Space action must have shape {(len(povm.space), rep.group.order)}.")
        if rep.dim != povm.dim:
            raise DimensionMismatchError(f"Representation dim {rep.dim} differs from POVM dim {povm.dim}.")
        self.povm = povm
        self.rep = rep
        self.space_action = table

    def act_on_point(self, point: Hashable, g: int) -> Hashable:
        return self.povm.space.points[self.space_action[self.povm.space.index(point), g]]


class CovarianceReport(NamedTuple):
    violation: float
    passed: bool
    worst_element: Optional[int]
    worst_point: Optional[Hashable]


def check_covariance(cp: CovariantPovm, tol: float = DEFAULT_TOLERANCE) -> CovarianceReport:
    """
    Measures max over (g, x) of ||E({x}).g - E({x.g})|| in operator norm.
    """
    worst, worst_element, worst_point = 0.0, None, None
    effects = cp.povm.effects
    for g in cp.rep.group.elements:
        for x, point in enumerate(cp.povm.space):
            moved = act_on_operator(cp.rep, effects[x], g)
            violation = moved.distance(effects[cp.space_action[x, g]])
            if violation > worst:
                worst, worst_element, worst_point = violation, g, point
    if worst > tol:
        logger.info("Covariance violated by %s at element %s, point %r.", worst, worst_element, worst_point)
    return CovarianceReport(worst, worst <= tol, worst_element, worst_point)


def born_measure(povm: Povm, omega: Operator) -> ndarray:
    """
    The Born probability vector mu(x) = tr[omega E({x})] over the sample points.
    """
    if omega.dim != povm.dim:
        raise DimensionMismatchError(f"State of dim {omega.dim} does not match POVM of dim {povm.dim}.")
    return np.real(np.einsum("ij,xji->x", omega.matrix, povm.as_array()))


def _as_callable(f: PointMap) -> Callable[[Hashable], Hashable]:
    if isinstance(f, Mapping):
        return lambda point: f[point]
    return f


def push_forward(povm: Povm, f: PointMap, target: Optional[SampleSpace] = None) -> Povm:
    """
    The push-forward E o f^-1: effects'(y) is the sum of effects(x) over f(x) = y.

    :param povm: The POVM on the source space.
    :param f: A total map on the source points, given as mapping or callable.
    :param target: (Optional) The target space; points not in the image get the zero effect. Defaults to the image
        of f in order of first appearance.
    :return: The pushed-forward POVM.
    """
    mapping = _as_callable(f)
    images = [mapping(point) for point in povm.space]
    if target is None:
        target = SampleSpace(dict.fromkeys(images))
    effects = {y: zero(povm.dim) for y in target}
    for image, effect in zip(images, povm.effects):
        if image not in target:
            raise InvalidElementError(f"Push-forward image {image!r} is not a point of the target space.")
        effects[image] = effects[image] + effect
    return Povm.unchecked(target, [effects[y] for y in target], name=f"{povm.name}*")


def push_forward_measure(measure: ndarray, source: SampleSpace, f: PointMap, target: SampleSpace) -> ndarray:
    """
    The classical push-forward of a probability vector.
    """
    mapping = _as_callable(f)
    result = np.zeros(len(target))
    for point, weight in zip(source, measure):
        result[target.index(mapping(point))] += weight
    return result


def compose_with_channel(psi: Channel, povm: Povm) -> Povm:
    """
    The POVM psi o E obtained by applying the channel in the Heisenberg picture to every effect.
    """
    if psi.dim_out != povm.dim:
        raise DimensionMismatchError(f"Channel acts on operators of dim {psi.dim_out}, POVM has dim {povm.dim}.")
    effects = [apply_channel_heisenberg(psi, e) for e in povm.effects]
    return Povm.unchecked(povm.space, effects, name=f"psi({povm.name})")


def ideal_povm(space: SampleSpace) -> Povm:
    """
    The POVM of multiplication by characteristic functions on l^2(space): one diagonal basis projector per point.
    """
    dim = len(space)
    return Povm.unchecked(space, [basis_projector(i, dim) for i in range(dim)], name="ideal")


def sharpness_violation(povm: Povm) -> float:
    """
    max_x ||E(x)^2 - E(x)||; zero exactly for projection-valued measures.
    """
    return float(max(np.linalg.norm(e.matrix @ e.matrix - e.matrix, ord=2) for e in povm.effects))


def is_sharp(povm: Povm, tol: float = DEFAULT_TOLERANCE) -> bool:
    return sharpness_violation(povm) <= tol


def mixture(povms: Sequence[Povm], weights: Sequence[float]) -> Povm:
    """
    The convex mixture sum_i w_i E_i of POVMs on a common sample space.
    """
    if len(povms) != len(weights) or not np.isclose(sum(weights), 1.0) or min(weights) < 0:
        raise ValueError("Mixture weights must be a probability vector matching the POVMs.")
    space = povms[0].space
    if any(p.space != space or p.dim != povms[0].dim for p in povms):
        raise DimensionMismatchError("Mixed POVMs must share sample space and dimension.")
    arrays = sum(w * p.as_array() for w, p in zip(weights, povms))
    return Povm.unchecked(space, [Operator.unchecked(a) for a in arrays], name="mixture")


def support(measure: ndarray, space: SampleSpace, tol: float = DEFAULT_TOLERANCE) -> List[Hashable]:
    """
    The points carrying more than tol probability.
    """
    return [point for point, weight in zip(space, measure) if weight > tol]


def total_variation(first: ndarray, second: ndarray) -> float:
    return float(0.5 * np.sum(np.abs(np.asarray(first) - np.asarray(second))))


def point_measure(space: SampleSpace, point: Hashable) -> ndarray:
    measure = np.zeros(len(space))
    measure[space.index(point)] = 1.0
    return measure


def right_translation_action(group_order: int, mul: ndarray, embed: Sequence[int]) -> ndarray:
    """
    The right action x.k = x * embed(k) of a subgroup on the parent group's elements.
    """
    embed = np.asarray(embed, dtype=int)
    return np.asarray(mul)[np.arange(group_order)[:, None], embed[None, :]]


def measure_by_label(measure: ndarray, space: SampleSpace) -> Dict[Hashable, float]:
    return {point: float(weight) for point, weight in zip(space, measure)}
