from logging import getLogger
from typing import Hashable, Mapping, Sequence, Tuple, Union

import numpy as np
from numpy import ndarray

from finite_qrf.errors import DimensionMismatchError
from finite_qrf.measure import PointMap, Povm, SampleSpace, born_measure, ideal_povm, mixture, push_forward
from finite_qrf.operators import (Channel, Operator, apply_channel_heisenberg, expect, lift_channel, partial_trace,
                                  tensor)
from finite_qrf.options import DEFAULT_DIMENSION_CAP

logger = getLogger("finite_qrf_integral")


class OperatorField:
    """
    An operator-valued function on a finite sample space. Continuity and boundedness are automatic at finite scale.
    """

    def __init__(self, space: SampleSpace, values: Union[Mapping[Hashable, Operator], Sequence[Operator]]):
        """
        :param space: The sample space the field is defined on.
        :param values: One operator per point, keyed by label or in the order of the space.
        """
        ordered = [values[point] for point in space] if isinstance(values, Mapping) else list(values)
        if len(ordered) != len(space):
            raise DimensionMismatchError(f"Field needs {len(space)} values, got {len(ordered)}.")
        if len({v.dim for v in ordered}) != 1:
            raise DimensionMismatchError("All values of an operator field must share one dimension.")
        self.space = space
        self.values: Tuple[Operator, ...] = tuple(ordered)

    @property
    def dim(self) -> int:
        return self.values[0].dim

    def value(self, point: Hashable) -> Operator:
        return self.values[self.space.index(point)]

    def as_array(self) -> ndarray:
        return np.stack([v.matrix for v in self.values])

    def pull_back(self, phi: PointMap, source: SampleSpace) -> "OperatorField":
        """
        The composite f o phi for a map phi: source -> self.space.
        """
        mapping = phi if callable(phi) else phi.__getitem__
        return OperatorField(source, [self.value(mapping(point)) for point in source])

    def expectation(self, rho: Operator) -> ndarray:
        """
        The scalar function f_rho(x) = tr[rho f(x)].
        """
        return np.array([expect(rho, value) for value in self.values])

    def __add__(self, other: "OperatorField") -> "OperatorField":
        if other.space != self.space:
            raise DimensionMismatchError("Fields must share a sample space to be added.")
        return OperatorField(self.space, [a + b for a, b in zip(self.values, other.values)])

    def __mul__(self, scalar: complex) -> "OperatorField":
        return OperatorField(self.space, [value * scalar for value in self.values])

    __rmul__ = __mul__


def constant_field(space: SampleSpace, value: Operator) -> OperatorField:
    return OperatorField(space, [value] * len(space))


def ov_integrate(f: OperatorField, e: Povm, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> Operator:
    """
    The operator-valued integral sum_x f(x) (x) E({x}) on system (x) frame.

    :param f: The operator field on the system.
    :param e: The POVM on the frame, defined on the same sample space as the field.
    :param dimension_cap: The largest composite dimension allowed.
    :return: The integral.
    """
    if f.space != e.space:
        raise DimensionMismatchError("Field and POVM must be defined on the same sample space.")
    system_dim, frame_dim = f.dim, e.dim
    if system_dim * frame_dim > dimension_cap:
        logger.info("Integral of a dim %d field against %s exceeds the cap %d.", system_dim, e.name, dimension_cap)
        raise DimensionMismatchError(f"Composite dimension {system_dim * frame_dim} exceeds the cap {dimension_cap}.")
    blocks = np.einsum("xij,xkl->ikjl", f.as_array(), e.as_array())
    return Operator.unchecked(blocks.reshape(system_dim * frame_dim, system_dim * frame_dim))


def pairing_residual(f: OperatorField, e: Povm, rho: Operator, omega: Operator) -> float:
    """
    |tr[(rho (x) omega) int f (x) dE] - sum_x tr[rho f(x)] mu_omega(x)|, the defining property of the integral.
    """
    integral = ov_integrate(f, e)
    left = expect(tensor(rho, omega), integral)
    right = np.sum(f.expectation(rho) * born_measure(e, omega))
    return float(abs(left - right))


def pairing_residual_on_basis(f: OperatorField, e: Povm) -> float:
    """
    The defining pairing evaluated on all products of matrix units |i><j| (x) |k><l|, which span the trace-class
    operators on the composite; the pairing extends linearly from states to this basis.
    """
    integral = ov_integrate(f, e).matrix.reshape(f.dim, e.dim, f.dim, e.dim)
    # tr[(|i><j| (x) |k><l|) X] = X[(j,l),(i,k)]
    left = np.einsum("jlik->ijkl", integral)
    right = np.einsum("xji,xlk->ijkl", f.as_array(), e.as_array())
    return float(np.max(np.abs(left - right)))


def change_of_variables_check(f: OperatorField, phi: PointMap, e: Povm) -> float:
    """
    || int (f o phi) (x) dE - int f (x) d(E o phi^-1) || for phi: e.space -> f.space.
    """
    left = ov_integrate(f.pull_back(phi, e.space), e)
    right = ov_integrate(f, push_forward(e, phi, target=f.space))
    return left.distance(right)


def channel_interchange_check(f: OperatorField, e: Povm, psi: Channel) -> float:
    """
    || int f (x) d(psi o E) - (id (x) psi)(int f (x) dE) ||, with psi applied in the Heisenberg picture.
    """
    if psi.dim_out != e.dim:
        raise DimensionMismatchError(f"Channel acts on operators of dim {psi.dim_out}, POVM has dim {e.dim}.")
    transformed = Povm.unchecked(e.space, [apply_channel_heisenberg(psi, effect) for effect in e.effects])
    left = ov_integrate(f, transformed)
    right = apply_channel_heisenberg(lift_channel(psi, f.dim), ov_integrate(f, e))
    return left.distance(right)


def field_linearity_residual(first: OperatorField, second: OperatorField, a: complex, b: complex, e: Povm) -> float:
    """
    || int (a f + b g) (x) dE - a int f (x) dE - b int g (x) dE ||.
    """
    combined = ov_integrate(first * a + second * b, e)
    return combined.distance(ov_integrate(first, e) * a + ov_integrate(second, e) * b)


def povm_mixture_residual(f: OperatorField, first: Povm, second: Povm, weight: float) -> float:
    """
    || int f (x) d(w E + (1-w) F) - w int f (x) dE - (1-w) int f (x) dF ||.
    """
    mixed = ov_integrate(f, mixture([first, second], [weight, 1 - weight]))
    return mixed.distance(ov_integrate(f, first) * weight + ov_integrate(f, second) * (1 - weight))


def reconstruct_field(integral: Operator, space: SampleSpace, system_dim: int) -> OperatorField:
    """
    Recovers f from int f (x) dP against the ideal POVM P on the space: f(x) = tr_frame[X (1 (x) P_x)].
    """
    frame_dim = len(space)
    if integral.dim != system_dim * frame_dim:
        raise DimensionMismatchError("Integral dimension does not match system dimension times |space|.")
    projectors = ideal_povm(space).effects
    eye = np.eye(system_dim)
    values = [partial_trace(Operator.unchecked(integral.matrix @ np.kron(eye, p.matrix)), 1, (system_dim, frame_dim))
              for p in projectors]
    logger.debug("Reconstructed a field of dim %d on %d points.", system_dim, frame_dim)
    return OperatorField(space, values)


def integral_norm_bound(f: OperatorField) -> float:
    """
    The coarse bound max_x ||f(x)|| * |space| on the norm of any integral of f.
    """
    return max(value.norm() for value in f.values) * len(f.space)
