from logging import getLogger
from typing import NamedTuple, Sequence, Union

import numpy as np
from numpy import ndarray

from finite_qrf.errors import DimensionMismatchError, PreconditionError
from finite_qrf.integral import OperatorField
from finite_qrf.measure import SampleSpace
from finite_qrf.operators import Operator
from finite_qrf.options import DEFAULT_TOLERANCE
from finite_qrf.symmetry import Element, FiniteGroup, cyclic_group

logger = getLogger("finite_qrf_pde_lift")


class DifferenceOperator:
    """
    A linear operator on the scalar functions over a finite grid, (Tf)(p) = sum_q T[p, q] f(q).
    """

    def __init__(self, grid: SampleSpace, matrix: Union[ndarray, Sequence[Sequence[complex]]], name: str = "T"):
        array = np.array(matrix, dtype=complex)
        if array.shape != (len(grid), len(grid)):
            raise DimensionMismatchError(f"{name}: matrix must have shape {(len(grid), len(grid))}, got {array.shape}.")
        array.setflags(write=False)
        self.grid = grid
        self.matrix = array
        self.name = name

    def __call__(self, f: Sequence[complex]) -> ndarray:
        return self.matrix @ np.asarray(f, dtype=complex)


class LiftedOperator:
    """
    The lift of a difference operator to operator-valued functions on the grid.
    """

    def __init__(self, base: DifferenceOperator, system_dim: int):
        self.base = base
        self.system_dim = system_dim

    def __call__(self, field: OperatorField) -> OperatorField:
        if field.dim != self.system_dim:
            raise DimensionMismatchError(f"Lift acts on fields of dim {self.system_dim}, got {field.dim}.")
        return lift_apply(self.base, field)

    def duality_residual(self, field: OperatorField) -> float:
        return duality_residual(self.base, field)


def _check_grid(t: DifferenceOperator, field: OperatorField):
    if field.space != t.grid:
        raise DimensionMismatchError(f"Field is defined on {field.space}, {t.name} on {t.grid}.")


def lift_apply(t: DifferenceOperator, field: OperatorField) -> OperatorField:
    """
    Applies T entrywise, (T field)(p) = sum_q T[p, q] field(q).
    """
    _check_grid(t, field)
    values = np.einsum("pq,qij->pij", t.matrix, field.as_array())
    return OperatorField(t.grid, [Operator.unchecked(v) for v in values])


def duality_residual(t: DifferenceOperator, field: OperatorField) -> float:
    """
    Compares tr[rho (T field)(p)] with T(field_rho)(p) for every matrix unit rho = |i><j| and every grid point,
    the scalar functions field_rho(q) = tr[rho field(q)] being computed one at a time.
    """
    lifted = lift_apply(t, field).as_array()
    values = field.as_array()
    worst = 0.0
    for i in range(field.dim):
        for j in range(field.dim):
            # tr[|i><j| X] = X[j, i]
            scalar = t(values[:, j, i])
            worst = max(worst, float(np.max(np.abs(lifted[:, j, i] - scalar))))
    return worst


class KernelMembership(NamedTuple):
    member: bool
    residual: float


def kernel_membership(t: DifferenceOperator, field: OperatorField, tol: float = DEFAULT_TOLERANCE) -> KernelMembership:
    """
    max_p || (T field)(p) || and whether it is within tolerance.
    """
    residual = max(value.norm() for value in lift_apply(t, field).values)
    return KernelMembership(residual <= tol, residual)


def kernel_basis(t: DifferenceOperator, tol: float = DEFAULT_TOLERANCE) -> ndarray:
    """
    An orthonormal basis of the scalar kernel of T as the columns of the returned matrix.
    """
    _, singular_values, rows = np.linalg.svd(t.matrix)
    rank = int(np.sum(singular_values > tol))
    return rows[rank:].conj().T


class GridAction:
    """
    An action of a finite group on the grid points, given by table[p][g] = p.g. Scalar functions transform by
    (f.g)(p) = f(p.g) and operator-valued functions by the same rule pointwise.
    """

    def __init__(self, group: FiniteGroup, grid: SampleSpace, table: Union[ndarray, Sequence[Sequence[int]]]):
        table = np.array(table, dtype=int)
        if table.shape != (len(grid), group.order):
            raise DimensionMismatchError(f"Grid action must have shape {(len(grid), group.order)}.")
        if any(sorted(table[:, g].tolist()) != list(range(len(grid))) for g in group.elements):
            raise PreconditionError("Grid action is not a permutation of the grid for every group element.")
        table.setflags(write=False)
        self.group = group
        self.grid = grid
        self.table = table

    def on_scalars(self, f: Sequence[complex], g: Element) -> ndarray:
        return np.asarray(f)[self.table[:, self.group.check_element(g)]]

    def on_field(self, field: OperatorField, g: Element) -> OperatorField:
        indices = self.table[:, self.group.check_element(g)]
        return OperatorField(field.space, [field.values[q] for q in indices])


def kernel_preservation_residual(t: DifferenceOperator, action: GridAction, tol: float = DEFAULT_TOLERANCE) -> float:
    """
    max over g and kernel basis vectors v of |T(v.g)|.
    """
    basis = kernel_basis(t, tol)
    if basis.shape[1] == 0:
        return 0.0
    return float(max(np.max(np.abs(t(action.on_scalars(v, g)))) for v in basis.T for g in action.group.elements))


def symmetry_action_on_solutions(t: DifferenceOperator, action: GridAction, field: OperatorField, g: Element,
                                 tol: float = DEFAULT_TOLERANCE) -> OperatorField:
    """
    Transforms a solution of the lifted equation by a grid symmetry. When the field solves T field = 0 within
    tolerance, so does the returned field.

    :raises PreconditionError: if the scalar action does not preserve the kernel of T, or if a solution within
        tolerance is moved out of it.
    """
    if action.grid != t.grid:
        raise DimensionMismatchError("Grid action and difference operator live on different grids.")
    preserved = kernel_preservation_residual(t, action, tol)
    if preserved > tol:
        raise PreconditionError(f"Action does not preserve the kernel of {t.name}, residual {preserved}.", preserved)
    _check_grid(t, field)
    moved = action.on_field(field, g)
    if kernel_membership(t, field, tol).member:
        after = kernel_membership(t, moved, tol)
        if not after.member:
            raise PreconditionError(f"Action by {g} moves a solution out of the kernel of {t.name}, residual "
                                    f"{after.residual}.", after.residual)
    return moved


def periodic_grid(size: int) -> SampleSpace:
    return SampleSpace(range(size))


def _shift(size: int) -> ndarray:
    # (S f)(p) = f(p + 1)
    return np.roll(np.eye(size, dtype=complex), 1, axis=1)


def forward_difference(size: int) -> DifferenceOperator:
    """
    The periodic forward difference (Df)(p) = f(p + 1) - f(p) on Z_size.
    """
    return DifferenceOperator(periodic_grid(size), _shift(size) - np.eye(size), name="forward-difference")


def fourier_mode_annihilator(size: int, mode: int) -> DifferenceOperator:
    """
    T = S - exp(2 pi i mode / size) 1, whose kernel is spanned by the Fourier mode p -> exp(2 pi i mode p / size).
    """
    phase = np.exp(2j * np.pi * mode / size)
    return DifferenceOperator(periodic_grid(size), _shift(size) - phase * np.eye(size), name=f"fourier-mode-{mode}")


def translation_action(size: int) -> GridAction:
    """
    Z_size acting on the periodic grid by p.g = p + g.
    """
    points = np.arange(size)
    return GridAction(cyclic_group(size), periodic_grid(size), (points[:, None] + points[None, :]) % size)
