from logging import getLogger
from typing import Iterable, Iterator, List, Sequence, Tuple, Type, TypeVar, Union

import numpy as np
from numpy import ndarray

from finite_qrf.errors import DimensionMismatchError, InvariantViolationError
from finite_qrf.options import DEFAULT_DIMENSION_CAP, DEFAULT_EIGEN_DIMENSION_LIMIT, DEFAULT_TOLERANCE

logger = getLogger("finite_qrf_operators")

_Operator = TypeVar("_Operator", bound="Operator")
Scalar = Union[int, float, complex]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def spectrum_bounds(matrix: ndarray, eigen_dimension_limit: int = DEFAULT_EIGEN_DIMENSION_LIMIT) -> Tuple[float, float]:
    """
    Bounds the spectrum of a Hermitian matrix.
    Exact eigenvalues are used up to the configured dimension; above it the Gershgorin discs are tried first
    and the eigenvalues are only computed if the discs are inconclusive.

    :param matrix: A Hermitian matrix.
    :param eigen_dimension_limit: Largest dimension for which eigenvalues are computed unconditionally.
    :return: Lower and upper bound of the spectrum.
    """
    dim = matrix.shape[0]
    if dim > eigen_dimension_limit:
        radii = np.sum(np.abs(matrix), axis=1) - np.abs(np.diag(matrix))
        centers = np.real(np.diag(matrix))
        lower, upper = float(np.min(centers - radii)), float(np.max(centers + radii))
        if lower >= 0.0 and upper <= 1.0:
            return lower, upper
    eigenvalues = np.linalg.eigvalsh(matrix)
    return float(eigenvalues[0]), float(eigenvalues[-1])


class Operator:
    """
    A dense complex matrix acting on a finite-dimensional Hilbert space. Values are immutable.
    Subclasses tag the role of the operator and validate it at construction.
    """

    role = "generic"

    def __init__(self, matrix: Union[ndarray, Sequence], tol: float = DEFAULT_TOLERANCE,
                 eigen_dimension_limit: int = DEFAULT_EIGEN_DIMENSION_LIMIT):
        """
        Initializes the operator and validates it.
        :param matrix: A square matrix.
        :param tol: Tolerance for the role invariants.
        :param eigen_dimension_limit: Largest dimension for which spectra are checked by eigenvalues.
        """
        array = np.array(matrix, dtype=complex)
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] == 0:
            raise DimensionMismatchError(f"Operator must be a non-empty square matrix, got shape {array.shape}.")
        if not np.all(np.isfinite(array)):
            raise InvariantViolationError("finite-entries", "matrix contains NaN or Inf")
        array.setflags(write=False)
        self._matrix = array
        self._validate(tol, eigen_dimension_limit)

    @classmethod
    def unchecked(cls: Type[_Operator], matrix: ndarray) -> _Operator:
        """
        Creates an operator without validating it. Meant for intermediates inside loops.
        """
        operator = cls.__new__(cls)
        array = np.array(matrix, dtype=complex)
        array.setflags(write=False)
        operator._matrix = array
        return operator

    def _validate(self, tol: float, eigen_dimension_limit: int):
        pass

    @property
    def matrix(self) -> ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator.unchecked(self._matrix.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self._matrix))

    def norm(self) -> float:
        """
        The operator (spectral) norm.
        """
        return float(np.linalg.norm(self._matrix, ord=2))

    def distance(self, other: "Operator") -> float:
        """
        The operator norm distance to another operator of the same dimension.
        """
        _require_same_dim(self, other)
        return float(np.linalg.norm(self._matrix - other.matrix, ord=2))

    def is_hermitian(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        return bool(np.max(np.abs(self._matrix - self._matrix.conj().T), initial=0.0) <= tol)

    def is_unitary(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        product = self._matrix.conj().T @ self._matrix
        return bool(np.max(np.abs(product - np.eye(self.dim))) <= tol)

    def is_idempotent(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        return bool(np.linalg.norm(self._matrix @ self._matrix - self._matrix, ord=2) <= tol)

    def __add__(self, other: "Operator") -> "Operator":
        _require_same_dim(self, other)
        return Operator.unchecked(self._matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _require_same_dim(self, other)
        return Operator.unchecked(self._matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator.unchecked(-self._matrix)

    def __mul__(self, scalar: Scalar) -> "Operator":
        return Operator.unchecked(self._matrix * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        _require_same_dim(self, other)
        return Operator.unchecked(self._matrix @ other.matrix)

    def __repr__(self) -> str:
        with np.printoptions(precision=6, linewidth=120, suppress=True):
            return f"{type(self).__name__}(dim={self.dim},\n{self._matrix})"


class State(Operator):
    """
    A density operator: Hermitian, positive semi-definite and of unit trace (all within tolerance).
    """

    role = "state"

    def _validate(self, tol: float, eigen_dimension_limit: int):
        if not self.is_hermitian(tol):
            raise InvariantViolationError("hermiticity", "state is not Hermitian")
        lower, _ = spectrum_bounds(self.matrix, eigen_dimension_limit)
        if lower < -tol:
            raise InvariantViolationError("positivity", f"smallest eigenvalue {lower} is negative", violation=-lower)
        trace_error = abs(self.trace() - 1.0)
        if trace_error > tol:
            raise InvariantViolationError("unit-trace", f"trace differs from 1 by {trace_error}",
                                          violation=trace_error)


class Effect(Operator):
    """
    An effect: Hermitian with spectrum in [0, 1] (within tolerance).
    """

    role = "effect"

    def _validate(self, tol: float, eigen_dimension_limit: int):
        if not self.is_hermitian(tol):
            raise InvariantViolationError("hermiticity", "effect is not Hermitian")
        lower, upper = spectrum_bounds(self.matrix, eigen_dimension_limit)
        if lower < -tol or upper > 1 + tol:
            raise InvariantViolationError("effect-spectrum", f"spectrum [{lower}, {upper}] outside [0, 1]",
                                          violation=max(-lower, upper - 1))


class Unitary(Operator):
    role = "unitary"

    def _validate(self, tol: float, eigen_dimension_limit: int):
        if not self.is_unitary(tol):
            raise InvariantViolationError("unitarity", "U^dagger U differs from the identity")


def identity(dim: int) -> Operator:
    return Operator.unchecked(np.eye(dim, dtype=complex))


def zero(dim: int) -> Operator:
    return Operator.unchecked(np.zeros((dim, dim), dtype=complex))


def maximally_mixed(dim: int) -> State:
    return State.unchecked(np.eye(dim, dtype=complex) / dim)


def pure_state(amplitudes: Sequence[complex]) -> State:
    """
    Creates the projector onto the normalized vector with the given amplitudes.
    """
    vector = np.asarray(amplitudes, dtype=complex)
    vector = vector / np.linalg.norm(vector)
    return State.unchecked(np.outer(vector, vector.conj()))


def basis_projector(index: int, dim: int) -> Effect:
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[index, index] = 1.0
    return Effect.unchecked(matrix)


def matrix_unit(row: int, column: int, dim: int) -> Operator:
    matrix = np.zeros((dim, dim), dtype=complex)
    matrix[row, column] = 1.0
    return Operator.unchecked(matrix)


def matrix_units(dim: int) -> Iterator[Operator]:
    """
    Iterates over the matrix units |i><j|, which span the full operator space.
    """
    for row in range(dim):
        for column in range(dim):
            yield matrix_unit(row, column, dim)


def _require_same_dim(a: Operator, b: Operator):
    if a.dim != b.dim:
        raise DimensionMismatchError(f"Dimension mismatch: {a.dim} != {b.dim}.")


def tensor(a: Operator, b: Operator, dimension_cap: int = DEFAULT_DIMENSION_CAP) -> Operator:
    """
    The Kronecker product a (x) b with factor order (first, second), row-major.
    The role is kept when both factors share it (states, effects and unitaries are closed under tensoring).

    :param a: The first factor (the system in composite system (x) frame operators).
    :param b: The second factor.
    :param dimension_cap: The largest dimension the product may have.
    :return: The tensor product.
    """
    product_dim = a.dim * b.dim
    if product_dim > dimension_cap:
        raise DimensionMismatchError(f"Tensor product dimension {product_dim} exceeds the cap {dimension_cap}.")
    role = type(a) if type(a) is type(b) else Operator
    return role.unchecked(np.kron(a.matrix, b.matrix))


def expect(rho: Operator, a: Operator) -> complex:
    """
    The Born functional tr[rho a].
    """
    _require_same_dim(rho, a)
    return complex(np.einsum("ij,ji->", rho.matrix, a.matrix))


def partial_trace(a: Operator, which: int, dims: Tuple[int, int]) -> Operator:
    """
    Traces out one factor of a bipartite operator.

    :param a: An operator on a two-factor tensor product.
    :param which: The index of the factor to trace out (0 for the first, 1 for the second).
    :param dims: The dimensions of both factors.
    :return: The reduced operator on the remaining factor.
    """
    first, second = dims
    if first * second != a.dim or which not in (0, 1):
        raise DimensionMismatchError(f"Cannot trace factor {which} of dims {dims} from an operator of dim {a.dim}.")
    reshaped = a.matrix.reshape(first, second, first, second)
    if which == 1:
        return Operator.unchecked(np.einsum("ikjk->ij", reshaped))
    return Operator.unchecked(np.einsum("kikj->ij", reshaped))


class Channel:
    """
    A completely positive trace-preserving map given by Kraus operators K: H_in -> H_out.
    In the Schroedinger picture states on H_in are mapped to states on H_out; in the Heisenberg picture operators
    on H_out are mapped to operators on H_in.
    """

    def __init__(self, kraus: Iterable[Union[ndarray, Sequence]], tol: float = DEFAULT_TOLERANCE):
        """
        Initializes the channel and checks the completeness relation sum K^dagger K = 1.
        :param kraus: The Kraus operators, all of shape (dim_out, dim_in).
        :param tol: The tolerance for the completeness relation.
        """
        operators = [np.array(k, dtype=complex) for k in kraus]
        if len(operators) == 0:
            raise DimensionMismatchError("A channel needs at least one Kraus operator.")
        shape = operators[0].shape
        if any(k.ndim != 2 or k.shape != shape for k in operators):
            raise DimensionMismatchError("All Kraus operators must be matrices of the same shape.")
        for k in operators:
            k.setflags(write=False)
        self._kraus = tuple(operators)
        completeness = sum(k.conj().T @ k for k in self._kraus)
        violation = float(np.linalg.norm(completeness - np.eye(self.dim_in), ord=2))
        if violation > tol:
            raise InvariantViolationError("completeness", f"sum of K^dagger K differs from 1 by {violation}",
                                          violation=violation)

    @classmethod
    def unchecked(cls, kraus: Iterable[ndarray]) -> "Channel":
        channel = cls.__new__(cls)
        channel._kraus = tuple(np.array(k, dtype=complex) for k in kraus)
        return channel

    @property
    def kraus(self) -> Tuple[ndarray, ...]:
        return self._kraus

    @property
    def dim_in(self) -> int:
        return self._kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self._kraus[0].shape[0]

    def heisenberg(self, a: Operator) -> Operator:
        return apply_channel_heisenberg(self, a)

    def schrodinger(self, rho: Operator) -> Operator:
        return apply_channel_schrodinger(self, rho)

    def __repr__(self) -> str:
        return f"Channel(dim_in={self.dim_in}, dim_out={self.dim_out}, kraus_rank={len(self._kraus)})"


def apply_channel_heisenberg(psi: Channel, a: Operator) -> Operator:
    """
    Applies the channel in the Heisenberg picture: sum K^dagger a K.
    """
    if a.dim != psi.dim_out:
        raise DimensionMismatchError(f"Heisenberg picture expects an operator of dim {psi.dim_out}, got {a.dim}.")
    return Operator.unchecked(sum(k.conj().T @ a.matrix @ k for k in psi.kraus))


def apply_channel_schrodinger(psi: Channel, rho: Operator) -> State:
    """
    Applies the channel in the Schroedinger picture: sum K rho K^dagger.
    """
    if rho.dim != psi.dim_in:
        raise DimensionMismatchError(f"Schroedinger picture expects a state of dim {psi.dim_in}, got {rho.dim}.")
    return State.unchecked(sum(k @ rho.matrix @ k.conj().T for k in psi.kraus))


def identity_channel(dim: int) -> Channel:
    return Channel.unchecked([np.eye(dim, dtype=complex)])


def unitary_channel(unitary: Operator) -> Channel:
    """
    The channel rho -> U rho U^dagger (Heisenberg picture a -> U^dagger a U).
    """
    return Channel.unchecked([unitary.matrix])


def depolarizing_channel(dim: int, p: float = 1.0) -> Channel:
    """
    The depolarizing channel rho -> (1-p) rho + p tr[rho] 1/dim, given by the Weyl (clock and shift) Kraus set.
    For dim 2 this is the Pauli twirl.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("Depolarizing probability must lie in [0, 1].")
    omega = np.exp(2j * np.pi / dim)
    shift = np.roll(np.eye(dim, dtype=complex), 1, axis=0)
    clock = np.diag([omega**k for k in range(dim)])
    weyl = [np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) for a in range(dim) for b in range(dim)]
    kraus = [np.sqrt(1 - p + p / dim**2) * weyl[0]] + [np.sqrt(p) / dim * w for w in weyl[1:]]
    return Channel.unchecked(kraus)


def partial_trace_reprepare_channel(state: Operator) -> Channel:
    """
    The replacement channel rho -> tr[rho] sigma for a fixed state sigma.
    """
    dim = state.dim
    eigenvalues, eigenvectors = np.linalg.eigh(state.matrix)
    kraus = []
    for value, vector in zip(eigenvalues, eigenvectors.T):
        if value <= 0:
            continue
        for i in range(dim):
            basis = np.zeros(dim, dtype=complex)
            basis[i] = 1.0
            kraus.append(np.sqrt(value) * np.outer(vector, basis))
    return Channel.unchecked(kraus)


def lift_channel(psi: Channel, system_dim: int) -> Channel:
    """
    The channel id (x) psi on system (x) frame.
    """
    eye = np.eye(system_dim, dtype=complex)
    return Channel.unchecked([np.kron(eye, k) for k in psi.kraus])


def compose_channels(outer: Channel, inner: Channel) -> Channel:
    """
    The Schroedinger-picture composition outer o inner.
    """
    if outer.dim_in != inner.dim_out:
        raise DimensionMismatchError("Cannot compose channels with mismatching dimensions.")
    return Channel.unchecked([k @ l for k in outer.kraus for l in inner.kraus])


def matrix_to_json(matrix: ndarray) -> List[List[List[float]]]:
    """
    Serializes a matrix as row-major nested lists of [re, im] pairs.
    """
    return [[[float(entry.real), float(entry.imag)] for entry in row] for row in np.asarray(matrix, dtype=complex)]


def matrix_from_json(data: Sequence) -> ndarray:
    """
    Parses row-major nested lists of [re, im] pairs. Plain numbers are accepted as real entries.
    """
    rows = []
    for row in data:
        entries = []
        for entry in row:
            if isinstance(entry, (list, tuple)):
                if len(entry) != 2:
                    raise ValueError(f"Complex entries must be [re, im] pairs, got {entry}.")
                entries.append(complex(entry[0], entry[1]))
            else:
                entries.append(complex(entry))
        rows.append(entries)
    return np.array(rows, dtype=complex)
