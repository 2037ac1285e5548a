import os
import random
from typing import Optional

import numpy as np
from numpy import ndarray
from numpy.random import Generator

from finite_qrf.integral import OperatorField
from finite_qrf.measure import Povm, SampleSpace
from finite_qrf.operators import Channel, Operator, State, Unitary
from finite_qrf.options import DEFAULT_SEED


def seed_everything(seed: Optional[int] = None) -> Generator:
    """
    Sets the seed of numpy and the native random library and returns a numpy generator seeded alike.

    :param seed: (Optional) the seed to use.
    :return: The seeded generator.
    """
    seed = DEFAULT_SEED if seed is None else seed
    random.seed(seed)
    os.environ["PYTHONHASHSEED"] = str(seed)
    np.random.seed(seed)
    return np.random.default_rng(seed)


def _ginibre(rng: Generator, rows: int, columns: int) -> ndarray:
    return rng.standard_normal((rows, columns)) + 1j * rng.standard_normal((rows, columns))


def random_operator(dim: int, rng: Generator) -> Operator:
    return Operator.unchecked(_ginibre(rng, dim, dim))


def random_hermitian(dim: int, rng: Generator) -> Operator:
    matrix = _ginibre(rng, dim, dim)
    return Operator.unchecked((matrix + matrix.conj().T) / 2)


def random_state(dim: int, rng: Generator, rank: Optional[int] = None) -> State:
    """
    A random density matrix W W^dagger / tr[W W^dagger] with a Ginibre matrix W of the given rank.
    """
    matrix = _ginibre(rng, dim, rank or dim)
    density = matrix @ matrix.conj().T
    return State.unchecked(density / np.trace(density).real)


def random_unitary(dim: int, rng: Generator) -> Unitary:
    """
    A Haar random unitary from the QR decomposition of a Ginibre matrix.
    """
    q, r = np.linalg.qr(_ginibre(rng, dim, dim))
    phases = np.diag(r) / np.abs(np.diag(r))
    return Unitary.unchecked(q * phases[None, :])


def random_channel(dim_in: int, dim_out: int, rng: Generator, kraus_rank: int = 2) -> Channel:
    """
    A random channel from a random isometry C^dim_in -> C^kraus_rank (x) C^dim_out cut into Kraus operators.
    """
    rows = kraus_rank * dim_out
    if rows < dim_in:
        raise ValueError(f"Kraus rank {kraus_rank} is too small for a channel from dim {dim_in} to dim {dim_out}.")
    isometry, _ = np.linalg.qr(_ginibre(rng, rows, dim_in))
    return Channel.unchecked([isometry[k * dim_out:(k + 1) * dim_out] for k in range(kraus_rank)])


def _inverse_sqrt(matrix: ndarray) -> ndarray:
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    return (eigenvectors / np.sqrt(eigenvalues)[None, :]) @ eigenvectors.conj().T


def random_povm(space: SampleSpace, dim: int, rng: Generator) -> Povm:
    """
    A random POVM S^-1/2 A_x S^-1/2 from random positive operators A_x with S = sum_x A_x.
    """
    positives = []
    for _ in space:
        matrix = _ginibre(rng, dim, dim)
        positives.append(matrix @ matrix.conj().T)
    root = _inverse_sqrt(sum(positives))
    return Povm.unchecked(space, [Operator.unchecked(root @ a @ root) for a in positives], name="random")


def random_field(space: SampleSpace, dim: int, rng: Generator) -> OperatorField:
    return OperatorField(space, [random_operator(dim, rng) for _ in space])


def random_matrix(rows: int, columns: int, rng: Generator) -> ndarray:
    return _ginibre(rng, rows, columns)
