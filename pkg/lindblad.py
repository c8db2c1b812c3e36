"""
Dissipative dynamics of the five-level atom.

Builds collapse operators for the six spontaneous-emission channels and
per-level dephasing, and assembles the 25x25 Liouvillian acting on the
column-stacked density matrix. The Bloch equations are generated from the
Lindblad form; ``equation_table`` exposes every generated coefficient so they
can be audited element by element.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from errors import ValidationError
from model import (
    DECAY_CHANNELS, DECAY_FIELDS, LEVELS, N_LEVELS, Hamiltonian, SystemParams,
    build_hamiltonian, check_level,
)

DIM = N_LEVELS * N_LEVELS


# ---------------------------------------------------------------------------
# Column-stacking vectorization
# ---------------------------------------------------------------------------

def vec_index(row: int, col: int) -> int:
    """Position of rho[row, col] (1-based levels) in the column-stacked vector"""
    return (check_level(col, "col") - 1) * N_LEVELS + (check_level(row, "row") - 1)


def unvec_index(index: int) -> Tuple[int, int]:
    if not 0 <= index < DIM:
        raise ValidationError(f"vector index must be in [0, {DIM}), got {index}", field="index")
    col, row = divmod(index, N_LEVELS)
    return row + 1, col + 1


def vec(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix, dtype=complex).flatten(order="F")


def unvec(vector: np.ndarray) -> np.ndarray:
    return np.asarray(vector, dtype=complex).reshape((N_LEVELS, N_LEVELS), order="F")


def left_multiply(op: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> op @ rho"""
    return np.kron(np.eye(N_LEVELS), op)


def right_multiply(op: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho @ op"""
    return np.kron(op.T, np.eye(N_LEVELS))


def trace_row() -> np.ndarray:
    """Row functional r with r @ vec(rho) = trace(rho)"""
    row = np.zeros(DIM, dtype=complex)
    for level in LEVELS:
        row[vec_index(level, level)] = 1.0
    return row


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite 5x5 state"""
    matrix: np.ndarray
    tolerance: float = field(default=1e-12, compare=False, repr=False)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (N_LEVELS, N_LEVELS):
            raise ValidationError(f"density matrix must be 5x5, got {matrix.shape}", field="rho")
        if np.max(np.abs(matrix - matrix.conj().T)) > self.tolerance:
            raise ValidationError("density matrix is not Hermitian", field="rho")
        if abs(np.trace(matrix) - 1.0) > self.tolerance:
            raise ValidationError(f"density matrix trace is {np.trace(matrix).real:.3e}, not 1",
                                  field="rho")
        if np.min(np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)) < -1e-10:
            raise ValidationError("density matrix has a negative eigenvalue", field="rho")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def element(self, row: int, col: int) -> complex:
        return complex(self.matrix[check_level(row, "row") - 1, check_level(col, "col") - 1])


def as_matrix(rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def pure_state(level: int) -> DensityMatrix:
    matrix = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    index = check_level(level) - 1
    matrix[index, index] = 1.0
    return DensityMatrix(matrix)


def maximally_mixed() -> DensityMatrix:
    return DensityMatrix(np.eye(N_LEVELS, dtype=complex) / N_LEVELS)


def random_density_matrix(rng: np.random.Generator, rank: int = N_LEVELS) -> DensityMatrix:
    """Random full-rank (by default) state from a complex Ginibre matrix"""
    a = rng.normal(size=(N_LEVELS, rank)) + 1j * rng.normal(size=(N_LEVELS, rank))
    matrix = a @ a.conj().T
    matrix = matrix / np.trace(matrix).real
    return DensityMatrix((matrix + matrix.conj().T) / 2)


# ---------------------------------------------------------------------------
# Collapse operators and generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CollapseOperator:
    matrix: np.ndarray
    rate_label: str
    rate: float


def collapse_operators(params: SystemParams) -> List[CollapseOperator]:
    """
    sqrt(gamma) |g><e| for each decay channel (excited -> ground), then
    sqrt(gamma_d) |k><k| on every level. Zero-rate operators are omitted.
    """
    ops: List[CollapseOperator] = []
    for (excited, ground), name in zip(DECAY_CHANNELS, DECAY_FIELDS):
        rate = getattr(params, name)
        if rate > 0:
            matrix = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
            matrix[ground - 1, excited - 1] = np.sqrt(rate)
            ops.append(CollapseOperator(matrix, name, rate))
    if params.gamma_d > 0:
        for level in LEVELS:
            matrix = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
            matrix[level - 1, level - 1] = np.sqrt(params.gamma_d)
            ops.append(CollapseOperator(matrix, f"dephase_{level}", params.gamma_d))
    return ops


@dataclass(frozen=True)
class Liouvillian:
    """Generator acting on column-stacked rho: d vec(rho)/dt = L @ vec(rho)"""
    matrix: np.ndarray
    stacking: str = "column"

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (DIM, DIM):
            raise ValidationError(f"Liouvillian must be {DIM}x{DIM}", field="liouvillian")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def apply(self, rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
        return unvec(self.matrix @ vec(as_matrix(rho)))

    def coefficient(self, row_element: Tuple[int, int], source_element: Tuple[int, int]) -> complex:
        """Coefficient of rho_source in the equation for d rho_row / dt"""
        return complex(self.matrix[vec_index(*row_element), vec_index(*source_element)])


def _hamiltonian_matrix(H: Union[Hamiltonian, np.ndarray]) -> np.ndarray:
    return H.matrix if isinstance(H, Hamiltonian) else np.asarray(H, dtype=complex)


def liouvillian(H: Union[Hamiltonian, np.ndarray],
                collapses: Sequence[CollapseOperator]) -> Liouvillian:
    h = _hamiltonian_matrix(H)
    L = -1j * (left_multiply(h) - right_multiply(h))
    for op in collapses:
        c = op.matrix
        cdc = c.conj().T @ c
        L = L + np.kron(c.conj(), c) - 0.5 * left_multiply(cdc) - 0.5 * right_multiply(cdc)
    return Liouvillian(L)


def generator(params: SystemParams) -> Liouvillian:
    """Liouvillian of a parameter set"""
    return liouvillian(build_hamiltonian(params), collapse_operators(params))


def rhs(rho: Union[DensityMatrix, np.ndarray], H: Union[Hamiltonian, np.ndarray],
        collapses: Sequence[CollapseOperator]) -> np.ndarray:
    """d rho / dt evaluated directly in matrix form"""
    r = as_matrix(rho)
    h = _hamiltonian_matrix(H)
    out = -1j * (h @ r - r @ h)
    for op in collapses:
        c = op.matrix
        cd = c.conj().T
        cdc = cd @ c
        out = out + c @ r @ cd - 0.5 * (cdc @ r + r @ cdc)
    return out


# ---------------------------------------------------------------------------
# Generated-equation audit
# ---------------------------------------------------------------------------

def element_name(row: int, col: int) -> str:
    return f"rho{row}{col}"


def equation_table(L: Liouvillian, rows: Optional[Sequence[Tuple[int, int]]] = None,
                   atol: float = 1e-15) -> pd.DataFrame:
    """
    Every nonzero coefficient of the generated Bloch equations.

    One row per (equation element, source element) pair with the real and
    imaginary parts of the coefficient.
    """
    if rows is None:
        rows = [(r, c) for r in LEVELS for c in LEVELS]
    records = []
    for row_element in rows:
        i = vec_index(*row_element)
        for j in range(DIM):
            value = L.matrix[i, j]
            if abs(value) > atol:
                src = unvec_index(j)
                records.append({
                    "row_element": element_name(*row_element),
                    "source_element": element_name(*src),
                    "real": float(value.real),
                    "imag": float(value.imag),
                })
    return pd.DataFrame.from_records(records, columns=["row_element", "source_element", "real", "imag"])
