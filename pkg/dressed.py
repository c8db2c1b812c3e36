"""
Dressed-state analysis.

Diagonalizes the rotating-frame Hamiltonian, follows dressed branches across a
parameter sweep by eigenvector overlap, and expands decay operators in the
dressed basis. Dressed states are the rows of U: |e_i> = sum_j U[i, j] |j>.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.linalg as la

from errors import AmbiguousTracking, ValidationError
from lindblad import DensityMatrix, as_matrix
from model import EXCITED_LEVELS, GROUND_LEVELS, LEVELS, N_LEVELS, Hamiltonian, check_level

TRACKING_THRESHOLD = 1.0 / np.sqrt(2.0)
BRANCH_LABELS = tuple(f"e{i}" for i in range(N_LEVELS))

HamiltonianLike = Union[Hamiltonian, np.ndarray]


@dataclass(frozen=True)
class DressedBasis:
    """
    Eigenvalues and dressed states in branch-label order.

    ``eigenvalues[i]`` and ``vectors[i]`` belong to branch ``labels[i]``.
    """
    eigenvalues: np.ndarray
    vectors: np.ndarray
    labels: Tuple[str, ...] = BRANCH_LABELS

    def __post_init__(self):
        eigenvalues = np.array(self.eigenvalues, dtype=float)
        vectors = np.array(self.vectors, dtype=complex)
        if eigenvalues.shape != (N_LEVELS,) or vectors.shape != (N_LEVELS, N_LEVELS):
            raise ValidationError("dressed basis needs 5 eigenvalues and a 5x5 U", field="basis")
        if len(self.labels) != N_LEVELS or len(set(self.labels)) != N_LEVELS:
            raise ValidationError(f"branch labels must be 5 distinct tags, got {self.labels!r}",
                                  field="labels")
        eigenvalues.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", tuple(self.labels))

    def ket(self, branch: int) -> np.ndarray:
        """Bare-basis components of dressed state ``branch``"""
        return self.vectors[branch].copy()

    def bare_character(self) -> List[int]:
        """Bare level carrying the largest weight in each branch"""
        return [int(np.argmax(np.abs(row))) + 1 for row in self.vectors]

    def branch_of_level(self, level: int) -> int:
        """Branch with the largest weight on bare ``level``"""
        return int(np.argmax(np.abs(self.vectors[:, check_level(level) - 1])))

    def to_frame(self, populations: Optional[Sequence[float]] = None) -> pd.DataFrame:
        """One row per branch: label, eigenvalue, U row split into real/imag, population"""
        records = []
        for i, label in enumerate(self.labels):
            record = {"label": label, "eps": float(self.eigenvalues[i])}
            for j in LEVELS:
                record[f"u{j}_re"] = float(self.vectors[i, j - 1].real)
                record[f"u{j}_im"] = float(self.vectors[i, j - 1].imag)
            record["population"] = float("nan") if populations is None else float(populations[i])
            records.append(record)
        return pd.DataFrame.from_records(records)


def _hamiltonian_matrix(H: HamiltonianLike) -> np.ndarray:
    matrix = H.matrix if isinstance(H, Hamiltonian) else np.asarray(H, dtype=complex)
    if matrix.shape != (N_LEVELS, N_LEVELS):
        raise ValidationError(f"Hamiltonian must be 5x5, got {matrix.shape}", field="hamiltonian")
    if np.max(np.abs(matrix - matrix.conj().T)) > 1e-12:
        raise ValidationError("Hamiltonian is not Hermitian", field="hamiltonian")
    return matrix


def _fix_phases(rows: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component of every row real positive"""
    out = np.array(rows, dtype=complex)
    for i, row in enumerate(out):
        pivot = row[int(np.argmax(np.abs(row)))]
        out[i] = row * (np.conj(pivot) / abs(pivot))
    return out


def _eigensystem(H: HamiltonianLike) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and phase-fixed dressed-state rows"""
    eigenvalues, columns = la.eigh(_hamiltonian_matrix(H))
    return eigenvalues, _fix_phases(columns.T)


def diagonalize(H: HamiltonianLike) -> DressedBasis:
    """
    Eigendecomposition with the initial labeling: e0 is the eigenvalue of
    smallest magnitude, e1..e4 the rest in ascending order.
    """
    eigenvalues, rows = _eigensystem(H)
    dark = int(np.argmin(np.abs(eigenvalues)))
    order = [dark] + [i for i in range(N_LEVELS) if i != dark]
    return DressedBasis(eigenvalues[order], rows[order])


def overlap_matrix(previous: DressedBasis, current: DressedBasis) -> np.ndarray:
    """|<e_i(previous)|e_j(current)>| for every branch pair"""
    return np.abs(previous.vectors.conj() @ current.vectors.T)


def follow(previous: DressedBasis, current: DressedBasis, step: Optional[int] = None) -> DressedBasis:
    """
    Relabel ``current`` so each branch continues the ``previous`` branch it
    overlaps most, matched greedily on descending overlap.
    """
    overlaps = overlap_matrix(previous, current)
    pairs = sorted(((overlaps[i, j], i, j) for i in range(N_LEVELS) for j in range(N_LEVELS)),
                   key=lambda item: (-item[0], item[1], item[2]))
    assignment = {}
    used = set()
    for value, i, j in pairs:
        if i in assignment or j in used:
            continue
        if value < TRACKING_THRESHOLD:
            where = "" if step is None else f" between sweep points {step - 1} and {step}"
            raise AmbiguousTracking(
                f"branch {previous.labels[i]} has best overlap {value:.3f} < 1/sqrt(2){where}; "
                f"refine the sweep grid near the avoided crossing")
        assignment[i] = j
        used.add(j)
    order = [assignment[i] for i in range(N_LEVELS)]
    return DressedBasis(current.eigenvalues[order], current.vectors[order], previous.labels)


def track_branches(h_sequence: Sequence[HamiltonianLike]) -> List[DressedBasis]:
    """Diagonalize every Hamiltonian and carry branch labels along the sequence"""
    if len(h_sequence) == 0:
        raise ValidationError("cannot track branches over an empty sequence", field="h_sequence")
    return track_bases([diagonalize(H) for H in h_sequence])


def track_bases(bases: Sequence[DressedBasis]) -> List[DressedBasis]:
    """Sequential tracking pass over already diagonalized points"""
    if len(bases) == 0:
        raise ValidationError("cannot track branches over an empty sequence", field="bases")
    tracked = [bases[0]]
    for n, basis in enumerate(bases[1:], 1):
        tracked.append(follow(tracked[-1], basis, step=n))
    return tracked


def dressed_populations(rho: Union[DensityMatrix, np.ndarray], basis: DressedBasis) -> np.ndarray:
    """p_i = <e_i|rho|e_i> in branch-label order"""
    U = basis.vectors
    return np.real(np.einsum("ij,jk,ik->i", U.conj(), as_matrix(rho), U))


# ---------------------------------------------------------------------------
# Decay operators in the dressed basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayExpansion:
    """|source><target| = sum_ab M[a, b] |e_a><e_b|"""
    coefficients: np.ndarray
    channel: Tuple[int, int]

    @property
    def label(self) -> str:
        return f"{self.channel[0]}->{self.channel[1]}"

    def bare_operator(self, basis: DressedBasis) -> np.ndarray:
        """Reassemble the expansion in the bare basis"""
        U = basis.vectors
        return U.T @ self.coefficients @ U.conj()


def decay_expansion(basis: DressedBasis, source: int, target: int) -> DecayExpansion:
    if check_level(source, "source") not in EXCITED_LEVELS:
        raise ValidationError(f"decay source must be an excited level, got {source}", field="source")
    if check_level(target, "target") not in GROUND_LEVELS:
        raise ValidationError(f"decay target must be a ground level, got {target}", field="target")
    U = basis.vectors
    coefficients = np.outer(U[:, source - 1].conj(), U[:, target - 1])
    return DecayExpansion(coefficients, (source, target))


def dominant_terms(expansion: DecayExpansion,
                   threshold: float) -> List[Tuple[Tuple[int, int], float]]:
    """Entries with |M_ab| >= threshold * max|M|, largest first, ties by (a, b)"""
    if not 0 < threshold <= 1:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold!r}", field="threshold")
    magnitudes = np.abs(expansion.coefficients)
    cutoff = threshold * magnitudes.max()
    terms = [((a, b), float(magnitudes[a, b]))
             for a in range(N_LEVELS) for b in range(N_LEVELS) if magnitudes[a, b] >= cutoff]
    return sorted(terms, key=lambda term: (-term[1], term[0]))


def pair_text(pair: Tuple[int, int]) -> str:
    return f"e{pair[0]}e{pair[1]}"


def dominant_pair(expansion: DecayExpansion) -> str:
    return pair_text(dominant_terms(expansion, 1.0)[0][0])
