"""
Five-level M-scheme model: coupling topology, rotating-frame level energies
and the Hamiltonian.

Levels are labelled 1..5 as in the atomic scheme; {1, 3, 5} are ground
sublevels and {2, 4} are excited. Field k couples one ground level to one
excited level. All energies and rates are in units of the reference decay
rate gamma, with hbar = 1.
"""

import math
from collections import deque
from dataclasses import dataclass, field, replace as dc_replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import CyclicTopology, UnknownKey, ValidationError

N_LEVELS = 5
LEVELS = (1, 2, 3, 4, 5)
GROUND_LEVELS = (1, 3, 5)
EXCITED_LEVELS = (2, 4)

# (excited, ground) for every spontaneous-emission channel, in SystemParams order
DECAY_CHANNELS = ((2, 1), (2, 3), (2, 5), (4, 1), (4, 3), (4, 5))
DECAY_FIELDS = ("gamma_12", "gamma_23", "gamma_25", "gamma_14", "gamma_34", "gamma_45")


def check_level(value: Any, name: str = "level") -> int:
    """Validate a bare-state label (LevelIndex) and return it as int"""
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value not in LEVELS:
        raise ValidationError(f"{name} must be a level in 1..5, got {value!r}", field=name)
    return int(value)


@dataclass(frozen=True)
class Edge:
    """Field ``field_index`` driving ground level ``lower`` to excited level ``upper``"""
    field_index: int
    lower: int
    upper: int

    def __post_init__(self):
        if self.field_index not in (1, 2, 3, 4):
            raise ValidationError(f"field index must be 1..4, got {self.field_index!r}",
                                  field="topology")
        check_level(self.lower, "topology")
        check_level(self.upper, "topology")
        if self.lower not in GROUND_LEVELS or self.upper not in EXCITED_LEVELS:
            raise ValidationError(
                f"field {self.field_index} must join a ground level to an excited level, "
                f"got lower={self.lower}, upper={self.upper}", field="topology")


EdgeLike = Union[Edge, Tuple[int, int, int]]


def _as_edge(edge: EdgeLike) -> Edge:
    return edge if isinstance(edge, Edge) else Edge(*edge)


def _check_forest(edges: Sequence[Edge]) -> None:
    """Raise CyclicTopology if the undirected coupling graph has a loop"""
    parent = {level: level for level in LEVELS}

    def find(level: int) -> int:
        while parent[level] != level:
            parent[level] = parent[parent[level]]
            level = parent[level]
        return level

    for edge in edges:
        a, b = find(edge.lower), find(edge.upper)
        if a == b:
            raise CyclicTopology(
                f"field {edge.field_index} ({edge.lower}-{edge.upper}) closes a loop; "
                "closed-loop phase conditions are not supported")
        parent[a] = b


@dataclass(frozen=True)
class CouplingMap:
    """Four driving fields wired onto the five levels as an acyclic graph"""
    edges: Tuple[Edge, ...]
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        edges = tuple(_as_edge(e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if len(edges) != 4:
            raise ValidationError(f"topology needs exactly 4 edges, got {len(edges)}",
                                  field="topology")
        if sorted(e.field_index for e in edges) != [1, 2, 3, 4]:
            raise ValidationError("each field 1..4 must appear exactly once", field="topology")
        pairs = [(e.lower, e.upper) for e in edges]
        if len(set(pairs)) != len(pairs):
            raise ValidationError("duplicate (lower, upper) pair in topology", field="topology")
        _check_forest(edges)

    def edge_for(self, field_index: int) -> Edge:
        for edge in self.edges:
            if edge.field_index == field_index:
                return edge
        raise KeyError(field_index)

    def neighbours(self, level: int) -> List[int]:
        out = []
        for edge in self.edges:
            if edge.lower == level:
                out.append(edge.upper)
            elif edge.upper == level:
                out.append(edge.lower)
        return sorted(out)


def m_scheme_topology() -> CouplingMap:
    """The M-scheme path 1-2-3-4-5"""
    return CouplingMap((Edge(1, 1, 2), Edge(2, 3, 2), Edge(3, 3, 4), Edge(4, 5, 4)),
                       name="m_scheme")


def variant_topology() -> CouplingMap:
    """Field 2 re-wired to drive 5-2, leaving 2-3 uncoupled: path 1-2-5-4-3"""
    return CouplingMap((Edge(1, 1, 2), Edge(2, 5, 2), Edge(3, 3, 4), Edge(4, 5, 4)),
                       name="variant")


TOPOLOGIES = {
    "m_scheme": m_scheme_topology,
    "variant": variant_topology,
}


def topology_by_name(name: str) -> CouplingMap:
    try:
        return TOPOLOGIES[name]()
    except KeyError:
        raise ValidationError(
            f"topology must be one of {sorted(TOPOLOGIES)}, got {name!r}", field="topology")


def frame_energies(topology: Union[CouplingMap, Iterable[EdgeLike]],
                   detunings: Sequence[float]) -> np.ndarray:
    """
    Rotating-frame level energies theta_1..theta_5 (returned 0-based).

    Breadth-first from level 1 with theta_1 = 0; every edge k imposes
    theta_upper - theta_lower = delta_k. On the M-scheme this gives
    (0, d1, d1-d2, d1-d2+d3, d1-d2+d3-d4).
    """
    edges = topology.edges if isinstance(topology, CouplingMap) else tuple(_as_edge(e) for e in topology)
    _check_forest(edges)
    if len(detunings) != 4:
        raise ValidationError("exactly 4 detunings required", field="detunings")

    adjacency: Dict[int, List[Tuple[int, float]]] = {level: [] for level in LEVELS}
    for edge in edges:
        delta = float(detunings[edge.field_index - 1])
        adjacency[edge.lower].append((edge.upper, delta))
        adjacency[edge.upper].append((edge.lower, -delta))

    theta = {1: 0.0}
    queue = deque([1])
    while queue:
        level = queue.popleft()
        for other, step in adjacency[level]:
            if other not in theta:
                theta[other] = theta[level] + step
                queue.append(other)

    unreachable = [level for level in LEVELS if level not in theta]
    if unreachable:
        print(f"⚠️ Levels {unreachable} are not coupled to level 1; frame energy set to 0")
    return np.array([theta.get(level, 0.0) for level in LEVELS], dtype=float)


def composite_detunings(detunings: Sequence[float]) -> Dict[str, float]:
    """Chain sums of the M-scheme detunings (d12, d13, d14, d23, d24)"""
    d1, d2, d3, d4 = (float(d) for d in detunings)
    d12 = d1 - d2
    return {
        "delta12": d12,
        "delta13": d12 + d3,
        "delta14": d12 + d3 - d4,
        "delta23": d2 - d3,
        "delta24": d2 - d3 + d4,
    }


def _finite(value: complex) -> bool:
    return math.isfinite(value.real) and math.isfinite(value.imag)


@dataclass(frozen=True)
class SystemParams:
    """All physical inputs: Rabi frequencies, detunings, decay and dephasing rates"""
    rabi: Tuple[complex, ...]
    detunings: Tuple[float, ...]
    gamma_12: float = 1.0
    gamma_23: float = 1.0
    gamma_25: float = 0.0
    gamma_14: float = 0.0
    gamma_34: float = 1.0
    gamma_45: float = 1.0
    gamma_d: float = 0.0
    topology: CouplingMap = field(default_factory=m_scheme_topology)

    def __post_init__(self):
        try:
            rabi = tuple(complex(v) for v in self.rabi)
        except (TypeError, ValueError):
            raise ValidationError(f"rabi frequencies must be complex numbers, got {self.rabi!r}",
                                  field="rabi")
        try:
            detunings = tuple(float(v) for v in self.detunings)
        except (TypeError, ValueError):
            raise ValidationError(f"detunings must be real numbers, got {self.detunings!r}",
                                  field="detunings")
        if len(rabi) != 4:
            raise ValidationError(f"exactly 4 Rabi frequencies required, got {len(rabi)}", field="rabi")
        if len(detunings) != 4:
            raise ValidationError(f"exactly 4 detunings required, got {len(detunings)}",
                                  field="detunings")
        for k, value in enumerate(rabi, 1):
            if not _finite(value):
                raise ValidationError(f"omega{k} must be finite", field=f"omega_{k}")
        for k, value in enumerate(detunings, 1):
            if not math.isfinite(value):
                raise ValidationError(f"delta{k} must be finite", field=f"delta_{k}")
        object.__setattr__(self, "rabi", rabi)
        object.__setattr__(self, "detunings", detunings)

        for name in DECAY_FIELDS + ("gamma_d",):
            raw = getattr(self, name)
            try:
                value = float(raw)
            except (TypeError, ValueError):
                raise ValidationError(f"{name.replace('_', '')} ({name}) must be a real number, "
                                      f"got {raw!r}", field=name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name.replace('_', '')} ({name}) must be finite and >= 0, "
                                      f"got {raw!r}", field=name)
            object.__setattr__(self, name, value)

        if not isinstance(self.topology, CouplingMap):
            raise ValidationError("topology must be a CouplingMap", field="topology")

    @property
    def decay_rates(self) -> Dict[Tuple[int, int], float]:
        """Rate per (excited, ground) channel"""
        return {channel: getattr(self, name) for channel, name in zip(DECAY_CHANNELS, DECAY_FIELDS)}

    def replace(self, **changes) -> "SystemParams":
        return dc_replace(self, **changes)

    def with_rabi(self, k: int, value: complex) -> "SystemParams":
        rabi = list(self.rabi)
        rabi[k - 1] = value
        return self.replace(rabi=tuple(rabi))

    def with_detuning(self, k: int, value: float) -> "SystemParams":
        detunings = list(self.detunings)
        detunings[k - 1] = value
        return self.replace(detunings=tuple(detunings))

    # -- flat (config schema) view -------------------------------------------------

    def to_flat(self) -> Dict[str, Any]:
        """Parameters under the config-schema key names"""
        flat: Dict[str, Any] = {}
        for k, value in enumerate(self.rabi, 1):
            flat[f"omega{k}"] = value.real if value.imag == 0 else [value.real, value.imag]
        for k, value in enumerate(self.detunings, 1):
            flat[f"delta{k}"] = value
        for name in DECAY_FIELDS + ("gamma_d",):
            flat[FLAT_KEY_FOR_FIELD[name]] = getattr(self, name)
        flat["topology"] = self.topology.name
        return flat

    @classmethod
    def from_flat(cls, flat: Dict[str, Any], base: Optional["SystemParams"] = None) -> "SystemParams":
        """Build from config-schema keys, starting from ``base`` (all zero fields if None)"""
        unknown = sorted(set(flat) - set(FLAT_KEYS))
        if unknown:
            raise UnknownKey(f"unknown parameter key(s): {', '.join(unknown)}", field=unknown[0])

        if base is None:
            base = cls(rabi=(0, 0, 0, 0), detunings=(0, 0, 0, 0), gamma_12=0, gamma_23=0,
                       gamma_34=0, gamma_45=0)
        rabi = list(base.rabi)
        detunings = list(base.detunings)
        changes: Dict[str, Any] = {}
        for key, value in flat.items():
            if key.startswith("omega"):
                rabi[int(key[-1]) - 1] = _parse_complex(value, key)
            elif key.startswith("delta"):
                detunings[int(key[-1]) - 1] = _parse_real(value, key)
            elif key == "topology":
                changes["topology"] = value if isinstance(value, CouplingMap) else topology_by_name(value)
            elif key == "lock_delta4_to_delta3":
                continue
            else:
                changes[FIELD_FOR_FLAT_KEY[key]] = _parse_real(value, FIELD_FOR_FLAT_KEY[key])
        lock = flat.get("lock_delta4_to_delta3", False)
        if not isinstance(lock, bool):
            raise ValidationError(f"lock_delta4_to_delta3 must be true or false, got {lock!r}",
                                  field="lock_delta4_to_delta3")
        if lock:
            detunings[3] = detunings[2]
        return base.replace(rabi=tuple(rabi), detunings=tuple(detunings), **changes)


FLAT_KEY_FOR_FIELD = {name: name.replace("_", "") for name in DECAY_FIELDS}
FLAT_KEY_FOR_FIELD["gamma_d"] = "gamma_d"
FIELD_FOR_FLAT_KEY = {v: k for k, v in FLAT_KEY_FOR_FIELD.items()}
FLAT_KEYS = (
    tuple(f"omega{k}" for k in range(1, 5))
    + tuple(f"delta{k}" for k in range(1, 5))
    + tuple(FLAT_KEY_FOR_FIELD.values())
    + ("topology", "lock_delta4_to_delta3")
)


def _parse_real(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
        raise ValidationError(f"{name} must be a real number, got {value!r}", field=name)
    return float(value)


def _parse_complex(value: Any, name: str) -> complex:
    """Scalar or [re, im] pair"""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValidationError(f"{name} as a list must be [re, im], got {value!r}", field=name)
        return complex(_parse_real(value[0], name), _parse_real(value[1], name))
    if isinstance(value, complex):
        return value
    return complex(_parse_real(value, name))


@dataclass(frozen=True)
class Hamiltonian:
    """Rotating-frame Hamiltonian; ``frame_energies`` is its diagonal"""
    matrix: np.ndarray
    frame_energies: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        energies = np.array(self.frame_energies, dtype=float)
        if matrix.shape != (N_LEVELS, N_LEVELS) or energies.shape != (N_LEVELS,):
            raise ValidationError("Hamiltonian must be 5x5 with 5 frame energies", field="hamiltonian")
        matrix.setflags(write=False)
        energies.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "frame_energies", energies)

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.matrix, self.matrix.conj().T))


def build_hamiltonian(params: SystemParams) -> Hamiltonian:
    """Diagonal theta plus Omega_k at (upper, lower) and its conjugate at (lower, upper)"""
    theta = frame_energies(params.topology, params.detunings)
    matrix = np.diag(theta).astype(complex)
    for edge in params.topology.edges:
        omega = params.rabi[edge.field_index - 1]
        u, l = edge.upper - 1, edge.lower - 1
        matrix[u, l] = omega
        matrix[l, u] = omega.conjugate()
    return Hamiltonian(matrix=matrix, frame_energies=theta)
