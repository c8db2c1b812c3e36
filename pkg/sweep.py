"""
One-dimensional parameter sweeps.

Each axis point gets a steady-state solve and a diagonalization; the solves
may run on a thread pool. Branch tracking and table assembly then run as one
sequential pass in axis order, so the table does not depend on the worker
count.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from dressed import (
    DressedBasis, decay_expansion, diagonalize, dominant_pair, dressed_populations, track_bases,
)
from errors import AmbiguousTracking, DegenerateSteadyState, ValidationError
from lindblad import generator
from model import (
    DECAY_FIELDS, FIELD_FOR_FLAT_KEY, FLAT_KEY_FOR_FIELD, LEVELS, N_LEVELS, SystemParams, build_hamiltonian,
)
from solver import DEFAULT_SETTINGS, SolverSettings, SteadyStateResult, steady_state

AXIS_PARAMETERS = (
    ("delta3_locked", "delta1_delta2_locked")
    + tuple(f"delta{k}" for k in range(1, 5))
    + tuple(FLAT_KEY_FOR_FIELD[name] for name in DECAY_FIELDS)
    + ("gamma_d",)
    + tuple(f"omega{k}" for k in range(1, 5))
)

SWEEP_COLUMNS = (
    ["axis"]
    + [f"rho{k}{k}" for k in LEVELS]
    + [f"p{i}" for i in range(N_LEVELS)]
    + [f"eps{i}" for i in range(N_LEVELS)]
    + ["residual", "gap", "dominant_pair"]
)

DEFAULT_CHANNEL = (2, 5)


@dataclass(frozen=True)
class SweepAxis:
    """Swept parameter and its grid"""
    parameter: str
    values: Tuple[float, ...]

    def __post_init__(self):
        if self.parameter not in AXIS_PARAMETERS:
            raise ValidationError(f"unknown sweep parameter {self.parameter!r}; "
                                  f"choose one of {', '.join(AXIS_PARAMETERS)}", field="parameter")
        try:
            values = tuple(float(v) for v in self.values)
        except (TypeError, ValueError):
            raise ValidationError(f"axis values must be real numbers, got {self.values!r}", field="values")
        if not values:
            raise ValidationError("axis needs at least one value", field="values")
        if not all(math.isfinite(v) for v in values):
            raise ValidationError("axis values must be finite", field="values")
        if any(b <= a for a, b in zip(values[:-1], values[1:])):
            raise ValidationError("axis values must be strictly increasing", field="values")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_range(cls, parameter: str, start: float, stop: float, points: int) -> "SweepAxis":
        if isinstance(points, bool) or not isinstance(points, int) or points < 1:
            raise ValidationError(f"axis points must be a positive integer, got {points!r}", field="points")
        return cls(parameter, tuple(np.linspace(start, stop, points)))

    def __len__(self) -> int:
        return len(self.values)


def apply_axis_value(base: SystemParams, parameter: str, value: float) -> SystemParams:
    """Parameters of one sweep point"""
    if parameter == "delta3_locked":
        return base.with_detuning(3, value).with_detuning(4, value)
    if parameter == "delta1_delta2_locked":
        return base.with_detuning(1, value).with_detuning(2, value)
    if parameter.startswith("delta"):
        return base.with_detuning(int(parameter[-1]), value)
    if parameter.startswith("omega"):
        if value < 0:
            raise ValidationError(f"{parameter} magnitude must be >= 0, got {value!r}", field=parameter)
        k = int(parameter[-1])
        current = base.rabi[k - 1]
        phase = np.angle(current) if current != 0 else 0.0
        return base.with_rabi(k, value * np.exp(1j * phase))
    if parameter in FIELD_FOR_FLAT_KEY:
        return base.replace(**{FIELD_FOR_FLAT_KEY[parameter]: value})
    raise ValidationError(f"unknown sweep parameter {parameter!r}", field="parameter")


@dataclass
class PointSolution:
    """Steady state (None when degenerate) and untracked diagonalization of one point"""
    params: SystemParams
    basis: DressedBasis
    steady: Optional[SteadyStateResult] = None
    failure: Optional[str] = None


def solve_point(params: SystemParams, settings: SolverSettings = DEFAULT_SETTINGS) -> PointSolution:
    basis = diagonalize(build_hamiltonian(params))
    try:
        return PointSolution(params, basis, steady_state(generator(params), settings))
    except DegenerateSteadyState as e:
        return PointSolution(params, basis, failure=e.message)


def point_row(axis_value: float, steady: Optional[SteadyStateResult], basis: DressedBasis,
              channel: Tuple[int, int] = DEFAULT_CHANNEL) -> Dict[str, Any]:
    """One table row; populations, residual and gap are NaN without a steady state"""
    row: Dict[str, Any] = {"axis": float(axis_value)}
    if steady is not None:
        bare = steady.state.populations
        dressed = dressed_populations(steady.state, basis)
    else:
        bare = dressed = np.full(N_LEVELS, np.nan)
    for k in LEVELS:
        row[f"rho{k}{k}"] = float(bare[k - 1])
    for i in range(N_LEVELS):
        row[f"p{i}"] = float(dressed[i])
    for i in range(N_LEVELS):
        row[f"eps{i}"] = float(basis.eigenvalues[i])
    row["residual"] = float("nan") if steady is None else steady.residual
    row["gap"] = float("nan") if steady is None else steady.gap
    row["dominant_pair"] = dominant_pair(decay_expansion(basis, *channel))
    return row


@dataclass(frozen=True)
class SweepTable:
    """Observable series along a sweep axis; ``flagged`` lists degenerate rows"""
    axis: SweepAxis
    frame: pd.DataFrame
    flagged: Tuple[int, ...] = ()
    bases: Tuple[DressedBasis, ...] = field(default=(), compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.frame)

    def column(self, name: str) -> np.ndarray:
        return self.frame[name].to_numpy()

    @property
    def max_residual(self) -> float:
        residuals = self.frame["residual"].dropna()
        return float(residuals.max()) if len(residuals) else float("nan")


def run_sweep(base: SystemParams, axis: SweepAxis, channel: Tuple[int, int] = DEFAULT_CHANNEL,
              workers: int = 1, settings: SolverSettings = DEFAULT_SETTINGS) -> SweepTable:
    """
    Steady state and tracked dressed analysis at every axis value.

    Degenerate points become flagged NaN rows; AmbiguousTracking aborts.
    """
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ValidationError(f"workers must be a positive integer, got {workers!r}", field="workers")
    points = [apply_axis_value(base, axis.parameter, v) for v in axis.values]

    if workers == 1:
        solutions = [solve_point(p, settings) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            solutions = list(executor.map(lambda p: solve_point(p, settings), points))

    try:
        bases = track_bases([s.basis for s in solutions])
    except AmbiguousTracking as e:
        raise AmbiguousTracking(f"{e.message} ({axis.parameter} grid spacing too coarse)")

    rows: List[Dict[str, Any]] = []
    flagged: List[int] = []
    for n, (value, solution, basis) in enumerate(zip(axis.values, solutions, bases)):
        if solution.steady is None:
            flagged.append(n)
            print(f"⚠️ Degenerate steady state at {axis.parameter}={value:g}: {solution.failure}")
        rows.append(point_row(value, solution.steady, basis, channel))

    frame = pd.DataFrame.from_records(rows, columns=SWEEP_COLUMNS)
    return SweepTable(axis, frame, tuple(flagged), tuple(bases))


def single_point_table(params: SystemParams, channel: Tuple[int, int] = DEFAULT_CHANNEL,
                       settings: SolverSettings = DEFAULT_SETTINGS,
                       axis_value: Optional[float] = None) -> SweepTable:
    """The sweep-table row of one parameter set, keyed by delta3 unless ``axis_value`` is given"""
    if axis_value is None:
        axis_value = params.detunings[2]
    solution = solve_point(params, settings)
    if solution.steady is None:
        raise DegenerateSteadyState(solution.failure)
    frame = pd.DataFrame.from_records([point_row(axis_value, solution.steady, solution.basis, channel)],
                                      columns=SWEEP_COLUMNS)
    return SweepTable(SweepAxis("delta3", (axis_value,)), frame, (), (solution.basis,))
