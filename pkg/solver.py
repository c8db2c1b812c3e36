"""
Steady states, time evolution and adiabatic detuning ramps.

The steady state comes from a replaced-row linear solve on the Liouvillian,
cross-checked by a singular-value degeneracy test. Time evolution uses matrix
exponentials: exact propagators for fixed parameters and exponential-midpoint
steps for ramped ones, verified against a step-halved reference run.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.linalg as la

from errors import DegenerateSteadyState, SingularSolve, StepFailure, ValidationError
from lindblad import (
    DIM, DensityMatrix, Liouvillian, as_matrix, generator, trace_row, unvec, vec, vec_index,
)
from model import LEVELS, SystemParams


@dataclass(frozen=True)
class SolverSettings:
    """Numerical tolerances and step controls (all times in 1/gamma)"""
    residual_tolerance: float = 1e-10
    degeneracy_floor: float = 1e-8
    singular_condition: float = 1e13
    drift_tolerance: float = 1e-9
    ramp_step: float = 2.0
    ramp_tolerance: float = 1e-6
    min_step: float = 1e-3

    def __post_init__(self):
        for name in ("residual_tolerance", "degeneracy_floor", "singular_condition",
                     "drift_tolerance", "ramp_step", "ramp_tolerance", "min_step"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
                raise ValidationError(f"solver.{name} must be a positive number, got {value!r}",
                                      field=name)


DEFAULT_SETTINGS = SolverSettings()


# ---------------------------------------------------------------------------
# Steady state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SteadyStateResult:
    state: DensityMatrix
    residual: float
    gap: float


def _as_liouvillian(L: Union[Liouvillian, SystemParams]) -> Liouvillian:
    return generator(L) if isinstance(L, SystemParams) else L


def spectral_gap(L: Liouvillian) -> float:
    """Second-smallest |Re lambda| over the spectrum (slowest relaxation rate)"""
    rates = np.sort(np.abs(la.eigvals(L.matrix).real))
    return float(rates[1])


def relaxation_time(L: Liouvillian) -> float:
    return 1.0 / spectral_gap(L)


def _hermitize(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2


def nullspace_steady_state(L: Liouvillian) -> DensityMatrix:
    """Independent oracle: right singular vector of the smallest singular value"""
    _, _, vh = la.svd(L.matrix)
    rho = unvec(vh[-1].conj())
    rho = rho / np.trace(rho)
    return DensityMatrix(_hermitize(rho))


def steady_state(L: Union[Liouvillian, SystemParams],
                 settings: SolverSettings = DEFAULT_SETTINGS,
                 replace_row: Tuple[int, int] = (1, 1)) -> SteadyStateResult:
    """
    Unique trace-one solution of L vec(rho) = 0.

    The equation row of ``replace_row`` is swapped for the trace functional
    and the system solved against the unit vector at that row.
    """
    L = _as_liouvillian(L)
    singular_values = la.svdvals(L.matrix)
    if singular_values[-2] <= settings.degeneracy_floor:
        dim = int(np.sum(singular_values <= settings.degeneracy_floor))
        raise DegenerateSteadyState(
            f"steady state not unique: nullspace dimension {dim} "
            f"(second-smallest singular value {singular_values[-2]:.3e})")

    row = vec_index(*replace_row)
    A = np.array(L.matrix)
    A[row, :] = trace_row()
    b = np.zeros(DIM, dtype=complex)
    b[row] = 1.0

    condition = np.linalg.cond(A)
    if not math.isfinite(condition) or condition > settings.singular_condition:
        raise SingularSolve(f"replaced-row system is singular (condition number {condition:.3e})")
    try:
        x = la.solve(A, b)
    except la.LinAlgError as e:
        raise SingularSolve(f"replaced-row solve failed: {e}")

    rho = _hermitize(unvec(x))
    residual = float(np.max(np.abs(L.matrix @ vec(rho))))
    if residual > settings.residual_tolerance:
        raise SingularSolve(f"steady-state residual {residual:.3e} exceeds "
                            f"{settings.residual_tolerance:.1e}")
    return SteadyStateResult(state=DensityMatrix(rho), residual=residual, gap=spectral_gap(L))


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

TRAJECTORY_COLUMNS = (
    ["t"] + [f"rho{k}{k}" for k in LEVELS] + ["coh12_abs", "coh13_abs"]
)


def observables_frame(times: Sequence[float], matrices: Sequence[np.ndarray],
                      tracking_error: Optional[Sequence[float]] = None) -> pd.DataFrame:
    columns = list(TRAJECTORY_COLUMNS)
    records = []
    for t, m in zip(times, matrices):
        record = {"t": float(t)}
        for k in LEVELS:
            record[f"rho{k}{k}"] = float(m[k - 1, k - 1].real)
        record["coh12_abs"] = float(abs(m[0, 1]))
        record["coh13_abs"] = float(abs(m[0, 2]))
        records.append(record)
    frame = pd.DataFrame.from_records(records, columns=columns)
    if tracking_error is not None:
        frame["tracking_error"] = np.asarray(tracking_error, dtype=float)
    return frame


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: Tuple[DensityMatrix, ...]
    observables: pd.DataFrame
    tracking_error: Optional[np.ndarray] = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if len(times) != len(self.states):
            raise ValidationError("times and states differ in length", field="trajectory")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ValidationError("trajectory times must be strictly increasing", field="trajectory")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", tuple(self.states))

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]

    @classmethod
    def empty(cls, with_tracking: bool = False) -> "Trajectory":
        tracking = [] if with_tracking else None
        return cls(np.array([]), (), observables_frame([], [], tracking),
                   None if tracking is None else np.array([]))


def _check_drift(matrices: Sequence[np.ndarray], times: Sequence[float], tolerance: float) -> None:
    for t, m in zip(times, matrices):
        trace_drift = abs(np.trace(m) - 1.0)
        hermitian_drift = float(np.max(np.abs(m - m.conj().T)))
        if trace_drift > tolerance or hermitian_drift > tolerance:
            raise StepFailure(
                f"accuracy contract violated at t={t:.6g}: trace drift {trace_drift:.2e}, "
                f"Hermiticity drift {hermitian_drift:.2e}", time=float(t))


def _sample_times(t_end: float, n_samples: int) -> np.ndarray:
    if not (isinstance(t_end, (int, float)) and math.isfinite(t_end) and t_end > 0):
        raise ValidationError(f"t_end must be a positive number, got {t_end!r}", field="t_end")
    if isinstance(n_samples, bool) or not isinstance(n_samples, (int, np.integer)) or n_samples < 2:
        raise ValidationError(f"n_samples must be an integer >= 2, got {n_samples!r}", field="samples")
    return np.linspace(0.0, float(t_end), int(n_samples))


def evolve(rho0: Union[DensityMatrix, np.ndarray], params: SystemParams, t_end: float,
           n_samples: int, settings: SolverSettings = DEFAULT_SETTINGS) -> Trajectory:
    """
    Relaxation under fixed parameters, sampled at n_samples uniform times.

    The one-sample propagator expm(L dt) is exact, so there is no step error to
    control; only trace and Hermiticity drift are checked.
    """
    times = _sample_times(t_end, n_samples)
    L = generator(params).matrix
    step = la.expm(L * (times[1] - times[0]))
    v = vec(as_matrix(rho0))
    vectors = [v]
    for _ in range(len(times) - 1):
        v = step @ v
        vectors.append(v)

    matrices = [unvec(v) for v in vectors]
    _check_drift(matrices, times, settings.drift_tolerance)
    states = tuple(DensityMatrix(m, tolerance=settings.drift_tolerance) for m in matrices)
    return Trajectory(times, states, observables_frame(times, matrices))


# ---------------------------------------------------------------------------
# Adiabatic ramps
# ---------------------------------------------------------------------------

RAMP_TARGETS = ("delta3", "delta3_delta4")
RAMP_SHAPES = ("linear", "smoothstep")


@dataclass(frozen=True)
class RampSpec:
    """Detuning ramp from start_value to end_value over ``duration``"""
    start_value: float
    end_value: float
    duration: float
    target: str = "delta3_delta4"
    shape: str = "linear"

    def __post_init__(self):
        if self.target not in RAMP_TARGETS:
            raise ValidationError(f"ramp target must be one of {RAMP_TARGETS}, got {self.target!r}",
                                  field="target")
        if self.shape not in RAMP_SHAPES:
            raise ValidationError(f"ramp shape must be one of {RAMP_SHAPES}, got {self.shape!r}",
                                  field="shape")
        for name in ("start_value", "end_value", "duration"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValidationError(f"ramp {name} must be a finite number, got {value!r}", field=name)
        if self.duration <= 0:
            raise ValidationError(f"ramp duration must be > 0, got {self.duration!r}", field="duration")

    def fraction(self, t: float) -> float:
        u = min(max(t / self.duration, 0.0), 1.0)
        return u if self.shape == "linear" else u * u * (3.0 - 2.0 * u)

    def value_at(self, t: float) -> float:
        return self.start_value + (self.end_value - self.start_value) * self.fraction(t)

    def params_at(self, base: SystemParams, t: float) -> SystemParams:
        return self.with_value(base, self.value_at(t))

    def with_value(self, base: SystemParams, value: float) -> SystemParams:
        params = base.with_detuning(3, value)
        if self.target == "delta3_delta4":
            params = params.with_detuning(4, value)
        return params

    def generator_terms(self, base: SystemParams) -> Tuple[np.ndarray, np.ndarray]:
        """(L0, dL) with L(value) = L0 + value * dL; frame energies are linear in the detunings"""
        l0 = generator(self.with_value(base, 0.0)).matrix
        l1 = generator(self.with_value(base, 1.0)).matrix
        return l0, l1 - l0


def _propagate_ramp(ramp: RampSpec, l0: np.ndarray, dl: np.ndarray, v0: np.ndarray,
                    times: np.ndarray, step: float) -> List[np.ndarray]:
    out = [v0]
    v = v0
    for t0, t1 in zip(times[:-1], times[1:]):
        n_sub = max(1, int(math.ceil((t1 - t0) / step)))
        h = (t1 - t0) / n_sub
        for j in range(n_sub):
            value = ramp.value_at(t0 + (j + 0.5) * h)
            v = la.expm((l0 + value * dl) * h) @ v
        out.append(v)
    return out


def adiabatic_ramp(rho0: Union[DensityMatrix, np.ndarray], params: SystemParams, ramp: RampSpec,
                   n_samples: int, settings: SolverSettings = DEFAULT_SETTINGS) -> Trajectory:
    """
    Integrate under the ramped generator and report, per sample, the
    max-entry distance to the instantaneous steady state.
    """
    times = _sample_times(ramp.duration, n_samples)
    v0 = vec(as_matrix(rho0))
    l0, dl = ramp.generator_terms(params)

    step = min(settings.ramp_step, ramp.duration / 8)
    coarse = _propagate_ramp(ramp, l0, dl, v0, times, step)
    while True:
        fine = _propagate_ramp(ramp, l0, dl, v0, times, step / 2)
        error = max(float(np.max(np.abs(a - b))) for a, b in zip(coarse, fine))
        if error <= settings.ramp_tolerance:
            break
        step /= 2
        if step / 2 < settings.min_step:
            raise StepFailure(f"ramp could not reach step-halving error "
                              f"{settings.ramp_tolerance:.1e} (last {error:.2e})")
        coarse = fine

    matrices = [unvec(v) for v in fine]
    _check_drift(matrices, times, settings.drift_tolerance)

    tracking = []
    for t, m in zip(times, matrices):
        try:
            target = steady_state(generator(ramp.params_at(params, t)), settings).state.matrix
        except DegenerateSteadyState as e:
            raise DegenerateSteadyState(f"at ramp time t={t:.6g}: {e.message}", time=float(t))
        tracking.append(float(np.max(np.abs(m - target))))

    states = tuple(DensityMatrix(m, tolerance=settings.drift_tolerance) for m in matrices)
    tracking_error = np.array(tracking)
    return Trajectory(times, states, observables_frame(times, matrices, tracking_error), tracking_error)
