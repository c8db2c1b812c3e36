"""
Named figure presets.

Each preset carries the full parameter set of one published figure plus the
command defaults (sweep axis, expansion channel, ramp and time blocks) the
command-line front end starts from.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from errors import ValidationError
from model import SystemParams, variant_topology
from sweep import SweepAxis

DETUNING_GRID = (-40.0, 40.0, 161)
DECAY_GRID = (0.0, 0.5, 51)


@dataclass(frozen=True)
class Preset:
    """Figure parameters and the defaults of every command block"""
    name: str
    description: str
    params: SystemParams
    axis: SweepAxis
    command: str = "sweep"
    channel: Tuple[int, int] = (2, 5)
    locked: Tuple[str, ...] = ("delta4",)
    ramp: Dict[str, Any] = field(default_factory=dict)
    time: Dict[str, Any] = field(default_factory=dict)

    def describe(self) -> str:
        """Human-readable parameter listing"""
        p = self.params
        omegas = ", ".join(_fmt(v.real) if v.imag == 0 else f"{v.real:g}{v.imag:+g}i" for v in p.rabi)
        deltas = []
        swept = _swept_detunings(self.axis.parameter)
        for k, value in enumerate(p.detunings, 1):
            if k in swept:
                deltas.append("swept")
            elif f"delta{k}" in self.locked:
                deltas.append("locked")
            else:
                deltas.append(_fmt(value))
        lines = [
            f"📋 {self.name}: {self.description}",
            f"   topology: {p.topology.name}",
            f"   Ω = ({omegas}) γ",
            f"   δ = ({', '.join(deltas)}) γ",
            f"   γ12 = {_fmt(p.gamma_12)}, γ23 = {_fmt(p.gamma_23)}, γ25 = {_fmt(p.gamma_25)}, "
            f"γ14 = {_fmt(p.gamma_14)}, γ34 = {_fmt(p.gamma_34)}, γ45 = {_fmt(p.gamma_45)} (γ)",
            f"   γ_d = {_fmt(p.gamma_d)} γ",
            f"   {self.command}: {self.axis.parameter} over [{_fmt(self.axis.values[0])}, "
            f"{_fmt(self.axis.values[-1])}] in {len(self.axis)} points, channel {self.channel}",
        ]
        return "\n".join(lines)


def _fmt(value: float) -> str:
    return f"{value:g}"


def _swept_detunings(parameter: str) -> Tuple[int, ...]:
    if parameter == "delta3_locked":
        return (3,)
    if parameter == "delta1_delta2_locked":
        return (1, 2)
    if parameter.startswith("delta"):
        return (int(parameter[-1]),)
    return ()


def _caption_params(**changes) -> SystemParams:
    """Reference drive: gamma_12 = gamma_23 = gamma_34 = gamma_45 = 1, gamma_d = 0.01"""
    base = SystemParams(
        rabi=(0.75, 1.5, 0.01, 0.1),
        detunings=(20.0, 0.0, 0.0, 0.0),
        gamma_12=1.0, gamma_23=1.0, gamma_25=0.25, gamma_14=0.25, gamma_34=1.0, gamma_45=1.0,
        gamma_d=0.01,
    )
    return base.replace(**changes)


def _ramp_defaults() -> Dict[str, Any]:
    return {"target": "delta3_delta4", "start": 2.0, "end": 20.0, "duration": 5000.0,
            "shape": "linear", "samples": 101}


def _time_defaults() -> Dict[str, Any]:
    return {"t_end": 2000.0, "samples": 201, "initial": 1}


def _build_presets() -> Dict[str, Preset]:
    detuning_axis = SweepAxis.from_range("delta3_locked", *DETUNING_GRID)
    decay_axis = SweepAxis.from_range("gamma25", *DECAY_GRID)
    far_detuned = _caption_params(detunings=(20.0, 0.0, 20.0, 20.0))
    exchanged = (0.0, 20.0, 0.0, 0.0)

    presets = [
        Preset("fig1a", "bare populations versus delta3 = delta4",
               _caption_params(), detuning_axis,
               ramp=_ramp_defaults(), time=_time_defaults()),
        Preset("fig1b", "bare populations versus gamma25 at delta3 = delta4 = 20",
               far_detuned, decay_axis,
               ramp=_ramp_defaults(), time=_time_defaults()),
        Preset("fig2", "dressed populations and eigenvalues versus delta3 = delta4",
               _caption_params(), detuning_axis,
               ramp=_ramp_defaults(), time=_time_defaults()),
        Preset("fig3a", "delta1 and delta2 exchanged, populations versus delta3 = delta4",
               _caption_params(detunings=exchanged), detuning_axis,
               ramp=_ramp_defaults(), time=_time_defaults()),
        Preset("fig3b", "delta1 and delta2 exchanged, populations versus gamma25",
               _caption_params(detunings=(0.0, 20.0, 20.0, 20.0)), decay_axis,
               ramp=_ramp_defaults(), time=_time_defaults()),
        # fig1a roles carried along the re-wired chain 3-4-5-2-1; gamma14 replaces gamma25
        Preset("variant", "variant topology, transfer 3 -> 1 through the cross decay gamma14",
               SystemParams(
                   rabi=(0.1, 0.01, 0.75, 1.5),
                   detunings=(0.0, 0.0, 20.0, 0.0),
                   gamma_12=1.0, gamma_23=0.25, gamma_25=1.0, gamma_14=0.25, gamma_34=1.0,
                   gamma_45=1.0, gamma_d=0.01, topology=variant_topology(),
               ),
               SweepAxis.from_range("delta1_delta2_locked", *DETUNING_GRID),
               channel=(4, 1), locked=(),
               time=_time_defaults()),
    ]
    return {preset.name: preset for preset in presets}


PRESETS = _build_presets()


def get_preset(name: str) -> Preset:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}", field="preset")
    return PRESETS[name]


def list_presets() -> List[str]:
    return list(PRESETS)


def describe_all(names: Optional[List[str]] = None) -> str:
    return "\n\n".join(get_preset(name).describe() for name in (names or list_presets()))
