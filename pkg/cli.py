#!/usr/bin/env python3
"""
Command-line front end for the M-scheme simulator.

    python cli.py sweep --preset fig1a --output results/fig1a.csv
    python cli.py steady --config run.json --set delta3=20
    python cli.py --list-presets

A run is described by a JSON document (see ``parse_config``); presets supply
defaults, the document overrides them key by key and ``--set`` items override
the document.
"""

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from dressed import diagonalize, dressed_populations
from errors import (
    DegenerateSteadyState, IoError, ParseError, SimulatorError, UnknownKey, ValidationError, exit_codes,
)
from lindblad import DensityMatrix, maximally_mixed, pure_state
from logger import RunLogger
from model import EXCITED_LEVELS, FLAT_KEYS, GROUND_LEVELS, SystemParams, build_hamiltonian, check_level
from presets import Preset, describe_all, get_preset
from solver import RampSpec, SolverSettings, Trajectory, adiabatic_ramp, evolve, steady_state
from sweep import DEFAULT_CHANNEL, SweepAxis, SweepTable, run_sweep, single_point_table

COMMANDS = ("steady", "evolve", "ramp", "sweep", "dressed")
TOP_LEVEL_KEYS = ("preset", "command", "params", "axis", "ramp", "time", "channel", "solver",
                  "workers", "output")
BLOCK_KEYS = {
    "axis": ("parameter", "values", "start", "stop", "points"),
    "ramp": ("target", "start", "end", "duration", "shape", "samples"),
    "time": ("t_end", "samples", "initial"),
    "solver": tuple(SolverSettings.__dataclass_fields__),
}
SCALAR_KEYS = ("preset", "command", "workers", "output", "channel")
CSV_FLOAT_FORMAT = "%.17g"


@dataclass
class RunSpec:
    """Fully validated run: one command, its parameters and its block"""
    command: str
    params: SystemParams
    preset: Optional[str] = None
    axis: Optional[SweepAxis] = None
    ramp: Optional[RampSpec] = None
    ramp_samples: int = 101
    t_end: Optional[float] = None
    samples: Optional[int] = None
    initial: Union[int, str] = 1
    channel: tuple = DEFAULT_CHANNEL
    settings: SolverSettings = field(default_factory=SolverSettings)
    workers: int = 1
    output: Optional[str] = None

    @property
    def default_output(self) -> str:
        return os.path.join("results", f"{self.preset or 'custom'}_{self.command}.csv")


# ---------------------------------------------------------------------------
# Configuration parsing
# ---------------------------------------------------------------------------

def _decode_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(document: Dict[str, Any], items: Sequence[str]) -> Dict[str, Any]:
    """Apply ``key=value`` items to a copy of the document"""
    doc = json.loads(json.dumps(document))
    for item in items:
        if "=" not in item:
            raise ParseError(f"--set item must look like key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        value = _decode_value(raw.strip())
        if "." in key:
            block, sub = key.split(".", 1)
            if block != "params" and block not in BLOCK_KEYS:
                raise UnknownKey(f"unknown configuration block {block!r} in --set {item!r}", field=block)
            if not isinstance(doc.get(block, {}), dict):
                raise ParseError(f"configuration block {block!r} is not an object")
            doc.setdefault(block, {})[sub] = value
        elif key in SCALAR_KEYS:
            doc[key] = value
        elif key in FLAT_KEYS:
            doc.setdefault("params", {})[key] = value
        else:
            raise UnknownKey(f"unknown key {key!r} in --set {item!r}", field=key)
    return doc


def _block(document: Dict[str, Any], name: str) -> Dict[str, Any]:
    block = document.get(name, {})
    if block is None:
        return {}
    if not isinstance(block, dict):
        raise ParseError(f"configuration block {name!r} must be an object")
    unknown = sorted(set(block) - set(BLOCK_KEYS[name])) if name in BLOCK_KEYS else []
    if unknown:
        raise UnknownKey(f"unknown key(s) in {name!r}: {', '.join(unknown)}", field=unknown[0])
    return block


def _number(block: Dict[str, Any], key: str, where: str) -> float:
    value = block.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{where}.{key} must be a number, got {value!r}", field=key)
    return float(value)


def _integer(value: Any, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{key} must be an integer, got {value!r}", field=key)
    return value


def _build_axis(block: Dict[str, Any], preset: Optional[Preset]) -> SweepAxis:
    merged: Dict[str, Any] = {}
    if preset is not None:
        merged = {"parameter": preset.axis.parameter, "values": list(preset.axis.values)}
    ranged = any(key in block for key in ("start", "stop", "points"))
    if ranged and "values" in block:
        raise ValidationError("axis takes either values or start/stop/points, not both", field="values")
    if ranged and preset is not None:
        values = merged.pop("values")
        merged.update({"start": values[0], "stop": values[-1], "points": len(values)})
    merged.update(block)
    if "parameter" not in merged:
        raise ValidationError("sweep needs axis.parameter", field="parameter")
    if "values" in merged:
        if not isinstance(merged["values"], list):
            raise ValidationError("axis.values must be a list", field="values")
        return SweepAxis(merged["parameter"], tuple(merged["values"]))
    for key in ("start", "stop", "points"):
        if key not in merged:
            raise ValidationError(f"sweep needs axis.{key} or axis.values", field=key)
    return SweepAxis.from_range(merged["parameter"], _number(merged, "start", "axis"),
                                _number(merged, "stop", "axis"), _integer(merged["points"], "points"))


def _build_channel(value: Any) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"channel must be [source, target], got {value!r}", field="channel")
    source, target = check_level(value[0], "channel"), check_level(value[1], "channel")
    if source not in EXCITED_LEVELS or target not in GROUND_LEVELS:
        raise ValidationError(f"channel must run excited -> ground, got {value!r}", field="channel")
    return (source, target)


def parse_config(text: str, overrides: Sequence[str] = (), command: Optional[str] = None) -> RunSpec:
    """
    Validate a JSON run document.

    ``command`` (from the command line) fills in a missing ``command`` key and
    must agree with it otherwise.
    """
    try:
        document = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed configuration document: {e}")
    if not isinstance(document, dict):
        raise ParseError("configuration document must be a JSON object")
    document = apply_overrides(document, overrides)

    unknown = sorted(set(document) - set(TOP_LEVEL_KEYS))
    if unknown:
        raise UnknownKey(f"unknown top-level key(s): {', '.join(unknown)}", field=unknown[0])

    preset = get_preset(document["preset"]) if document.get("preset") is not None else None

    chosen = document.get("command")
    if chosen is not None and command is not None and chosen != command:
        raise ValidationError(f"document command {chosen!r} conflicts with {command!r}", field="command")
    chosen = chosen or command or (preset.command if preset else None)
    if chosen not in COMMANDS:
        raise ValidationError(f"command must be one of {', '.join(COMMANDS)}, got {chosen!r}",
                              field="command")

    flat = document.get("params", {})
    if not isinstance(flat, dict):
        raise ParseError("configuration block 'params' must be an object")
    flat = dict(flat)
    if preset is not None and "delta4" in preset.locked and "delta4" not in flat:
        flat.setdefault("lock_delta4_to_delta3", True)
    params = SystemParams.from_flat(flat, base=preset.params if preset else None)

    spec = RunSpec(command=chosen, params=params, preset=preset.name if preset else None)
    solver_block = _block(document, "solver")
    spec.settings = SolverSettings(**{k: float(v) if isinstance(v, int) and not isinstance(v, bool) else v
                                      for k, v in solver_block.items()})
    spec.channel = _build_channel(document.get("channel", preset.channel if preset else DEFAULT_CHANNEL))
    spec.workers = _integer(document.get("workers", 1), "workers")
    if spec.workers < 1:
        raise ValidationError(f"workers must be >= 1, got {spec.workers}", field="workers")
    output = document.get("output")
    if output is not None and not isinstance(output, str):
        raise ValidationError(f"output must be a path string, got {output!r}", field="output")
    spec.output = output

    axis_block = _block(document, "axis")
    ramp_block = {**(preset.ramp if preset else {}), **_block(document, "ramp")}
    time_block = {**(preset.time if preset else {}), **_block(document, "time")}

    if chosen == "sweep":
        spec.axis = _build_axis(axis_block, preset)
    elif chosen == "ramp":
        for key in ("start", "end", "duration"):
            if key not in ramp_block:
                raise ValidationError(f"ramp needs ramp.{key}", field=key)
        spec.ramp = RampSpec(
            start_value=_number(ramp_block, "start", "ramp"),
            end_value=_number(ramp_block, "end", "ramp"),
            duration=_number(ramp_block, "duration", "ramp"),
            target=ramp_block.get("target", "delta3_delta4"),
            shape=ramp_block.get("shape", "linear"),
        )
        spec.ramp_samples = _integer(ramp_block.get("samples", 101), "samples")
    elif chosen == "evolve":
        for key in ("t_end", "samples"):
            if key not in time_block:
                raise ValidationError(f"evolve needs time.{key}", field=key)
        spec.t_end = _number(time_block, "t_end", "time")
        spec.samples = _integer(time_block["samples"], "samples")
        initial = time_block.get("initial", 1)
        if initial not in ("steady", "mixed"):
            initial = check_level(initial, "initial")
        spec.initial = initial
    return spec


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def write_table(table: Union[SweepTable, Trajectory, pd.DataFrame], path: str) -> None:
    """CSV with a header row and 17 significant digits per real"""
    if isinstance(table, SweepTable):
        frame = table.frame
    elif isinstance(table, Trajectory):
        frame = table.observables
    else:
        frame = table
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="nan")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e.strerror or e}", path=path)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _initial_state(spec: RunSpec) -> DensityMatrix:
    if spec.initial == "steady":
        return steady_state(spec.params, spec.settings).state
    if spec.initial == "mixed":
        return maximally_mixed()
    return pure_state(spec.initial)


def _run_command(spec: RunSpec) -> Dict[str, Any]:
    """Run the command; returns the table and summary figures"""
    if spec.command == "sweep":
        table = run_sweep(spec.params, spec.axis, spec.channel, spec.workers, spec.settings)
        return {"table": table, "points": len(table), "max_residual": table.max_residual,
                "flagged": len(table.flagged)}
    if spec.command == "steady":
        table = single_point_table(spec.params, spec.channel, spec.settings)
        return {"table": table, "points": 1, "max_residual": table.max_residual}
    if spec.command == "evolve":
        trajectory = evolve(_initial_state(spec), spec.params, spec.t_end, spec.samples, spec.settings)
        return {"table": trajectory, "points": len(trajectory.times), "max_residual": float("nan")}
    if spec.command == "ramp":
        start = steady_state(spec.ramp.params_at(spec.params, 0.0), spec.settings).state
        trajectory = adiabatic_ramp(start, spec.params, spec.ramp, spec.ramp_samples, spec.settings)
        return {"table": trajectory, "points": len(trajectory.times),
                "max_residual": float("nan"), "final_tracking": float(trajectory.tracking_error[-1])}
    basis = diagonalize(build_hamiltonian(spec.params))
    try:
        steady = steady_state(spec.params, spec.settings)
        populations = dressed_populations(steady.state, basis)
        residual = steady.residual
    except DegenerateSteadyState as e:
        print(f"⚠️ No unique steady state, dressed populations left as nan ({e.message})")
        populations, residual = None, float("nan")
    return {"table": basis.to_frame(populations), "points": 1, "max_residual": residual}


def _fmt_residual(value: float) -> str:
    return "n/a" if value is None or math.isnan(value) else f"{value:.2e}"


def execute(spec: RunSpec, logger: Optional[RunLogger] = None) -> int:
    """Run, write the CSV, print a one-line summary; returns the exit status"""
    output = spec.output or spec.default_output
    started = time.perf_counter()
    try:
        result = _run_command(spec)
        write_table(result["table"], output)
    except SimulatorError as e:
        wall = time.perf_counter() - started
        print(f"❌ {spec.command} failed: {e}", file=sys.stderr)
        if logger is not None:
            logger.log_run(spec.command, spec.preset, 0, float("nan"), wall, output, type(e).__name__)
        return e.exit_code

    wall = time.perf_counter() - started
    extra = ""
    if result.get("flagged"):
        extra = f", {result['flagged']} flagged"
    if "final_tracking" in result:
        extra = f", final tracking error {result['final_tracking']:.2e}"
    print(f"✅ {spec.command}: {result['points']} points, max residual "
          f"{_fmt_residual(result['max_residual'])}, {wall:.2f} s{extra} -> {output}")
    if logger is not None:
        logger.log_run(spec.command, spec.preset, result["points"], result["max_residual"], wall,
                       output, "ok")
    return 0


def _exit_code_epilog() -> str:
    lines = ["exit codes:"]
    lines += [f"  {code:>3}  {name}" for name, code in exit_codes().items()]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run document")
    common.add_argument("--preset", help="start from a named preset (same as --set preset=NAME)")
    common.add_argument("--output", help="CSV output path")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration key (repeatable)")
    common.add_argument("--log-dir", default="logs", help="run log directory")
    common.add_argument("--no-log", action="store_true", help="do not append to the run log")

    parser = argparse.ArgumentParser(
        prog="mscheme",
        description="Five-level M-scheme atom: steady states, dynamics and dressed-state sweeps.",
        epilog=_exit_code_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--list-presets", action="store_true", help="print every preset and exit")
    sub = parser.add_subparsers(dest="command")
    helps = {
        "steady": "steady state at one parameter point",
        "evolve": "time evolution under fixed parameters",
        "ramp": "adiabatic detuning ramp",
        "sweep": "steady-state and dressed-state sweep",
        "dressed": "dressed basis and populations at one point",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], epilog=_exit_code_epilog(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_presets:
        print(describe_all())
        return 0
    if args.command is None:
        parser.print_help()
        return ParseError.exit_code

    try:
        text = ""
        if args.config:
            try:
                with open(args.config, "r", encoding="utf-8") as f:
                    text = f.read()
            except OSError as e:
                raise IoError(f"cannot read {args.config}: {e.strerror or e}", path=args.config)
        overrides = list(args.overrides)
        if args.preset:
            overrides.insert(0, f"preset={json.dumps(args.preset)}")
        if args.output:
            overrides.append(f"output={json.dumps(args.output)}")
        spec = parse_config(text, overrides, command=args.command)
    except SimulatorError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code

    logger = None if args.no_log else RunLogger(log_dir=args.log_dir, verbose=False)
    try:
        return execute(spec, logger)
    except Exception as e:
        print(f"❌ unexpected error: {e}", file=sys.stderr)
        return SimulatorError.exit_code


if __name__ == "__main__":
    sys.exit(main())
