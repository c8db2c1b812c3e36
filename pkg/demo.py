#!/usr/bin/env python3
"""
M-scheme simulator - figure reproduction report

Runs every sweep preset, prints the headline numbers of each figure and writes
them to a text report under reports/. ``--with-ramps`` adds a forward and a
reverse adiabatic detuning ramp.
"""

import argparse
import os
import sys
import time
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np

from errors import SimulatorError
from logger import RunLogger
from presets import get_preset, list_presets
from solver import RampSpec, adiabatic_ramp, steady_state
from sweep import SweepTable, run_sweep


def value_at(table: SweepTable, column: str, axis_value: float) -> Any:
    """Column entry at the axis point nearest ``axis_value``"""
    index = int(np.argmin(np.abs(np.asarray(table.axis.values) - axis_value)))
    value = table.frame[column].iloc[index]
    return value if isinstance(value, str) else float(value)


class FigureReport:
    """Sweeps every preset and collects the headline numbers"""

    def __init__(self, workers: int = 1, report_dir: str = "reports",
                 logger: Optional[RunLogger] = None):
        self.workers = workers
        self.report_dir = report_dir
        self.logger = logger
        self.tables: Dict[str, SweepTable] = {}
        self.headlines: Dict[str, Dict[str, Any]] = {}
        self.failures: List[str] = []
        self.session_id = datetime.now().strftime("%Y%m%d_%H%M%S")

    def run_sweeps(self, names: Optional[List[str]] = None) -> Dict[str, SweepTable]:
        print("\n📊 Running preset sweeps")
        print("=" * 60)
        for name in names or list_presets():
            preset = get_preset(name)
            started = time.perf_counter()
            try:
                table = run_sweep(preset.params, preset.axis, preset.channel, self.workers)
            except SimulatorError as e:
                print(f"❌ {name}: {e}")
                self.failures.append(name)
                if self.logger:
                    self.logger.log_run("sweep", name, 0, float("nan"),
                                        time.perf_counter() - started, "-", type(e).__name__)
                continue
            wall = time.perf_counter() - started
            self.tables[name] = table
            print(f"✅ {name}: {len(table)} points in {wall:.2f} s "
                  f"(max residual {table.max_residual:.2e})")
            if self.logger:
                self.logger.log_run("sweep", name, len(table), table.max_residual, wall, "-", "ok")
        return self.tables

    def collect_headlines(self) -> Dict[str, Dict[str, Any]]:
        t = self.tables
        if "fig1a" in t:
            self.headlines["fig1a"] = {
                "rho11 at delta3=0": value_at(t["fig1a"], "rho11", 0.0),
                "rho55 at delta3=0": value_at(t["fig1a"], "rho55", 0.0),
                "rho11 at delta3=20": value_at(t["fig1a"], "rho11", 20.0),
                "rho55 at delta3=20": value_at(t["fig1a"], "rho55", 20.0),
                "rho55 at delta3=-20": value_at(t["fig1a"], "rho55", -20.0),
            }
        if "fig1b" in t:
            rho55 = t["fig1b"].column("rho55")
            self.headlines["fig1b"] = {
                "rho55 at gamma25=0": value_at(t["fig1b"], "rho55", 0.0),
                "rho55 at gamma25=0.05": value_at(t["fig1b"], "rho55", 0.05),
                "rho55 at gamma25=0.25": value_at(t["fig1b"], "rho55", 0.25),
                "rho55 monotonic in gamma25": bool(np.all(np.diff(rho55) >= -1e-12)),
            }
        if "fig2" in t:
            self.headlines["fig2"] = {
                "eps1 at delta3=-40": value_at(t["fig2"], "eps1", -40.0),
                "eps3 at delta3=-40": value_at(t["fig2"], "eps3", -40.0),
                "eps1 at delta3=40": value_at(t["fig2"], "eps1", 40.0),
                "eps3 at delta3=40": value_at(t["fig2"], "eps3", 40.0),
                "p0 at delta3=0": value_at(t["fig2"], "p0", 0.0),
                "dominant pair at delta3=20": value_at(t["fig2"], "dominant_pair", 20.0),
            }
        if "fig3a" in t:
            self.headlines["fig3a"] = {
                "rho33 at delta3=0": value_at(t["fig3a"], "rho33", 0.0),
                "rho55 at delta3=0": value_at(t["fig3a"], "rho55", 0.0),
                "rho55 at delta3=20": value_at(t["fig3a"], "rho55", 20.0),
            }
            if "fig1a" in t:
                axis = np.asarray(t["fig3a"].axis.values)
                wings = np.abs(axis) >= 30.0
                diff = np.abs(t["fig3a"].column("rho55") - t["fig1a"].column("rho55"))[wings]
                self.headlines["fig3a"]["max wing rho55 difference to fig1a"] = float(diff.max())
        if "fig3b" in t:
            self.headlines["fig3b"] = {
                "rho55 at gamma25=0": value_at(t["fig3b"], "rho55", 0.0),
                "rho55 at gamma25=0.25": value_at(t["fig3b"], "rho55", 0.25),
            }
        if "variant" in t:
            self.headlines["variant"] = {
                "rho33 at delta1=delta2=0": value_at(t["variant"], "rho33", 0.0),
                "rho11 at delta1=delta2=20": value_at(t["variant"], "rho11", 20.0),
            }
        return self.headlines

    def run_ramps(self, duration: float = 20000.0, samples: int = 51) -> Dict[str, Any]:
        """Forward 2 -> 20 and reverse 20 -> 2 smoothstep ramps on the fig1a drive"""
        print("\n🔁 Running adiabatic ramps")
        print("=" * 60)
        params = get_preset("fig1a").params
        results: Dict[str, Any] = {}
        for label, start, end in (("forward", 2.0, 20.0), ("reverse", 20.0, 2.0)):
            ramp = RampSpec(start, end, duration, target="delta3_delta4", shape="smoothstep")
            started = time.perf_counter()
            try:
                rho0 = steady_state(ramp.params_at(params, 0.0)).state
                trajectory = adiabatic_ramp(rho0, params, ramp, samples)
            except SimulatorError as e:
                print(f"❌ {label} ramp: {e}")
                self.failures.append(f"{label} ramp")
                continue
            wall = time.perf_counter() - started
            final = trajectory.final.populations
            results[f"{label} final rho11"] = float(final[0])
            results[f"{label} final rho55"] = float(final[4])
            results[f"{label} final tracking error"] = float(trajectory.tracking_error[-1])
            print(f"✅ {label} ramp {start:g} -> {end:g}: rho55 = {final[4]:.4f}, "
                  f"tracking error {trajectory.tracking_error[-1]:.2e} ({wall:.1f} s)")
        self.headlines["ramps"] = results
        return results

    def generate_report(self) -> str:
        """Write the headline numbers to reports/figure_report_<session>.txt"""
        os.makedirs(self.report_dir, exist_ok=True)
        report_content = f"""
M-scheme Simulator - Figure Report
==================================

Session: {self.session_id}
Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}
Presets swept: {', '.join(self.tables) or 'none'}
Failures: {', '.join(self.failures) or 'none'}
"""
        for name, numbers in self.headlines.items():
            report_content += f"\n{name}:\n"
            for key, value in numbers.items():
                text = f"{value:.6g}" if isinstance(value, float) else str(value)
                report_content += f"- {key}: {text}\n"

        report_file = os.path.join(self.report_dir, f"figure_report_{self.session_id}.txt")
        with open(report_file, 'w') as f:
            f.write(report_content)
        print(f"\n📝 Figure report saved to: {report_file}")
        return report_file

    def run(self, with_ramps: bool = False) -> bool:
        print("⚛️ M-scheme Simulator - Figure Reproduction")
        print("=" * 60)
        try:
            self.run_sweeps()
            self.collect_headlines()
            if with_ramps:
                self.run_ramps()
            self.generate_report()
        except KeyboardInterrupt:
            print("\n\n⚠️ Report interrupted by user")
            return False
        if self.failures:
            print(f"\n❌ {len(self.failures)} run(s) failed: {', '.join(self.failures)}")
            return False
        print("\n🎉 All presets reproduced")
        return True


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Reproduce every figure preset and write a report.")
    parser.add_argument("--with-ramps", action="store_true", help="also run the adiabatic ramp pair")
    parser.add_argument("--workers", type=int, default=1, help="sweep worker threads")
    parser.add_argument("--report-dir", default="reports")
    parser.add_argument("--log-dir", default="logs")
    parser.add_argument("--no-log", action="store_true")
    args = parser.parse_args(argv)

    logger = None if args.no_log else RunLogger(log_dir=args.log_dir)
    report = FigureReport(workers=args.workers, report_dir=args.report_dir, logger=logger)
    return 0 if report.run(with_ramps=args.with_ramps) else 1


if __name__ == "__main__":
    sys.exit(main())
