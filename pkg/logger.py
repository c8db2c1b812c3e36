import csv
import json
import math
import os
import shutil
from datetime import datetime
from typing import Any, Dict, Optional

import pandas as pd


class RunLogger:
    """Run log for simulator commands: a CSV history plus a human-readable text log"""

    HEADERS = [
        "timestamp", "session_id", "command", "preset", "points",
        "max_residual", "wall_time", "output", "status",
    ]

    def __init__(self, log_dir: str = "logs", verbose: bool = True):
        self.log_dir = log_dir
        self.verbose = verbose
        self.run_log_file = os.path.join(log_dir, "run_log.csv")
        self.text_log_file = os.path.join(log_dir, "run_log.txt")

        os.makedirs(log_dir, exist_ok=True)
        self._init_csv_log()

        self.current_session_id = self._generate_session_id()
        self.run_count = 0

    def _generate_session_id(self) -> str:
        return datetime.now().strftime("%Y%m%d_%H%M%S")

    def _init_csv_log(self):
        """Create the CSV log with its header row on first use"""
        if not os.path.exists(self.run_log_file):
            with open(self.run_log_file, 'w', newline='') as csvfile:
                writer = csv.writer(csvfile)
                writer.writerow(self.HEADERS)

    def log_run(self,
                command: str,
                preset: Optional[str],
                points: int,
                max_residual: float,
                wall_time: float,
                output: str,
                status: str = "ok") -> Dict[str, Any]:
        """Append one run to the CSV and text logs"""
        self.run_count += 1
        log_data = {
            "timestamp": datetime.now().isoformat(),
            "session_id": self.current_session_id,
            "command": command,
            "preset": preset or "",
            "points": int(points),
            "max_residual": float(max_residual),
            "wall_time": round(float(wall_time), 4),
            "output": output,
            "status": status,
        }
        self._log_to_csv(log_data)
        self._log_to_text_file(log_data)

        if self.verbose:
            print(f"✓ Logged run: {command} ({status}, {points} points, {wall_time:.2f} s)")
        return log_data

    def _log_to_csv(self, data: Dict[str, Any]):
        with open(self.run_log_file, 'a', newline='') as csvfile:
            writer = csv.DictWriter(csvfile, fieldnames=self.HEADERS)
            writer.writerow(data)

    def _log_to_text_file(self, data: Dict[str, Any]):
        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        residual = data["max_residual"]
        residual_text = "n/a" if math.isnan(residual) else f"{residual:.2e}"
        with open(self.text_log_file, 'a') as f:
            f.write(f"[{timestamp}] {data['command']} | preset: {data['preset'] or '-'} | "
                    f"points: {data['points']} | residual: {residual_text} | "
                    f"{data['wall_time']:.2f} s | {data['status']} | {data['output']}\n")

    def get_run_history(self, session_only: bool = False) -> pd.DataFrame:
        """All logged runs, oldest first"""
        df = pd.read_csv(self.run_log_file, keep_default_na=False, na_values={"max_residual": ["nan"]})
        if session_only:
            df = df[df["session_id"].astype(str) == self.current_session_id]
        return df

    def get_session_summary(self) -> Dict[str, Any]:
        """Run counts, failures, mean wall time and worst residual for this session"""
        df = self.get_run_history(session_only=True)
        total_runs = len(df)
        failures = int((df["status"] != "ok").sum()) if total_runs else 0
        residuals = df["max_residual"].dropna() if total_runs else pd.Series(dtype=float)
        return {
            "session_id": self.current_session_id,
            "total_runs": total_runs,
            "failures": failures,
            "success_rate": (total_runs - failures) / total_runs if total_runs else 0,
            "mean_wall_time": float(df["wall_time"].mean()) if total_runs else 0.0,
            "worst_residual": float(residuals.max()) if len(residuals) else float("nan"),
        }

    def export_logs(self, format_type: str = "csv") -> str:
        """Export the run log as csv or json; returns the export path"""
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")

        if format_type.lower() == "csv":
            export_file = os.path.join(self.log_dir, f"export_{timestamp}.csv")
            shutil.copy2(self.run_log_file, export_file)
            return export_file

        elif format_type.lower() == "json":
            export_file = os.path.join(self.log_dir, f"export_{timestamp}.json")
            records = json.loads(self.get_run_history().to_json(orient="records"))
            with open(export_file, 'w') as f:
                json.dump(records, f, indent=2)
            return export_file

        else:
            raise ValueError("Unsupported export format. Use 'csv' or 'json'")
