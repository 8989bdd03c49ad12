"""
Report Formatter for the Fall Detection Toolkit

Renders evaluation reports, sweep tables and command summaries as aligned
text, CSV or JSON.
"""

import io
import json
import logging
from typing import Any, Dict, List, Optional

import pandas as pd

UNDEFINED = "—"
FORMATS = ("text", "csv", "json")

_METRIC_HEADERS = {
    "accuracy": "Accuracy (%)",
    "recall": "Recall (%)",
    "precision": "Precision (%)",
    "f1": "F1 (%)",
    "specificity": "Specificity (%)",
}


class ReportFormatter:
    """Formats toolkit results for stdout or report files."""

    def __init__(self, pretty_print: bool = True, precision: int = 2):
        """
        Initialize the report formatter.

        Args:
            pretty_print: Indent JSON output
            precision: Decimal places for percentages in text output
        """
        self.logger = logging.getLogger(__name__)
        self.pretty_print = pretty_print
        self.precision = precision

    def configure(self, pretty_print: Optional[bool] = None, precision: Optional[int] = None):
        """Apply the 'output' configuration section."""
        if pretty_print is not None:
            self.pretty_print = bool(pretty_print)
        if precision is not None:
            self.precision = int(precision)

    def _json(self, data: Dict[str, Any]) -> str:
        return json.dumps(data, indent=2 if self.pretty_print else None, default=str) + "\n"

    def _cell(self, value) -> str:
        if value is None or (not isinstance(value, str) and pd.isna(value)):
            return UNDEFINED
        if isinstance(value, float):
            return f"{value:.{self.precision}f}"
        return str(value)

    def _text_table(self, frame: pd.DataFrame) -> str:
        cells = frame.apply(lambda column: column.map(self._cell))
        return cells.to_string(index=False) + "\n"

    @staticmethod
    def _csv(frame: pd.DataFrame) -> str:
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, na_rep="", float_format="%.6f", lineterminator="\n")
        return buffer.getvalue()

    @staticmethod
    def _check_format(fmt: str):
        if fmt not in FORMATS:
            raise ValueError(f"Unknown output format '{fmt}'. Available: {', '.join(FORMATS)}")

    def _eval_frame(self, report, with_headers: bool) -> pd.DataFrame:
        rows: List[Dict[str, Any]] = []
        for name in report.classifiers:
            row = {"classifier": name.upper()}
            for metric, header in _METRIC_HEADERS.items():
                row[header if with_headers else metric] = report.averages[name][metric]
            if report.include_timing:
                key = "Time (ms)" if with_headers else "mean_latency_ms"
                row[key] = report.mean_latency_ms.get(name)
            rows.append(row)
        frame = pd.DataFrame(rows)
        if with_headers:
            frame = frame.rename(columns={"classifier": "Classifier"})
        return frame

    def format_eval_report(self, report, fmt: str = "text") -> str:
        """
        Format an evaluation report.

        Args:
            report: EvalReport
            fmt: 'text', 'csv' or 'json'

        Returns:
            Formatted string ending in a newline
        """
        self._check_format(fmt)
        if fmt == "json":
            return self._json(report.to_dict())
        if fmt == "csv":
            return self._csv(self._eval_frame(report, with_headers=False))

        config = report.config
        split = config["split"]
        lines = [
            f"Dataset: {config['dataset']['name']} "
            f"({config['dataset']['records']} records, L={config['dataset']['record_length']}, "
            f"fs={config['dataset']['fs']:g} Hz)",
            f"Features: {config['features']['label']} ({config['features']['dimension']} values)",
            f"Classifiers: k={config['classifiers']['knn_k']}, e={config['classifiers']['enn_e']}, "
            f"bdt={config['classifiers']['bdt']}, vm={config['classifiers']['vm']}",
            f"Protocol: {split['folds']} folds, {split['train_fraction']:g} train, "
            f"seed {split['seed']}, rounding {split['rounding']}",
            "",
            self._text_table(self._eval_frame(report, with_headers=True)).rstrip("\n"),
        ]
        if report.include_timing:
            lines.append("")
            if report.feature_ms_per_record is not None:
                lines.append(f"Feature extraction: {report.feature_ms_per_record:.3f} ms/record")
            if report.enn_preprocess_s is not None:
                lines.append(f"ENN preprocessing: {report.enn_preprocess_s:.3f} s/fold")
            if report.bdt_train_s is not None:
                lines.append(f"BDT training: {report.bdt_train_s:.3f} s/fold")
        undefined = {
            name: {metric: count for metric, count in per.items() if count}
            for name, per in report.undefined_folds.items()
        }
        for name, per in undefined.items():
            for metric, count in per.items():
                lines.append(f"{name.upper()} {metric}: undefined in {count} fold(s)")
        return "\n".join(lines) + "\n"

    def format_sweep(self, table, fmt: str = "csv") -> str:
        """Format a sweep; text output pivots to one row per param."""
        self._check_format(fmt)
        if fmt == "json":
            return self._json(table.to_dict())
        frame = table.to_frame()
        if fmt == "csv":
            return self._csv(frame)
        params = list(dict.fromkeys(frame["param"]))
        present = set(frame["classifier"])
        classifiers = [c for c in ("knn", "enn", "bdt", "vm") if c in present]
        heading = table.kind.rstrip("s").capitalize()
        rows = []
        for param in params:
            row = {heading: param}
            for name in classifiers:
                row[f"{name.upper()} acc (%)"] = table.value(param, name)
            rows.append(row)
        return self._text_table(pd.DataFrame(rows, dtype=object))

    def format_summary(self, summary: Dict[str, Any], fmt: str = "text") -> str:
        """Format a flat command summary (extract, train, convert-check)."""
        self._check_format(fmt)
        if fmt == "json":
            return self._json(summary)
        if fmt == "csv":
            flat = {k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in summary.items()}
            return self._csv(pd.DataFrame([flat]))
        width = max(len(k) for k in summary) if summary else 0
        lines = []
        for key, value in summary.items():
            if isinstance(value, dict):
                value = ", ".join(f"{k}={self._cell(v)}" for k, v in value.items())
            lines.append(f"{key.ljust(width)}  {self._cell(value)}")
        return "\n".join(lines) + "\n"

    def format_error(self, command: str, error: Exception, message: str) -> str:
        """Format an error document for stderr."""
        return self._json({
            "status": "error",
            "command": command,
            "error": str(error),
            "message": message,
        })


# Singleton instance
report_formatter = ReportFormatter()
