__module_name__ = "reports"

"""Plain-text summaries, CSV tables and binary dumps written by the CLI."""

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Union

import numpy as np
import pandas as pd

from backend.config import RunManifest, create_data_directory
from backend.optimizer import SolveResult
from backend.storage import write_array

from .config import write_manifest

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.txt"
TRACE_FILE = "trace.csv"
ETA_FILE = "eta.bin"
MANIFEST_FILE = "manifest.ini"


def _format(value: Any) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6e}"
    return str(value)


def format_summary(summary: Mapping[str, Any]) -> str:
    """``key: value`` lines, one per entry."""
    return "".join(f"{key}: {_format(value)}\n" for key, value in summary.items())


def solve_summary(result: SolveResult, manifest: RunManifest) -> Dict[str, Any]:
    summary: Dict[str, Any] = {"benchmark": manifest.benchmark.name}
    summary.update(result.to_summary())
    summary["domain"] = manifest.benchmark.domain
    summary["operator_mode"] = manifest.output.operator_mode
    return summary


def write_solve_report(
    result: SolveResult, manifest: RunManifest, out_dir: Union[str, Path]
) -> Dict[str, Path]:
    """
    Write summary.txt, trace.csv, eta.bin and an echo of the manifest.

    Returns:
        Mapping of artifact name to path
    """
    directory = create_data_directory(str(out_dir))
    paths = {
        "summary": directory / SUMMARY_FILE,
        "trace": directory / TRACE_FILE,
        "eta": directory / ETA_FILE,
        "manifest": directory / MANIFEST_FILE,
    }
    paths["summary"].write_text(
        format_summary(solve_summary(result, manifest)), encoding="utf-8"
    )
    result.write_trace_csv(paths["trace"])
    write_array(
        paths["eta"],
        result.eta,
        {
            "best_loss": result.best_loss,
            "best_iteration": float(result.best_iteration),
            "iterations": float(result.iterations),
        },
    )
    write_manifest(manifest, paths["manifest"])
    logger.info(f"{__module_name__} - Wrote solve report to {directory}")
    return paths


def write_table_csv(table: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(path, index=False, float_format="%.6e", encoding="utf-8")
    logger.info(f"{__module_name__} - Wrote {len(table)} rows to {path}")
    return path


__all__ = [
    "SUMMARY_FILE",
    "TRACE_FILE",
    "ETA_FILE",
    "MANIFEST_FILE",
    "format_summary",
    "solve_summary",
    "write_solve_report",
    "write_table_csv",
]
