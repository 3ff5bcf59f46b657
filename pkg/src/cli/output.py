"""
Result Files
CSV tables, optimizer traces and the metadata sidecar written by the CLI
"""

import json
import subprocess
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src import __version__
from src.core.config import serialize_config
from src.core.models import ExperimentSpec, ResultRow
from src.optimization.riemannian import OptimizerTrace
from src.physics.geometry import ArrayGeometry

RESULT_COLUMNS = [
    "experiment",
    "scheme",
    "sweep_param",
    "sweep_value",
    "rate_bps_hz",
    "seed",
    "runtime_s",
    "errors",
    "trace_ref",
]


def results_frame(rows: Sequence[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in rows], columns=RESULT_COLUMNS)


def write_results(rows: Sequence[ResultRow], out_dir: Path) -> Path:
    path = Path(out_dir) / "results.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    results_frame(rows).to_csv(path, index=False)
    return path


def write_trace(objective: Sequence[float], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame({"iteration": np.arange(len(objective)), "objective_bps_hz": list(objective)}).to_csv(
        path, index=False
    )
    return path


def write_traces(traces: Dict[str, List[float]], out_dir: Path) -> List[Path]:
    traces_dir = Path(out_dir) / "traces"
    return [write_trace(objective, traces_dir / f"{key}.csv") for key, objective in sorted(traces.items())]


def write_tables(tables: Dict[str, pd.DataFrame], out_dir: Path) -> List[Path]:
    paths = []
    for name, frame in sorted(tables.items()):
        path = Path(out_dir) / f"{name}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
        paths.append(path)
    return paths


def apv_frame(geom: ArrayGeometry) -> pd.DataFrame:
    frame = pd.DataFrame(geom.apv, columns=["x", "y", "z"])
    frame.insert(0, "cable", np.arange(geom.num_cables))
    return frame


def write_apv(geom: ArrayGeometry, out_dir: Path) -> Path:
    path = Path(out_dir) / "apv.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    apv_frame(geom).to_csv(path, index=False)
    return path


def steps_frame(trace: OptimizerTrace) -> pd.DataFrame:
    """Accepted inner steps of an optimizer run"""
    records = [
        {
            "outer": step.outer,
            "cable": step.cable,
            "inner": step.inner,
            "step": step.step,
            "objective_bps_hz": step.value,
            "x": step.point[0],
            "y": step.point[1],
            "z": step.point[2],
        }
        for step in trace.steps
    ]
    columns = ["outer", "cable", "inner", "step", "objective_bps_hz", "x", "y", "z"]
    return pd.DataFrame.from_records(records, columns=columns)


def version_string() -> str:
    """git describe of the working tree when available, else the package version"""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if result.returncode == 0 and result.stdout.strip():
            return result.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def write_metadata(
    spec: ExperimentSpec,
    out_dir: Path,
    command: str,
    wall_time_s: float,
    threads: int,
    deterministic: bool,
    timings: Optional[List[Dict]] = None,
    extra: Optional[Dict] = None,
) -> Path:
    """metadata.json: resolved config, version and wall times (kept out of the CSVs)"""
    metadata = {
        "command": command,
        "version": version_string(),
        "created": datetime.now(timezone.utc).isoformat(),
        "threads": threads,
        "deterministic": deterministic,
        "wall_time_s": wall_time_s,
        "config": json.loads(serialize_config(spec)),
        "cell_timings": timings or [],
    }
    if extra:
        metadata.update(extra)
    path = Path(out_dir) / "metadata.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(metadata, indent=2, default=str))
    return path
