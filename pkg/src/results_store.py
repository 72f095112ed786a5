"""
Results Store - CSV persistence of experiment results
Reads and writes result tables, fault-count tables and plot-ready long data
"""

import logging
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from montecarlo import CSV_COLUMNS, ExperimentResult, results_frame

logger = logging.getLogger("pfsr_sim")

PathLike = Union[str, Path]
RESULTS_NAME = "results.csv"
PLOT_NAME = "plot_data.csv"


class ResultsStore:
    """Manages the CSV files of one output directory"""

    def __init__(self, out_dir: PathLike):
        self.out_dir = Path(out_dir)

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write_frame(self, frame: pd.DataFrame, name: str) -> Path:
        path = self._path(name)
        frame.to_csv(path, index=False, float_format="%.10g")
        logger.info("Wrote %d rows to %s", len(frame), path)
        return path

    def write_results(self, results: Iterable[ExperimentResult], name: str = RESULTS_NAME) -> Path:
        return self.write_frame(results_frame(results), name)

    def write_plot_data(self, frame: pd.DataFrame, name: str = PLOT_NAME) -> Path:
        return self.write_frame(plot_data(frame), name)

    def files(self) -> List[Path]:
        return sorted(self.out_dir.glob("*.csv")) if self.out_dir.exists() else []


def read_results(paths: Union[PathLike, Sequence[PathLike]]) -> pd.DataFrame:
    """
    Load one or more results CSVs (directories contribute their results.csv)

    Raises:
        FileNotFoundError: A path does not exist
        ValueError: A file lacks the result columns or cannot be parsed
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    frames = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            path = path / RESULTS_NAME
        if not path.exists():
            raise FileNotFoundError(f"No results file at {path}")
        try:
            frame = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
            raise ValueError(f"Corrupt results file {path}: {exc}") from None
        missing = [c for c in CSV_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"Corrupt results file {path}: missing columns {missing}")
        frames.append(frame)
    combined = pd.concat(frames, ignore_index=True)
    if "kept" not in combined.columns:
        errors = combined["trajectory_errors"] if "trajectory_errors" in combined.columns else 0
        combined["kept"] = combined["shots"] - combined["discards"] - errors
    return combined


def series_label(row: pd.Series) -> str:
    """Curve name of a row: mode, plus schedule and cutoff when they vary"""
    parts = [str(row["mode"])]
    if "noise_model" in row and pd.notna(row["noise_model"]):
        parts.append(str(row["noise_model"]))
    if "epsilon" in row and pd.notna(row["epsilon"]) and row["epsilon"] > 0:
        parts.append(f"eps={row['epsilon']:g}")
    return "/".join(parts)


def plot_data(frame: pd.DataFrame) -> pd.DataFrame:
    """Long format: one row per (series, d, param) with a ±1σ band"""
    if frame.empty:
        return pd.DataFrame(columns=["experiment_id", "series", "d", "param", "rate", "stderr", "lower", "upper"])
    long = pd.DataFrame({
        "experiment_id": frame["experiment_id"],
        "series": frame.apply(series_label, axis=1),
        "d": frame["d"],
        "param": frame["param"],
        "rate": frame["rate"],
        "stderr": frame["stderr"],
    })
    long["lower"] = np.clip(long["rate"] - long["stderr"], 0.0, None)
    long["upper"] = long["rate"] + long["stderr"]
    return long.sort_values(["series", "d", "param"]).reset_index(drop=True)
