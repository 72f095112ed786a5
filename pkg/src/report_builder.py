"""
Report Builder - Summary tables and threshold reports from result CSVs
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import pandas as pd

from montecarlo import NoCrossingError, ThresholdEstimate, estimate_threshold

logger = logging.getLogger("pfsr_sim")

GROUP_COLUMNS = ["experiment_id", "channel", "noise_model", "mode", "epsilon"]


@dataclass
class CurveGroup:
    """Rows sharing everything but distance and parameter"""
    key: Tuple
    frame: pd.DataFrame
    estimate: Optional[ThresholdEstimate] = None
    notice: str = ""

    @property
    def name(self) -> str:
        return " / ".join(f"{c}={v}" for c, v in zip(GROUP_COLUMNS, self.key))

    @property
    def distances(self) -> List[int]:
        return sorted(int(d) for d in self.frame["d"].unique())


@dataclass
class ThresholdReport:
    groups: List[CurveGroup] = field(default_factory=list)
    comparison: pd.DataFrame = field(default_factory=pd.DataFrame)

    def render(self) -> str:
        lines = []
        for group in self.groups:
            lines.append(f"== {group.name}")
            lines.append(curve_table(group.frame).to_string())
            if group.estimate is not None:
                lines.append(f"Threshold: {group.estimate.describe()}")
                for (small, large), value in sorted(group.estimate.crossings.items()):
                    lines.append(f"  d={small} × d={large}: {value:.5g}")
            else:
                lines.append(group.notice)
            lines.append("")
        if not self.comparison.empty:
            lines.append("== Mode comparison")
            lines.append(self.comparison.to_string(index=False))
        return "\n".join(lines).rstrip() + "\n"


def _normalized(frame: pd.DataFrame) -> pd.DataFrame:
    frame = frame.copy()
    for column, default in (("noise_model", "phenomenological"), ("epsilon", 0.0)):
        if column not in frame.columns:
            frame[column] = default
    return frame


def curve_table(frame: pd.DataFrame) -> pd.DataFrame:
    """Rate ± stderr per parameter (rows) and distance (columns)"""
    cells = frame.assign(cell=[f"{r:.4g} ± {s:.2g}" for r, s in zip(frame["rate"], frame["stderr"])])
    table = cells.pivot_table(index="param", columns="d", values="cell", aggfunc="first")
    table.columns = [f"d={d}" for d in table.columns]
    return table


def build_report(frame: pd.DataFrame, n_boot: int = 200, seed: int = 0) -> ThresholdReport:
    """Per-group curves, threshold estimates and a side-by-side mode comparison"""
    frame = _normalized(frame)
    report = ThresholdReport()
    for key, rows in frame.groupby(GROUP_COLUMNS, sort=True, dropna=False):
        group = CurveGroup(tuple(key), rows)
        if len(group.distances) < 2:
            group.notice = "Only one distance: threshold skipped"
        else:
            try:
                group.estimate = estimate_threshold(rows, n_boot=n_boot, seed=seed)
            except NoCrossingError as exc:
                group.notice = f"No crossing: {exc}"
            except ValueError as exc:
                group.notice = f"Threshold skipped: {exc}"
        if group.notice:
            logger.warning("%s: %s", group.name, group.notice)
        report.groups.append(group)
    report.comparison = mode_comparison(report.groups)
    return report


def mode_comparison(groups: List[CurveGroup]) -> pd.DataFrame:
    """
    Thresholds of groups that differ only in channel mode, with the ratio
    against the exact mode (or the first mode present)
    """
    mode_index = GROUP_COLUMNS.index("mode")
    buckets: Dict[Tuple, List[CurveGroup]] = {}
    for group in groups:
        if group.estimate is None:
            continue
        rest = group.key[:mode_index] + group.key[mode_index + 1:]
        buckets.setdefault(rest, []).append(group)

    rows = []
    for rest, members in buckets.items():
        if len(members) < 2:
            continue
        members.sort(key=lambda g: (g.key[mode_index] != "exact", g.key[mode_index]))
        reference = members[0].estimate.threshold
        for group in members:
            rows.append({
                "channel": group.key[1],
                "noise_model": group.key[2],
                "mode": group.key[mode_index],
                "threshold": group.estimate.threshold,
                "ci_low": group.estimate.ci_low,
                "ci_high": group.estimate.ci_high,
                "ratio": group.estimate.threshold / reference,
            })
    return pd.DataFrame(rows)
