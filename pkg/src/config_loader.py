"""
Config Loader - JSON5 experiment configs and run manifests
"""

import logging
from dataclasses import dataclass, field
from datetime import datetime
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Optional, Union

import json5

from experiment_models import ConfigError, ExperimentConfig

logger = logging.getLogger("pfsr_sim")

MANIFEST_NAME = "manifest.json"
PathLike = Union[str, Path]


def _read_json5(path: PathLike) -> Any:
    path = Path(path)
    if not path.exists():
        raise ConfigError("<file>", f"{path} does not exist")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json5.load(f)
    except ValueError as exc:
        raise ConfigError("<file>", f"{path} is not valid JSON5: {exc}") from None


def load_config(path: PathLike) -> ExperimentConfig:
    """
    Load an experiment config, or the config embedded in a run manifest

    A manifest's effective seed and worker count replace the ones in its
    config block so the replay matches the recorded run.
    """
    data = _read_json5(path)
    if isinstance(data, dict) and "config" in data and "kind" not in data:
        config = dict(data["config"])
        if "seed" in data:
            config["seed"] = data["seed"]
        logger.debug("Loaded manifest %s for replay", path)
        return ExperimentConfig.from_dict(config)
    return ExperimentConfig.from_dict(data)


def dumps_config(config: ExperimentConfig) -> str:
    return json5.dumps(config.to_dict(), indent=2, quote_keys=True, trailing_commas=False)


def save_config(config: ExperimentConfig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_config(config) + "\n", encoding="utf-8")
    return path


def package_versions() -> Dict[str, str]:
    versions = {}
    for name in ("numpy", "pandas", "scipy", "networkx", "json5", "tqdm"):
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


@dataclass
class RunManifest:
    """Everything needed to replay a run"""
    config: ExperimentConfig
    seed: int
    workers: int
    started: str = field(default_factory=lambda: datetime.now().isoformat(timespec="seconds"))
    finished: Optional[str] = None
    rows: Dict[str, int] = field(default_factory=dict)

    def finish(self, rows: Dict[str, int]):
        self.rows = dict(rows)
        self.finished = datetime.now().isoformat(timespec="seconds")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "workers": self.workers,
            "versions": package_versions(),
            "rows": self.rows,
            "started": self.started,
            "finished": self.finished,
        }

    def write(self, out_dir: PathLike) -> Path:
        path = Path(out_dir) / MANIFEST_NAME
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json5.dumps(self.to_dict(), indent=2, quote_keys=True, trailing_commas=False) + "\n",
            encoding="utf-8",
        )
        return path
