"""Pipeline configuration: a flat key=value file with CLI-flag overrides.

Example::

    # pipeline.cfg
    latin_traditional_table = tables/latin_traditional.tsv
    traditional_cyrillic_table = tables/traditional_cyrillic.tsv
    dataset_root = corpus/
    min_pause = 0.08
    seed = 7

Unknown keys and unparseable values are configuration errors. Paths are
checked at use time by whichever command needs them.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import UsageError


@dataclass
class PipelineConfig:
    latin_traditional_table: str | None = None
    traditional_cyrillic_table: str | None = None
    dictionary: str | None = None
    translator_url: str | None = None
    translator_timeout: float = 5.0
    translator_retries: int = 1
    frame_length: float = 0.025
    hop: float = 0.010
    threshold_db: float = 10.0
    min_pause: float = 0.080
    b1_min: float = 0.030
    b2_min: float = 0.100
    b3_min: float = 0.300
    alignment_policy: str = "auto"
    alignment_dir: str = "align"
    dataset_root: str | None = None
    model_path: str | None = None
    buckets: int = 4096
    epochs: int = 10
    seed: int = 0
    jobs: int = 1
    metadata_delimiter: str = "|"


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}


def _coerce(name: str, value: str):
    kind = _FIELD_TYPES[name]
    try:
        if kind.startswith("int"):
            return int(value)
        if kind.startswith("float"):
            return float(value)
    except ValueError:
        raise UsageError(f"config key {name!r}: {value!r} is not a {kind}") from None
    return value


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file {path} not found")
    config = PipelineConfig()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{line_no}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise UsageError(f"{path}:{line_no}: unknown config key {key!r}")
            setattr(config, key, _coerce(key, value))
    return config


def require_path(value: str | None, what: str) -> Path:
    """Resolve a configured path or fail as a configuration error."""
    if value is None:
        raise UsageError(f"{what} is not configured")
    path = Path(value)
    if not path.exists():
        raise UsageError(f"{what} {path} does not exist")
    return path
