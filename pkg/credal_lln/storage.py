"""File helpers for credal_lln.

One reader and one writer per on-disk shape:
  - load_credal(path) / save_credal(path, cs)   credal-set JSON
  - load_config_json(path) -> dict              experiment config JSON
  - write_json(path, doc)                       sorted keys, 2-space indent
  - write_series(path, header, rows)            CSV, 17 significant digits
  - write_run_csv(path, sample_path)            step,x,prior_index,running_mean
  - read_run_csv(path) -> SamplePath

Unreadable or malformed input raises ConfigError.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from .credal import make_credal, make_pmf
from .data_models import CredalSet, SamplePath
from .errors import ConfigError, CredalLlnError, EmptyPathError

logger = logging.getLogger("credal_lln.storage")

RUN_COLUMNS = ("step", "x", "prior_index", "running_mean")


def fmt(value: Any) -> str:
    """'.' decimal point, no grouping, 17 significant digits for reals."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def _read_json(path: Path) -> Any:
    try:
        with Path(path).open("r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        logger.exception("storage: failed to read %s", path)
        raise ConfigError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e


def load_credal(path: Path) -> CredalSet:
    """Read {"priors": [{"values": [...], "probs": [...]}, ...]}."""
    doc = _read_json(path)
    try:
        priors = doc["priors"]
        pmfs = [make_pmf(p["values"], p["probs"]) for p in priors]
    except (KeyError, TypeError) as e:
        raise ConfigError(f"{path}: expected {{'priors': [{{'values', 'probs'}}]}}") from e
    except CredalLlnError as e:
        raise ConfigError(f"{path}: {e}") from e
    cs = make_credal(pmfs)
    logger.debug("storage: loaded credal set %s from %s", cs.fingerprint, path)
    return cs


def credal_to_dict(cs: CredalSet) -> Dict[str, Any]:
    return {"priors": [{"values": list(p.values), "probs": list(p.probs)} for p in cs.priors]}


def save_credal(path: Path, cs: CredalSet) -> None:
    write_json(path, credal_to_dict(cs))


def load_config_json(path: Path) -> Dict[str, Any]:
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return doc


def write_json(path: Path, doc: Any) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        json.dump(doc, f, sort_keys=True, indent=2)
        f.write("\n")


def write_series(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    logger.debug("storage: wrote %s", path)
    return path


def run_rows(sample_path: SamplePath) -> Iterable[List[Any]]:
    means = np.cumsum(sample_path.xs) / np.arange(1, len(sample_path) + 1)
    for i in range(len(sample_path)):
        yield [i + 1, float(sample_path.xs[i]), int(sample_path.policy_trace[i]), float(means[i])]


def write_run_csv(path: Path, sample_path: SamplePath) -> Path:
    return write_series(path, RUN_COLUMNS, run_rows(sample_path))


def read_run_csv(path: Path, seed: int = 0, credal_id: str = "") -> SamplePath:
    """Rebuild a SamplePath from a run CSV; seed and credal id are not stored in it."""
    xs: List[float] = []
    trace: List[int] = []
    try:
        with Path(path).open("r", encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            missing = set(RUN_COLUMNS[:3]) - set(reader.fieldnames or ())
            if missing:
                raise ConfigError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                xs.append(float(row["x"]))
                trace.append(int(row["prior_index"]))
    except OSError as e:
        logger.exception("storage: failed to read %s", path)
        raise ConfigError(f"cannot read {path}: {e}") from e
    except ValueError as e:
        if isinstance(e, CredalLlnError):
            raise
        raise ConfigError(f"{path}: {e}") from e
    if not xs:
        raise EmptyPathError(f"{path} has no samples")
    return SamplePath(np.asarray(xs), np.asarray(trace, dtype=np.int64), seed, credal_id)
