"""
Data models for credal_lln.
These models define the structure of data passed between the modules.
All of them are immutable once built.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class FinitePmf:
    """A finite-support probability mass function on the reals."""
    values: Tuple[float, ...]  # strictly increasing
    probs: Tuple[float, ...]

    @property
    def atoms(self) -> List[Tuple[float, float]]:
        return list(zip(self.values, self.probs))

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CredalSet:
    """A nonempty finite set of priors with derived first-moment bookkeeping.

    `support_index[j][i]` is the position in `union_support` of the i-th
    atom of prior j.
    """
    priors: Tuple[FinitePmf, ...]
    union_support: Tuple[float, ...]
    mu_upper: float
    mu_lower: float
    support_index: Tuple[Tuple[int, ...], ...]

    @property
    def weights(self) -> np.ndarray:
        """Prior x union-support probability matrix."""
        w = np.zeros((len(self.priors), len(self.union_support)))
        for j, (pmf, idx) in enumerate(zip(self.priors, self.support_index)):
            w[j, list(idx)] = pmf.probs
        return w

    @property
    def means(self) -> Tuple[float, ...]:
        return tuple(p.mean for p in self.priors)

    @property
    def upper_index(self) -> int:
        """Index of the max-mean prior (lowest index on ties)."""
        means = self.means
        return means.index(max(means))

    @property
    def lower_index(self) -> int:
        means = self.means
        return means.index(min(means))

    @property
    def radius(self) -> float:
        """max |x - mu_upper| over the union support."""
        return max(abs(x - self.mu_upper) for x in self.union_support)

    @property
    def fingerprint(self) -> str:
        # 12 significant digits, so 1 - 0.7 and a file's 0.3 hash alike
        doc = [
            {
                "values": [float(f"{x:.12g}") for x in p.values],
                "probs": [float(f"{q:.12g}") for q in p.probs],
            }
            for p in self.priors
        ]
        digest = hashlib.blake2b(json.dumps(doc).encode("utf-8"), digest_size=8)
        return digest.hexdigest()


@dataclass(frozen=True)
class Event:
    """A subset of a credal set's union support."""
    members: frozenset = frozenset()

    def __contains__(self, x: float) -> bool:
        return x in self.members

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class UpperLowerPair:
    upper: float
    lower: float

    def __post_init__(self) -> None:
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"lower {self.lower!r} exceeds upper {self.upper!r}")

    @property
    def gap(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class Segment:
    """A stretch of a simulated path spent on one block target.

    `phase` is 'approach' (steering the running average to the target) or
    'dwell' (mixing at the target's weight). Steps are 1-based, inclusive.
    """
    start: int
    end: int
    target: float
    phase: str
    block: int


@dataclass(frozen=True, eq=False)
class SamplePath:
    """One realisation of a Peng-IID sequence under a nature policy."""
    xs: np.ndarray
    policy_trace: np.ndarray
    seed: int
    credal_id: str
    segments: Tuple[Segment, ...] = ()

    def __len__(self) -> int:
        return int(self.xs.shape[0])


@dataclass(frozen=True)
class TailStats:
    n0: int
    n: int
    tail_sup: float
    tail_inf: float
    final_mean: float


@dataclass(frozen=True)
class ClusterHit:
    target: float
    distance: float
    m: int  # step achieving the minimal distance
    hit: bool


@dataclass(frozen=True)
class ClusterReport:
    targets: Tuple[float, ...]
    hits: Tuple[ClusterHit, ...]
    epsilon: float

    @property
    def all_hit(self) -> bool:
        return all(h.hit for h in self.hits)


@dataclass(frozen=True)
class Verdict:
    """One pass/fail criterion. `comparison` is '<=' or '>='."""
    criterion: str
    measured: float
    threshold: float
    passed: bool
    comparison: str = "<="

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criterion": self.criterion,
            "measured": self.measured,
            "threshold": self.threshold,
            "comparison": self.comparison,
            "pass": self.passed,
        }


@dataclass
class ExperimentConfig:
    """What to run. `parameters` holds the experiment-specific values."""
    experiment: str
    credal: Optional[Path] = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    out_dir: Path = Path("runs")
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "credal": str(self.credal) if self.credal is not None else None,
            "parameters": dict(self.parameters),
            "out_dir": str(self.out_dir),
            "seed": self.seed,
        }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    verdicts: List[Verdict] = field(default_factory=list)
    series: List[str] = field(default_factory=list)
    generator: Optional[str] = None
    elapsed_ms: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def failed(self) -> List[str]:
        return [v.criterion for v in self.verdicts if not v.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "series": list(self.series),
            "generator": self.generator,
            "elapsed_ms": self.elapsed_ms,
            "metadata": self.metadata,
        }
