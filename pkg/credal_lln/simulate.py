"""Sample paths of Peng-IID sequences under explicit nature policies.

Every step draws X_i from the prior the policy picks. Randomness comes
from two counter-based Philox streams keyed by the seed: stream 0 feeds
the inverse-CDF draws, stream 1 the randomized policies. The i-th draw of
either stream depends only on (seed, i), so a path is a pure function of
(credal set, policy, n, seed).
"""

from __future__ import annotations

import bisect
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import (
    DEFAULT_RHO,
    GENERATOR_NAME,
    IDENTITY_TOL,
    POLICY_STREAM,
    SAMPLE_STREAM,
    U64_MAX,
    parse_flag,
)
from .data_models import CredalSet, SamplePath, Segment
from .errors import ConfigError, InvalidPolicyIndexError, TargetOutOfRangeError
from .pengdp import PengDpSolution

logger = logging.getLogger("credal_lln.simulate")

Rule = Callable[[int, float, int], int]


class PolicyKind(str, Enum):
    CONSTANT_MAX = "constant-max"
    CONSTANT_MIN = "constant-min"
    CONSTANT_INDEX = "index"
    PERIODIC = "periodic"
    BLOCK_TARGETS = "blocks"
    CUSTOM = "custom"


class Interleave(str, Enum):
    DETERMINISTIC = "deterministic"
    RANDOMIZED = "randomized"


@dataclass(frozen=True)
class PriorPolicy:
    """Nature's rule for picking the prior of the next draw.

    Block policies carry the prior indices and mean bounds of the credal
    set they were built for, and that set's fingerprint in `credal_id`.
    """
    kind: PolicyKind
    index: Optional[int] = None
    schedule: Tuple[int, ...] = ()
    targets: Tuple[float, ...] = ()
    block_growth: float = DEFAULT_RHO
    interleave: Interleave = Interleave.DETERMINISTIC
    approach: bool = True
    rule: Optional[Rule] = None
    upper_index: int = 0
    lower_index: int = 0
    mu_upper: float = 0.0
    mu_lower: float = 0.0
    credal_id: str = ""

    @property
    def stateful(self) -> bool:
        """True when the choice depends on the realised running sum."""
        return self.kind is PolicyKind.CUSTOM or (
            self.kind is PolicyKind.BLOCK_TARGETS and self.approach
        )

    @property
    def randomized(self) -> bool:
        return self.kind is PolicyKind.BLOCK_TARGETS and self.interleave is Interleave.RANDOMIZED


def constant_max() -> PriorPolicy:
    return PriorPolicy(PolicyKind.CONSTANT_MAX)


def constant_min() -> PriorPolicy:
    return PriorPolicy(PolicyKind.CONSTANT_MIN)


def constant_index(i: int) -> PriorPolicy:
    return PriorPolicy(PolicyKind.CONSTANT_INDEX, index=int(i))


def periodic(schedule: Sequence[int]) -> PriorPolicy:
    if not schedule:
        raise ConfigError("periodic schedule is empty")
    return PriorPolicy(PolicyKind.PERIODIC, schedule=tuple(int(i) for i in schedule))


def custom(rule: Rule) -> PriorPolicy:
    return PriorPolicy(PolicyKind.CUSTOM, rule=rule)


def dp_policy(solution: PengDpSolution) -> PriorPolicy:
    """Let nature play the optimal strategy of a solved backward induction."""
    horizon = solution.lattice.n

    def rule(step: int, running_sum: float, history_length: int) -> int:
        if history_length >= horizon:
            raise InvalidPolicyIndexError(f"DP strategy covers {horizon} steps, asked for step {step}")
        return solution.decision(history_length, running_sum)

    return custom(rule)


def mixing_weight(t: float, mu_lower: float, mu_upper: float) -> float:
    """lam with lam mu_upper + (1 - lam) mu_lower = t."""
    gap = mu_upper - mu_lower
    if gap <= 0.0:
        return 1.0
    return min(1.0, max(0.0, (t - mu_lower) / gap))


def block_length(k: int, rho: float) -> int:
    return int(math.ceil(rho**k))


def block_targets_policy(
    cs: CredalSet,
    targets: Sequence[float],
    rho: float = DEFAULT_RHO,
    mode: Union[Interleave, str] = Interleave.DETERMINISTIC,
    approach: bool = True,
) -> PriorPolicy:
    """Cycle the running behaviour through `targets` in blocks of growing length.

    Block k has target targets[k mod len(targets)] and mixes the max-mean
    and min-mean priors with weight lam. With `approach` the block first
    steers the running average across its target using the extreme prior,
    then dwells ceil(rho^k) steps at weight lam; without it the block is
    exactly ceil(rho^k) steps long.
    """
    if not targets:
        raise ConfigError("block targets are empty")
    if rho <= 1.0:
        raise ConfigError(f"block growth must be > 1, got {rho!r}")
    for t in targets:
        if not cs.mu_lower - IDENTITY_TOL <= t <= cs.mu_upper + IDENTITY_TOL:
            raise TargetOutOfRangeError(f"target {t!r} outside [{cs.mu_lower!r}, {cs.mu_upper!r}]")
    try:
        interleave = Interleave(mode)
    except ValueError:
        raise ConfigError(f"unknown interleave mode {mode!r}") from None
    return PriorPolicy(
        PolicyKind.BLOCK_TARGETS,
        targets=tuple(float(t) for t in targets),
        block_growth=float(rho),
        interleave=interleave,
        approach=approach,
        upper_index=cs.upper_index,
        lower_index=cs.lower_index,
        mu_upper=cs.mu_upper,
        mu_lower=cs.mu_lower,
        credal_id=cs.fingerprint,
    )


def default_block_targets(cs: CredalSet) -> Tuple[float, ...]:
    """Three interior targets at 1/8, 1/2 and 7/8 of [mu_lower, mu_upper]."""
    gap = cs.mu_upper - cs.mu_lower
    return tuple(cs.mu_lower + q * gap for q in (0.125, 0.5, 0.875))


def stress_policies(cs: CredalSet, rho: float = DEFAULT_RHO) -> Dict[str, PriorPolicy]:
    """The named adversaries used for the falsification suite."""
    targets = default_block_targets(cs)
    return {
        "constant-max": constant_max(),
        "constant-min": constant_min(),
        "periodic": periodic([cs.upper_index, cs.lower_index]),
        "blocks-deterministic": block_targets_policy(cs, targets, rho, Interleave.DETERMINISTIC),
        "blocks-randomized": block_targets_policy(cs, targets, rho, Interleave.RANDOMIZED),
    }


# --- specs -----------------------------------------------------------------

def _parse_floats(text: str) -> List[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def policy_from_spec(
    cs: CredalSet, spec: Union[str, Dict[str, Any]], rho: float = DEFAULT_RHO
) -> PriorPolicy:
    """Build a policy from 'max', 'min', 'index:i', 'periodic:i,j,...',
    'blocks:t1,t2,...', a stress-suite name, or a JSON-style dict.
    """
    if isinstance(spec, dict):
        kind = str(spec.get("kind", ""))
        rho = float(spec.get("rho", rho))
        if kind in ("blocks", "block-targets"):
            targets = spec.get("targets") or default_block_targets(cs)
            return block_targets_policy(
                cs, targets, rho,
                spec.get("interleave", Interleave.DETERMINISTIC.value),
                parse_flag("approach", spec.get("approach", True)),
            )
        if kind == "periodic":
            return _checked(cs, periodic(spec.get("schedule", [])))
        if kind == "index":
            return _checked(cs, constant_index(spec.get("index", -1)))
        return policy_from_spec(cs, kind, rho)

    text = spec.strip()
    name, _, arg = text.partition(":")
    try:
        if name in ("max", "constant-max"):
            return constant_max()
        if name in ("min", "constant-min"):
            return constant_min()
        if name == "index":
            return _checked(cs, constant_index(int(arg)))
        if name == "periodic":
            return _checked(cs, periodic([int(t) for t in arg.split(",") if t.strip()]))
        if name == "blocks":
            targets = _parse_floats(arg) if arg else default_block_targets(cs)
            return block_targets_policy(cs, targets, rho)
        if name in ("blocks-deterministic", "blocks-randomized"):
            return stress_policies(cs, rho)[name]
    except ValueError as e:
        if isinstance(e, (InvalidPolicyIndexError, TargetOutOfRangeError, ConfigError)):
            raise
        raise ConfigError(f"bad policy spec {spec!r}: {e}") from e
    raise ConfigError(f"unknown policy {spec!r}")


def policy_to_spec(policy: PriorPolicy) -> Dict[str, Any]:
    spec: Dict[str, Any] = {"kind": policy.kind.value}
    if policy.kind is PolicyKind.CONSTANT_INDEX:
        spec["index"] = policy.index
    elif policy.kind is PolicyKind.PERIODIC:
        spec["schedule"] = list(policy.schedule)
    elif policy.kind is PolicyKind.BLOCK_TARGETS:
        spec.update(
            targets=list(policy.targets),
            rho=policy.block_growth,
            interleave=policy.interleave.value,
            approach=policy.approach,
        )
    return spec


def _checked(cs: CredalSet, policy: PriorPolicy) -> PriorPolicy:
    k = len(cs.priors)
    indices = [policy.index] if policy.kind is PolicyKind.CONSTANT_INDEX else list(policy.schedule)
    for i in indices:
        if i is None or not 0 <= i < k:
            raise InvalidPolicyIndexError(f"prior index {i!r} outside [0, {k})")
    return policy


def _check_built_for(cs: CredalSet, policy: PriorPolicy) -> None:
    if policy.credal_id and policy.credal_id != cs.fingerprint:
        raise InvalidPolicyIndexError(
            f"{policy.kind.value} policy was built for credal set {policy.credal_id}, "
            f"not {cs.fingerprint}"
        )


# --- random streams --------------------------------------------------------

def generator(seed: int, stream: int) -> np.random.Generator:
    """Philox generator for `stream` under key `seed`."""
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(stream) << 64)))


def uniforms(seed: int, stream: int, n: int) -> np.ndarray:
    """The first n uniforms of Philox stream `stream` under key `seed`."""
    return generator(seed, stream).random(n)


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= U64_MAX:
        raise ConfigError(f"seed {seed} is not an unsigned 64-bit integer")
    return seed


# --- trace construction ----------------------------------------------------

def _static_trace(
    cs: CredalSet, policy: PriorPolicy, n: int, policy_u: Optional[np.ndarray]
) -> Tuple[np.ndarray, Tuple[Segment, ...]]:
    if policy.kind is PolicyKind.CONSTANT_MAX:
        return np.full(n, cs.upper_index, dtype=np.int64), ()
    if policy.kind is PolicyKind.CONSTANT_MIN:
        return np.full(n, cs.lower_index, dtype=np.int64), ()
    if policy.kind is PolicyKind.CONSTANT_INDEX:
        return np.full(n, policy.index, dtype=np.int64), ()
    if policy.kind is PolicyKind.PERIODIC:
        sched = np.asarray(policy.schedule, dtype=np.int64)
        return sched[np.arange(n) % sched.shape[0]], ()

    # fixed-length blocks
    lengths = []
    total = 0
    while total < n:
        lengths.append(block_length(len(lengths), policy.block_growth))
        total += lengths[-1]
    ends = np.cumsum(lengths)
    starts = ends - np.asarray(lengths)
    steps = np.arange(n)
    block = np.searchsorted(ends, steps, side="right")
    offset = (steps - starts[block]).astype(float)
    lams = np.asarray([
        mixing_weight(policy.targets[k % len(policy.targets)], policy.mu_lower, policy.mu_upper)
        for k in range(len(lengths))
    ])
    lam = lams[block]
    if policy.interleave is Interleave.RANDOMIZED:
        pick_upper = policy_u < lam
    else:
        pick_upper = np.floor((offset + 1.0) * lam) - np.floor(offset * lam) >= 1.0
    trace = np.where(pick_upper, policy.upper_index, policy.lower_index).astype(np.int64)
    segments = tuple(
        Segment(int(starts[k]) + 1, int(min(ends[k], n)), policy.targets[k % len(policy.targets)], "dwell", k)
        for k in range(len(lengths))
    )
    return trace, segments


class _BlockSteering:
    """Per-path state of a block-targets policy with an approach phase."""

    def __init__(self, policy: PriorPolicy) -> None:
        self.policy = policy
        self.k = 0
        self.phase = "start"
        self.segments: List[Segment] = []
        self.seg_start = 1
        self.offset = 0

    def _begin(self, step: int, running_sum: float) -> None:
        p = self.policy
        self.target = p.targets[self.k % len(p.targets)]
        self.lam = mixing_weight(self.target, p.mu_lower, p.mu_upper)
        self.length = block_length(self.k, p.block_growth)
        self.seg_start = step
        self.offset = 0
        self.direction = self._direction(step, running_sum)
        if self.lam in (0.0, 1.0) or self.direction == 0:
            self.phase = "dwell"
        else:
            self.phase = "approach"

    def _direction(self, step: int, running_sum: float) -> int:
        gap = self.target * (step - 1) - running_sum
        return (gap > 0.0) - (gap < 0.0)

    def _close(self, end: int) -> None:
        if end >= self.seg_start:
            self.segments.append(Segment(self.seg_start, end, self.target, self.phase, self.k))

    def choose(self, step: int, running_sum: float, u: float) -> int:
        p = self.policy
        if self.phase == "start":
            self._begin(step, running_sum)
        if self.phase == "approach":
            d = self._direction(step, running_sum)
            if d == self.direction:
                return p.upper_index if d > 0 else p.lower_index
            self._close(step - 1)
            self.phase = "dwell"
            self.seg_start = step
        j = self.offset
        if p.interleave is Interleave.RANDOMIZED:
            upper = u < self.lam
        else:
            upper = math.floor((j + 1) * self.lam) - math.floor(j * self.lam) >= 1
        self.offset += 1
        if self.offset >= self.length:
            self._close(step)
            self.k += 1
            self.phase = "start"
        return p.upper_index if upper else p.lower_index

    def finish(self, n: int) -> Tuple[Segment, ...]:
        if self.phase != "start":
            self._close(n)
        return tuple(self.segments)


# --- sampling --------------------------------------------------------------

def _cumulative(cs: CredalSet) -> List[np.ndarray]:
    return [np.cumsum(np.asarray(p.probs)) for p in cs.priors]


def _draw(cs: CredalSet, trace: np.ndarray, u: np.ndarray) -> np.ndarray:
    support = np.asarray(cs.union_support)
    xs = np.empty(trace.shape[0])
    for j, cum in enumerate(_cumulative(cs)):
        mask = trace == j
        if not mask.any():
            continue
        atoms = np.minimum(np.searchsorted(cum, u[mask], side="right"), cum.shape[0] - 1)
        xs[mask] = support[np.asarray(cs.support_index[j])[atoms]]
    return xs


def _check_trace(cs: CredalSet, trace: np.ndarray) -> None:
    k = len(cs.priors)
    if trace.size and (trace.min() < 0 or trace.max() >= k):
        bad = int(trace[(trace < 0) | (trace >= k)][0])
        raise InvalidPolicyIndexError(f"policy chose prior {bad}, credal set has {k}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def sample_path(cs: CredalSet, policy: PriorPolicy, n: int, seed: int) -> SamplePath:
    """Draw X_1..X_n with X_i from priors[policy(i, S_{i-1}, i-1)]."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    seed = _check_seed(seed)
    if policy.kind is PolicyKind.CONSTANT_INDEX or policy.kind is PolicyKind.PERIODIC:
        _checked(cs, policy)
    _check_built_for(cs, policy)
    u = uniforms(seed, SAMPLE_STREAM, n)
    policy_u = uniforms(seed, POLICY_STREAM, n) if policy.randomized else None

    if not policy.stateful:
        trace, segments = _static_trace(cs, policy, n, policy_u)
        _check_trace(cs, trace)
        xs = _draw(cs, trace, u)
    else:
        trace, xs, segments = _step_loop(cs, policy, n, u, policy_u)
    return SamplePath(_frozen(xs), _frozen(trace), seed, cs.fingerprint, segments)


def _step_loop(
    cs: CredalSet,
    policy: PriorPolicy,
    n: int,
    u: np.ndarray,
    policy_u: Optional[np.ndarray],
) -> Tuple[np.ndarray, np.ndarray, Tuple[Segment, ...]]:
    k = len(cs.priors)
    cums = [c.tolist() for c in _cumulative(cs)]
    reps = [[cs.union_support[i] for i in idx] for idx in cs.support_index]
    us = u.tolist()
    pus = policy_u.tolist() if policy_u is not None else [0.0] * n
    steering = _BlockSteering(policy) if policy.kind is PolicyKind.BLOCK_TARGETS else None
    rule = policy.rule

    trace = [0] * n
    xs = [0.0] * n
    running = 0.0
    for i in range(n):
        step = i + 1
        if steering is not None:
            j = steering.choose(step, running, pus[i])
        else:
            j = int(rule(step, running, i))
            if not 0 <= j < k:
                raise InvalidPolicyIndexError(f"policy chose prior {j} at step {step}, credal set has {k}")
        cum = cums[j]
        x = reps[j][min(bisect.bisect_right(cum, us[i]), len(cum) - 1)]
        trace[i] = j
        xs[i] = x
        running += x
    segments = steering.finish(n) if steering is not None else ()
    return np.asarray(trace, dtype=np.int64), np.asarray(xs, dtype=float), segments


def replay_path(cs: CredalSet, trace: Sequence[int], seed: int) -> SamplePath:
    """Regenerate xs from a recorded policy trace and seed."""
    seed = _check_seed(seed)
    trace_arr = np.asarray(trace, dtype=np.int64)
    _check_trace(cs, trace_arr)
    xs = _draw(cs, trace_arr, uniforms(seed, SAMPLE_STREAM, trace_arr.shape[0]))
    return SamplePath(_frozen(xs), _frozen(trace_arr.copy()), seed, cs.fingerprint)


def replicate_seeds(seed: int, replicates: int) -> List[int]:
    seed = _check_seed(seed)
    return [(seed + r) % (U64_MAX + 1) for r in range(replicates)]


def simulate_replicates(
    cs: CredalSet,
    policy: PriorPolicy,
    n: int,
    seed: int,
    replicates: int,
    workers: int = 1,
) -> List[SamplePath]:
    """Replicate r uses seed (seed + r) mod 2^64; output is in replicate order."""
    if replicates < 1:
        raise ConfigError(f"replicates must be >= 1, got {replicates}")
    seeds = replicate_seeds(seed, replicates)
    logger.debug("simulating %d replicates of %s, n=%d", replicates, policy.kind.value, n)
    if workers <= 1:
        return [sample_path(cs, policy, n, s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: sample_path(cs, policy, n, s), seeds))


def run_metadata(cs: CredalSet, policy: PriorPolicy, n: int, seed: int) -> Dict[str, Any]:
    meta: Dict[str, Any] = {
        "seed": seed,
        "n": n,
        "policy": policy_to_spec(policy),
        "generator": GENERATOR_NAME,
        "streams": {"sample": SAMPLE_STREAM, "policy": POLICY_STREAM},
        "credal_id": cs.fingerprint,
    }
    if policy.kind is PolicyKind.BLOCK_TARGETS:
        meta["rho"] = policy.block_growth
        meta["block_schedule"] = (
            "geometric ceil(rho^k) dwell after the running average crosses each target"
            if policy.approach
            else "fixed geometric block lengths ceil(rho^k)"
        )
    return meta
