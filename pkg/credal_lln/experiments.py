"""Experiment runner.

`run(config)` dispatches on `config.experiment`, writes CSV series and a
report JSON under `config.out_dir`, and returns the ExperimentReport.
Each experiment returns its verdicts and metadata; CSV files go through
`_Context.write` so the report lists them in the order written.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .analyze import (
    block_increment_means,
    cluster_coverage,
    default_n0,
    default_tolerances,
    final_mean_concentration,
    tail_stats,
    violation_rate,
)
from .config import (
    GENERATOR_NAME,
    IDENTITY_TOL,
    INSTANCE_STREAM,
    MAX_EVENT_ENUMERATION_SUPPORT,
    ORACLE_TOL,
    Settings,
    load_settings,
    parse_flag,
)
from .credal import all_events, complement, make_event, pmf_expectation
from .data_models import CredalSet, ExperimentConfig, ExperimentReport, SamplePath, Verdict
from .errors import ConfigError, OracleTooLargeError, VerdictFailedError
from .functionals import as_path_functional, function_from_spec, random_credal, sum_shapes
from .pengdp import (
    brute_force_strategy_oracle,
    capacity_tail_series,
    chebyshev_capacity_bound,
    enumerate_strategy_trees,
    joint_capacity_factorization,
    lemma4_analytic_bound,
    lemma4_product_bound,
    lemma4_threshold_n0,
    peng_lower_sum,
    peng_upper_sum,
    solve_peng_dp,
    strategy_tree_value,
    weak_lln_curve,
)
from .simulate import (
    block_targets_policy,
    constant_max,
    constant_min,
    default_block_targets,
    generator,
    policy_from_spec,
    policy_to_spec,
    replicate_seeds,
    run_metadata,
    simulate_replicates,
    stress_policies,
)
from .storage import fmt, load_credal, read_run_csv, write_json, write_run_csv, write_series
from .sublin import (
    axioms_check,
    capacity_pair,
    choquet_integral_lower,
    choquet_integral_upper,
    choquet_two_tail,
    duality_gap,
    expectation_pair,
    lower_capacity,
    lower_expectation,
    upper_capacity,
    upper_expectation,
)

logger = logging.getLogger("credal_lln.experiments")

REPORT_NAME = "report.json"


@dataclass
class Outcome:
    verdicts: List[Verdict] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)


def at_most(criterion: str, measured: float, threshold: float) -> Verdict:
    return Verdict(criterion, float(measured), float(threshold), bool(measured <= threshold), "<=")


def at_least(criterion: str, measured: float, threshold: float) -> Verdict:
    return Verdict(criterion, float(measured), float(threshold), bool(measured >= threshold), ">=")


class _Context:
    """Typed access to the merged parameters, plus the series writer."""

    def __init__(self, config: ExperimentConfig, settings: Settings) -> None:
        self.config = config
        self.settings = settings
        self.params = dict(config.parameters)
        self.series: List[str] = []
        self.stochastic = False
        self._cs: Optional[CredalSet] = None

    # parameters

    def raw_param(self, key: str, default: Any) -> Any:
        value = self.params.get(key)
        return default if value is None else value

    def int_param(self, key: str, default: int, minimum: int = 1) -> int:
        raw = self.raw_param(key, default)
        try:
            value = int(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{key}={raw!r} is not an integer") from e
        if value < minimum:
            raise ConfigError(f"{key}={value} must be >= {minimum}")
        return value

    def float_param(self, key: str, default: float, positive: bool = True) -> float:
        raw = self.raw_param(key, default)
        try:
            value = float(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{key}={raw!r} is not a number") from e
        if not math.isfinite(value) or (positive and value <= 0):
            raise ConfigError(f"{key}={value!r} must be a positive finite number")
        return value

    def list_param(self, key: str, default: Sequence[Any]) -> List[Any]:
        raw = self.raw_param(key, default)
        if isinstance(raw, str):
            raw = [t for t in raw.split(",") if t.strip()]
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError(f"{key} must be a nonempty list")
        return list(raw)

    def ints_param(self, key: str, default: Sequence[int]) -> List[int]:
        try:
            values = [int(v) for v in self.list_param(key, default)]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{key} must be a list of integers") from e
        if any(v < 1 for v in values):
            raise ConfigError(f"{key} entries must be >= 1")
        return values

    def floats_param(self, key: str, default: Sequence[float]) -> List[float]:
        try:
            return [float(v) for v in self.list_param(key, default)]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{key} must be a list of numbers") from e

    def str_param(self, key: str, default: str) -> str:
        return str(self.raw_param(key, default))

    def bool_param(self, key: str, default: bool) -> bool:
        return parse_flag(key, self.raw_param(key, default))

    def seed(self) -> int:
        self.stochastic = True
        seed = self.config.seed if self.config.seed is not None else self.params.get("seed")
        if seed is None:
            raise ConfigError(f"experiment {self.config.experiment!r} needs a seed")
        try:
            return int(seed)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"seed={seed!r} is not an integer") from e

    def workers(self) -> int:
        return self.int_param("workers", self.settings.workers)

    def credal(self) -> CredalSet:
        if self._cs is None:
            if self.config.credal is None:
                raise ConfigError(f"experiment {self.config.experiment!r} needs --credal")
            self._cs = load_credal(self.config.credal)
        return self._cs

    # output

    def write(self, name: str, header: Sequence[str], rows) -> None:
        write_series(self.config.out_dir / name, header, rows)
        self.series.append(name)

    def write_run(self, name: str, path: SamplePath) -> None:
        write_run_csv(self.config.out_dir / name, path)
        self.series.append(name)


def _members(event) -> str:
    return ";".join(fmt(x) for x in sorted(event.members))


# --- exact experiments -------------------------------------------------------

def _expect(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    fname = ctx.str_param("function", "identity")
    f = function_from_spec(fname)
    pair = expectation_pair(cs, f)
    ctx.write(
        "expect_priors.csv",
        ("prior", "mean", "expectation"),
        ([j, pmf.mean, pmf_expectation(pmf, f)] for j, pmf in enumerate(cs.priors)),
    )
    out = Outcome(metadata={"function": fname, "upper": pair.upper, "lower": pair.lower})
    out.verdicts.append(at_least("lower-le-upper", pair.gap, -IDENTITY_TOL))

    axioms = axioms_check(cs, f, lambda x: x, 2.0, 1.0)
    out.verdicts.append(at_most("sublinear-axioms", len(axioms.failures), 0))
    out.metadata["axiom_failures"] = axioms.failures

    event_spec = ctx.params.get("event")
    if event_spec is not None:
        members = event_spec.split(",") if isinstance(event_spec, str) else event_spec
        events = [make_event(cs, [float(v) for v in members if str(v).strip()])]
    elif len(cs.union_support) <= MAX_EVENT_ENUMERATION_SUPPORT:
        events = list(all_events(cs))
    else:
        events = []
    if events:
        rows = []
        worst = 0.0
        for e in events:
            cap = capacity_pair(cs, e)
            gap = duality_gap(cs, e)
            worst = max(worst, abs(gap))
            rows.append([_members(e), cap.upper, cap.lower, gap])
        ctx.write("expect_capacities.csv", ("event", "upper", "lower", "duality_gap"), rows)
        out.verdicts.append(at_most("capacity-duality", worst, IDENTITY_TOL))
    if event_spec is not None:
        fact = joint_capacity_factorization(cs, events[0], complement(cs, events[0]))
        err = max(
            abs(fact.joint_upper - fact.product_upper),
            abs(fact.joint_lower - fact.product_lower),
        )
        out.verdicts.append(at_most("capacity-factorization", err, IDENTITY_TOL))
    return out


def _choquet(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    identity = lambda x: x  # noqa: E731
    e_up = upper_expectation(cs, identity)
    e_low = lower_expectation(cs, identity)
    c_up = choquet_integral_upper(cs)
    c_low = choquet_integral_lower(cs)
    tol = IDENTITY_TOL * max(1.0, max(abs(x) for x in cs.union_support))
    ctx.write(
        "choquet_tail.csv",
        ("x", "upper_tail", "lower_tail"),
        (
            [x, upper_capacity(cs, _tail(cs, i)), lower_capacity(cs, _tail(cs, i))]
            for i, x in enumerate(cs.union_support)
        ),
    )
    out = Outcome(metadata={
        "upper_expectation": e_up,
        "lower_expectation": e_low,
        "choquet_upper": c_up,
        "choquet_lower": c_low,
    })
    out.verdicts += [
        at_least("expectation-le-choquet-upper", c_up - e_up, -tol),
        at_least("choquet-lower-le-lower-expectation", e_low - c_low, -tol),
        at_most("telescoping-eq-two-tail-upper", abs(c_up - choquet_two_tail(cs, True)), tol),
        at_most("telescoping-eq-two-tail-lower", abs(c_low - choquet_two_tail(cs, False)), tol),
    ]
    return out


def _tail(cs: CredalSet, i: int):
    return make_event(cs, cs.union_support[i:])


def _dp(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    n = ctx.int_param("n", 10)
    fname = ctx.str_param("function", "identity")
    g = function_from_spec(fname)
    cap = ctx.settings.lattice_cap
    sol = solve_peng_dp(cs, n, g, cap)
    lower = peng_lower_sum(cs, n, g, cap)
    ctx.write(
        "dp_decisions.csv",
        ("step", "running_sum", "prior_index"),
        (
            [k + 1, s, int(j)]
            for k in range(n)
            for s, j in zip(sol.lattice.reachable[k].tolist(), sol.decisions[k].tolist())
        ),
    )
    out = Outcome(metadata={
        "function": fname,
        "n": n,
        "upper": sol.value,
        "lower": lower,
        "lattice_size": sol.lattice.size(n),
    })
    out.verdicts.append(at_least("lower-le-upper", sol.value - lower, -ORACLE_TOL))
    try:
        oracle = brute_force_strategy_oracle(cs, n, as_path_functional(g))
    except OracleTooLargeError:
        logger.info("dp: n=%d is past the oracle's reach, skipping the cross-check", n)
    else:
        diff = max(abs(oracle.upper - sol.value), abs(oracle.lower - lower))
        out.verdicts.append(at_most("oracle-match", diff, ORACLE_TOL))
    return out


def _curve(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    ns = ctx.ints_param("ns", [32, 64, 128, 256])
    fname = ctx.str_param("function", "phi")
    curve = weak_lln_curve(cs, function_from_spec(fname), ns, ctx.settings.lattice_cap)
    ctx.write(
        "curve.csv",
        ("n", "value", "target", "error"),
        ([n, v, curve.target, abs(v - curve.target)] for n, v in curve.points),
    )
    first, last = ns[0], ns[-1]
    out = Outcome(metadata={"function": fname, "target": curve.target})
    out.verdicts.append(at_most(f"curve-error-at-n={last}", curve.error(last), ctx.float_param("eps", 0.05)))
    if len(ns) > 1:
        out.verdicts.append(at_most("curve-error-trend", curve.error(last), curve.error(first)))
    return out


def _lemma4(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    m = ctx.float_param("m", 15.0)
    ns = ctx.ints_param("ns", [10, 100, 1000, 10_000, 100_000])
    alpha = ctx.float_param("alpha", 1.0)
    c = ctx.float_param("c", 1.0)
    points = lemma4_product_bound(cs, m, ns)
    ctx.write(
        "lemma4.csv",
        ("n", "lambda", "log_value", "value"),
        ([p.n, p.lam, p.log_value, p.value] for p in points),
    )
    bounds = [lemma4_analytic_bound(cs, m, alpha, c, n) for n in ns]
    ctx.write(
        "lemma4_analytic.csv",
        ("n", "log_bound", "log_limit"),
        ([b.n, b.log_bound, b.log_limit] for b in bounds),
    )
    values = [p.value for p in points]
    growth = max((b - a for a, b in zip(values, values[1:])), default=0.0)
    if not all(math.isfinite(v) for v in values):
        growth = math.inf
    out = Outcome(metadata={
        "m": m,
        "max_value": max(values),
        "argmax_n": ns[int(np.argmax(values))],
        "threshold_n0": lemma4_threshold_n0(m, alpha),
        "alpha": alpha,
        "c": c,
    })
    out.verdicts.append(at_most("lemma4-no-growth", growth, 1e-9))
    return out


def _chebyshev(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    eps = ctx.float_param("eps", 0.1)
    m = ctx.float_param("m", 15.0)
    ns = ctx.ints_param("ns", [50, 100, 200])
    cap = ctx.settings.lattice_cap
    reports = [chebyshev_capacity_bound(cs, eps, m, n, cap) for n in ns]
    ctx.write(
        "chebyshev.csv",
        ("n", "lhs", "rhs", "log_rhs"),
        ([r.n, r.lhs, r.rhs, r.log_rhs] for r in reports),
    )
    ctx.write(
        "capacity_tail.csv",
        ("n", "upper_capacity", "partial_sum"),
        capacity_tail_series(cs, eps, ns, cap),
    )
    out = Outcome(metadata={"eps": eps, "m": m})
    for r in reports:
        out.verdicts.append(at_most(f"chebyshev-n={r.n}", r.lhs, r.rhs))
    return out


# --- simulation experiments ------------------------------------------------------

def _simulate(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    seed = ctx.seed()
    n = ctx.int_param("n", 1000)
    replicates = ctx.int_param("replicates", 1)
    rho = ctx.float_param("rho", 1.6)
    policy = policy_from_spec(cs, ctx.params.get("policy") or "max", rho)
    paths = simulate_replicates(cs, policy, n, seed, replicates, ctx.workers())
    for r, p in enumerate(paths):
        ctx.write_run(f"run_{r:04d}.csv", p)
    if paths[0].segments:
        ctx.write(
            "segments_0000.csv",
            ("start", "end", "target", "phase", "block"),
            ([s.start, s.end, s.target, s.phase, s.block] for s in paths[0].segments),
        )
    tol = default_tolerances(cs)
    eps = ctx.float_param("eps", tol.containment)
    n0 = ctx.int_param("n0", default_n0(n))
    out = Outcome(metadata=run_metadata(cs, policy, n, seed))
    out.metadata["replicate_seeds"] = replicate_seeds(seed, replicates)
    out.verdicts.append(
        at_most("violation-rate", violation_rate(paths, cs.mu_lower, cs.mu_upper, eps, n0), 0.01)
    )
    return out


def _summary_rows(name: str, paths: Sequence[SamplePath], n0: int):
    for r, p in enumerate(paths):
        st = tail_stats(p, n0)
        yield [name, r, p.seed, st.tail_inf, st.tail_sup, st.final_mean]


SUMMARY_COLUMNS = ("policy", "replicate", "seed", "tail_inf", "tail_sup", "final_mean")


def _verify_slln_1(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    seed = ctx.seed()
    n = ctx.int_param("n", 20_000)
    replicates = ctx.int_param("replicates", 200)
    eps = ctx.float_param("eps", default_tolerances(cs).containment)
    n0 = ctx.int_param("n0", default_n0(n))
    rho = ctx.float_param("rho", 1.6)
    out = Outcome(metadata={"eps": eps, "n0": n0, "n": n, "replicates": replicates})
    rows: List[List[Any]] = []
    for name, policy in stress_policies(cs, rho).items():
        paths = simulate_replicates(cs, policy, n, seed, replicates, ctx.workers())
        rows.extend(_summary_rows(name, paths, n0))
        rate = violation_rate(paths, cs.mu_lower, cs.mu_upper, eps, n0)
        out.verdicts.append(at_most(f"violation-rate[{name}]", rate, 0.01))
        out.metadata[name] = policy_to_spec(policy)
    ctx.write("slln1_summary.csv", SUMMARY_COLUMNS, rows)
    return out


def _prior_variance(cs: CredalSet, j: int) -> float:
    pmf = cs.priors[j]
    mean = pmf.mean
    return math.fsum(p * (x - mean) ** 2 for x, p in zip(pmf.values, pmf.probs))


def _verify_slln_2(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    seed = ctx.seed()
    n = ctx.int_param("n", 20_000)
    replicates = ctx.int_param("replicates", 200)
    eps = ctx.float_param("eps", default_tolerances(cs).containment)
    n0 = ctx.int_param("n0", default_n0(n))
    out = Outcome(metadata={"n": n, "replicates": replicates, "eps": eps, "n0": n0})
    rows: List[List[Any]] = []
    sides = (
        ("upper", constant_max(), cs.mu_upper, cs.upper_index),
        ("lower", constant_min(), cs.mu_lower, cs.lower_index),
    )
    for side, policy, mu, j in sides:
        paths = simulate_replicates(cs, policy, n, seed, replicates, ctx.workers())
        rows.extend(_summary_rows(policy.kind.value, paths, n0))
        radius = max(4.0 * math.sqrt(_prior_variance(cs, j) / n), IDENTITY_TOL * max(1.0, abs(mu)))
        frac = final_mean_concentration(paths, mu, radius)
        out.verdicts.append(at_least(f"final-mean-near-{side}", frac, 0.95))
        if side == "upper":
            near = sum(abs(tail_stats(p, n0).tail_sup - mu) <= eps for p in paths) / len(paths)
            out.verdicts.append(at_least("limsup-near-upper", near, 0.95))
        else:
            near = sum(abs(tail_stats(p, n0).tail_inf - mu) <= eps for p in paths) / len(paths)
            out.verdicts.append(at_least("liminf-near-lower", near, 0.95))
        out.metadata[f"radius_{side}"] = radius
    ctx.write("slln2_summary.csv", SUMMARY_COLUMNS, rows)
    return out


def _verify_slln_3(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    seed = ctx.seed()
    n = ctx.int_param("n", 2**15)
    replicates = ctx.int_param("replicates", 200)
    tol = default_tolerances(cs)
    eps = ctx.float_param("eps", tol.cluster)
    n0 = ctx.int_param("n0", 64)
    containment_eps = ctx.float_param("containment_eps", tol.containment)
    containment_n0 = ctx.int_param("containment_n0", n0)
    targets = ctx.floats_param("targets", default_block_targets(cs))
    rho = ctx.float_param("rho", 1.6)
    policy = block_targets_policy(
        cs, targets, rho, ctx.str_param("interleave", "deterministic"), ctx.bool_param("approach", True)
    )
    paths = simulate_replicates(cs, policy, n, seed, replicates, ctx.workers())

    rows = []
    all_hit = 0
    for r, p in enumerate(paths):
        report = cluster_coverage(p, targets, n0, eps)
        all_hit += report.all_hit
        rows.extend([r, p.seed, h.target, h.distance, h.m, h.hit] for h in report.hits)
    ctx.write("slln3_hits.csv", ("replicate", "seed", "target", "distance", "m", "hit"), rows)

    first = paths[0]
    if first.segments:
        ctx.write(
            "slln3_segments.csv",
            ("start", "end", "target", "phase", "block"),
            ([s.start, s.end, s.target, s.phase, s.block] for s in first.segments),
        )
        dwell = [s for s in first.segments if s.phase == "dwell"]
        if dwell:
            means = block_increment_means(first, [s.end for s in dwell])
            ctx.write(
                "slln3_block_means.csv",
                ("block", "target", "end", "increment_mean"),
                ([s.block, s.target, s.end, mu] for s, mu in zip(dwell, means.tolist())),
            )

    out = Outcome(metadata=run_metadata(cs, policy, n, seed))
    out.metadata.update(eps=eps, n0=n0, containment_eps=containment_eps, containment_n0=containment_n0)
    out.verdicts.append(at_least("all-targets-hit", all_hit / len(paths), 0.95))
    rate = violation_rate(paths, cs.mu_lower, cs.mu_upper, containment_eps, containment_n0)
    out.verdicts.append(at_most("cluster-set-containment", rate, 0.01))
    return out


def _oracle_suite(ctx: _Context) -> Outcome:
    seed = ctx.seed()
    runs = ctx.int_param("runs", 50)
    max_n = ctx.int_param("n", 4)
    rng = generator(seed, INSTANCE_STREAM)
    worst = 0.0
    worst_enum = 0.0
    enumerated = 0
    rows = []
    for r in range(runs):
        cs = random_credal(rng)
        n = int(rng.integers(1, max_n + 1))
        shapes = sum_shapes(n)
        name = list(shapes)[r % len(shapes)]
        g = shapes[name]
        up, low = peng_upper_sum(cs, n, g), peng_lower_sum(cs, n, g)
        oracle = brute_force_strategy_oracle(cs, n, as_path_functional(g))
        worst = max(worst, abs(up - oracle.upper), abs(low - oracle.lower))
        rows.append([
            r, n, len(cs.priors), len(cs.union_support), name, up, oracle.upper, low, oracle.lower,
        ])
        nodes = sum(len(cs.union_support) ** d for d in range(n))
        if len(cs.priors) ** nodes <= 4096:
            phi = as_path_functional(g)
            values = [strategy_tree_value(cs, t, phi) for t in enumerate_strategy_trees(cs, n)]
            worst_enum = max(worst_enum, abs(max(values) - up), abs(min(values) - low))
            enumerated += 1
    ctx.write(
        "oracle_suite.csv",
        ("run", "n", "priors", "support", "shape", "dp_upper", "oracle_upper", "dp_lower", "oracle_lower"),
        rows,
    )
    out = Outcome(metadata={"runs": runs, "enumerated": enumerated})
    out.verdicts.append(at_most("oracle-max-abs-diff", worst, ORACLE_TOL))
    if enumerated:
        out.verdicts.append(at_most("strategy-enumeration-max-abs-diff", worst_enum, ORACLE_TOL))
    return out


def _analyze(ctx: _Context) -> Outcome:
    cs = ctx.credal()
    runs = ctx.list_param("runs", [])
    paths = [read_run_csv(Path(p), credal_id=cs.fingerprint) for p in runs]
    n = min(len(p) for p in paths)
    tol = default_tolerances(cs)
    criterion = ctx.str_param("criterion", "containment")
    out = Outcome(metadata={"criterion": criterion, "runs": [str(p) for p in runs]})

    if criterion == "containment":
        eps = ctx.float_param("eps", tol.containment)
        n0 = ctx.int_param("n0", default_n0(n))
        rate = violation_rate(paths, cs.mu_lower, cs.mu_upper, eps, n0)
        out.verdicts.append(at_most("violation-rate", rate, 0.01))
        out.metadata.update(eps=eps, n0=n0)
    elif criterion == "cluster":
        eps = ctx.float_param("eps", tol.cluster)
        n0 = ctx.int_param("n0", 64)
        targets = ctx.floats_param("targets", default_block_targets(cs))
        reports = [cluster_coverage(p, targets, n0, eps) for p in paths]
        out.metadata["distances"] = [[h.distance for h in rep.hits] for rep in reports]
        frac = sum(rep.all_hit for rep in reports) / len(reports)
        out.verdicts.append(at_least("all-targets-hit", frac, 0.95))
    elif criterion in ("final-mean-upper", "final-mean-lower"):
        upper = criterion.endswith("upper")
        mu = cs.mu_upper if upper else cs.mu_lower
        j = cs.upper_index if upper else cs.lower_index
        radius = ctx.float_param("eps", 4.0 * math.sqrt(_prior_variance(cs, j) / n) or IDENTITY_TOL)
        frac = final_mean_concentration(paths, mu, radius)
        out.verdicts.append(at_least(criterion, frac, 0.95))
        out.metadata["radius"] = radius
    else:
        raise ConfigError(f"unknown criterion {criterion!r}")

    n0 = default_n0(n)
    rows = []
    for name, p in zip(runs, paths):
        st = tail_stats(p, n0)
        rows.append([str(name), st.tail_inf, st.tail_sup, st.final_mean])
    ctx.write("analyze_runs.csv", ("run", "tail_inf", "tail_sup", "final_mean"), rows)
    return out


EXPERIMENTS: Dict[str, Callable[[_Context], Outcome]] = {
    "expect": _expect,
    "choquet": _choquet,
    "dp": _dp,
    "curve": _curve,
    "lemma4": _lemma4,
    "chebyshev": _chebyshev,
    "simulate": _simulate,
    "verify-slln-1": _verify_slln_1,
    "verify-slln-2": _verify_slln_2,
    "verify-slln-3": _verify_slln_3,
    "oracle-suite": _oracle_suite,
    "analyze": _analyze,
}


def run(
    config: ExperimentConfig, settings: Optional[Settings] = None, strict: bool = False
) -> ExperimentReport:
    """Run one experiment and write its series and report.json under out_dir.

    With strict=True a failed verdict raises VerdictFailedError (carrying the
    report) once everything is written.
    """
    handler = EXPERIMENTS.get(config.experiment)
    if handler is None:
        raise ConfigError(
            f"unknown experiment {config.experiment!r}; choose from {', '.join(EXPERIMENTS)}"
        )
    settings = settings or load_settings()
    ctx = _Context(config, settings)
    logger.info("running %s into %s", config.experiment, config.out_dir)
    start = time.perf_counter()
    outcome = handler(ctx)
    elapsed_ms = (time.perf_counter() - start) * 1000.0

    metadata = {"version": __version__, **outcome.metadata}
    if ctx._cs is not None:
        metadata["credal_id"] = ctx._cs.fingerprint
    report = ExperimentReport(
        config=config,
        verdicts=outcome.verdicts,
        series=ctx.series,
        generator=GENERATOR_NAME if ctx.stochastic else None,
        elapsed_ms=elapsed_ms,
        metadata=metadata,
    )
    write_json(config.out_dir / REPORT_NAME, report.to_dict())
    logger.info(
        "%s finished in %.0f ms: %d verdict(s), failed: %s",
        config.experiment, elapsed_ms, len(report.verdicts), report.failed or "none",
    )
    if strict and not report.passed:
        raise VerdictFailedError(report.failed, report)
    return report
