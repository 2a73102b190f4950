"""Exact Peng-IID expectations by backward induction.

Nature re-optimizes the prior at every step given the past, so the
sub-linear expectation of g(S_n) is the value of a finite-horizon
maximization over the reachable-sum lattice. A second, independent
evaluator works on the full history tree and serves as the oracle.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import (
    DEFAULT_LATTICE_CAP,
    GRID_CHUNK,
    GRID_STEP,
    IDENTITY_TOL,
    LATTICE_MERGE_TOL,
    ORACLE_MAX_EVALUATIONS,
    ORACLE_MAX_STEPS,
)
from .credal import check_event
from .data_models import CredalSet, Event
from .errors import LatticeOverflowError, NonFiniteFunctionValueError, OracleTooLargeError
from .sublin import lower_capacity, upper_capacity

logger = logging.getLogger("credal_lln.pengdp")

PathFunc = Callable[[Tuple[float, ...]], float]


# --- sum lattice -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SumLattice:
    """Reachable values of S_k for k = 0..n, each sorted and deduplicated."""
    reachable: Tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return len(self.reachable) - 1

    def size(self, k: int) -> int:
        return int(self.reachable[k].shape[0])

    def locate(self, k: int, sums: np.ndarray) -> np.ndarray:
        """Index of the nearest lattice state at step k for each sum."""
        level = self.reachable[k]
        if level.shape[0] == 1:
            return np.zeros(np.shape(sums), dtype=np.int64)
        idx = np.clip(np.searchsorted(level, sums), 1, level.shape[0] - 1)
        left = level[idx - 1]
        right = level[idx]
        return np.where(np.abs(sums - left) <= np.abs(right - sums), idx - 1, idx)


def build_sum_lattice(cs: CredalSet, n: int, cap: Optional[int] = None) -> SumLattice:
    cap = DEFAULT_LATTICE_CAP if cap is None else cap
    support = np.asarray(cs.union_support, dtype=float)
    levels = [np.zeros(1)]
    for k in range(1, n + 1):
        sums = np.add.outer(levels[-1], support).ravel()
        sums.sort()
        keep = np.empty(sums.shape[0], dtype=bool)
        keep[0] = True
        # chains of near-equal sums merge onto their smallest member
        keep[1:] = np.diff(sums) > LATTICE_MERGE_TOL
        level = sums[keep]
        if level.shape[0] > cap:
            raise LatticeOverflowError(k, int(level.shape[0]), cap)
        levels.append(level)
    logger.debug("sum lattice n=%d: %d states at the last step", n, levels[-1].shape[0])
    return SumLattice(tuple(levels))


# --- backward induction ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class PengDpSolution:
    """Value of E[g(S_n)] with the optimal prior per (step, state)."""
    value: float
    lattice: SumLattice
    decisions: Tuple[np.ndarray, ...]  # decisions[k][i]: prior index at step k+1 from state i
    maximize: bool = True

    def decision(self, k: int, running_sum: float) -> int:
        """Prior chosen for X_{k+1} once S_k = running_sum."""
        i = self.lattice.locate(k, np.asarray([running_sum]))[0]
        return int(self.decisions[k][i])


def _terminal_values(level: np.ndarray, g: Callable[[float], float]) -> np.ndarray:
    out = np.empty(level.shape[0])
    for i, s in enumerate(level.tolist()):
        gs = float(g(s))
        if not math.isfinite(gs):
            raise NonFiniteFunctionValueError(s, gs)
        out[i] = gs
    return out


def solve_peng_dp(
    cs: CredalSet,
    n: int,
    g: Callable[[float], float],
    cap: Optional[int] = None,
    maximize: bool = True,
) -> PengDpSolution:
    """Backward induction v_n(s) = g(s), v_k(s) = opt_P sum_i P(x_i) v_{k+1}(s + x_i)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lattice = build_sum_lattice(cs, n, cap)
    support = np.asarray(cs.union_support, dtype=float)
    weights = cs.weights
    v = _terminal_values(lattice.reachable[n], g)
    decisions: List[np.ndarray] = [np.empty(0, dtype=np.int64)] * n
    for k in range(n - 1, -1, -1):
        level = lattice.reachable[k]
        nxt = lattice.locate(k + 1, level[:, None] + support[None, :])
        per_prior = v[nxt] @ weights.T
        choice = per_prior.argmax(axis=1) if maximize else per_prior.argmin(axis=1)
        decisions[k] = choice
        v = per_prior[np.arange(level.shape[0]), choice]
    return PengDpSolution(float(v[0]), lattice, tuple(decisions), maximize)


def peng_upper_sum(
    cs: CredalSet, n: int, g: Callable[[float], float], cap: Optional[int] = None
) -> float:
    """Sub-linear expectation E[g(S_n)] of a Peng-IID sum."""
    return solve_peng_dp(cs, n, g, cap).value


def peng_lower_sum(
    cs: CredalSet, n: int, g: Callable[[float], float], cap: Optional[int] = None
) -> float:
    return -peng_upper_sum(cs, n, lambda s: -g(s), cap)


# --- history tree ----------------------------------------------------------

@dataclass(frozen=True)
class StrategyTree:
    """Prior index chosen at every history node of depth < n."""
    n: int
    choices: Mapping[Tuple[float, ...], int]

    def __call__(self, history: Tuple[float, ...]) -> int:
        return self.choices[history]


@dataclass(frozen=True)
class OracleResult:
    upper: float
    lower: float
    upper_strategy: StrategyTree
    lower_strategy: StrategyTree


def _history_nodes(cs: CredalSet, n: int) -> List[Tuple[float, ...]]:
    nodes: List[Tuple[float, ...]] = []
    for k in range(n):
        nodes.extend(itertools.product(cs.union_support, repeat=k))
    return nodes


def _path_value(phi: PathFunc, path: Tuple[float, ...]) -> float:
    val = float(phi(path))
    if not math.isfinite(val):
        raise NonFiniteFunctionValueError(path[-1] if path else 0.0, val)
    return val


def _history_recursion(cs: CredalSet, n: int, phi: PathFunc, maximize: bool) -> Tuple[float, StrategyTree]:
    support = cs.union_support
    weights = cs.weights
    choices: Dict[Tuple[float, ...], int] = {}

    def node(prefix: Tuple[float, ...]) -> float:
        if len(prefix) == n:
            return _path_value(phi, prefix)
        child = np.array([node(prefix + (x,)) for x in support])
        per_prior = weights @ child
        j = int(per_prior.argmax() if maximize else per_prior.argmin())
        choices[prefix] = j
        return float(per_prior[j])

    value = node(())
    return value, StrategyTree(n, choices)


def _history_evaluations(cs: CredalSet, n: int) -> int:
    m, k = len(cs.union_support), len(cs.priors)
    return k * sum(m**d for d in range(1, n + 1))


def peng_upper_path(cs: CredalSet, n: int, phi: PathFunc) -> float:
    """E[phi(X_1, ..., X_n)] for a general path functional, on the history tree."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    evaluations = _history_evaluations(cs, n)
    if evaluations > ORACLE_MAX_EVALUATIONS:
        raise OracleTooLargeError(f"history tree needs {evaluations} evaluations")
    return _history_recursion(cs, n, phi, maximize=True)[0]


def brute_force_strategy_oracle(cs: CredalSet, n: int, phi: PathFunc) -> OracleResult:
    """Exact max and min over all strategy trees of E[phi(path)].

    The path expectation of a strategy tree splits over the subtrees below
    each node, so the best tree is found by choosing the best prior at every
    node of the full history tree. No lattice merging is involved.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > ORACLE_MAX_STEPS:
        raise OracleTooLargeError(f"oracle handles n <= {ORACLE_MAX_STEPS}, got {n}")
    evaluations = _history_evaluations(cs, n)
    if evaluations > ORACLE_MAX_EVALUATIONS:
        raise OracleTooLargeError(f"history tree needs {evaluations} evaluations")
    logger.debug("oracle n=%d: %d history evaluations", n, evaluations)
    upper, up_tree = _history_recursion(cs, n, phi, maximize=True)
    lower, low_tree = _history_recursion(cs, n, phi, maximize=False)
    return OracleResult(upper, lower, up_tree, low_tree)


def enumerate_strategy_trees(cs: CredalSet, n: int) -> Iterator[StrategyTree]:
    """Every history-dependent strategy, one tree at a time."""
    nodes = _history_nodes(cs, n)
    count = len(cs.priors) ** len(nodes)
    if count * len(cs.union_support) ** n > ORACLE_MAX_EVALUATIONS:
        raise OracleTooLargeError(f"{count} strategy trees is too many to enumerate")
    for assignment in itertools.product(range(len(cs.priors)), repeat=len(nodes)):
        yield StrategyTree(n, dict(zip(nodes, assignment)))


def strategy_tree_value(cs: CredalSet, tree: StrategyTree, phi: PathFunc) -> float:
    """Expectation of phi over paths when nature follows `tree`."""
    weights = cs.weights
    terms = []
    for idx in itertools.product(range(len(cs.union_support)), repeat=tree.n):
        path: Tuple[float, ...] = ()
        prob = 1.0
        for i in idx:
            prob *= weights[tree(path), i]
            path = path + (cs.union_support[i],)
        if prob > 0.0:
            terms.append(prob * _path_value(phi, path))
    return math.fsum(terms)


# --- independence checks ---------------------------------------------------

@dataclass(frozen=True)
class FactorizationReport:
    joint_upper: float
    product_upper: float
    joint_lower: float
    product_lower: float

    @property
    def upper_holds(self) -> bool:
        return abs(self.joint_upper - self.product_upper) <= IDENTITY_TOL

    @property
    def lower_holds(self) -> bool:
        return abs(self.joint_lower - self.product_lower) <= IDENTITY_TOL

    @property
    def holds(self) -> bool:
        return self.upper_holds and self.lower_holds


def sequence_capacity_factorization(cs: CredalSet, events: Sequence[Event]) -> FactorizationReport:
    """V(X_1 in A_1, ..., X_n in A_n) against the product of V(A_i), and v likewise."""
    if not events:
        raise ValueError("need at least one event")
    for e in events:
        check_event(cs, e)

    def indicator(path: Tuple[float, ...]) -> float:
        return 1.0 if all(x in e.members for x, e in zip(path, events)) else 0.0

    n = len(events)
    joint_upper = peng_upper_path(cs, n, indicator)
    joint_lower = -peng_upper_path(cs, n, lambda path: -indicator(path))
    return FactorizationReport(
        joint_upper=joint_upper,
        product_upper=math.prod(upper_capacity(cs, e) for e in events),
        joint_lower=joint_lower,
        product_lower=math.prod(lower_capacity(cs, e) for e in events),
    )


def joint_capacity_factorization(cs: CredalSet, d: Event, g: Event) -> FactorizationReport:
    """Pairwise independence of X_1 and X_2 under V and v."""
    return sequence_capacity_factorization(cs, [d, g])


# --- weak law of large numbers ----------------------------------------------

@dataclass(frozen=True)
class WeakLlnCurve:
    points: Tuple[Tuple[int, float], ...]
    target: float

    def error(self, n: int) -> float:
        return abs(dict(self.points)[n] - self.target)


def grid_sup(phi: Callable[[float], float], lo: float, hi: float, step: float = GRID_STEP) -> float:
    """sup of phi over [lo, hi] on a grid no coarser than `step`."""
    if hi - lo <= 0.0:
        return float(phi(lo))
    num = int(math.ceil((hi - lo) / step)) + 1
    width = hi - lo
    best = -math.inf
    for start in range(0, num, GRID_CHUNK):
        idx = np.arange(start, min(start + GRID_CHUNK, num), dtype=float)
        xs = lo + width * (idx / (num - 1))
        if start + idx.shape[0] == num:
            xs[-1] = hi
        best = max(best, max(float(phi(x)) for x in xs.tolist()))
    return best


def weak_lln_curve(
    cs: CredalSet,
    phi: Callable[[float], float],
    ns: Sequence[int],
    cap: Optional[int] = None,
) -> WeakLlnCurve:
    points = []
    for n in ns:
        value = peng_upper_sum(cs, n, lambda s, n=n: phi(s / n), cap)
        points.append((int(n), value))
        logger.debug("weak LLN n=%d: %r", n, value)
    return WeakLlnCurve(tuple(points), grid_sup(phi, cs.mu_lower, cs.mu_upper))


# --- exponential moment and Chebyshev step ---------------------------------

@dataclass(frozen=True)
class Lemma4Point:
    n: int
    lam: float
    log_value: float

    @property
    def value(self) -> float:
        return math.exp(self.log_value) if self.log_value < 709.0 else math.inf


def _log_step_factor(cs: CredalSet, lam: float) -> float:
    """log of max over priors of E_P[exp(lam (X - mu_upper))]."""
    best = -math.inf
    for pmf in cs.priors:
        x = np.asarray(pmf.values)
        p = np.asarray(pmf.probs)
        mask = p > 0
        log_mgf = float(np.logaddexp.reduce(np.log(p[mask]) + lam * (x[mask] - cs.mu_upper)))
        best = max(best, log_mgf)
    return best


def lemma4_product_bound(cs: CredalSet, m: float, ns: Sequence[int]) -> List[Lemma4Point]:
    """E[exp(lam_n (S_n - n mu_upper))] with lam_n = m log(1+n)/n.

    The per-step factors are positive, so the recursion splits into the
    n-th power of one factor; it is accumulated in log space.
    """
    if m <= 1:
        raise ValueError(f"m must be > 1, got {m!r}")
    out = []
    for n in ns:
        lam = m * math.log1p(n) / n
        out.append(Lemma4Point(int(n), lam, n * _log_step_factor(cs, lam)))
    return out


@dataclass(frozen=True)
class ChebyshevReport:
    n: int
    eps: float
    m: float
    lhs: float
    log_rhs: float

    @property
    def rhs(self) -> float:
        return math.exp(self.log_rhs) if self.log_rhs < 709.0 else math.inf

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def chebyshev_capacity_bound(
    cs: CredalSet, eps: float, m: float, n: int, cap: Optional[int] = None
) -> ChebyshevReport:
    """V(S_n/n >= mu_upper + eps) against (1+n)^(-eps m) times the exponential moment."""
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps!r}")
    if eps * m <= 1:
        logger.warning("eps*m = %r <= 1: the bound is not summable in n", eps * m)
    level = cs.mu_upper + eps
    lhs = peng_upper_sum(cs, n, lambda s: 1.0 if s / n >= level else 0.0, cap)
    log_moment = lemma4_product_bound(cs, m, [n])[0].log_value
    log_rhs = -eps * m * math.log1p(n) + log_moment
    return ChebyshevReport(n, eps, m, lhs, log_rhs)


def capacity_tail_series(
    cs: CredalSet, eps: float, ns: Sequence[int], cap: Optional[int] = None
) -> List[Tuple[int, float, float]]:
    """(n, V(S_n/n >= mu_upper + eps), running partial sum) over ns."""
    level = cs.mu_upper + eps
    total = 0.0
    out = []
    for n in ns:
        v = peng_upper_sum(cs, n, lambda s, n=n: 1.0 if s / n >= level else 0.0, cap)
        total += v
        out.append((int(n), v, total))
    return out


# --- exponential-moment constants -------------------------------------------

def exp_inequality_holds(x: float, alpha: float) -> bool:
    """e^x <= 1 + x + |x|^(1+alpha) e^(2|x|) for 0 < alpha <= 1."""
    rhs = 1.0 + x + abs(x) ** (1.0 + alpha) * math.exp(2.0 * abs(x))
    return math.exp(x) <= rhs * (1.0 + 4.0 * np.finfo(float).eps)


def exp_inequality_grid_check(
    alphas: Optional[Sequence[float]] = None,
    xs: Optional[Sequence[float]] = None,
) -> List[Tuple[float, float]]:
    """(x, alpha) pairs where the inequality fails; empty means it held."""
    alphas = np.linspace(0.05, 1.0, 20).tolist() if alphas is None else alphas
    xs = np.linspace(-10.0, 10.0, 2001).tolist() if xs is None else xs
    for a in alphas:
        if not 0.0 < a <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {a!r}")
    return [(x, a) for a in alphas for x in xs if not exp_inequality_holds(x, a)]


def _smallest_n(pred: Callable[[float], bool], lo: float) -> int:
    """Smallest integer n >= lo with pred(n), pred monotone on [lo, inf)."""
    n = max(1, int(math.ceil(lo)))
    if pred(n):
        return n
    hi = n
    while not pred(hi):
        n, hi = hi, hi * 2
    while hi - n > 1:
        mid = (n + hi) // 2
        if pred(mid):
            hi = mid
        else:
            n = mid
    return hi


def truncation_inactive_from(cs: CredalSet, c: float) -> int:
    """Smallest n with c n / log(1+n) > max |x - mu_upper|.

    Past this n the truncation of X_n at c n / log(1+n) cuts nothing off a
    bounded variable.
    """
    if c <= 0:
        raise ValueError(f"c must be > 0, got {c!r}")
    radius = cs.radius
    return _smallest_n(lambda n: c * n / math.log1p(n) > radius, 1)


def lemma4_threshold_n0(m: float, alpha: float) -> int:
    """Smallest n with n^alpha / log(1+n)^(1+alpha) >= m^(1+alpha)."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    target = (1.0 + alpha) * math.log(m)

    def h(n: float) -> float:
        return alpha * math.log(n) - (1.0 + alpha) * math.log(math.log1p(n))

    if h(1) >= target:
        return 1
    # h falls then rises; its minimum is where alpha (1+n) log(1+n) = (1+alpha) n
    lo, hi = 1.0, math.exp((1.0 + alpha) / alpha) + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if alpha * (1.0 + mid) * math.log1p(mid) < (1.0 + alpha) * mid:
            lo = mid
        else:
            hi = mid
    return _smallest_n(lambda n: h(n) >= target, hi)


@dataclass(frozen=True)
class Lemma4Bound:
    n: int
    L: float
    log_bound: float  # n log(1 + L e^{2cm} / n)
    log_limit: float  # L e^{2cm}


def lemma4_analytic_bound(cs: CredalSet, m: float, alpha: float, c: float, n: int) -> Lemma4Bound:
    """The closed-form majorant (1 + L e^{2cm}/n)^n of the exponential moment.

    L = max over priors of E_P |X - mu_upper|^(1+alpha). The majorant is
    valid once n reaches lemma4_threshold_n0(m, alpha).
    """
    L = max(
        math.fsum(p * abs(x - cs.mu_upper) ** (1.0 + alpha) for x, p in zip(pmf.values, pmf.probs))
        for pmf in cs.priors
    )
    k = L * math.exp(2.0 * c * m)
    return Lemma4Bound(n, L, n * math.log1p(k / n), k)
