"""Sub-linear expectation over a finite credal set.

Upper and lower (maximin) expectations, the capacity pair (V, v) and
Choquet integrals of the identity variable, all exact on finite support.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Sequence

import numpy as np

from .config import IDENTITY_TOL
from .credal import check_event, complement, pmf_expectation
from .data_models import CredalSet, Event, UpperLowerPair
from .errors import NonFiniteFunctionValueError

logger = logging.getLogger("credal_lln.sublin")

Func = Callable[[float], float]


def prior_expectations(cs: CredalSet, f: Func) -> List[float]:
    return [pmf_expectation(p, f) for p in cs.priors]


def upper_expectation(cs: CredalSet, f: Func) -> float:
    """E[f] = max over priors of E_P[f]."""
    return max(prior_expectations(cs, f))


def lower_expectation(cs: CredalSet, f: Func) -> float:
    """The conjugate -E[-f]."""
    return -upper_expectation(cs, lambda x: -f(x))


def expectation_pair(cs: CredalSet, f: Func) -> UpperLowerPair:
    return UpperLowerPair(upper=upper_expectation(cs, f), lower=lower_expectation(cs, f))


def _event_probs(cs: CredalSet, event: Event) -> List[float]:
    check_event(cs, event)
    out = []
    for pmf, idx in zip(cs.priors, cs.support_index):
        out.append(math.fsum(
            w for i, w in zip(idx, pmf.probs) if cs.union_support[i] in event.members
        ))
    return out


def upper_capacity(cs: CredalSet, event: Event) -> float:
    """V(A) = max over priors of P(A)."""
    return min(1.0, max(_event_probs(cs, event)))


def lower_capacity(cs: CredalSet, event: Event) -> float:
    """v(A) = min over priors of P(A)."""
    return max(0.0, min(_event_probs(cs, event)))


def capacity_pair(cs: CredalSet, event: Event) -> UpperLowerPair:
    probs = _event_probs(cs, event)
    return UpperLowerPair(upper=min(1.0, max(probs)), lower=max(0.0, min(probs)))


def duality_gap(cs: CredalSet, event: Event) -> float:
    """V(A) + v(A^c) - 1, zero up to rounding."""
    return upper_capacity(cs, event) + lower_capacity(cs, complement(cs, event)) - 1.0


def capacity_is_monotone(cs: CredalSet, a: Event, b: Event) -> bool:
    """A subset of B implies V(A) <= V(B) and v(A) <= v(B)."""
    if not a.members <= b.members:
        return True
    pa, pb = capacity_pair(cs, a), capacity_pair(cs, b)
    return pa.upper <= pb.upper + IDENTITY_TOL and pa.lower <= pb.lower + IDENTITY_TOL


def increasing_chain_limit(cs: CredalSet, chain: Sequence[Event]) -> tuple[List[float], float]:
    """V along an increasing chain of events, and V of its union."""
    values = [upper_capacity(cs, e) for e in chain]
    union = Event(frozenset().union(*(e.members for e in chain)))
    return values, upper_capacity(cs, union)


def _tail_capacities(cs: CredalSet, upper: bool) -> List[float]:
    """Cap(X >= x_(i)) for each sorted support point."""
    support = cs.union_support
    cap = upper_capacity if upper else lower_capacity
    return [cap(cs, Event(frozenset(support[i:]))) for i in range(len(support))]


def _choquet(cs: CredalSet, upper: bool) -> float:
    xs = cs.union_support
    caps = _tail_capacities(cs, upper)
    return xs[0] + math.fsum((xs[i] - xs[i - 1]) * caps[i] for i in range(1, len(xs)))


def choquet_integral_upper(cs: CredalSet) -> float:
    """C_V[X] of the identity variable, telescoping form."""
    return _choquet(cs, upper=True)


def choquet_integral_lower(cs: CredalSet) -> float:
    return _choquet(cs, upper=False)


def choquet_two_tail(cs: CredalSet, upper: bool = True) -> float:
    """Integral of Cap(X >= t) over t >= 0 plus Cap(X >= t) - 1 over t < 0.

    t -> Cap(X >= t) is a step function equal to 1 on (-inf, x_1], to
    Cap(X >= x_i) on (x_{i-1}, x_i] and to 0 past x_m, so both tails
    integrate exactly piece by piece.
    """
    xs = cs.union_support
    caps = _tail_capacities(cs, upper)
    pieces = [(-math.inf, xs[0], 1.0)]
    pieces += [(xs[i - 1], xs[i], caps[i]) for i in range(1, len(xs))]
    pieces.append((xs[-1], math.inf, 0.0))

    terms = []
    for a, b, c in pieces:
        if b > 0.0 and c != 0.0:
            terms.append(c * (b - max(a, 0.0)))
        if a < 0.0 and c != 1.0:
            terms.append((c - 1.0) * (min(b, 0.0) - a))
    return math.fsum(terms)


@dataclass
class AxiomReport:
    monotonicity: bool
    constant_preserving: bool
    sub_additivity: bool
    positive_homogeneity: bool
    failures: List[str] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return not self.failures


def _values_on_support(cs: CredalSet, f: Func) -> np.ndarray:
    out = np.empty(len(cs.union_support))
    for i, x in enumerate(cs.union_support):
        fx = float(f(x))
        if not math.isfinite(fx):
            raise NonFiniteFunctionValueError(x, fx)
        out[i] = fx
    return out


def axioms_check(cs: CredalSet, f: Func, g: Func, lam: float, c: float) -> AxiomReport:
    """Check the four sub-linear expectation axioms on one draw.

    Falsified identities are listed in the report rather than raised.
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam!r}")
    fv = _values_on_support(cs, f)
    gv = _values_on_support(cs, g)
    scale = max(1.0, float(np.abs(fv).max()), float(np.abs(gv).max()), abs(c), abs(lam))
    tol = IDENTITY_TOL * scale * max(1.0, abs(lam))

    ef = upper_expectation(cs, f)
    eg = upper_expectation(cs, g)
    failures = []

    mono = True
    if np.all(fv >= gv):
        mono = ef >= eg - tol
        if not mono:
            failures.append(f"monotonicity: E[f]={ef!r} < E[g]={eg!r}")

    ec = upper_expectation(cs, lambda x: c)
    const = abs(ec - c) <= tol
    if not const:
        failures.append(f"constant preserving: E[c]={ec!r} != {c!r}")

    efg = upper_expectation(cs, lambda x: f(x) + g(x))
    sub = efg <= ef + eg + tol
    if not sub:
        failures.append(f"sub-additivity: E[f+g]={efg!r} > {ef + eg!r}")

    elf = upper_expectation(cs, lambda x: lam * f(x))
    homog = abs(elf - lam * ef) <= tol
    if not homog:
        failures.append(f"positive homogeneity: E[lf]={elf!r} != {lam * ef!r}")

    if failures:
        logger.debug("axiom check failures: %s", failures)
    return AxiomReport(mono, const, sub, homog, failures)
