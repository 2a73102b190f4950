"""Finite-support distributions and credal sets.

Constructors validate their input and return immutable values from
data_models; every downstream module works from these.
"""

from __future__ import annotations

import itertools
import logging
import math
from typing import Callable, Iterable, Iterator, List, Sequence

from .config import (
    MAX_EVENT_ENUMERATION_SUPPORT,
    PROB_INPUT_TOL,
    SUPPORT_MERGE_TOL,
)
from .data_models import CredalSet, Event, FinitePmf
from .errors import (
    DuplicateValueError,
    EmptyCredalSetError,
    EventOutsideSupportError,
    LengthMismatchError,
    NegativeProbError,
    NonFiniteFunctionValueError,
    NonFiniteValueError,
    NotNormalizedError,
)

logger = logging.getLogger("credal_lln.credal")


def make_pmf(values: Sequence[float], probs: Sequence[float]) -> FinitePmf:
    """Build a FinitePmf, sorting atoms by value.

    Probabilities are renormalized when their sum is within PROB_INPUT_TOL
    of one; anything further off is rejected.
    """
    if len(values) != len(probs):
        raise LengthMismatchError(f"{len(values)} values but {len(probs)} probs")
    if not values:
        raise LengthMismatchError("a pmf needs at least one atom")
    vals = [float(v) for v in values]
    ps = [float(p) for p in probs]
    for v in vals:
        if not math.isfinite(v):
            raise NonFiniteValueError(f"support value {v!r} is not finite")
    for p in ps:
        if not p >= 0.0 or not math.isfinite(p):
            raise NegativeProbError(f"probability {p!r} is negative or not a number")

    atoms = sorted(zip(vals, ps))
    for (a, _), (b, _) in zip(atoms, atoms[1:]):
        if b - a <= SUPPORT_MERGE_TOL:
            raise DuplicateValueError(f"support values {a!r} and {b!r} coincide")

    total = math.fsum(ps)
    if abs(total - 1.0) > PROB_INPUT_TOL:
        raise NotNormalizedError(f"probabilities sum to {total!r}")
    return FinitePmf(
        values=tuple(v for v, _ in atoms),
        probs=tuple(p / total for _, p in atoms),
    )


def point_mass(value: float) -> FinitePmf:
    return make_pmf([value], [1.0])


def bernoulli(p: float) -> FinitePmf:
    return make_pmf([0.0, 1.0], [1.0 - p, p])


def pmf_expectation(p: FinitePmf, f: Callable[[float], float]) -> float:
    """Exact E_P[f] = sum f(x_i) p_i."""
    terms = []
    for x, w in zip(p.values, p.probs):
        fx = float(f(x))
        if not math.isfinite(fx):
            raise NonFiniteFunctionValueError(x, fx)
        terms.append(fx * w)
    return math.fsum(terms)


def _merge_support(priors: Iterable[FinitePmf]) -> List[float]:
    # values closer than the tolerance collapse onto the smaller one
    merged: List[float] = []
    for v in sorted(v for p in priors for v in p.values):
        if not merged or v - merged[-1] > SUPPORT_MERGE_TOL:
            merged.append(v)
    return merged


def _locate(support: Sequence[float], x: float) -> int | None:
    lo, hi = 0, len(support)
    while lo < hi:
        mid = (lo + hi) // 2
        if support[mid] < x - SUPPORT_MERGE_TOL:
            lo = mid + 1
        else:
            hi = mid
    if lo < len(support) and abs(support[lo] - x) <= SUPPORT_MERGE_TOL:
        return lo
    return None


def make_credal(priors: Sequence[FinitePmf]) -> CredalSet:
    if not priors:
        raise EmptyCredalSetError("a credal set needs at least one prior")
    priors = tuple(priors)
    support = _merge_support(priors)
    index = tuple(tuple(_locate(support, v) for v in p.values) for p in priors)
    means = [p.mean for p in priors]
    cs = CredalSet(
        priors=priors,
        union_support=tuple(support),
        mu_upper=max(means),
        mu_lower=min(means),
        support_index=index,
    )
    logger.debug(
        "credal set %s: %d priors, %d support points, mu in [%r, %r]",
        cs.fingerprint, len(priors), len(support), cs.mu_lower, cs.mu_upper,
    )
    return cs


def make_event(cs: CredalSet, members: Iterable[float]) -> Event:
    """Build an Event, snapping each member onto the union support."""
    snapped = set()
    for x in members:
        i = _locate(cs.union_support, float(x))
        if i is None:
            raise EventOutsideSupportError(f"{x!r} is not in the support {cs.union_support}")
        snapped.add(cs.union_support[i])
    return Event(frozenset(snapped))


def check_event(cs: CredalSet, event: Event) -> None:
    support = set(cs.union_support)
    outside = [x for x in event.members if x not in support]
    if outside:
        raise EventOutsideSupportError(f"{sorted(outside)} not in the support {cs.union_support}")


def complement(cs: CredalSet, event: Event) -> Event:
    check_event(cs, event)
    return Event(frozenset(x for x in cs.union_support if x not in event.members))


def all_events(cs: CredalSet) -> Iterator[Event]:
    """Every subset of the union support, smallest first."""
    m = len(cs.union_support)
    if m > MAX_EVENT_ENUMERATION_SUPPORT:
        raise ValueError(f"refusing to enumerate 2**{m} events")
    for r in range(m + 1):
        for combo in itertools.combinations(cs.union_support, r):
            yield Event(frozenset(combo))
