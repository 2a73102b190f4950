"""Named test functions and random instances.

`function_from_spec` turns the short names accepted on the command line
('identity', 'exp:0.5', 'indicator-ge:3', ...) into callables. The sum shapes
and the random credal-set generator feed the oracle suite.
"""

from __future__ import annotations

import math
from typing import Callable, Dict, List, Tuple

import numpy as np

from .credal import make_credal, make_pmf
from .data_models import CredalSet, FinitePmf
from .errors import ConfigError

Func = Callable[[float], float]
PathFunc = Callable[[Tuple[float, ...]], float]


def saturating_phi(eps: float = 0.1) -> Func:
    """1 - exp(-(x + eps)) on x >= -eps, zero below."""
    return lambda x: 1.0 - math.exp(-(x + eps)) if x >= -eps else 0.0


def triangular_bump(center: float = 0.5, half_width: float = 1.0) -> Func:
    return lambda x: max(0.0, 1.0 - abs(x - center) / half_width)


def decreasing_bounded() -> Func:
    """exp(-max(x, 0)): bounded, nonincreasing."""
    return lambda x: math.exp(-max(x, 0.0))


def weak_lln_functions(eps: float = 0.1) -> Dict[str, Func]:
    return {
        "phi": saturating_phi(eps),
        "bump": triangular_bump(),
        "decreasing": decreasing_bounded(),
    }


def _args(text: str, count: int, spec: str) -> List[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != count:
        raise ConfigError(f"function {spec!r} expects {count} argument(s)")
    try:
        return [float(p) for p in parts]
    except ValueError as e:
        raise ConfigError(f"bad argument in function {spec!r}") from e


def function_from_spec(spec: str) -> Func:
    """Parse 'identity', 'square', 'abs', 'neg', 'exp:l', 'indicator-ge:v',
    'indicator-le:v', 'indicator-eq:v', 'phi[:eps]', 'bump[:c,w]',
    'decreasing'.
    """
    name, _, arg = spec.strip().partition(":")
    if name == "identity":
        return lambda x: x
    if name == "square":
        return lambda x: x * x
    if name == "abs":
        return abs
    if name == "neg":
        return lambda x: -x
    if name == "exp":
        (lam,) = _args(arg, 1, spec)
        return lambda x: math.exp(lam * x)
    if name == "indicator-ge":
        (v,) = _args(arg, 1, spec)
        return lambda x: 1.0 if x >= v else 0.0
    if name == "indicator-le":
        (v,) = _args(arg, 1, spec)
        return lambda x: 1.0 if x <= v else 0.0
    if name == "indicator-eq":
        (v,) = _args(arg, 1, spec)
        return lambda x: 1.0 if abs(x - v) <= 1e-9 else 0.0
    if name == "phi":
        return saturating_phi(*_args(arg, 1, spec)) if arg else saturating_phi()
    if name == "bump":
        return triangular_bump(*_args(arg, 2, spec)) if arg else triangular_bump()
    if name == "decreasing":
        return decreasing_bounded()
    raise ConfigError(f"unknown function {spec!r}")


# --- oracle-suite instances -------------------------------------------------

def sum_shapes(n: int) -> Dict[str, Func]:
    """Ten functions g of S_n, smooth and discontinuous, bounded and not."""
    half = n / 2.0
    return {
        "sum": lambda s: s,
        "sum-squared": lambda s: s * s,
        "sum-ge-half": lambda s: 1.0 if s >= half else 0.0,
        "exp-neg-sum": lambda s: math.exp(-0.5 * s),
        "abs-centered": lambda s: abs(s - half),
        "sin": lambda s: math.sin(s),
        "positive-part": lambda s: max(s, 0.0),
        "cube": lambda s: s**3,
        "tanh": lambda s: math.tanh(s - half),
        "is-zero": lambda s: 1.0 if abs(s) <= 1e-9 else 0.0,
    }


def as_path_functional(g: Func) -> PathFunc:
    return lambda path: g(math.fsum(path))


def random_pmf_on(rng: np.random.Generator, support: List[float]) -> FinitePmf:
    probs = rng.dirichlet(np.ones(len(support)))
    return make_pmf(support, probs.tolist())


def random_credal(
    rng: np.random.Generator,
    max_priors: int = 3,
    max_support: int = 3,
    integer_support: bool = True,
    low: int = -2,
    high: int = 3,
) -> CredalSet:
    """A random credal set with at most `max_support` points in its union support.

    Integer atoms keep every partial sum exact. Each prior charges a random
    nonempty subset of the shared support.
    """
    m = int(rng.integers(1, max_support + 1))
    if integer_support:
        support = rng.choice(np.arange(low, high + 1), size=m, replace=False).tolist()
    else:
        support = list(set(np.round(rng.uniform(low, high, size=m), 6).tolist()))
    support = sorted(float(v) for v in support)
    priors = []
    for _ in range(int(rng.integers(1, max_priors + 1))):
        size = int(rng.integers(1, len(support) + 1))
        subset = sorted(rng.choice(support, size=size, replace=False).tolist())
        priors.append(random_pmf_on(rng, subset))
    return make_credal(priors)
