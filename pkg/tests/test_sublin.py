import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credal_lln.credal import make_event
from credal_lln.data_models import Event
from credal_lln.sublin import (
    axioms_check,
    capacity_is_monotone,
    capacity_pair,
    choquet_integral_lower,
    choquet_integral_upper,
    choquet_two_tail,
    duality_gap,
    expectation_pair,
    increasing_chain_limit,
    lower_capacity,
    lower_expectation,
    upper_capacity,
    upper_expectation,
)

from strategies import credal_sets, events_of, functions_on

identity = lambda x: x  # noqa: E731


def test_upper_expectation_examples(bern_pair, singleton):
    assert upper_expectation(bern_pair, identity) == pytest.approx(0.7, abs=1e-15)
    assert upper_expectation(bern_pair, lambda x: -x) == pytest.approx(-0.3, abs=1e-15)
    p = singleton.priors[0]
    assert upper_expectation(singleton, lambda x: x * x) == pytest.approx(
        math.fsum(v * v * w for v, w in zip(p.values, p.probs))
    )


def test_lower_expectation_examples(bern_pair):
    assert lower_expectation(bern_pair, identity) == pytest.approx(0.3, abs=1e-15)
    assert lower_expectation(bern_pair, lambda x: 4.0) == 4.0
    assert lower_expectation(bern_pair, lambda x: (x - 0.5) ** 2) == pytest.approx(0.25, abs=1e-15)


def test_expectation_pair_gap(bern_pair):
    pair = expectation_pair(bern_pair, identity)
    assert pair.gap == pytest.approx(0.4)


def test_capacities_of_one(bern_pair):
    a = make_event(bern_pair, [1])
    assert upper_capacity(bern_pair, a) == pytest.approx(0.7)
    assert lower_capacity(bern_pair, a) == pytest.approx(0.3)


def test_capacities_of_empty_and_full(three_point):
    empty = Event(frozenset())
    full = Event(frozenset(three_point.union_support))
    assert capacity_pair(three_point, empty).upper == 0.0
    assert capacity_pair(three_point, empty).lower == 0.0
    assert capacity_pair(three_point, full).upper == 1.0
    assert capacity_pair(three_point, full).lower == 1.0


def test_choquet_bern_pair(bern_pair):
    assert choquet_integral_upper(bern_pair) == pytest.approx(0.7)
    assert choquet_integral_lower(bern_pair) == pytest.approx(0.3)


def test_choquet_singleton_is_expectation(singleton):
    mean = singleton.priors[0].mean
    assert choquet_integral_upper(singleton) == pytest.approx(mean, abs=1e-12)
    assert choquet_integral_lower(singleton) == pytest.approx(mean, abs=1e-12)


def test_choquet_three_point_sandwich(three_point):
    # both priors have mean 1.0; V(X >= 1) = 0.8, V(X >= 2) = 0.4
    assert upper_expectation(three_point, identity) == pytest.approx(1.0)
    assert choquet_integral_upper(three_point) == pytest.approx(1.2)
    assert upper_expectation(three_point, identity) <= choquet_integral_upper(three_point)
    assert choquet_integral_lower(three_point) <= lower_expectation(three_point, identity)


def test_two_tail_handles_negative_support():
    from credal_lln.credal import make_credal, make_pmf

    cs = make_credal([make_pmf([-2, 1, 3], [0.5, 0.25, 0.25]), make_pmf([-1, 3], [0.5, 0.5])])
    assert choquet_two_tail(cs, True) == pytest.approx(choquet_integral_upper(cs), abs=1e-12)
    assert choquet_two_tail(cs, False) == pytest.approx(choquet_integral_lower(cs), abs=1e-12)


def test_axioms_bern_examples(bern_pair):
    report = axioms_check(bern_pair, identity, lambda x: -x, 2.0, 3.0)
    assert report.all_hold
    assert upper_expectation(bern_pair, lambda x: x - x) == 0.0
    assert upper_expectation(bern_pair, identity) + upper_expectation(bern_pair, lambda x: -x) == pytest.approx(0.4)


def test_axioms_equal_functions_and_zero_lambda(three_point):
    f = lambda x: x * x - 1  # noqa: E731
    report = axioms_check(three_point, f, f, 0.0, -2.5)
    assert report.all_hold
    assert report.monotonicity and report.positive_homogeneity


def test_axioms_negative_lambda_rejected(bern_pair):
    with pytest.raises(ValueError):
        axioms_check(bern_pair, identity, identity, -1.0, 0.0)


def test_monotone_and_chain(three_point):
    a = make_event(three_point, [2])
    b = make_event(three_point, [1, 2])
    c = make_event(three_point, [0, 1, 2])
    assert capacity_is_monotone(three_point, a, b)
    values, union_value = increasing_chain_limit(three_point, [a, b, c])
    assert values == sorted(values)
    assert values[-1] == union_value == 1.0


@settings(max_examples=1000, deadline=None)
@given(st.data())
def test_axioms_and_duality_random(data):
    cs = data.draw(credal_sets())
    f = data.draw(functions_on(cs))
    g = data.draw(functions_on(cs))
    lam = data.draw(st.floats(min_value=0.0, max_value=10.0))
    c = data.draw(st.floats(min_value=-10.0, max_value=10.0))
    report = axioms_check(cs, f, g, lam, c)
    assert report.all_hold, report.failures
    event = data.draw(events_of(cs))
    assert abs(duality_gap(cs, event)) <= 1e-12
    pair = capacity_pair(cs, event)
    assert 0.0 <= pair.lower <= pair.upper <= 1.0


@settings(max_examples=1000, deadline=None)
@given(credal_sets())
def test_choquet_sandwich_random(cs):
    scale = max(1.0, max(abs(x) for x in cs.union_support))
    tol = 1e-12 * scale
    assert upper_expectation(cs, identity) <= choquet_integral_upper(cs) + tol
    assert choquet_integral_lower(cs) <= lower_expectation(cs, identity) + tol
    assert abs(choquet_integral_upper(cs) - choquet_two_tail(cs, True)) <= tol
    assert abs(choquet_integral_lower(cs) - choquet_two_tail(cs, False)) <= tol


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_capacity_monotone_random(data):
    cs = data.draw(credal_sets())
    a = data.draw(events_of(cs))
    extra = data.draw(events_of(cs))
    b = Event(a.members | extra.members)
    assert capacity_is_monotone(cs, a, b)


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_upper_capacity_is_subadditive(data):
    cs = data.draw(credal_sets())
    a = data.draw(events_of(cs))
    b = data.draw(events_of(cs))
    union = Event(a.members | b.members)
    assert upper_capacity(cs, union) <= upper_capacity(cs, a) + upper_capacity(cs, b) + 1e-12
    # lower capacity is super-additive on disjoint events
    only_b = Event(b.members - a.members)
    assert lower_capacity(cs, Event(a.members | only_b.members)) >= (
        lower_capacity(cs, a) + lower_capacity(cs, only_b) - 1e-12
    )
