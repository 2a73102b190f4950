import numpy as np
import pytest

from credal_lln.analyze import (
    block_increment_means,
    cluster_coverage,
    default_n0,
    default_tolerances,
    final_mean_concentration,
    running_averages,
    tail_stats,
    violation_rate,
)
from credal_lln.errors import BadWindowError, EmptyInputError, EmptyPathError
from credal_lln.data_models import SamplePath
from credal_lln.simulate import (
    block_targets_policy,
    constant_max,
    constant_min,
    simulate_replicates,
    stress_policies,
)


def _path(xs, seed=0):
    xs = np.asarray(xs, dtype=float)
    return SamplePath(xs, np.zeros(xs.shape[0], dtype=np.int64), seed, "test")


ALTERNATING = _path([1, 0] * 5)


def test_running_averages_small():
    np.testing.assert_allclose(running_averages(_path([1, 0, 1])), [1.0, 0.5, 2 / 3])


def test_running_averages_constant():
    np.testing.assert_allclose(running_averages(_path([1.4] * 50)), np.full(50, 1.4))


def test_running_averages_match_naive_means():
    rng = np.random.default_rng(5)
    xs = rng.normal(size=500)
    avgs = running_averages(_path(xs))
    for m in rng.integers(1, 501, size=25):
        assert avgs[m - 1] == pytest.approx(xs[:m].mean(), abs=1e-12)


def test_running_averages_empty():
    with pytest.raises(EmptyPathError):
        running_averages(_path([]))


def test_default_n0():
    assert default_n0(1) == 1
    assert default_n0(10) == 5
    assert default_n0(11) == 6


def test_tail_stats_alternating():
    stats = tail_stats(ALTERNATING, 5)
    assert stats.tail_sup == pytest.approx(0.6)
    assert stats.tail_inf == pytest.approx(0.5)
    assert stats.final_mean == pytest.approx(0.5)
    assert (stats.n0, stats.n) == (5, 10)


def test_tail_stats_full_window_is_final_mean():
    stats = tail_stats(ALTERNATING, 10)
    assert stats.tail_sup == stats.tail_inf == stats.final_mean


def test_tail_stats_window_monotone():
    rng = np.random.default_rng(3)
    path = _path(rng.integers(0, 2, size=400))
    wide, narrow = tail_stats(path, 10), tail_stats(path, 200)
    assert narrow.tail_sup <= wide.tail_sup
    assert narrow.tail_inf >= wide.tail_inf


@pytest.mark.parametrize("n0", [0, 11, -3])
def test_tail_stats_bad_window(n0):
    with pytest.raises(BadWindowError):
        tail_stats(ALTERNATING, n0)


def test_cluster_coverage_hits_final_mean():
    report = cluster_coverage(ALTERNATING, [0.5, 0.9], n0=5, eps=0.01)
    first, second = report.hits
    assert first.hit and first.distance == 0.0 and first.m == 6
    assert not second.hit
    assert not report.all_hit


def test_cluster_coverage_constant_path_misses_other_targets():
    path = _path([1.4] * 20)
    report = cluster_coverage(path, [0.0], n0=1, eps=0.5)
    assert report.hits[0].distance == pytest.approx(1.4)
    assert not report.all_hit


def test_cluster_coverage_rejects_bad_window():
    with pytest.raises(BadWindowError):
        cluster_coverage(ALTERNATING, [0.5], n0=10, eps=0.1)
    with pytest.raises(BadWindowError):
        cluster_coverage(ALTERNATING, [0.5], n0=1, eps=0.0)


def test_violation_rate_counts_exits():
    inside = _path([0.5] * 10)
    above = _path([0.9] * 10)
    assert violation_rate([inside, above], 0.3, 0.7, 0.05, 5) == 0.5
    assert violation_rate([above, inside], 0.3, 0.7, 0.05, 5) == 0.5
    assert violation_rate([inside, above], 0.3, 0.7, 10.0, 5) == 0.0


def test_violation_rate_rejects_empty_and_bad_eps():
    with pytest.raises(EmptyInputError):
        violation_rate([], 0.3, 0.7, 0.05, 1)
    with pytest.raises(BadWindowError):
        violation_rate([ALTERNATING], 0.3, 0.7, 0.0, 1)


def test_block_increment_means():
    path = _path([1, 0, 1, 1])
    np.testing.assert_allclose(block_increment_means(path, [1, 4]), [1.0, 2 / 3])


@pytest.mark.parametrize("boundaries", [[], [0, 2], [3, 2], [2, 5]])
def test_block_increment_means_rejects(boundaries):
    with pytest.raises(BadWindowError):
        block_increment_means(_path([1, 0, 1, 1]), boundaries)


def test_final_mean_concentration():
    paths = [_path([0.5] * 4), _path([0.6] * 4), _path([0.9] * 4)]
    assert final_mean_concentration(paths, 0.55, 0.06) == pytest.approx(2 / 3)
    with pytest.raises(EmptyInputError):
        final_mean_concentration([], 0.5, 0.1)


def test_default_tolerances(bern_pair, singleton, zero_one_masses):
    tol = default_tolerances(bern_pair)
    assert tol.containment == pytest.approx(0.05)
    assert tol.cluster == pytest.approx(0.02)
    tol = default_tolerances(singleton)
    assert (tol.containment, tol.cluster) == (0.05, 0.02)
    tol = default_tolerances(zero_one_masses)
    assert tol.containment == pytest.approx(0.125)
    assert tol.cluster == pytest.approx(0.05)


@pytest.mark.slow
def test_stress_policies_stay_inside_mean_interval(bern_pair):
    n = 4096
    for name, policy in stress_policies(bern_pair).items():
        paths = simulate_replicates(bern_pair, policy, n, 11, 100)
        rate = violation_rate(paths, bern_pair.mu_lower, bern_pair.mu_upper, 0.05, n // 2)
        assert rate <= 0.01, name


@pytest.mark.slow
def test_extreme_priors_reach_interval_ends(bern_pair):
    n = 4096
    radius = 4 * (0.21 / n) ** 0.5
    up = simulate_replicates(bern_pair, constant_max(), n, 5, 200)
    down = simulate_replicates(bern_pair, constant_min(), n, 6, 200)
    assert final_mean_concentration(up, bern_pair.mu_upper, radius) >= 0.99
    assert final_mean_concentration(down, bern_pair.mu_lower, radius) >= 0.99


@pytest.mark.slow
def test_block_policy_tail_spans_targets(bern_pair):
    targets = [0.35, 0.5, 0.65]
    policy = block_targets_policy(bern_pair, targets)
    path = simulate_replicates(bern_pair, policy, 2**15, 2, 1)[0]
    stats = tail_stats(path, 64)
    assert stats.tail_sup >= 0.65 - 0.02
    assert stats.tail_inf <= 0.35 + 0.02
