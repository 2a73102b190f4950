import json

import pytest

from credal_lln.credal import bernoulli, make_credal, make_pmf, point_mass


@pytest.fixture
def bern_pair():
    """{Bern(0.3), Bern(0.7)}: mu_lower = 0.3, mu_upper = 0.7."""
    return make_credal([bernoulli(0.3), bernoulli(0.7)])


@pytest.fixture
def singleton():
    return make_credal([make_pmf([0.0, 1.0, 3.0], [0.2, 0.5, 0.3])])


@pytest.fixture
def three_point():
    return make_credal([
        make_pmf([0, 1, 2], [0.2, 0.6, 0.2]),
        make_pmf([0, 1, 2], [0.4, 0.2, 0.4]),
    ])


@pytest.fixture
def zero_one_masses():
    return make_credal([point_mass(0.0), point_mass(1.0)])


@pytest.fixture
def credal_file(tmp_path):
    """Write a credal-set JSON and return its path."""

    def write(priors, name="credal.json"):
        path = tmp_path / name
        path.write_text(json.dumps({"priors": priors}), encoding="utf-8")
        return path

    return write


@pytest.fixture
def bern_pair_file(credal_file):
    return credal_file([
        {"values": [0, 1], "probs": [0.7, 0.3]},
        {"values": [0, 1], "probs": [0.3, 0.7]},
    ])
