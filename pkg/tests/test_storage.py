import json

import numpy as np
import pytest

from credal_lln.credal import make_credal, make_pmf
from credal_lln.errors import ConfigError, EmptyPathError
from credal_lln.simulate import block_targets_policy, sample_path
from credal_lln.storage import (
    RUN_COLUMNS,
    fmt,
    load_config_json,
    load_credal,
    read_run_csv,
    save_credal,
    write_json,
    write_run_csv,
    write_series,
)


def test_load_credal(bern_pair_file, bern_pair):
    cs = load_credal(bern_pair_file)
    assert cs.fingerprint == bern_pair.fingerprint
    assert cs.mu_upper == pytest.approx(0.7)
    assert cs.mu_lower == pytest.approx(0.3)


def test_save_then_load_keeps_fingerprint(tmp_path, three_point):
    path = tmp_path / "nested" / "cs.json"
    save_credal(path, three_point)
    assert load_credal(path).fingerprint == three_point.fingerprint


@pytest.mark.parametrize(
    "doc",
    [
        {},
        {"priors": [{"values": [0, 1]}]},
        {"priors": [{"values": [0, 1], "probs": [0.5, 0.6]}]},
        {"priors": [{"values": [0, 1], "probs": [-0.1, 1.1]}]},
        {"priors": 3},
    ],
)
def test_load_credal_malformed(tmp_path, doc):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(ConfigError):
        load_credal(path)


def test_load_credal_not_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{priors: ", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_credal(path)


def test_load_credal_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_credal(tmp_path / "absent.json")


def test_load_config_json_requires_object(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config_json(path)
    path.write_text('{"seed": 3}', encoding="utf-8")
    assert load_config_json(path) == {"seed": 3}


def test_write_json_sorted(tmp_path):
    path = tmp_path / "out.json"
    write_json(path, {"b": 1, "a": [1, 2]})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("}\n")


def test_fmt():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(np.float64(1 / 3)) == "0.33333333333333331"
    assert fmt(7) == "7"
    assert fmt(np.int64(-2)) == "-2"
    assert fmt(True) == "1"
    assert fmt("blocks") == "blocks"


def test_write_series_reals_round_trip(tmp_path):
    values = [1 / 3, 2.0**-40, 1e300, -0.7]
    path = write_series(tmp_path / "s.csv", ["i", "v"], enumerate(values))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "i,v"
    assert [float(line.split(",")[1]) for line in lines[1:]] == values


def test_run_csv_round_trip(tmp_path, bern_pair):
    policy = block_targets_policy(bern_pair, [0.35, 0.65])
    path = sample_path(bern_pair, policy, 500, 17)
    out = write_run_csv(tmp_path / "run_0000.csv", path)
    header = out.read_text(encoding="utf-8").splitlines()[0]
    assert header == ",".join(RUN_COLUMNS)
    back = read_run_csv(out, seed=17, credal_id=bern_pair.fingerprint)
    np.testing.assert_array_equal(back.xs, path.xs)
    np.testing.assert_array_equal(back.policy_trace, path.policy_trace)
    assert back.seed == 17


def test_run_csv_missing_columns(tmp_path):
    path = tmp_path / "run.csv"
    path.write_text("step,x\n1,0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_run_csv(path)


def test_run_csv_bad_value(tmp_path):
    path = tmp_path / "run.csv"
    path.write_text("step,x,prior_index,running_mean\n1,zero,0,0\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_run_csv(path)


def test_run_csv_empty(tmp_path):
    path = tmp_path / "run.csv"
    path.write_text("step,x,prior_index,running_mean\n", encoding="utf-8")
    with pytest.raises(EmptyPathError):
        read_run_csv(path)


def test_run_csv_written_twice_is_identical(tmp_path):
    cs = make_credal([make_pmf([0, 1, 3], [0.2, 0.5, 0.3]), make_pmf([0, 1], [0.5, 0.5])])
    policy = block_targets_policy(cs, [1.0], mode="randomized")
    a = write_run_csv(tmp_path / "a.csv", sample_path(cs, policy, 300, 4))
    b = write_run_csv(tmp_path / "b.csv", sample_path(cs, policy, 300, 4))
    assert a.read_bytes() == b.read_bytes()
