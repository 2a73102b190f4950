import json

import pytest

from credal_lln.data_models import ExperimentConfig
from credal_lln.errors import ConfigError, VerdictFailedError
from credal_lln.experiments import run
from credal_lln.main import EXIT_ERROR, EXIT_FAILED, EXIT_OK, main

REPORT_KEYS = {"config", "verdicts", "series", "generator", "elapsed_ms", "metadata"}


def _report(out):
    return json.loads((out / "report.json").read_text(encoding="utf-8"))


@pytest.fixture
def singleton_file(credal_file):
    return credal_file([{"values": [0, 1, 3], "probs": [0.2, 0.5, 0.3]}], name="singleton.json")


def test_expect_singleton(tmp_path, singleton_file):
    out = tmp_path / "out"
    assert main(["expect", "--credal", str(singleton_file), "--out", str(out)]) == EXIT_OK
    report = _report(out)
    assert set(report) == REPORT_KEYS
    assert report["generator"] is None
    assert report["metadata"]["upper"] == pytest.approx(1.4)
    assert report["metadata"]["lower"] == pytest.approx(1.4)
    assert report["series"] == ["expect_priors.csv", "expect_capacities.csv"]
    assert all(v["pass"] for v in report["verdicts"])


def test_expect_with_event_checks_factorization(tmp_path, bern_pair_file):
    out = tmp_path / "out"
    code = main(["expect", "--credal", str(bern_pair_file), "--out", str(out), "--event", "1"])
    assert code == EXIT_OK
    names = [v["criterion"] for v in _report(out)["verdicts"]]
    assert "capacity-factorization" in names
    assert "capacity-duality" in names


@pytest.mark.parametrize(
    "argv",
    [
        ["choquet"],
        ["dp", "--n", "4"],
        ["curve"],
        ["lemma4", "--m", "15"],
        ["chebyshev", "--eps", "0.1", "--m", "15"],
    ],
)
def test_exact_experiments_pass(tmp_path, bern_pair_file, argv):
    out = tmp_path / "out"
    assert main(argv + ["--credal", str(bern_pair_file), "--out", str(out)]) == EXIT_OK
    report = _report(out)
    assert report["verdicts"]
    for name in report["series"]:
        assert (out / name).is_file()


def test_dp_includes_oracle_match_for_small_n(tmp_path, bern_pair_file):
    out = tmp_path / "out"
    main(["dp", "--n", "4", "--credal", str(bern_pair_file), "--out", str(out)])
    report = _report(out)
    assert "oracle-match" in [v["criterion"] for v in report["verdicts"]]
    assert report["metadata"]["upper"] == pytest.approx(2.8)
    assert report["metadata"]["lower"] == pytest.approx(1.2)


def test_failed_verdict_exits_2(tmp_path, bern_pair_file):
    out = tmp_path / "out"
    code = main(["curve", "--eps", "1e-12", "--credal", str(bern_pair_file), "--out", str(out)])
    assert code == EXIT_FAILED
    failed = [v["criterion"] for v in _report(out)["verdicts"] if not v["pass"]]
    assert failed == ["curve-error-at-n=256"]


def test_unknown_experiment(tmp_path, bern_pair_file):
    assert main(["nonsense", "--credal", str(bern_pair_file), "--out", str(tmp_path)]) == EXIT_ERROR


def test_simulate_needs_seed(tmp_path, bern_pair_file):
    assert main(["simulate", "--credal", str(bern_pair_file), "--out", str(tmp_path)]) == EXIT_ERROR


def test_missing_credal(tmp_path):
    assert main(["expect", "--out", str(tmp_path)]) == EXIT_ERROR
    assert main(["expect", "--credal", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == EXIT_ERROR


def test_lattice_overflow_is_an_error(tmp_path, bern_pair_file, monkeypatch):
    monkeypatch.setenv("CREDAL_LLN_LATTICE_CAP", "10")
    code = main(["dp", "--n", "30", "--credal", str(bern_pair_file), "--out", str(tmp_path)])
    assert code == EXIT_ERROR


def test_bad_argument_type_exits_1(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["simulate", "--n", "many"])
    assert info.value.code == EXIT_ERROR


def test_simulate_is_reproducible(tmp_path, bern_pair_file):
    argv = [
        "simulate", "--credal", str(bern_pair_file), "--seed", "42", "--n", "1500",
        "--replicates", "2", "--policy", "blocks:0.35,0.5,0.65", "--eps", "0.2",
    ]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--out", str(a)]) == EXIT_OK
    assert main(argv + ["--out", str(b)]) == EXIT_OK
    report = _report(a)
    assert report["generator"] == "numpy.random.Philox"
    assert report["metadata"]["replicate_seeds"] == [42, 43]
    assert "segments_0000.csv" in report["series"]
    for name in report["series"]:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_file_and_flag_precedence(tmp_path, bern_pair_file):
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps({
            "credal": bern_pair_file.name,
            "seed": 5,
            "parameters": {"n": 50, "eps": 0.3},
            "policy": "min",
        }),
        encoding="utf-8",
    )
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(config), "--n", "80", "--out", str(out)]) == EXIT_OK
    cfg = _report(out)["config"]
    assert cfg["seed"] == 5
    assert cfg["parameters"]["n"] == 80
    assert cfg["parameters"]["policy"] == "min"
    assert cfg["parameters"]["eps"] == 0.3
    assert len((out / "run_0000.csv").read_text(encoding="utf-8").splitlines()) == 81


def test_analyze_written_runs(tmp_path, bern_pair_file):
    sim = tmp_path / "sim"
    code = main([
        "simulate", "--credal", str(bern_pair_file), "--seed", "9", "--n", "1000",
        "--replicates", "3", "--policy", "max", "--eps", "0.2", "--out", str(sim),
    ])
    assert code == EXIT_OK
    runs = [str(sim / f"run_{r:04d}.csv") for r in range(3)]
    out = tmp_path / "analysis"
    code = main([
        "analyze", "--credal", str(bern_pair_file), "--criterion", "containment",
        "--eps", "0.2", "--out", str(out), "--runs", *runs,
    ])
    assert code == EXIT_OK
    assert _report(out)["series"] == ["analyze_runs.csv"]


def test_analyze_unknown_criterion(tmp_path, bern_pair_file):
    sim = tmp_path / "sim"
    main(["simulate", "--credal", str(bern_pair_file), "--seed", "1", "--n", "100",
          "--eps", "0.5", "--out", str(sim)])
    code = main([
        "analyze", "--credal", str(bern_pair_file), "--criterion", "median",
        "--out", str(tmp_path / "a"), "--runs", str(sim / "run_0000.csv"),
    ])
    assert code == EXIT_ERROR


def test_oracle_suite_small(tmp_path):
    out = tmp_path / "out"
    assert main(["oracle-suite", "--seed", "3", "--runs", "12", "--n", "3", "--out", str(out)]) == EXIT_OK
    report = _report(out)
    assert report["metadata"]["runs"] == 12
    assert report["verdicts"][0]["criterion"] == "oracle-max-abs-diff"
    lines = (out / "oracle_suite.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 13


@pytest.mark.slow
def test_verify_slln_1(tmp_path, bern_pair_file):
    code = main([
        "verify-slln-1", "--credal", str(bern_pair_file), "--seed", "42", "--n", "20000",
        "--replicates", "200", "--out", str(tmp_path),
    ])
    assert code == EXIT_OK
    assert _report(tmp_path)["metadata"]["n0"] == 10000


@pytest.mark.slow
def test_verify_slln_2(tmp_path, bern_pair_file):
    code = main([
        "verify-slln-2", "--credal", str(bern_pair_file), "--seed", "42", "--n", "20000",
        "--replicates", "200", "--out", str(tmp_path),
    ])
    assert code == EXIT_OK
    assert _report(tmp_path)["metadata"]["n0"] == 10000


@pytest.mark.slow
def test_verify_slln_3(tmp_path, bern_pair_file):
    code = main([
        "verify-slln-3", "--credal", str(bern_pair_file), "--seed", "42",
        "--replicates", "200", "--out", str(tmp_path),
    ])
    assert code == EXIT_OK
    report = _report(tmp_path)
    assert report["metadata"]["n"] == 2**15
    assert report["metadata"]["containment_n0"] == 64
    assert "slln3_block_means.csv" in report["series"]


def test_strict_run_raises_after_writing(tmp_path, bern_pair_file):
    config = ExperimentConfig(
        experiment="curve", credal=bern_pair_file, parameters={"eps": 1e-12}, out_dir=tmp_path
    )
    with pytest.raises(VerdictFailedError) as info:
        run(config, strict=True)
    assert info.value.failed == ["curve-error-at-n=256"]
    assert (tmp_path / "report.json").is_file()
    assert not run(config).passed


def _block_config(tmp_path, bern_pair_file, **parameters):
    return ExperimentConfig(
        experiment="verify-slln-3",
        credal=bern_pair_file,
        parameters={"n": 600, "replicates": 2, **parameters},
        out_dir=tmp_path,
        seed=3,
    )


def test_block_containment_starts_at_cluster_n0(tmp_path, bern_pair_file):
    meta = run(_block_config(tmp_path, bern_pair_file)).metadata
    assert meta["n0"] == 64
    assert meta["containment_n0"] == 64
    meta = run(_block_config(tmp_path, bern_pair_file, n0=100)).metadata
    assert meta["containment_n0"] == 100


@pytest.mark.parametrize("flag, expected", [("false", False), ("no", False), ("true", True), (False, False)])
def test_block_approach_flag_is_parsed(tmp_path, bern_pair_file, flag, expected):
    meta = run(_block_config(tmp_path, bern_pair_file, approach=flag)).metadata
    assert meta["policy"]["approach"] is expected


def test_block_approach_flag_rejects_junk(tmp_path, bern_pair_file):
    with pytest.raises(ConfigError):
        run(_block_config(tmp_path, bern_pair_file, approach="maybe"))
