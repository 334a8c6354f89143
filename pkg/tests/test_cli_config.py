"""Configuration parsing and command-line behavior tests."""

import csv
import io
import json

import numpy as np
import pytest

from qprobe import cli
from qprobe.config import (distribution_from_config, merge_overrides,
                           model_from_config, parse_kv_text, seed_from_config)
from qprobe.errors import ConfigError
from qprobe.intervals import ExponentialInterval, FixedInterval, GammaInterval
from qprobe.model import build_ring, spectral_reduce
from qprobe.superop import build_superops, fn_series

TLS_DENSE = """\
# symmetric two-level model, single-bond coupling 1
kind=dense
n=2
hamiltonian=0,0,-1,0,-1,0,0,0
x_in=0
x_d=0
"""


def test_parse_kv_text_comments_and_blanks():
    cfg = parse_kv_text("# header\n\na=1\nb = two # trailing\n")
    assert cfg == {"a": "1", "b": "two"}
    with pytest.raises(ConfigError):
        parse_kv_text("not-a-pair\n")


def test_ring_model_from_config():
    cfg = {"kind": "ring", "L": "7", "gamma": "1.0", "x_in": "1", "x_d": "0"}
    model = model_from_config(cfg)
    assert model.dim == 7
    assert model.psi_in[1] == 1.0
    with pytest.raises(ConfigError):
        model_from_config({"kind": "ring", "L": "7", "gamma": "1.0", "x_in": "1"})
    with pytest.raises(ConfigError):
        model_from_config({"kind": "hexagon"})


def test_dense_model_from_config_interleaved():
    cfg = parse_kv_text(TLS_DENSE)
    model = model_from_config(cfg)
    assert np.allclose(model.hamiltonian, [[0, -1], [-1, 0]])
    # explicit state vectors, real/imag interleaved
    cfg["psi_in"] = "0,0,1,0"
    cfg["psi_d"] = "1,0,0,0"
    model = model_from_config(cfg)
    assert model.psi_in[1] == 1.0 and model.psi_d[0] == 1.0
    cfg["hamiltonian"] = "1,2,3"
    with pytest.raises(ConfigError):
        model_from_config(cfg)


def test_distribution_from_config():
    assert isinstance(distribution_from_config({"dist": "fixed", "tau": "0.7"}),
                      FixedInterval)
    assert isinstance(distribution_from_config({"dist": "exp", "mean": "0.6"}),
                      ExponentialInterval)
    g = distribution_from_config({"dist": "gamma", "alpha": "5", "mean": "0.6"})
    assert isinstance(g, GammaInterval) and g.alpha == 5.0
    with pytest.raises(ConfigError):
        distribution_from_config({"dist": "weibull"})
    with pytest.raises(ConfigError):
        distribution_from_config({"dist": "exp", "mean": "-1"})
    with pytest.raises(ConfigError):
        distribution_from_config({})


def test_seed_and_overrides():
    assert seed_from_config({"seed": "42"}) == 42
    assert seed_from_config({}, default=7) == 7
    with pytest.raises(ConfigError):
        seed_from_config({"seed": "-1"})
    merged = merge_overrides({"mean": "0.6", "L": "7"}, {"mean": 0.9, "alpha": None})
    assert merged == {"mean": "0.9", "L": "7"}


def test_cli_stats_l24(capsys):
    rc = cli.main(["stats", "--L", "24", "--gamma", "1", "--xin", "12",
                   "--xd", "0", "--dist", "exp", "--mean", "0.6"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["reduced_dim"] == 13
    assert doc["stats"]["n_mean"] == pytest.approx(63.0, rel=1e-6)
    assert doc["stats"]["p_det"] == pytest.approx(1.0, abs=1e-9)
    assert doc["config"]["dist"] == "exp"
    assert doc["zero_modes"]["n_zero"] >= 25


def test_cli_stats_return_quantization(capsys):
    rc = cli.main(["stats", "--L", "7", "--gamma", "1", "--xin", "0",
                   "--xd", "0", "--dist", "exp", "--mean", "1.3"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["stats"]["n_mean"] == pytest.approx(4.0, abs=1e-8)
    assert doc["stats"]["p_det"] == pytest.approx(1.0, abs=1e-10)


def test_cli_stats_exceptional_interval_exits_one(tmp_path, capsys):
    cfg = tmp_path / "tls.cfg"
    cfg.write_text(TLS_DENSE + "dist=fixed\ntau=3.141592653589793\n")
    rc = cli.main(["stats", "--model", str(cfg)])
    captured = capsys.readouterr()
    assert rc == 1
    assert "ill-conditioned" in captured.err


def test_cli_flag_overrides_file(tmp_path, capsys):
    cfg = tmp_path / "ring.cfg"
    cfg.write_text("kind=ring\nL=7\ngamma=1\nx_in=0\nx_d=0\ndist=exp\nmean=0.6\n")
    rc = cli.main(["stats", "--model", str(cfg), "--mean", "0.9"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["config"]["mean"] == "0.9"


def test_cli_bad_config_exits_two(capsys):
    rc = cli.main(["stats", "--L", "7", "--gamma", "1", "--xin", "0", "--xd", "0"])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_cli_fn_csv_matches_library(capsys):
    rc = cli.main(["fn", "--L", "7", "--gamma", "1", "--xin", "1", "--xd", "0",
                   "--dist", "exp", "--mean", "0.6", "--nmax", "8"])
    assert rc == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["n", "fn"]
    got = np.array([float(r[1]) for r in rows[1:]])
    sd = spectral_reduce(build_ring(7, 1.0, 1, 0))
    dist = ExponentialInterval(0.6)
    expect = fn_series(build_superops(sd, dist), 8)
    assert np.allclose(got, expect, atol=1e-12)
    assert np.all(got >= 0.0)


def test_cli_sweep_monotone_decreasing_for_exponential(capsys):
    grid = ",".join(str(x) for x in np.round(np.arange(0.3, 2.01, 0.1), 3))
    rc = cli.main(["sweep", "--L", "7", "--gamma", "1", "--xin", "1", "--xd", "0",
                   "--dist", "exp", "--axis", "mean_tau", "--grid", grid,
                   "--outputs", "n_mean,p_det"])
    assert rc == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["mean_tau", "n_mean", "p_det", "status"]
    n_mean = np.array([float(r[1]) for r in rows[1:]])
    assert np.all(np.diff(n_mean) <= 0)
    assert all(r[3] == "ok" for r in rows[1:])


def test_cli_sweep_flags_exceptional_fixed_interval(capsys):
    rc = cli.main(["sweep", "--L", "7", "--gamma", "1", "--xin", "1", "--xd", "0",
                   "--dist", "fixed", "--axis", "mean_tau",
                   "--grid", "1.0,1.6526270926756665,2.0", "--outputs", "n_mean"])
    assert rc == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    status = [r[2] for r in rows[1:]]
    assert status[0] == "ok" and status[2] == "ok"
    assert status[1].startswith("ill-conditioned")
    assert rows[2][1] == ""     # no fabricated value on the flagged row


def test_cli_sweep_gamma_peaks_grow_with_alpha(capsys):
    grid = ",".join(str(x) for x in np.round(np.arange(1.5, 1.901, 0.025), 4))
    maxima = {}
    for alpha in (5, 25, 125):
        rc = cli.main(["sweep", "--L", "7", "--gamma", "1", "--xin", "1",
                       "--xd", "0", "--dist", "gamma", "--alpha", str(alpha),
                       "--mean", "0.6", "--axis", "mean_tau", "--grid", grid,
                       "--outputs", "n_mean"])
        assert rc == 0
        rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
        maxima[alpha] = max(float(r[1]) for r in rows[1:])
    assert maxima[5] < maxima[25] < maxima[125]


def test_cli_sweep_alpha_axis(capsys):
    rc = cli.main(["sweep", "--L", "5", "--gamma", "1", "--xin", "1", "--xd", "0",
                   "--dist", "gamma", "--mean", "0.6", "--axis", "alpha",
                   "--grid", "1,5,25", "--outputs", "n_mean,lambda_max"])
    assert rc == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["alpha", "n_mean", "lambda_max", "status"]
    assert len(rows) == 4
    lam = [float(r[2]) for r in rows[1:]]
    assert all(0 < x < 1 for x in lam)


def test_cli_sweep_grid_validation(capsys):
    rc = cli.main(["sweep", "--L", "5", "--gamma", "1", "--xin", "1", "--xd", "0",
                   "--dist", "exp", "--axis", "mean_tau", "--grid", "0.5,0.4"])
    assert rc == 2
    rc = cli.main(["sweep", "--L", "5", "--gamma", "1", "--xin", "1", "--xd", "0",
                   "--dist", "exp", "--axis", "alpha", "--grid", "1,2"])
    assert rc == 2


def test_cli_sweep_threads_env_same_result(capsys, monkeypatch):
    args = ["sweep", "--L", "7", "--gamma", "1", "--xin", "1", "--xd", "0",
            "--dist", "exp", "--axis", "mean_tau", "--grid", "0.4,0.6,0.8,1.0",
            "--outputs", "n_mean,t_mean"]
    assert cli.main(args) == 0
    serial = capsys.readouterr().out
    monkeypatch.setenv("QPROBE_THREADS", "3")
    assert cli.main(args) == 0
    threaded = capsys.readouterr().out
    assert serial == threaded


def test_cli_mc_deterministic_files(tmp_path, capsys):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["mc", "--L", "5", "--gamma", "1", "--xin", "1", "--xd", "0",
            "--dist", "exp", "--mean", "0.6", "--mode", "bernoulli",
            "--nreal", "3000", "--seed", "99", "--n-abort", "400"]
    assert cli.main(base + ["--out", str(out1)]) == 0
    summary1 = json.loads(capsys.readouterr().out)
    assert cli.main(base + ["--out", str(out2)]) == 0
    summary2 = json.loads(capsys.readouterr().out)
    assert out1.read_text() == out2.read_text()
    assert summary1 == summary2
    assert summary1["config"]["seed"] == "99"
    rows = list(csv.reader(io.StringIO(out1.read_text())))
    assert rows[0] == ["n", "t"]
    assert all(int(r[0]) >= 1 and float(r[1]) > 0 for r in rows[1:])


def test_cli_mc_censored_fraction(tmp_path, capsys):
    out = tmp_path / "c.csv"
    rc = cli.main(["mc", "--L", "6", "--gamma", "1", "--xin", "1", "--xd", "0",
                   "--dist", "exp", "--mean", "0.6", "--mode", "bernoulli",
                   "--nreal", "4000", "--seed", "11", "--n-abort", "300",
                   "--out", str(out)])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)["summary"]
    frac = summary["censored"] / summary["n_real"]
    assert abs(frac - 0.5) < 3 * np.sqrt(0.25 / 4000)


def test_cli_mc_per_realization_summary(tmp_path, capsys):
    out = tmp_path / "d.csv"
    rc = cli.main(["mc", "--L", "2", "--gamma", "0.5", "--xin", "0", "--xd", "0",
                   "--dist", "exp", "--mean", "0.6", "--mode", "per_realization",
                   "--nreal", "20000", "--ncut", "90", "--seed", "8",
                   "--out", str(out)])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)["summary"]
    assert abs(summary["nbar_mean"] - 2.0) <= 4 * summary["nbar_stderr"]
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["realization", "nbar"]
    assert len(rows) == 20001


def test_cli_verify_quick_in_process(capsys):
    assert cli.main(["verify", "--level", "quick"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
