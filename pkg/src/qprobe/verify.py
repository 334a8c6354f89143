"""Built-in verification suite: cross-checks between independent routes.

Each check exercises a different pair of computation paths (exact
superoperator machinery, closed forms, brute-force propagation, Monte
Carlo) and raises AssertionError on disagreement.  The quick level runs
in seconds; the full level adds the large cross-check grids and the
statistical Monte Carlo comparisons.
"""

from __future__ import annotations

import time

import numpy as np
from scipy.linalg import expm

from .closedform import ring_nbar_exp, ring_nsq_exp, ring_tsq_exp, tls_stats
from .intervals import ExponentialInterval, FixedInterval, GammaInterval
from .model import QuantumModel, build_ring, build_two_level, spectral_reduce
from .superop import (build_superops, detection_stats, fn_series,
                      universal_identity_check, zero_mode_census)
from .trajectory import run_bernoulli, run_per_realization


def stroboscopic_fn_direct(model: QuantumModel, tau0: float, n_max: int) -> np.ndarray:
    """Brute-force fixed-interval detection series by direct propagation.

    Iterates the wave function through alternating exact propagation
    (matrix exponential, no eigenbasis shortcuts) and projection, reading
    off the detection probability before each projection.  Serves as an
    oracle for the averaged series when the interval density is a point
    mass.
    """
    u = expm(-1j * tau0 * model.hamiltonian)
    phi = u @ model.psi_in
    out = np.empty(n_max)
    for n in range(n_max):
        amp = np.vdot(model.psi_d, phi)
        out[n] = abs(amp) ** 2
        phi = u @ (phi - amp * model.psi_d)
    return out


def _stats_for(model, dist, **kwargs):
    return detection_stats(build_superops(spectral_reduce(model), dist), dist, **kwargs)


def _check_tls_return_quantization():
    model = build_two_level(1.0)
    for dist in (FixedInterval(0.6), ExponentialInterval(0.6), GammaInterval(5.0, 0.6)):
        st = _stats_for(model, dist)
        assert abs(st.p_det - 1.0) < 1e-10, f"{dist}: p_det={st.p_det}"
        assert abs(st.n_mean - 2.0) < 1e-8, f"{dist}: n_mean={st.n_mean}"


def _check_pdet_equals_overlap_sum():
    cases = [
        build_ring(7, 1.0, 0, 0),
        build_ring(7, 1.0, 1, 0),
        build_ring(6, 1.0, 1, 0),     # dark overlap, p_det = 1/2
        build_ring(24, 1.0, 12, 0),   # antipodal, p_det = 1
    ]
    dist = ExponentialInterval(0.6)
    for model in cases:
        sd = spectral_reduce(model)
        st = detection_stats(build_superops(sd, dist), dist)
        assert abs(st.p_det - sd.p_init.sum()) < 1e-10, (
            f"{model.label}: p_det={st.p_det} vs sum q={sd.p_init.sum()}"
        )


def _check_universal_identities():
    models = [build_two_level(1.0), build_ring(5, 1.0, 1, 0),
              build_ring(6, 1.0, 1, 0), build_ring(8, 1.0, 4, 0)]
    dists = [FixedInterval(0.7), ExponentialInterval(0.6), GammaInterval(25.0, 0.6)]
    for model in models:
        sd = spectral_reduce(model)
        for dist in dists:
            report = universal_identity_check(build_superops(sd, dist), dist)
            assert report.passed, f"{model.label} / {dist}: {report}"


def _check_zero_modes():
    dist = ExponentialInterval(0.6)
    for model in (build_two_level(1.0), build_ring(7, 1.0, 1, 0), build_ring(8, 1.0, 0, 0)):
        sd = spectral_reduce(model)
        census = zero_mode_census(build_superops(sd, dist))
        n = sd.reduced_dim
        assert census.n_zero >= 2 * n - 1, f"{model.label}: {census}"
        assert census.n_nonzero <= (n - 1) ** 2, f"{model.label}: {census}"


def _check_tls_closedform_match():
    for dist in (ExponentialInterval(0.6), GammaInterval(5.0, 0.6), FixedInterval(0.6)):
        for problem, x_in in (("return", 0), ("arrival", 1)):
            cf = tls_stats(problem, dist, gamma=1.0)
            st = _stats_for(build_two_level(1.0, x_in=x_in, x_d=0), dist)
            for name in ("p_det", "n_mean", "n_sq", "t_mean", "t_sq"):
                a, b = getattr(cf, name), getattr(st, name)
                assert abs(a - b) <= 1e-8 * max(1.0, abs(a)), (
                    f"{problem}/{dist}: {name} closed={a} exact={b}"
                )


def _ring_closedform_case(L, x_d, gamma, mu):
    dist = ExponentialInterval(mu)
    st = _stats_for(build_ring(L, gamma, 0, x_d), dist)
    for got, want, name in (
        (st.n_mean, ring_nbar_exp(L, x_d, gamma, mu), "n_mean"),
        (st.n_sq, ring_nsq_exp(L, x_d, gamma, mu), "n_sq"),
        (st.t_sq, ring_tsq_exp(L, x_d, gamma, mu), "t_sq"),
    ):
        assert abs(got - want) <= 1e-6 * abs(want), (
            f"L={L} x_d={x_d} gamma={gamma} mu={mu}: {name} exact={got} closed={want}"
        )


def _check_ring_closedform_spot():
    for L, x_d in ((7, 0), (7, 2), (8, 3), (8, 4), (12, 6)):
        for gamma in (1.0, 1.3):
            _ring_closedform_case(L, x_d, gamma, 0.6)


def _check_stroboscopic_quick():
    for model in (build_two_level(1.0), build_ring(5, 1.0, 1, 0)):
        dist = FixedInterval(0.7)
        series = fn_series(build_superops(spectral_reduce(model), dist), 30)
        direct = stroboscopic_fn_direct(model, 0.7, 30)
        assert np.max(np.abs(series - direct)) < 1e-10, model.label


def _check_ring_closedform_grid():
    for L in range(3, 17):
        for x_d in range(0, L // 2 + 1):
            for mu in (0.4, 0.6, 1.0, 2.0):
                _ring_closedform_case(L, x_d, 1.0, mu)


def _check_stroboscopic_full():
    models = (build_two_level(1.0), build_ring(5, 1.0, 1, 0), build_ring(8, 1.0, 3, 0))
    for model in models:
        for tau0 in (0.3, 0.6, 1.1):
            dist = FixedInterval(tau0)
            series = fn_series(build_superops(spectral_reduce(model), dist), 50)
            direct = stroboscopic_fn_direct(model, tau0, 50)
            assert np.max(np.abs(series - direct)) < 1e-10, (model.label, tau0)


def _check_mc_fn_match():
    model = build_ring(6, 1.0, 1, 0)
    dist = ExponentialInterval(0.6)
    series = fn_series(build_superops(spectral_reduce(model), dist), 30)
    ens = run_per_realization(model, dist, n_real=10**5, n_cut=30, seed=73)
    dev = np.abs(ens.fn_mean - series) / np.maximum(ens.fn_stderr, 1e-300)
    assert dev.max() <= 4.0, f"max deviation {dev.max():.2f} sigma"


def _check_mc_bernoulli_match():
    model = build_two_level(1.0)
    dist = ExponentialInterval(0.6)
    series = fn_series(build_superops(spectral_reduce(model), dist), 20)
    ens = run_bernoulli(model, dist, n_real=10**5, seed=74, n_abort=2000)
    frac, se = ens.attempt_fn_estimate(20)
    dev = np.abs(frac - series) / np.maximum(se, 1e-300)
    assert dev.max() <= 4.0, f"max deviation {dev.max():.2f} sigma"


def _check_tls_mc_variance():
    model = build_two_level(1.0)
    dist = ExponentialInterval(0.6)
    target = tls_stats("return", dist, 1.0).nbar_var
    ens = run_per_realization(model, dist, n_real=10**6, n_cut=90, seed=75)
    s = ens.summary()
    dev = abs(s["nbar_var"] - target) / s["nbar_var_stderr"]
    assert dev <= 3.0, f"var {s['nbar_var']:.4f} vs {target:.4f}: {dev:.2f} sigma"


CHECKS = [
    ("tls-return-quantization", "quick", _check_tls_return_quantization),
    ("pdet-equals-overlap-sum", "quick", _check_pdet_equals_overlap_sum),
    ("universal-time-identities", "quick", _check_universal_identities),
    ("zero-mode-census", "quick", _check_zero_modes),
    ("tls-closedform-vs-exact", "quick", _check_tls_closedform_match),
    ("ring-closedform-spot", "quick", _check_ring_closedform_spot),
    ("stroboscopic-oracle-quick", "quick", _check_stroboscopic_quick),
    ("ring-closedform-grid-3-16", "full", _check_ring_closedform_grid),
    ("stroboscopic-oracle-full", "full", _check_stroboscopic_full),
    ("mc-vs-exact-series", "full", _check_mc_fn_match),
    ("mc-bernoulli-vs-exact", "full", _check_mc_bernoulli_match),
    ("tls-mc-ensemble-variance", "full", _check_tls_mc_variance),
]


def run_verify(level: str = "quick", out=print) -> bool:
    """Run the verification suite; returns True when everything passes."""
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    wanted = ("quick",) if level == "quick" else ("quick", "full")
    all_ok = True
    for name, tier, fn in CHECKS:
        if tier not in wanted:
            continue
        start = time.perf_counter()
        try:
            fn()
        except AssertionError as exc:
            all_ok = False
            out(f"FAIL {name}: {exc}")
        else:
            out(f"PASS {name} ({time.perf_counter() - start:.2f}s)")
    return all_ok
