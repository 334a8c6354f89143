"""Monte Carlo simulation of randomly timed projective probing.

This is the independent oracle for the exact machinery: it samples
explicit interval sequences and propagates wave functions in the full
Hilbert space (dark components included, so censoring and incomplete
detection happen naturally).  Propagation uses precomputed eigenphases,
which makes a probing step O(N) per realization, and realizations are
processed in vectorized chunks.

Two modes are available:

* ``bernoulli`` draws an actual detection outcome at every probe.  The
  post-measurement amplitude is never renormalized, so its squared norm
  tracks the survival probability and the Bernoulli probability is the
  conditional detection probability given survival.  Realizations that
  survive past the attempt cap are reported as censored.
* ``per_realization`` records the full deterministic detection
  probability profile F_1..F_n_cut of each sampled interval sequence,
  together with its mean attempt number nbar = sum(n F_n)/sum(F_n).
  Ensemble averages of F_n estimate the distribution-averaged series.

Reproducibility: realizations are split into fixed-size chunks and each
chunk gets its own counter-based generator spawned deterministically from
the seed, so results are bit-identical for a given seed no matter how
chunks would be scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .intervals import IntervalDistribution
from .model import QuantumModel

DEFAULT_CHUNK = 1 << 15
DEFAULT_ABORT = 10**6


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Outcome of a Monte Carlo run in either mode.

    Bernoulli mode fills ``attempts``/``times`` (detected realizations
    only) and ``censored``.  Per-realization mode fills ``nbar``/``pdet``
    per realization plus the ensemble mean and standard error of F_n;
    ``fn_records`` holds the full (n_real, n_cut) profile matrix when
    requested (test-scale runs only).
    """

    mode: str
    n_real: int
    seed: int
    n_abort: int | None = None
    n_cut: int | None = None
    attempts: np.ndarray | None = None
    times: np.ndarray | None = None
    censored: int = 0
    nbar: np.ndarray | None = None
    pdet: np.ndarray | None = None
    fn_mean: np.ndarray | None = None
    fn_stderr: np.ndarray | None = None
    fn_records: np.ndarray | None = None

    def attempt_fn_estimate(self, n_max: int):
        """Empirical <F_n> and binomial standard error from bernoulli records.

        The fraction of all realizations detected exactly at attempt n is
        an unbiased estimate of the averaged detection probability there.
        """
        if self.mode != "bernoulli":
            raise ValueError("attempt histogram is only defined for bernoulli mode")
        counts = np.bincount(self.attempts, minlength=n_max + 1)[1:n_max + 1]
        frac = counts / self.n_real
        se = np.sqrt(np.maximum(frac * (1.0 - frac), 1e-300) / self.n_real)
        return frac, se

    def summary(self) -> dict:
        """Scalar summary block for reporting."""
        out: dict = {"mode": self.mode, "n_real": self.n_real, "seed": self.seed}
        if self.mode == "bernoulli":
            n_det = len(self.attempts)
            out["detected"] = n_det
            out["censored"] = self.censored
            out["n_abort"] = self.n_abort
            if n_det > 1:
                out["n_mean"] = float(np.mean(self.attempts))
                out["n_var"] = float(np.var(self.attempts, ddof=1))
                out["n_stderr"] = float(np.sqrt(out["n_var"] / n_det))
                out["t_mean"] = float(np.mean(self.times))
                out["t_var"] = float(np.var(self.times, ddof=1))
                out["t_stderr"] = float(np.sqrt(out["t_var"] / n_det))
                out["p_det_estimate"] = n_det / self.n_real
        else:
            out["n_cut"] = self.n_cut
            out["nbar_mean"] = float(np.mean(self.nbar))
            out["nbar_var"] = float(np.var(self.nbar, ddof=1))
            dev = self.nbar - np.mean(self.nbar)
            out["nbar_stderr"] = float(np.sqrt(np.var(self.nbar, ddof=1) / self.n_real))
            out["nbar_var_stderr"] = float(
                np.sqrt(max(np.mean(dev**4) - np.var(self.nbar) ** 2, 0.0) / self.n_real)
            )
            out["pdet_mean"] = float(np.mean(self.pdet))
        return out


def _eigenphase_setup(model: QuantumModel):
    w, v = np.linalg.eigh(model.hamiltonian)
    coeff_in = v.conj().T @ model.psi_in
    coeff_d = v.conj().T @ model.psi_d
    return w, coeff_in, coeff_d


def _chunk_generators(seed: int, n_real: int, chunk: int):
    n_chunks = (n_real + chunk - 1) // chunk
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [chunk] * (n_chunks - 1) + [n_real - chunk * (n_chunks - 1)]
    return [(np.random.Generator(np.random.Philox(c)), m)
            for c, m in zip(children, sizes)]


def run_bernoulli(model: QuantumModel, dist: IntervalDistribution,
                  n_real: int, seed: int, n_abort: int = DEFAULT_ABORT,
                  chunk: int = DEFAULT_CHUNK) -> TrajectoryEnsemble:
    """Sample detection outcomes probe by probe.

    Records (attempt number, elapsed time) for every detected realization;
    realizations still undetected after ``n_abort`` probes are censored.
    Note the cost is proportional to the number of surviving realizations
    at each attempt, so models with dark overlap (detection probability
    below one) should use a moderate ``n_abort``.
    """
    if n_abort < 1:
        raise ValueError(f"n_abort must be >= 1, got {n_abort}")
    if n_real < 1:
        raise ValueError(f"n_real must be >= 1, got {n_real}")
    w, coeff_in, coeff_d = _eigenphase_setup(model)
    attempts_all, times_all = [], []
    censored = 0
    for rng, m in _chunk_generators(seed, n_real, chunk):
        c = np.tile(coeff_in, (m, 1))
        t_acc = np.zeros(m)
        n = 0
        while c.shape[0] and n < n_abort:
            n += 1
            tau = np.atleast_1d(dist.sample(rng, c.shape[0]))
            c *= np.exp(-1j * tau[:, None] * w[None, :])
            t_acc += tau
            amp = c @ coeff_d.conj()
            f = np.abs(amp) ** 2
            norm2 = np.einsum("ij,ij->i", c.conj(), c).real
            p_hit = f / np.maximum(norm2, 1e-300)
            hit = rng.random(c.shape[0]) < p_hit
            if np.any(hit):
                attempts_all.append(np.full(int(hit.sum()), n, dtype=np.int64))
                times_all.append(t_acc[hit])
            keep = ~hit
            c = c[keep] - amp[keep, None] * coeff_d[None, :]
            t_acc = t_acc[keep]
        censored += c.shape[0]
    attempts = np.concatenate(attempts_all) if attempts_all else np.empty(0, np.int64)
    times = np.concatenate(times_all) if times_all else np.empty(0)
    return TrajectoryEnsemble(
        mode="bernoulli", n_real=n_real, seed=seed, n_abort=n_abort,
        attempts=attempts, times=times, censored=censored,
    )


def run_per_realization(model: QuantumModel, dist: IntervalDistribution,
                        n_real: int, n_cut: int, seed: int,
                        keep_fn: bool = False,
                        chunk: int = DEFAULT_CHUNK) -> TrajectoryEnsemble:
    """Deterministic detection profile of each sampled interval sequence.

    Every realization is propagated for exactly ``n_cut`` probes without
    collapsing, recording F_n at each probe.  ``keep_fn`` stores the full
    profile matrix, which costs n_real * n_cut floats; leave it off for
    large ensembles.
    """
    if n_cut < 2:
        raise ValueError(f"n_cut must be >= 2, got {n_cut}")
    if n_real < 1:
        raise ValueError(f"n_real must be >= 1, got {n_real}")
    w, coeff_in, coeff_d = _eigenphase_setup(model)
    fn_sum = np.zeros(n_cut)
    fn_sq_sum = np.zeros(n_cut)
    nbar_all, pdet_all = [], []
    records = [] if keep_fn else None
    for rng, m in _chunk_generators(seed, n_real, chunk):
        c = np.tile(coeff_in, (m, 1))
        sum_f = np.zeros(m)
        sum_nf = np.zeros(m)
        rec = np.empty((m, n_cut)) if keep_fn else None
        for n in range(1, n_cut + 1):
            tau = np.atleast_1d(dist.sample(rng, m))
            c *= np.exp(-1j * tau[:, None] * w[None, :])
            amp = c @ coeff_d.conj()
            f = np.abs(amp) ** 2
            fn_sum[n - 1] += f.sum()
            fn_sq_sum[n - 1] += (f * f).sum()
            sum_f += f
            sum_nf += n * f
            if keep_fn:
                rec[:, n - 1] = f
            c -= amp[:, None] * coeff_d[None, :]
        nbar_all.append(sum_nf / sum_f)
        pdet_all.append(sum_f)
        if keep_fn:
            records.append(rec)
    fn_mean = fn_sum / n_real
    fn_var = np.maximum(fn_sq_sum / n_real - fn_mean**2, 0.0)
    return TrajectoryEnsemble(
        mode="per_realization", n_real=n_real, seed=seed, n_cut=n_cut,
        nbar=np.concatenate(nbar_all), pdet=np.concatenate(pdet_all),
        fn_mean=fn_mean, fn_stderr=np.sqrt(fn_var / n_real),
        fn_records=np.vstack(records) if keep_fn else None,
    )
