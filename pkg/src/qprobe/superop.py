"""Exact distribution-averaged detection statistics via Kronecker superoperators.

The probability of first detection at attempt n is a squared amplitude,
so averaging it over random probing intervals requires propagating pairs
of amplitudes.  Working in the reduced energy basis of dimension Nr,
every quantity becomes a trace over Nr^2 x Nr^2 matrices built from
Kronecker products.  Compound indices follow the convention
``(A (x) B)[(j,k),(l,m)] = A[j,l] * B[k,m]`` with the flat index
``j*Nr + k``, i.e. plain ``numpy.kron`` ordering.

Averaging over the intervals replaces each random evolution factor by a
diagonal matrix whose (j,k) entry is the characteristic function of the
waiting-time density at the energy difference E_j - E_k.  The averaged
series of detection probabilities is then generated by powers of a single
transfer matrix, and all of its moments reduce to geometric sums, i.e.
to linear solves against I - transfer.

Two structural facts keep everything cheap: the trace target is rank one
(so traces collapse to bilinear forms between a source vector and the
all-ones vector), and the transfer matrix inherits at least 2*Nr - 1 zero
modes from the measurement projection, leaving at most (Nr-1)^2 active
decay modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .errors import DegenerateProblemError, IllConditionedError
from .intervals import IntervalDistribution
from .model import SpectralData

DEFAULT_COND_LIMIT = 1e12
DEFAULT_ZERO_TOL = 1e-8
PINV_RTOL = 1e-10
UNIT_CIRCLE_TOL = 1e-9


@dataclass(frozen=True)
class SuperoperatorSet:
    """Superoperator ingredients for one (model, interval density) pair.

    ``phase_avg`` / ``phase_avg_t`` / ``phase_avg_tt`` are the diagonals
    (length Nr^2) of the interval-averaged pair propagator, weighted by
    tau^0, tau^1, tau^2.  ``proj_kron`` is the Kronecker square of the
    post-measurement survival map; ``source_vec`` the rank-one source
    conj(amp_j) * amp_k feeding every trace; ``transfer`` the one-attempt
    map diag(phase_avg) @ proj_kron and ``resolvent`` is I - transfer.
    """

    dim: int
    energies: np.ndarray
    phase_avg: np.ndarray
    phase_avg_t: np.ndarray
    phase_avg_tt: np.ndarray
    proj_kron: np.ndarray
    source_vec: np.ndarray
    transfer: np.ndarray
    resolvent: np.ndarray
    is_return: bool

    def __post_init__(self):
        for name in ("energies", "phase_avg", "phase_avg_t", "phase_avg_tt",
                     "proj_kron", "source_vec", "transfer", "resolvent"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class DetectionStatistics:
    """Conditional first-detection moments plus solver diagnostics."""

    p_det: float
    n_mean: float
    n_sq: float
    t_mean: float
    t_sq: float
    n_var: float
    t_var: float
    condition: float
    reduced_dim: int

    def as_dict(self) -> dict:
        return {
            "p_det": self.p_det,
            "n_mean": self.n_mean,
            "n_sq": self.n_sq,
            "t_mean": self.t_mean,
            "t_sq": self.t_sq,
            "n_var": self.n_var,
            "t_var": self.t_var,
            "condition": self.condition,
            "reduced_dim": self.reduced_dim,
        }


@dataclass(frozen=True)
class ZeroModeCensus:
    """Eigenvalue census of the transfer matrix."""

    n_zero: int
    n_nonzero: int
    slowest_decay: complex


@dataclass(frozen=True)
class IdentityReport:
    """Residuals of the universal moment identities."""

    is_return: bool
    t_residual: float
    t_sq_residual: float | None
    tolerance: float
    passed: bool


def build_superops(spec: SpectralData, dist: IntervalDistribution) -> SuperoperatorSet:
    """Assemble the averaged superoperators for one spectral problem."""
    e = spec.energies
    n = len(e)
    diff = e[:, None] - e[None, :]                    # E_j - E_k
    phase = np.asarray(dist.charfn(diff), dtype=complex).ravel()
    phase_t = np.asarray(dist.weighted_charfn(diff, 1), dtype=complex).ravel()
    phase_tt = np.asarray(dist.weighted_charfn(diff, 2), dtype=complex).ravel()
    # survival map: identity minus detection weights broadcast down columns
    surv = np.eye(n) - np.outer(spec.p_detect, np.ones(n))
    proj_kron = np.kron(surv, surv)
    source = (spec.cross_amp.conj()[:, None] * spec.cross_amp[None, :]).ravel()
    transfer = phase[:, None] * proj_kron
    resolvent = np.eye(n * n, dtype=complex) - transfer
    return SuperoperatorSet(
        dim=n,
        energies=e.copy(),
        phase_avg=phase,
        phase_avg_t=phase_t,
        phase_avg_tt=phase_tt,
        proj_kron=proj_kron,
        source_vec=source,
        transfer=transfer,
        resolvent=resolvent,
        is_return=spec.is_return_problem(),
    )


def fn_series(sset: SuperoperatorSet, n_max: int) -> np.ndarray:
    """Averaged detection probabilities <F_1> .. <F_n_max>.

    Iterates the transfer matrix against the rank-one source, so each
    step costs one dense matrix-vector product on the Nr^2 space.  The
    entries are real up to roundoff; the raw real parts are returned
    without clamping.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    v = sset.phase_avg * sset.source_vec
    out = np.empty(n_max)
    for i in range(n_max):
        out[i] = v.sum().real
        if i + 1 < n_max:
            v = sset.transfer @ v
    return out


class _ResolventSolver:
    """Linear solves against the resolvent with conditioning surveillance.

    Uses a partial-pivot LU factorization with one step of iterative
    refinement; the condition number is estimated from the factorization
    by the LAPACK reciprocal 1-norm estimator.  The optional pseudo-inverse
    mode replaces the solves by a truncated-SVD pseudo-inverse (relative
    singular-value cutoff 1e-10).
    """

    def __init__(self, sset: SuperoperatorSet, pseudo_inverse: bool = False):
        j = sset.resolvent
        self._j = j
        self._pinv = None
        self._lu = None
        if pseudo_inverse:
            u, s, vh = np.linalg.svd(j)
            keep = s > PINV_RTOL * s[0]
            self._pinv = (vh[keep].conj().T / s[keep]) @ u[:, keep].conj().T
            smin = s[-1]
            self.condition = float(s[0] / smin) if smin > 0 else np.inf
            return
        anorm = np.linalg.norm(j, 1)
        try:
            self._lu = lu_factor(j)
            rcond, info = lapack.zgecon(self._lu[0], anorm, norm="1")
            self.condition = float(1.0 / rcond) if (info == 0 and rcond > 0) else np.inf
        except np.linalg.LinAlgError:
            self.condition = np.inf

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self._pinv is not None:
            return self._pinv @ b
        x = lu_solve(self._lu, b)
        r = b - self._j @ x
        return x + lu_solve(self._lu, r)


def _unit_circle_pairs(sset: SuperoperatorSet, dist: IntervalDistribution):
    e = sset.energies
    pairs = []
    for i in range(len(e)):
        for j in range(len(e)):
            if i == j:
                continue
            mag = abs(complex(dist.charfn(e[i] - e[j])))
            if mag > 1.0 - UNIT_CIRCLE_TOL:
                pairs.append((i, j, mag))
    return pairs


def detection_stats(sset: SuperoperatorSet, dist: IntervalDistribution,
                    pseudo_inverse: bool = False,
                    cond_limit: float = DEFAULT_COND_LIMIT) -> DetectionStatistics:
    """Total detection probability and conditional attempt/time moments.

    All moments come from repeated solves against the resolvent applied to
    the rank-one source; explicit inverses are never formed.  Every moment
    is normalized by the detection probability, so the results are
    conditioned on eventual detection.

    Raises IllConditionedError when the estimated condition number exceeds
    ``cond_limit`` (typically at an exceptional fixed probing period or a
    near-degenerate spectrum), unless ``pseudo_inverse`` is set, in which
    case a truncated-SVD pseudo-inverse is used instead.
    """
    solver = _ResolventSolver(sset, pseudo_inverse=pseudo_inverse)
    if solver.condition > cond_limit and not pseudo_inverse:
        raise IllConditionedError(solver.condition, _unit_circle_pairs(sset, dist))

    src = sset.phase_avg * sset.source_vec
    f1 = solver.solve(src)                # geometric sum of the series
    p_det = float(f1.sum().real)
    if p_det < 1e-14:
        raise DegenerateProblemError(
            "detection probability vanishes: the initial state has no overlap "
            "with the bright subspace, so conditional moments are undefined"
        )
    f2 = solver.solve(f1)                 # n-weighted sum
    f3 = solver.solve(f2)                 # enters the n^2-weighted sum
    n_mean = float(f2.sum().real) / p_det
    n_sq = float((2.0 * f3.sum() - f2.sum()).real) / p_det

    surv_f1 = sset.proj_kron @ f1
    g = solver.solve(sset.phase_avg_t * (surv_f1 + sset.source_vec))
    t_mean = float(g.sum().real) / p_det
    h = solver.solve(
        sset.phase_avg_tt * (surv_f1 + sset.source_vec)
        + 2.0 * sset.phase_avg_t * (sset.proj_kron @ g)
    )
    t_sq = float(h.sum().real) / p_det

    return DetectionStatistics(
        p_det=p_det,
        n_mean=n_mean,
        n_sq=n_sq,
        t_mean=t_mean,
        t_sq=t_sq,
        n_var=n_sq - n_mean**2,
        t_var=t_sq - t_mean**2,
        condition=solver.condition,
        reduced_dim=sset.dim,
    )


def zero_mode_census(sset: SuperoperatorSet,
                     tol: float = DEFAULT_ZERO_TOL) -> ZeroModeCensus:
    """Count zero modes of the transfer matrix and find its slowest decay.

    The largest-magnitude eigenvalue controls the asymptotic decay rate
    of the averaged detection series.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    lam = np.linalg.eigvals(sset.transfer)
    mags = np.abs(lam)
    n_zero = int(np.sum(mags < tol))
    return ZeroModeCensus(
        n_zero=n_zero,
        n_nonzero=len(lam) - n_zero,
        slowest_decay=complex(lam[np.argmax(mags)]),
    )


def universal_identity_check(sset: SuperoperatorSet,
                             dist: IntervalDistribution,
                             pseudo_inverse: bool = False) -> IdentityReport:
    """Residuals of the distribution-free moment identities.

    The mean detection time always equals the mean interval times the mean
    attempt number.  For the return problem the second moments are tied as
    well: t-second-moment = mean^2 * n-second-moment + Nr * Var[tau].
    """
    stats = detection_stats(sset, dist, pseudo_inverse=pseudo_inverse)
    t_res = abs(stats.t_mean - dist.mean * stats.n_mean)
    t_sq_res = None
    if sset.is_return:
        t_sq_res = abs(
            stats.t_sq - dist.mean**2 * stats.n_sq - sset.dim * dist.variance
        )
    tol = 1e-8 * max(1.0, stats.t_sq)
    passed = t_res <= tol and (t_sq_res is None or t_sq_res <= tol)
    return IdentityReport(
        is_return=sset.is_return,
        t_residual=t_res,
        t_sq_residual=t_sq_res,
        tolerance=tol,
        passed=passed,
    )
