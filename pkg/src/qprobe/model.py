"""Quantum models and their spectral reduction.

A model is a finite Hermitian Hamiltonian together with an initial state
and a detection state.  The detection machinery never needs the full
Hilbert space: energy eigenstates orthogonal to the detection state
("dark" states) can never be detected and only obstruct the linear
algebra downstream.  ``spectral_reduce`` removes them, keeping one
"bright" state per (nearly) degenerate energy cluster, namely the
normalized projection of the detection state onto that eigenspace.

The reduced data is purely spectral: energies, the squared overlaps of
each bright state with the detection and initial states, and the
cross amplitudes that carry the interference between them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProblemError, InvalidModelError

HERMITICITY_TOL = 1e-12
NORM_TOL = 1e-12
DEFAULT_DEGENERACY_TOL = 1e-9
DEFAULT_DARK_TOL = 1e-12


def _frozen_array(a) -> np.ndarray:
    out = np.array(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QuantumModel:
    """Hermitian Hamiltonian plus unit-norm initial and detection states."""

    hamiltonian: np.ndarray
    psi_in: np.ndarray
    psi_d: np.ndarray
    label: str = ""

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise InvalidModelError(f"hamiltonian must be square, got shape {h.shape}")
        n = h.shape[0]
        if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL:
            raise InvalidModelError("hamiltonian is not Hermitian within 1e-12")
        vin = np.asarray(self.psi_in, dtype=complex).reshape(-1)
        vd = np.asarray(self.psi_d, dtype=complex).reshape(-1)
        if vin.shape != (n,) or vd.shape != (n,):
            raise InvalidModelError("state vectors must match the Hamiltonian dimension")
        if abs(np.linalg.norm(vin) - 1.0) > NORM_TOL:
            raise InvalidModelError("psi_in is not normalized within 1e-12")
        if abs(np.linalg.norm(vd) - 1.0) > NORM_TOL:
            raise InvalidModelError("psi_d is not normalized within 1e-12")
        object.__setattr__(self, "hamiltonian", _frozen_array(h))
        object.__setattr__(self, "psi_in", _frozen_array(vin))
        object.__setattr__(self, "psi_d", _frozen_array(vd))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    def is_return_problem(self) -> bool:
        return bool(np.allclose(self.psi_in, self.psi_d, atol=1e-14))


def basis_state(n: int, k: int) -> np.ndarray:
    """Site basis vector |k> in an n-dimensional space."""
    v = np.zeros(n, dtype=complex)
    v[k] = 1.0
    return v


def build_ring(L: int, gamma: float, x_in: int, x_d: int) -> QuantumModel:
    """Nearest-neighbor hopping ring of L sites with periodic boundary.

    H = -gamma * sum_k (|k><k-1| + |k><k+1|), so the spectrum is the set
    {-2*gamma*cos(2*pi*k/L)}.  For L = 2 both neighbor terms connect the
    same pair of sites and the effective hopping doubles.
    """
    if L < 2:
        raise InvalidModelError(f"ring needs at least 2 sites, got L={L}")
    if not gamma > 0:
        raise InvalidModelError(f"hopping strength must be positive, got {gamma}")
    if not (0 <= x_in < L and 0 <= x_d < L):
        raise InvalidModelError(f"site indices must lie in [0, {L}), got {x_in}, {x_d}")
    h = np.zeros((L, L), dtype=complex)
    for j in range(L):
        h[j, (j + 1) % L] += -gamma
        h[j, (j - 1) % L] += -gamma
    return QuantumModel(h, basis_state(L, x_in), basis_state(L, x_d),
                        label=f"ring L={L} gamma={gamma} {x_in}->{x_d}")


def build_two_level(gamma: float, x_in: int = 0, x_d: int = 0) -> QuantumModel:
    """Symmetric two-level hopping model H = -gamma(|0><1| + |1><0|).

    Note the convention: this single-bond coupling equals a 2-site ring
    with half the hopping strength.
    """
    if not gamma > 0:
        raise InvalidModelError(f"hopping strength must be positive, got {gamma}")
    h = np.array([[0.0, -gamma], [-gamma, 0.0]], dtype=complex)
    return QuantumModel(h, basis_state(2, x_in), basis_state(2, x_d),
                        label=f"two-level gamma={gamma} {x_in}->{x_d}")


def build_dense(hamiltonian, psi_in, psi_d, label: str = "dense") -> QuantumModel:
    """Wrap an explicit Hermitian matrix and state vectors in a model."""
    return QuantumModel(np.asarray(hamiltonian, dtype=complex),
                        np.asarray(psi_in, dtype=complex),
                        np.asarray(psi_d, dtype=complex), label=label)


@dataclass(frozen=True)
class SpectralData:
    """Spectral description of a model after dark-state elimination.

    Attributes
    ----------
    energies : (Nr,) float
        Energy of each kept cluster, strictly increasing when reduced.
    p_detect : (Nr,) float
        Squared overlap of each bright state with the detection state;
        all positive after reduction, summing to 1.
    p_init : (Nr,) float
        Squared overlap with the initial state.  The sum is the total
        detection probability of the model.
    cross_amp : (Nr,) complex
        <psi_d|b_i><b_i|psi_in> per bright state; equals p_detect entrywise
        for the return problem.
    bright : (N, Nr) complex
        Bright states as columns in the site basis.
    reduced : bool
        False for the raw full-space variant, where dark clusters are kept
        and ``p_detect`` may contain zeros (pseudo-inverse path only).
    """

    energies: np.ndarray
    p_detect: np.ndarray
    p_init: np.ndarray
    cross_amp: np.ndarray
    bright: np.ndarray
    degeneracy_tol: float
    reduced: bool = True
    label: str = ""

    def __post_init__(self):
        for name in ("energies", "p_detect", "p_init", "cross_amp", "bright"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))

    @property
    def reduced_dim(self) -> int:
        return len(self.energies)

    def is_return_problem(self) -> bool:
        return bool(
            np.allclose(self.cross_amp, self.p_detect, atol=1e-12)
            and np.allclose(self.p_init, self.p_detect, atol=1e-12)
        )


def _cluster_eigenvalues(w: np.ndarray, tol: float) -> list[np.ndarray]:
    """Group sorted eigenvalues into clusters of internal spread <= tol."""
    groups = []
    start = 0
    for i in range(1, len(w)):
        if w[i] - w[start] > tol:
            groups.append(np.arange(start, i))
            start = i
    groups.append(np.arange(start, len(w)))
    return groups


def spectral_reduce(model: QuantumModel,
                    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL,
                    dark_tol: float = DEFAULT_DARK_TOL) -> SpectralData:
    """Diagonalize, cluster degenerate energies, and drop dark clusters.

    Each cluster keeps a single bright state: the normalized projection
    of the detection state onto the cluster's eigenspace.  Its phase is
    fixed so the overlap with the detection state is real and positive,
    which makes the output independent of the arbitrary eigenvector
    phases and of the basis chosen inside degenerate clusters.
    """
    if not degeneracy_tol > 0:
        raise ValueError(f"degeneracy_tol must be positive, got {degeneracy_tol}")
    w, v = np.linalg.eigh(model.hamiltonian)
    energies, p, q, amp, bright_cols = [], [], [], [], []
    for idx in _cluster_eigenvalues(w, degeneracy_tol):
        comp = v[:, idx].conj().T @ model.psi_d   # <E_j|psi_d> within the cluster
        weight = float(np.sum(np.abs(comp) ** 2))
        if weight <= dark_tol:
            continue
        b = (v[:, idx] @ comp) / np.sqrt(weight)
        energies.append(float(np.mean(w[idx])))
        p.append(weight)
        overlap_in = np.vdot(b, model.psi_in)
        q.append(float(abs(overlap_in) ** 2))
        amp.append(np.vdot(model.psi_d, b) * overlap_in)
        bright_cols.append(b)
    if not energies:
        raise DegenerateProblemError(
            "detection state has no overlap with any energy eigenspace"
        )
    return SpectralData(
        energies=np.array(energies),
        p_detect=np.array(p),
        p_init=np.array(q),
        cross_amp=np.array(amp),
        bright=np.column_stack(bright_cols),
        degeneracy_tol=degeneracy_tol,
        reduced=True,
        label=model.label,
    )


def spectral_full(model: QuantumModel) -> SpectralData:
    """Raw eigenbasis variant without dark-state elimination.

    Degenerate energies repeat and detection overlaps may vanish, so the
    downstream linear systems are singular; this path exists only for the
    pseudo-inverse treatment and for cross-checks against the reduced one.
    """
    w, v = np.linalg.eigh(model.hamiltonian)
    comp_d = v.conj().T @ model.psi_d
    comp_in = v.conj().T @ model.psi_in
    return SpectralData(
        energies=w.copy(),
        p_detect=np.abs(comp_d) ** 2,
        p_init=np.abs(comp_in) ** 2,
        cross_amp=comp_d.conj() * comp_in,
        bright=v.copy(),
        degeneracy_tol=0.0,
        reduced=False,
        label=model.label,
    )
