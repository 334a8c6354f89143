"""Exception types shared across the package."""

from __future__ import annotations


class QprobeError(Exception):
    """Base class for all qprobe errors."""


class InvalidModelError(QprobeError):
    """The requested quantum model is malformed (bad size, norm, hermiticity)."""


class DegenerateProblemError(QprobeError):
    """The detection state has no overlap with any energy eigenspace."""


class DivergenceError(QprobeError):
    """A closed-form expression diverges for the requested parameters."""


class ConfigError(QprobeError):
    """A configuration file or flag set cannot be interpreted."""


class IllConditionedError(QprobeError):
    """The geometric-series solve is numerically singular.

    Carries the estimated condition number and the energy pairs whose
    averaged phase factor sits on the unit circle, which is the structure
    that drives the singularity (near-degenerate evolution, exceptional
    probing period, or a waiting-time density collapsing to a point).
    """

    def __init__(self, condition: float, pairs: list[tuple[int, int, float]]):
        self.condition = condition
        self.pairs = pairs
        detail = ", ".join(f"({i},{j}) |phi|={m:.12f}" for i, j, m in pairs[:8])
        if len(pairs) > 8:
            detail += f", ... ({len(pairs)} pairs total)"
        super().__init__(
            f"linear system is ill-conditioned (cond ~ {condition:.3e}); "
            f"energy pairs with |charfn| at the unit circle: [{detail}]"
        )
