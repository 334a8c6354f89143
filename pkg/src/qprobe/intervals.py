"""Waiting-time densities for the probing intervals.

Three families are supported: a degenerate (fixed) interval, the
exponential density, and the Gamma density with fixed mean and shape
``alpha``.  The Gamma family interpolates between exponential waiting
times (``alpha = 1``) and strictly periodic probing (``alpha -> inf``).

Every family exposes its characteristic function ``<exp(i*delta*tau)>``
and the tau-weighted variants ``<tau**p * exp(i*delta*tau)>`` (p = 1, 2)
in closed form; these are the only quantities the exact machinery needs.
All of them accept scalar or array ``delta``.

The closed forms for the Gamma family use the principal branch of
``(1 - i*delta*mean/alpha)**(-alpha)``.  The base always has real part 1,
so its argument stays inside (-pi/2, pi/2) and the principal branch is
the analytic continuation of the integral for every real ``delta``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np


class IntervalDistribution(ABC):
    """Common interface for waiting-time densities rho(tau) on tau > 0."""

    @property
    @abstractmethod
    def mean(self) -> float:
        """First moment <tau>."""

    @property
    @abstractmethod
    def variance(self) -> float:
        """Central second moment Var[tau]."""

    @property
    def second_moment(self) -> float:
        """Raw second moment <tau**2>."""
        return self.variance + self.mean**2

    @abstractmethod
    def charfn(self, delta):
        """Characteristic function <exp(i*delta*tau)> at real frequency delta."""

    @abstractmethod
    def weighted_charfn(self, delta, power: int):
        """Weighted average <tau**power * exp(i*delta*tau)> for power in {1, 2}."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None):
        """Draw interval samples using the caller-owned generator."""

    @abstractmethod
    def config_items(self) -> dict:
        """Flat key-value description, echoed back in CLI summaries."""


def _check_power(power: int) -> None:
    if power not in (1, 2):
        raise ValueError(f"weighted_charfn supports power 1 or 2, got {power!r}")


@dataclass(frozen=True)
class FixedInterval(IntervalDistribution):
    """Deterministic probing period: rho(tau) = delta(tau - tau0)."""

    tau0: float

    def __post_init__(self):
        if not self.tau0 > 0:
            raise ValueError(f"fixed interval must be positive, got {self.tau0}")

    @property
    def mean(self) -> float:
        return self.tau0

    @property
    def variance(self) -> float:
        return 0.0

    def charfn(self, delta):
        return np.exp(1j * np.asarray(delta, dtype=float) * self.tau0)

    def weighted_charfn(self, delta, power: int):
        _check_power(power)
        return self.tau0**power * self.charfn(delta)

    def sample(self, rng, size=None):
        if size is None:
            return self.tau0
        return np.full(size, self.tau0)

    def config_items(self):
        return {"dist": "fixed", "tau": self.tau0}


@dataclass(frozen=True)
class ExponentialInterval(IntervalDistribution):
    """Exponential waiting times rho(tau) = exp(-tau/mean)/mean."""

    mu: float

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"exponential mean must be positive, got {self.mu}")

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.mu**2

    def charfn(self, delta):
        return 1.0 / (1.0 - 1j * np.asarray(delta, dtype=float) * self.mu)

    def weighted_charfn(self, delta, power: int):
        # <tau**p e^{i d tau}> = p! mu**p / (1 - i d mu)**(p+1)
        _check_power(power)
        base = 1.0 - 1j * np.asarray(delta, dtype=float) * self.mu
        if power == 1:
            return self.mu / base**2
        return 2.0 * self.mu**2 / base**3

    def sample(self, rng, size=None):
        return rng.exponential(self.mu, size)

    def config_items(self):
        return {"dist": "exp", "mean": self.mu}


@dataclass(frozen=True)
class GammaInterval(IntervalDistribution):
    """Gamma waiting times with shape alpha and fixed mean.

    Parametrized by rate beta = alpha/mean, so the mean stays put while
    alpha tunes the relative width: Var[tau] = mean**2/alpha.
    """

    alpha: float
    mu: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"gamma shape must be positive, got {self.alpha}")
        if not self.mu > 0:
            raise ValueError(f"gamma mean must be positive, got {self.mu}")

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.mu**2 / self.alpha

    def charfn(self, delta):
        base = 1.0 - 1j * np.asarray(delta, dtype=float) * self.mu / self.alpha
        return base ** (-self.alpha)

    def weighted_charfn(self, delta, power: int):
        # <tau**p e^{i d tau}> = Gamma(a+p)/(Gamma(a) beta**p) (1 - i d/beta)**-(a+p)
        _check_power(power)
        base = 1.0 - 1j * np.asarray(delta, dtype=float) * self.mu / self.alpha
        if power == 1:
            return self.mu * base ** (-self.alpha - 1)
        return self.mu**2 * (1.0 + 1.0 / self.alpha) * base ** (-self.alpha - 2)

    def sample(self, rng, size=None):
        return rng.gamma(self.alpha, self.mu / self.alpha, size)

    def config_items(self):
        return {"dist": "gamma", "alpha": self.alpha, "mean": self.mu}
