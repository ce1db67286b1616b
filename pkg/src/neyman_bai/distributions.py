"""Outcome distributions for two-armed trials.

Two families are supported. Gaussian arms form a location-shift class:
means vary freely while each arm's variance is held fixed, and the Fisher
information is the constant 1/sigma^2. Bernoulli arms do not belong to
that fixed-variance class, because their variance mu*(1-mu) moves with
the mean; they are provided for the uniform-allocation comparisons and
carry their own Fisher information 1/(mu*(1-mu)). KL divergence is only
defined within a family.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .rng import RngState


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class Marginal:
    """One arm's outcome distribution.

    Variance is stored redundantly for Bernoulli arms and the constructor
    enforces variance == mean*(1-mean) bit-exactly; use the `bernoulli`
    helper rather than spelling the variance out. Bernoulli means must lie
    strictly inside (0, 1) so that both outcomes have positive mass.
    """

    family: Family
    mean: float
    variance: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean) or not math.isfinite(self.variance):
            raise ValueError("mean and variance must be finite")
        if self.family is Family.GAUSSIAN:
            if self.variance <= 0.0:
                raise ValueError(f"gaussian variance must be positive, got {self.variance}")
        elif self.family is Family.BERNOULLI:
            if not 0.0 < self.mean < 1.0:
                raise ValueError(
                    f"bernoulli mean must lie strictly in (0, 1), got {self.mean}"
                )
            expected = self.mean * (1.0 - self.mean)
            if self.variance != expected:
                raise ValueError(
                    "bernoulli variance must equal mean*(1-mean) "
                    f"(got {self.variance!r}, expected {expected!r})"
                )
        else:  # pragma: no cover - enum is closed
            raise ValueError(f"unknown family {self.family}")

    @classmethod
    def gaussian(cls, mean: float, variance: float) -> "Marginal":
        return cls(Family.GAUSSIAN, float(mean), float(variance))

    @classmethod
    def bernoulli(cls, mean: float) -> "Marginal":
        mean = float(mean)
        return cls(Family.BERNOULLI, mean, mean * (1.0 - mean))

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    def draw(self, gen: np.random.Generator, size: int | None = None):
        """Draw outcomes using an externally managed generator.

        Batch draws consume the stream exactly like repeated scalar draws,
        so prefixes of a batch match shorter batches from the same stream.
        """
        if self.family is Family.GAUSSIAN:
            return self.mean + self.sd * gen.standard_normal(size)
        if size is None:
            return np.float64(gen.random() < self.mean)
        return (gen.random(size) < self.mean).astype(np.float64)


def sample(m: Marginal, rng: RngState) -> tuple[float, RngState]:
    """One outcome draw, returning the advanced rng state.

    Deterministic given (rng.seed, rng.stream, rng.index); two calls with
    identical states return identical outcomes.
    """
    return float(m.draw(rng.generator())), rng.advance()


def kl_divergence(p: Marginal, q: Marginal) -> float:
    """Closed-form KL divergence KL(p, q) within one family.

    Gaussian pairs with equal variances use (mu_p - mu_q)^2 / (2 sigma^2),
    which is exact (no cancellation); unequal variances fall back to the
    general Gaussian formula. Bernoulli uses the two-term log formula.
    Raises for cross-family comparisons, which are not comparable models.
    """
    if p.family is not q.family:
        raise ValueError(
            f"KL divergence undefined across families ({p.family.value} vs {q.family.value})"
        )
    if p.family is Family.GAUSSIAN:
        d = p.mean - q.mean
        if p.variance == q.variance:
            return (d * d) / (2.0 * q.variance)
        return (
            0.5 * math.log(q.variance / p.variance)
            + (p.variance + d * d) / (2.0 * q.variance)
            - 0.5
        )
    a, b = p.mean, q.mean
    if a == b:
        return 0.0
    return a * math.log(a / b) + (1.0 - a) * math.log((1.0 - a) / (1.0 - b))


def fisher_information(m: Marginal) -> float:
    """Fisher information of the mean parameter: 1/sigma^2, resp. 1/(mu(1-mu))."""
    if m.family is Family.GAUSSIAN:
        return 1.0 / m.variance
    return 1.0 / (m.mean * (1.0 - m.mean))


@dataclass(frozen=True)
class Instance:
    """A two-armed bandit model: the pair of marginal outcome distributions."""

    arm1: Marginal
    arm2: Marginal

    def arm(self, a: int) -> Marginal:
        if a == 1:
            return self.arm1
        if a == 2:
            return self.arm2
        raise ValueError(f"arm must be 1 or 2, got {a}")

    @property
    def means(self) -> tuple[float, float]:
        return (self.arm1.mean, self.arm2.mean)

    @property
    def gap(self) -> float:
        """Absolute mean difference between the arms."""
        return abs(self.arm1.mean - self.arm2.mean)


def best_arm(inst: Instance) -> int:
    """Arm with the larger mean; ties resolve to arm 1 (fixed convention)."""
    return 1 if inst.arm1.mean >= inst.arm2.mean else 2


def lower_bound_alternative(sigma1: float, sigma2: float, T: int) -> Instance:
    """The hardest local alternative at budget T.

    Gaussian instance with means (-sigma1/sqrt(T), +sigma2/sqrt(T)) and
    variances (sigma1^2, sigma2^2). Its best arm is 2 and its gap is
    (sigma1+sigma2)/sqrt(T), the scale at which no allocation can separate
    the arms reliably within T rounds.
    """
    if sigma1 <= 0.0 or sigma2 <= 0.0:
        raise ValueError("standard deviations must be positive")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    root_t = math.sqrt(T)
    return Instance(
        Marginal.gaussian(-sigma1 / root_t, sigma1 * sigma1),
        Marginal.gaussian(sigma2 / root_t, sigma2 * sigma2),
    )
