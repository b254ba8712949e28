"""Transmitted-count statistics and zero-frequency noise.

With at most one injection attempt per side, the net number N of
electrons transmitted left-to-right takes values -1, 0, +1.  The noise
is the variance of N expressed in units of 4q^2/h, so the charge and
Planck constant never enter the floating-point arithmetic; a helper
converts to SI on output.
"""

from __future__ import annotations

from dataclasses import dataclass

import scipy.constants as _const

#: 4 q^2 / h in siemens, the natural unit of the noise values here
NOISE_UNIT_SI = 4.0 * _const.e**2 / _const.h


def _check_prob(name: str, p: float):
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class OccupationPair:
    """Injection probabilities of the left (a) and right (b) sources."""

    f_a: float
    f_b: float

    def __post_init__(self):
        _check_prob("f_a", self.f_a)
        _check_prob("f_b", self.f_b)


@dataclass(frozen=True)
class CountDistribution:
    """P(N) for the net left-to-right transmitted count N in {-1, 0, +1}."""

    p_minus: float
    p_zero: float
    p_plus: float

    def __post_init__(self):
        for name in ("p_minus", "p_zero", "p_plus"):
            _check_prob(name, getattr(self, name))
        s = self.p_minus + self.p_zero + self.p_plus
        if abs(s - 1.0) > 1e-12:
            raise ValueError(f"count probabilities sum to {s}, not 1")

    def mean(self) -> float:
        return self.p_plus - self.p_minus

    def second_moment(self) -> float:
        return self.p_plus + self.p_minus

    def variance(self) -> float:
        m = self.mean()
        return self.second_moment() - m * m


@dataclass(frozen=True)
class NoiseRecord:
    """Zero-frequency noise of the two-source injection process.

    ``bracket`` is the dimensionless variance factor and ``s`` the noise
    in units of 4q^2/h (numerically equal by the unit choice).  The
    closed form assumes a symmetric scatterer, i.e. the both-right
    probability equals the both-left one; the count-statistics identity
    below proves the formula under that assumption.
    """

    bracket: float
    s: float
    inputs: tuple  # (f_a, f_b, T, P_LL)

    def __post_init__(self):
        if self.bracket < -1e-12:
            raise ValueError(f"noise bracket is negative: {self.bracket}")

    def s_si(self) -> float:
        """Noise in SI units (multiplied by 4q^2/h)."""
        return self.s * NOISE_UNIT_SI


def count_distribution(
    occ: OccupationPair, t: float, r: float, p_ll: float, p_rr: float
) -> CountDistribution:
    """Enumerate the four injection events into P(N).

    Both sources fire with probability f_a*f_b: then N = +1 with the
    both-right probability, N = -1 with the both-left probability and
    N = 0 otherwise.  A single firing source transmits with T (N = +-1
    depending on the side) or reflects with R (N = 0).  No firing gives
    N = 0.
    """
    _check_prob("T", t)
    _check_prob("R", r)
    _check_prob("P_LL", p_ll)
    _check_prob("P_RR", p_rr)
    if abs(t + r - 1.0) > 1e-9:
        raise ValueError(f"T + R = {t + r} deviates from 1")
    if p_ll + p_rr > 1.0 + 1e-12:
        raise ValueError("P_LL + P_RR exceeds 1")
    f_a, f_b = occ.f_a, occ.f_b
    both = f_a * f_b
    only_a = f_a * (1.0 - f_b)
    only_b = (1.0 - f_a) * f_b
    neither = (1.0 - f_a) * (1.0 - f_b)
    p_lr = 1.0 - p_ll - p_rr
    p_plus = both * p_rr + only_a * t
    p_minus = both * p_ll + only_b * t
    p_zero = both * p_lr + only_a * r + only_b * r + neither
    return CountDistribution(p_minus=p_minus, p_zero=p_zero, p_plus=p_plus)


def noise(occ: OccupationPair, t: float, p_ll: float) -> NoiseRecord:
    """Noise of the symmetric two-source process in units of 4q^2/h.

    bracket = T [f_a(1-f_a) + f_b(1-f_b)] + T(1-T)(f_a-f_b)^2
              + 2 P_LL f_a f_b

    The first two terms are the standard partition noise of independent
    sources; the last one is the same-side contribution, which survives
    even at full occupation.  ``p_ll`` is not clipped against T(1-T):
    its admissible range is set by the scattering physics, not by this
    formula.
    """
    _check_prob("T", t)
    _check_prob("P_LL", p_ll)
    f_a, f_b = occ.f_a, occ.f_b
    bracket = (
        t * (f_a * (1.0 - f_a) + f_b * (1.0 - f_b))
        + t * (1.0 - t) * (f_a - f_b) ** 2
        + 2.0 * p_ll * f_a * f_b
    )
    return NoiseRecord(bracket=bracket, s=bracket, inputs=(f_a, f_b, t, p_ll))


def variance_identity_check(
    occ: OccupationPair, t: float, p_ll: float, p_rr: float | None = None
) -> float:
    """|Var(N) - bracket| for the symmetric case P_RR = P_LL.

    Evaluates the count distribution and the closed-form bracket
    independently and returns the absolute residual; the closed form is
    exactly the variance of the enumerated counts, so the residual must
    sit at rounding level (<= 1e-12) for every valid input.
    """
    if p_rr is None:
        p_rr = p_ll
    dist = count_distribution(occ, t, 1.0 - t, p_ll, p_rr)
    rec = noise(occ, t, p_ll)
    return abs(dist.variance() - rec.bracket)
