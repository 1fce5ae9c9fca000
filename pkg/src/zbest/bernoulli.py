"""Sums of independent indicators: exact pmfs, couplings, and bounds.

The size-bias coupling of an independent indicator sum replaces a randomly
chosen coordinate by 1; it is monotone, so reweighting by the coupling
difference and interpolating produces the zero-bias law in closed form. On
the original space the coupled quantities are

    Y+ = Y - X_I,   Y++ = Y - X_I + 1,   Y* = Y - X_I + U,

with U an independent standard uniform; pointwise |Y* - Y| <= 1. Every law
here is exact when the success probabilities are rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .distributions import FiniteDistribution, Number, SegmentMixture, all_exact, exact_div
from .errors import InvalidDistribution

#: Kolmogorov bound constant as published for indicator sums (rounded up
#: from KOLMOGOROV_DELTA_COEFF = 2.0256...)
KOLMOGOROV_ROUNDED = 2.03


@dataclass(frozen=True)
class BernoulliVector:
    """Success probabilities of independent indicators, each strictly inside (0,1).

    Endpoint probabilities are excluded: a deterministic coordinate breaks
    the index-sampling law of the size-bias construction.
    """

    p: tuple[Number, ...]

    def __init__(self, p: Iterable[Number]):
        probs = tuple(p)
        if not probs:
            raise InvalidDistribution("need at least one coordinate")
        for i, pi in enumerate(probs):
            if not 0 < pi < 1:
                raise InvalidDistribution(
                    f"p[{i}] = {pi!r} must lie strictly inside (0, 1)"
                )
        object.__setattr__(self, "p", probs)

    def __len__(self) -> int:
        return len(self.p)

    @property
    def exact(self) -> bool:
        return all_exact(self.p)

    @property
    def mu(self) -> Number:
        return sum(self.p)

    @property
    def sigma2(self) -> Number:
        return sum(pi * (1 - pi) for pi in self.p)

    @property
    def sigma(self) -> float:
        return float(self.sigma2) ** 0.5


def exact_pmf(bv: BernoulliVector) -> FiniteDistribution:
    """Law of the coordinate sum by sequential convolution."""
    return FiniteDistribution(enumerate(_convolve(bv.p)))


def _convolve(ps: Sequence[Number]) -> list[Number]:
    zero: Number = 0 if all_exact(ps) else 0.0
    pmf: list[Number] = [1 - ps[0], ps[0]]
    for pi in ps[1:]:
        nxt = [zero] * (len(pmf) + 1)
        for k, mass in enumerate(pmf):
            nxt[k] = nxt[k] + mass * (1 - pi)
            nxt[k + 1] = nxt[k + 1] + mass * pi
        pmf = nxt
    return pmf


def leave_one_out_pmf(bv: BernoulliVector, i: int) -> list[Number]:
    """pmf of the sum excluding coordinate i (a point mass at 0 for n = 1)."""
    rest = bv.p[:i] + bv.p[i + 1 :]
    if not rest:
        one: Number = 1 if bv.exact else 1.0
        return [one]
    return _convolve(rest)


def sample_coupling(
    bv: BernoulliVector, rng: np.random.Generator
) -> tuple[int, int, int, int, float]:
    """One draw of (y, i, y_dagger, y_ddagger, y_star).

    Samples the indicators independently, the index I with
    P(I = i) = p_i / mu independently of them, and an independent uniform U;
    returns Y, I, Y - X_I, Y - X_I + 1 and Y - X_I + U. Pointwise
    |y_star - y| = |U - X_I| <= 1.
    """
    ps = np.array([float(pi) for pi in bv.p])
    x = (rng.random(len(ps)) < ps).astype(np.int64)
    i = int(rng.choice(len(ps), p=ps / ps.sum()))
    u = float(rng.random())
    y = int(x.sum())
    y_dagger = y - int(x[i])
    return y, i, y_dagger, y_dagger + 1, y_dagger + u


def exact_zero_bias_law(bv: BernoulliVector) -> SegmentMixture:
    """Exact zero-bias law of Y as a mixture of unit segments.

    Reweighting each (x, i) atom of the size-bias coupling by
    (y'' - y') / E[Y'' - Y'] keeps only the atoms with x_i = 0 and tilts
    the index law to P(I = i) = p_i (1 - p_i) / sigma2; the interpolated
    variable then lives on [y, y + 1] with y the sum over the other
    coordinates. The segment [m, m + 1] therefore carries mass
    sum_i [p_i (1 - p_i) / sigma2] P(sum_{j != i} X_j = m), and every
    segment is [m, m + 1] for an integer m in {0, ..., n-1}. (Sampling the
    index by p_i / mu without the reweight does not yield this law unless
    the p_i are all equal; the density oracle distinguishes the two.)
    """
    sigma2 = bv.sigma2
    n = len(bv)
    zero: Number = 0 if bv.exact else 0.0
    mass: list[Number] = [zero] * n
    for i, pi in enumerate(bv.p):
        weight = exact_div(pi * (1 - pi), sigma2)
        for m, pm in enumerate(leave_one_out_pmf(bv, i)):
            mass[m] = mass[m] + weight * pm
    segments = [(m, m + 1, mass[m]) for m in range(n) if mass[m] != 0]
    return SegmentMixture(atoms=(), segments=segments)


def mean_abs_zero_bias_shift(bv: BernoulliVector) -> Number:
    """Exact E|Y* - Y| = E|U - X_I|, summed over the index law.

    Conditional on I = i the value is p_i E[1 - U] + (1 - p_i) E[U]; the
    total collapses to 1/2 for every probability vector.
    """
    mu = bv.mu
    half = Fraction(1, 2) if bv.exact else 0.5
    return sum(exact_div(pi, mu) * (pi * (1 - half) + (1 - pi) * half) for pi in bv.p)


def fraction_moved(bv: BernoulliVector) -> Number:
    """Exact P(Y'' != Y) = P(X_I = 0) = sigma2 / mu for the size-bias coupling."""
    mu = bv.mu
    return sum(exact_div(pi, mu) * (1 - pi) for pi in bv.p)


@dataclass(frozen=True)
class BernoulliBounds:
    """Published distance bounds for the standardized indicator sum.

    ``wasserstein`` is 1/sigma and ``kolmogorov`` is 2.03/sigma. The
    constituents feeding :func:`zbest.analytics.theorem_bounds` are exposed:
    E|W* - W| = 1/(2 sigma), the a.s. bound delta = 1/sigma, and
    E|1 - G D| = 0 since the coupling is an exact zero-bias one.
    """

    wasserstein: float
    kolmogorov: float
    e_abs_diff: float
    delta: float
    e_abs_one_minus_gd: float


def bernoulli_bounds(bv: BernoulliVector) -> BernoulliBounds:
    sigma = bv.sigma
    return BernoulliBounds(
        wasserstein=1.0 / sigma,
        kolmogorov=KOLMOGOROV_ROUNDED / sigma,
        e_abs_diff=0.5 / sigma,
        delta=1.0 / sigma,
        e_abs_one_minus_gd=0.0,
    )


def indicator_joint(bv: BernoulliVector) -> list[tuple[tuple[int, ...], Number]]:
    """Full product law over {0,1}^n; intended for small n in tests/couplers."""
    out = []
    for bits in product((0, 1), repeat=len(bv)):
        mass: Number = 1 if bv.exact else 1.0
        for b, pi in zip(bits, bv.p):
            mass = mass * (pi if b else (1 - pi))
        out.append((bits, mass))
    return out
