"""Normal-approximation analytics: Stein solutions, distances, bound formulas.

Distances to the normal are computed two ways. The exact route works on
:class:`~zbest.distributions.FiniteDistribution` /
:class:`~zbest.distributions.SegmentMixture` laws whose CDFs are piecewise
linear: the Kolmogorov supremum is located exactly (breakpoints plus the
closed-form stationary points of F - Phi), and the Wasserstein distance is
the integral of |F - Phi|, evaluated piecewise in closed form with Gaussian
tail terms, so the result is accurate to root-finding precision (far inside
the 1e-9 budget). The empirical route consumes raw samples and reports
Dvoretzky-Kiefer-Wolfowitz confidence half-widths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfcx, ndtr, ndtri

from .distributions import FiniteDistribution, SegmentMixture
from .errors import InvalidDistribution, NegativeInput, TooFewSamples

SQRT_2PI = math.sqrt(2.0 * math.pi)

#: coefficient multiplying the a.s. bound delta in the Kolmogorov bound;
#: equals 1/sqrt(2*pi) + sqrt(2*pi)/4 + 1 = 2.0256... < 2.03
KOLMOGOROV_DELTA_COEFF = 1.0 / SQRT_2PI + SQRT_2PI / 4.0 + 1.0

#: sup-norm bound for the Stein indicator solution, sqrt(2*pi)/4
STEIN_SOLUTION_SUP = SQRT_2PI / 4.0

#: 95% Dvoretzky-Kiefer-Wolfowitz band: sqrt(ln(2/alpha) / (2n)) with alpha=0.05
DKW_ALPHA = 0.05


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / SQRT_2PI


def _scaled_upper_tail(w: float) -> float:
    """exp(w^2/2) * (1 - Phi(w)), evaluated without overflow for any w."""
    return 0.5 * erfcx(w / math.sqrt(2.0))


def stein_solution(z: float, w: float) -> float:
    """Bounded solution of the Stein equation for the indicator h = 1(. <= z).

    Equals sqrt(2*pi) * exp(w^2/2) * [Phi(w)(1-Phi(z)) 1(w<=z)
    + Phi(z)(1-Phi(w)) 1(w>z)]. The overflow-prone product
    exp(w^2/2)*(tail probability) is evaluated through the scaled
    complementary error function, which is stable for |w| well beyond 100.
    """
    if w <= z:
        # exp(w^2/2) * Phi(w) == scaled upper tail at -w
        return SQRT_2PI * (1.0 - normal_cdf(z)) * _scaled_upper_tail(-w)
    return SQRT_2PI * normal_cdf(z) * _scaled_upper_tail(w)


def stein_solution_derivative(z: float, w: float) -> float:
    """Derivative of the indicator Stein solution, left-continuous at the kink.

    Returns w*f_z(w) + 1(w <= z) - Phi(z); at w == z the w <= z branch
    applies, which is the limit from the left.
    """
    indicator = 1.0 if w <= z else 0.0
    return w * stein_solution(z, w) + indicator - normal_cdf(z)


def theorem_bounds(
    e_abs_diff: float, e_abs_one_minus_gd: float, delta: float
) -> tuple[float, float]:
    """Wasserstein and Kolmogorov bounds from coupling summary quantities.

    ``e_abs_diff`` is E|W* - W|, ``e_abs_one_minus_gd`` is E|1 - G D| and
    ``delta`` is an almost-sure bound on |W* - W|. Returns
    ``(2*e_abs_diff + sqrt(2/pi)*e_abs_one_minus_gd,
    KOLMOGOROV_DELTA_COEFF*delta + e_abs_one_minus_gd)``.
    """
    for name, v in (
        ("e_abs_diff", e_abs_diff),
        ("e_abs_one_minus_gd", e_abs_one_minus_gd),
        ("delta", delta),
    ):
        if v < 0:
            raise NegativeInput(f"{name} must be nonnegative, got {v!r}")
    wasserstein = 2.0 * float(e_abs_diff) + math.sqrt(2.0 / math.pi) * float(
        e_abs_one_minus_gd
    )
    kolmogorov = KOLMOGOROV_DELTA_COEFF * float(delta) + float(e_abs_one_minus_gd)
    return wasserstein, kolmogorov


# ---------------------------------------------------------------------------
# Exact distances for piecewise-linear CDFs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _PiecewiseCdf:
    """Breakpoints x_0 < ... < x_m with jumps, slopes, and running CDF values.

    ``f_left[i]``/``f_right[i]`` are the CDF limits at ``x[i]``; ``slope[i]``
    is the constant density on (x[i], x[i+1]).
    """

    x: np.ndarray
    f_left: np.ndarray
    f_right: np.ndarray
    slope: np.ndarray


def _piecewise_cdf(law: Union[FiniteDistribution, SegmentMixture]) -> _PiecewiseCdf:
    if isinstance(law, FiniteDistribution):
        atoms = [(float(v), float(p)) for v, p in law.atoms]
        segments: list[tuple[float, float, float]] = []
    else:
        atoms = [(float(v), float(p)) for v, p in law.atoms]
        segments = [(float(lo), float(hi), float(p)) for lo, hi, p in law.segments]

    xs = sorted({v for v, _ in atoms} | {e for lo, hi, _ in segments for e in (lo, hi)})
    x = np.array(xs)
    idx = {v: i for i, v in enumerate(xs)}
    jump = np.zeros(len(xs))
    for v, p in atoms:
        jump[idx[v]] += p
    slope = np.zeros(max(len(xs) - 1, 0))
    for lo, hi, p in segments:
        dens = p / (hi - lo)
        slope[idx[lo] : idx[hi]] += dens

    f_left = np.zeros(len(xs))
    f_right = np.zeros(len(xs))
    run = 0.0
    for i in range(len(xs)):
        f_left[i] = run
        run += jump[i]
        f_right[i] = run
        if i < len(xs) - 1:
            run += slope[i] * (x[i + 1] - x[i])
    return _PiecewiseCdf(x=x, f_left=f_left, f_right=f_right, slope=slope)


def _phi_integral(t: float) -> float:
    """Antiderivative of Phi: integral of Phi over (-inf, t] equals t*Phi(t)+phi(t)."""
    return t * normal_cdf(t) + normal_pdf(t)


def _stationary_points(c: float, mu: float, sigma: float) -> tuple[float, ...]:
    """Solutions of c = phi((x-mu)/sigma)/sigma, the stationary points of F - Phi."""
    if c <= 0.0:
        return ()
    arg = c * sigma * SQRT_2PI
    if arg >= 1.0:
        return ()
    r = math.sqrt(-2.0 * math.log(arg))
    return (mu - sigma * r, mu + sigma * r)


def kolmogorov_vs_normal(
    law: Union[FiniteDistribution, SegmentMixture], mu: float, sigma: float
) -> float:
    """Exact sup_x |F(x) - Phi((x - mu)/sigma)|.

    The difference is piecewise smooth: candidates are both CDF limits at
    every breakpoint plus the closed-form stationary points of the difference
    inside each constant-density piece.
    """
    if sigma <= 0:
        raise InvalidDistribution("sigma must be positive")
    pw = _piecewise_cdf(law)
    mu = float(mu)
    sigma = float(sigma)
    phi_at = ndtr((pw.x - mu) / sigma)
    best = float(np.max(np.abs(pw.f_left - phi_at)))
    best = max(best, float(np.max(np.abs(pw.f_right - phi_at))))
    for i in range(len(pw.x) - 1):
        c = pw.slope[i]
        a, b = pw.x[i], pw.x[i + 1]
        for xc in _stationary_points(c, mu, sigma):
            if a < xc < b:
                f_val = pw.f_right[i] + c * (xc - a)
                best = max(best, abs(f_val - normal_cdf((xc - mu) / sigma)))
    return best


def _linear_minus_phi_integral(
    f_a: float, c: float, a: float, b: float, mu: float, sigma: float
) -> float:
    """Signed integral over [a, b] of [f_a + c (x - a)] - Phi((x-mu)/sigma)."""
    ta = (a - mu) / sigma
    tb = (b - mu) / sigma
    lin = f_a * (b - a) + 0.5 * c * (b - a) ** 2
    return lin - sigma * (_phi_integral(tb) - _phi_integral(ta))


def wasserstein_vs_normal(
    law: Union[FiniteDistribution, SegmentMixture], mu: float, sigma: float
) -> float:
    """Integral of |F(x) - Phi((x - mu)/sigma)| dx over the whole line.

    Inside the support the CDF is piecewise linear, so on each monotone
    stretch of the difference the integral has a closed form; sign changes
    are isolated by root finding to machine precision. Outside the support
    the integral reduces to Gaussian tail antiderivatives, added in closed
    form. Total absolute error is far below 1e-9.
    """
    if sigma <= 0:
        raise InvalidDistribution("sigma must be positive")
    pw = _piecewise_cdf(law)
    mu = float(mu)
    sigma = float(sigma)

    t_lo = (pw.x[0] - mu) / sigma
    t_hi = (pw.x[-1] - mu) / sigma
    total = sigma * _phi_integral(t_lo)  # integral of Phi left of the support
    total += sigma * (_phi_integral(-t_hi))  # integral of 1 - Phi right of it

    for i in range(len(pw.x) - 1):
        a, b = float(pw.x[i]), float(pw.x[i + 1])
        if a == b:
            continue
        f_a = float(pw.f_right[i])
        c = float(pw.slope[i])

        def g(x: float) -> float:
            return f_a + c * (x - a) - normal_cdf((x - mu) / sigma)

        knots = [a]
        for xc in _stationary_points(c, mu, sigma):
            if a < xc < b:
                knots.append(xc)
        knots.append(b)
        knots.sort()
        for lo, hi in zip(knots[:-1], knots[1:]):
            glo, ghi = g(lo), g(hi)
            if glo == 0.0 or ghi == 0.0 or (glo > 0) == (ghi > 0):
                total += abs(_linear_minus_phi_integral(f_a + c * (lo - a), c, lo, hi, mu, sigma))
            else:
                root = brentq(g, lo, hi, xtol=1e-15, rtol=8.9e-16)
                total += abs(
                    _linear_minus_phi_integral(f_a + c * (lo - a), c, lo, root, mu, sigma)
                )
                total += abs(
                    _linear_minus_phi_integral(
                        f_a + c * (root - a), c, root, hi, mu, sigma
                    )
                )
    return float(total)


# ---------------------------------------------------------------------------
# Empirical distances
# ---------------------------------------------------------------------------


class DistanceMode(str, Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class DistanceReport:
    """Kolmogorov and Wasserstein distances with confidence half-widths.

    Exact computations carry zero half-widths; Monte Carlo estimates carry
    the 95% DKW band for the Kolmogorov distance and the band scaled by the
    observed sample range for the Wasserstein integral.
    """

    kolmogorov: float
    wasserstein: float
    kolmogorov_ci_halfwidth: float
    wasserstein_ci_halfwidth: float
    mode: DistanceMode

    def __post_init__(self) -> None:
        if self.kolmogorov < 0 or self.wasserstein < 0:
            raise InvalidDistribution("distances are nonnegative")
        if self.kolmogorov > 1.0 + 1e-12:
            raise InvalidDistribution("Kolmogorov distance cannot exceed 1")

    def to_jsonable(self) -> dict:
        return {
            "kolmogorov": self.kolmogorov,
            "wasserstein": self.wasserstein,
            "kolmogorov_ci_halfwidth": self.kolmogorov_ci_halfwidth,
            "wasserstein_ci_halfwidth": self.wasserstein_ci_halfwidth,
            "mode": self.mode.value,
        }


def dkw_halfwidth(n: int, alpha: float = DKW_ALPHA) -> float:
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def exact_distance_report(
    law: Union[FiniteDistribution, SegmentMixture], mu: float, sigma: float
) -> DistanceReport:
    return DistanceReport(
        kolmogorov=kolmogorov_vs_normal(law, mu, sigma),
        wasserstein=wasserstein_vs_normal(law, mu, sigma),
        kolmogorov_ci_halfwidth=0.0,
        wasserstein_ci_halfwidth=0.0,
        mode=DistanceMode.EXACT,
    )


def empirical_distances(
    samples: Sequence[float], mu: float, sigma: float
) -> DistanceReport:
    """Distances of the empirical law of ``samples`` to N(mu, sigma^2).

    Kolmogorov is the exact supremum of |empirical CDF - Phi| (both CDF
    limits checked at every sample point). Wasserstein integrates the
    absolute CDF difference in closed form piece by piece. Works from the
    value-count representation, so repeated values cost nothing extra.
    """
    arr = np.asarray(samples, dtype=float)
    n = arr.size
    if n < 2:
        raise TooFewSamples("need at least two samples")
    values, counts = np.unique(arr, return_counts=True)
    return _distances_from_weighted_values(
        values, counts.astype(float) / n, float(mu), float(sigma), n
    )


def distances_from_counts(
    values: Sequence[float], counts: Sequence[int], mu: float, sigma: float
) -> DistanceReport:
    """Same as :func:`empirical_distances` but from a value -> count table."""
    v = np.asarray(values, dtype=float)
    c = np.asarray(counts, dtype=np.int64)
    keep = c > 0
    v, c = v[keep], c[keep]
    n = int(c.sum())
    if n < 2:
        raise TooFewSamples("need at least two samples")
    order = np.argsort(v)
    return _distances_from_weighted_values(
        v[order], c[order].astype(float) / n, float(mu), float(sigma), n
    )


def _distances_from_weighted_values(
    values: np.ndarray, weights: np.ndarray, mu: float, sigma: float, n: int
) -> DistanceReport:
    if sigma <= 0:
        raise InvalidDistribution("sigma must be positive")
    t = (values - mu) / sigma
    phi_at = ndtr(t)
    f_right = np.cumsum(weights)
    f_right[-1] = 1.0
    f_left = f_right - weights
    d_k = float(
        max(np.max(np.abs(f_right - phi_at)), np.max(np.abs(f_left - phi_at)))
    )

    # Wasserstein: piecewise constant CDF against Phi, all pieces closed form.
    psi = t * phi_at + np.exp(-0.5 * t * t) / SQRT_2PI
    total = sigma * psi[0]  # left tail: integral of Phi up to the minimum
    total += sigma * (psi[-1] - t[-1])  # right tail: integral of 1 - Phi
    if values.size > 1:
        c = f_right[:-1]
        a, b = values[:-1], values[1:]
        pa, pb = phi_at[:-1], phi_at[1:]
        psia, psib = psi[:-1], psi[1:]
        seg_phi = sigma * (psib - psia)  # integral of Phi over [a, b]
        seg_c = c * (b - a)
        below = pb <= c  # Phi below the step on the whole piece
        above = pa >= c
        crossing = ~(below | above)
        contrib = np.where(below, seg_c - seg_phi, seg_phi - seg_c)
        if np.any(crossing):
            xc = mu + sigma * ndtri(c[crossing])
            tc = (xc - mu) / sigma
            psic = tc * ndtr(tc) + np.exp(-0.5 * tc * tc) / SQRT_2PI
            left_part = c[crossing] * (xc - a[crossing]) - sigma * (psic - psia[crossing])
            right_part = sigma * (psib[crossing] - psic) - c[crossing] * (
                b[crossing] - xc
            )
            contrib = contrib.copy()
            contrib[crossing] = np.abs(left_part) + np.abs(right_part)
        total += float(np.sum(contrib))

    eps = dkw_halfwidth(n)
    return DistanceReport(
        kolmogorov=d_k,
        wasserstein=float(total),
        kolmogorov_ci_halfwidth=eps,
        # integrating the DKW band over the occupied range; heuristic, documented
        wasserstein_ci_halfwidth=eps * float(values[-1] - values[0]),
        mode=DistanceMode.MONTE_CARLO,
    )


# ---------------------------------------------------------------------------
# Test-function families for the pseudo-metric
# ---------------------------------------------------------------------------


class FamilyKind(str, Enum):
    MONOMIALS = "monomials"
    SMOOTHED_INDICATORS = "smoothed_indicators"
    LIPSCHITZ_SUITE = "lipschitz_suite"


@dataclass(frozen=True)
class TestFunctionFamily:
    """A finite family of test functions h for sup_h |E h(X) - E h(Y)|.

    ``monomials(k)`` gives w -> w^j for j = 1..k. ``smoothed_indicators``
    gives unit-slope ramps h_z(x) = clip(1 - (x - z), 0, 1), each with
    Lipschitz constant exactly 1. ``lipschitz_suite`` is a small fixed set
    of Lipschitz-1 functions used to sanity-check Wasserstein computations
    from below.
    """

    __test__ = False  # despite the domain name, not a pytest class

    kind: FamilyKind
    max_degree: int = 0
    grid: tuple[float, ...] = ()

    @classmethod
    def monomials(cls, max_degree: int) -> "TestFunctionFamily":
        if max_degree < 1:
            raise ValueError("max_degree must be >= 1")
        return cls(kind=FamilyKind.MONOMIALS, max_degree=max_degree)

    @classmethod
    def smoothed_indicators(cls, grid: Sequence[float]) -> "TestFunctionFamily":
        return cls(kind=FamilyKind.SMOOTHED_INDICATORS, grid=tuple(float(z) for z in grid))

    @classmethod
    def lipschitz_suite(cls) -> "TestFunctionFamily":
        return cls(kind=FamilyKind.LIPSCHITZ_SUITE)

    def functions(self) -> tuple[Callable[[float], float], ...]:
        if self.kind is FamilyKind.MONOMIALS:
            return tuple(
                (lambda w, k=k: float(w) ** k) for k in range(1, self.max_degree + 1)
            )
        if self.kind is FamilyKind.SMOOTHED_INDICATORS:
            def ramp(z: float) -> Callable[[float], float]:
                def h(x: float) -> float:
                    return min(1.0, max(0.0, 1.0 - (float(x) - z)))

                return h

            return tuple(ramp(z) for z in self.grid)
        return (
            lambda x: float(x),
            lambda x: abs(float(x)),
            lambda x: abs(float(x) - 1.0),
            lambda x: abs(float(x) + 1.0),
            lambda x: min(1.0, max(-1.0, float(x))),
            lambda x: math.sin(float(x)),
        )


def lipschitz_constant_estimate(
    f: Callable[[float], float], lo: float, hi: float, steps: int = 2000
) -> float:
    """Max slope of f over a fine grid; used to check Lipschitz invariants."""
    xs = np.linspace(lo, hi, steps)
    ys = np.array([f(x) for x in xs])
    return float(np.max(np.abs(np.diff(ys) / np.diff(xs))))
