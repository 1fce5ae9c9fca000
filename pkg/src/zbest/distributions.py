"""Finite laws on the real line: atom lists and atom/segment mixtures.

Two substrates power every exact computation in this package:

* :class:`FiniteDistribution` - a purely atomic law, the universal carrier
  for targets, enumerated pmfs and empirical laws.
* :class:`SegmentMixture` - a mixture of atoms and uniform-on-interval
  segments, the carrier for interpolated (zero-biased) laws.

Both support exact rational arithmetic: if every value and probability is an
``int`` or :class:`fractions.Fraction`, all derived quantities (moments,
CDF values, the zero-bias density) stay exact. With floats, the documented
tolerances apply.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence, Union

from .errors import InvalidDistribution, ZeroVariance

Number = Union[int, float, Fraction]

#: absolute tolerance for float-mode normalization checks
MASS_TOL = 1e-12


def is_exact(x: Number) -> bool:
    """True when x participates in exact rational arithmetic."""
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def all_exact(xs: Iterable[Number]) -> bool:
    return all(is_exact(x) for x in xs)


def exact_div(a: Number, b: Number) -> Number:
    """Division that stays rational when both operands are exact."""
    if is_exact(a) and is_exact(b):
        return Fraction(a) / Fraction(b)
    return a / b


def number_to_jsonable(x: Number):
    """Floats pass through; rationals become 'num/den' strings."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return f"{x}/1"
    return float(x)


def number_from_jsonable(x) -> Number:
    if isinstance(x, str):
        num, _, den = x.partition("/")
        return Fraction(int(num), int(den) if den else 1)
    return float(x)


def _check_mass(total: Number, exact: bool, what: str) -> None:
    if exact:
        if total != 1:
            raise InvalidDistribution(f"{what}: mass sums to {total}, expected 1")
    elif abs(float(total) - 1.0) > MASS_TOL:
        raise InvalidDistribution(f"{what}: mass sums to {float(total)!r}, expected 1")


@dataclass(frozen=True)
class FiniteDistribution:
    """A probability law carried by finitely many atoms.

    Atoms are canonicalized on construction: duplicated values merge by
    adding mass, exact-zero-mass atoms are dropped, and atoms are sorted by
    value. Probabilities must be nonnegative and sum to one (exactly in
    rational mode, within ``MASS_TOL`` otherwise).
    """

    atoms: tuple[tuple[Number, Number], ...]

    def __init__(self, atoms: Iterable[tuple[Number, Number]]):
        merged: dict[Number, Number] = {}
        for value, prob in atoms:
            if isinstance(prob, float) and prob < 0 and prob > -MASS_TOL:
                prob = 0.0
            if (is_exact(prob) and prob < 0) or (not is_exact(prob) and prob < 0):
                raise InvalidDistribution(f"negative probability {prob!r} at value {value!r}")
            if value in merged:
                merged[value] = merged[value] + prob
            else:
                merged[value] = prob
        cleaned = tuple(
            (v, p) for v, p in sorted(merged.items(), key=lambda vp: float(vp[0])) if p != 0
        )
        if not cleaned:
            raise InvalidDistribution("a finite distribution needs at least one atom")
        total = sum(p for _, p in cleaned)
        _check_mass(total, all_exact(p for _, p in cleaned), "FiniteDistribution")
        object.__setattr__(self, "atoms", cleaned)

    @property
    def exact(self) -> bool:
        return all(is_exact(v) and is_exact(p) for v, p in self.atoms)

    @property
    def values(self) -> tuple[Number, ...]:
        return tuple(v for v, _ in self.atoms)

    @property
    def support_min(self) -> Number:
        return self.atoms[0][0]

    @property
    def support_max(self) -> Number:
        return self.atoms[-1][0]

    def expectation(self, f: Callable[[Number], Number]) -> Number:
        return sum(p * f(v) for v, p in self.atoms)

    def moment(self, k: int) -> Number:
        return sum(p * v**k for v, p in self.atoms)

    @property
    def mean(self) -> Number:
        return self.moment(1)

    @property
    def variance(self) -> Number:
        m = self.mean
        return sum(p * (v - m) ** 2 for v, p in self.atoms)

    def cdf(self, x: Number) -> Number:
        return sum(p for v, p in self.atoms if v <= x)

    def cdf_left(self, x: Number) -> Number:
        """Left limit F(x-)."""
        return sum(p for v, p in self.atoms if v < x)

    def prob_of(self, value: Number) -> Number:
        for v, p in self.atoms:
            if v == value:
                return p
        return 0 if self.exact else 0.0

    def standardized(self) -> "FiniteDistribution":
        """Affine image ((v - mean)/std, p); drops to floats (std is a sqrt)."""
        m = float(self.mean)
        s = float(self.variance) ** 0.5
        if s == 0.0:
            raise ZeroVariance("cannot standardize a degenerate law")
        return FiniteDistribution(((float(v) - m) / s, float(p)) for v, p in self.atoms)

    def scaled(self, a: Number) -> "FiniteDistribution":
        if a == 0:
            raise InvalidDistribution("scale factor must be nonzero")
        return FiniteDistribution((a * v, p) for v, p in self.atoms)

    def shifted(self, c: Number) -> "FiniteDistribution":
        return FiniteDistribution((v + c, p) for v, p in self.atoms)

    def to_jsonable(self) -> dict:
        return {
            "atoms": [[number_to_jsonable(v), number_to_jsonable(p)] for v, p in self.atoms]
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "FiniteDistribution":
        return cls(
            (number_from_jsonable(v), number_from_jsonable(p)) for v, p in obj["atoms"]
        )

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True)


def zero_bias_density_oracle(dist: FiniteDistribution, w: Number) -> Number:
    """Density of the zero-bias law of ``dist`` at ``w``.

    Evaluates E[(W - mu) 1(W > w)] / Var(W), the ground-truth density used
    to verify every interpolated zero-bias construction independently of how
    that construction was carried out.
    """
    var = dist.variance
    if var == 0:
        raise ZeroVariance("zero-bias density needs positive variance")
    mu = dist.mean
    acc = sum(p * (v - mu) for v, p in dist.atoms if v > w)
    return exact_div(acc, var)


def zero_bias_oracle_cdf(dist: FiniteDistribution, x: Number) -> Number:
    """CDF implied by :func:`zero_bias_density_oracle`.

    The oracle density is constant between consecutive atoms of ``dist``, so
    its integral up to ``x`` is an exact finite sum of rectangle areas.
    """
    values = list(dist.values)
    var = dist.variance
    if var == 0:
        raise ZeroVariance("zero-bias density needs positive variance")
    acc: Number = 0
    for left, right in zip(values[:-1], values[1:]):
        if x <= left:
            break
        dens = zero_bias_density_oracle(dist, left)
        upper = x if x < right else right
        acc = acc + dens * (upper - left)
    return acc


@dataclass(frozen=True)
class SegmentMixture:
    """Mixture of point masses and uniform-on-interval segments.

    Each segment ``(lo, hi, prob)`` with ``lo < hi`` carries the constant
    density ``prob / (hi - lo)`` on ``(lo, hi)``. Segment representations are
    not unique (overlaps are allowed and never merged), so equality of laws
    is decided by comparing CDFs, not components.
    """

    atoms: tuple[tuple[Number, Number], ...]
    segments: tuple[tuple[Number, Number, Number], ...]

    def __init__(
        self,
        atoms: Iterable[tuple[Number, Number]] = (),
        segments: Iterable[tuple[Number, Number, Number]] = (),
    ):
        merged: dict[Number, Number] = {}
        for value, prob in atoms:
            if prob < 0:
                raise InvalidDistribution(f"negative atom mass {prob!r}")
            merged[value] = merged.get(value, 0) + prob
        atom_t = tuple(
            (v, p) for v, p in sorted(merged.items(), key=lambda vp: float(vp[0])) if p != 0
        )
        seg_list = []
        for lo, hi, prob in segments:
            if not lo < hi:
                raise InvalidDistribution(f"segment needs lo < hi, got [{lo!r}, {hi!r}]")
            if prob < 0:
                raise InvalidDistribution(f"negative segment mass {prob!r}")
            if prob != 0:
                seg_list.append((lo, hi, prob))
        seg_t = tuple(sorted(seg_list, key=lambda s: (float(s[0]), float(s[1]))))
        total = sum(p for _, p in atom_t) + sum(p for _, _, p in seg_t)
        numbers = [p for _, p in atom_t] + [p for _, _, p in seg_t]
        if not numbers:
            raise InvalidDistribution("a mixture needs at least one component")
        _check_mass(total, all_exact(numbers), "SegmentMixture")
        object.__setattr__(self, "atoms", atom_t)
        object.__setattr__(self, "segments", seg_t)

    @property
    def exact(self) -> bool:
        return all_exact(
            [x for v, p in self.atoms for x in (v, p)]
            + [x for lo, hi, p in self.segments for x in (lo, hi, p)]
        )

    @property
    def support_min(self) -> Number:
        cands = [v for v, _ in self.atoms] + [lo for lo, _, _ in self.segments]
        return min(cands, key=float)

    @property
    def support_max(self) -> Number:
        cands = [v for v, _ in self.atoms] + [hi for _, hi, _ in self.segments]
        return max(cands, key=float)

    def cdf(self, x: Number) -> Number:
        acc: Number = 0
        for v, p in self.atoms:
            if v <= x:
                acc = acc + p
        for lo, hi, p in self.segments:
            if x >= hi:
                acc = acc + p
            elif x > lo:
                acc = acc + p * exact_div(x - lo, hi - lo)
        return acc

    def cdf_left(self, x: Number) -> Number:
        acc: Number = 0
        for v, p in self.atoms:
            if v < x:
                acc = acc + p
        for lo, hi, p in self.segments:
            if x >= hi:
                acc = acc + p
            elif x > lo:
                acc = acc + p * exact_div(x - lo, hi - lo)
        return acc

    def moment(self, k: int) -> Number:
        """E[X^k]; segment contribution integrates the monomial in closed form."""
        acc: Number = sum(p * v**k for v, p in self.atoms)
        for lo, hi, p in self.segments:
            acc = acc + p * exact_div(hi ** (k + 1) - lo ** (k + 1), (k + 1) * (hi - lo))
        return acc

    @property
    def mean(self) -> Number:
        return self.moment(1)

    def derivative_moment(self, k: int) -> Number:
        """E[k X^(k-1)], the right-hand side of the zero-bias identity."""
        if k == 0:
            return 0
        if k == 1:
            return sum(p for _, p in self.atoms) + sum(p for _, _, p in self.segments)
        acc: Number = sum(p * k * v ** (k - 1) for v, p in self.atoms)
        for lo, hi, p in self.segments:
            acc = acc + p * exact_div(hi**k - lo**k, hi - lo)
        return acc

    def scaled(self, a: Number) -> "SegmentMixture":
        if a == 0:
            raise InvalidDistribution("scale factor must be nonzero")
        atoms = [(a * v, p) for v, p in self.atoms]
        if a > 0:
            segs = [(a * lo, a * hi, p) for lo, hi, p in self.segments]
        else:
            segs = [(a * hi, a * lo, p) for lo, hi, p in self.segments]
        return SegmentMixture(atoms, segs)

    def shifted(self, c: Number) -> "SegmentMixture":
        return SegmentMixture(
            [(v + c, p) for v, p in self.atoms],
            [(lo + c, hi + c, p) for lo, hi, p in self.segments],
        )

    def to_jsonable(self) -> dict:
        return {
            "atoms": [[number_to_jsonable(v), number_to_jsonable(p)] for v, p in self.atoms],
            "segments": [
                [number_to_jsonable(lo), number_to_jsonable(hi), number_to_jsonable(p)]
                for lo, hi, p in self.segments
            ],
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "SegmentMixture":
        return cls(
            ((number_from_jsonable(v), number_from_jsonable(p)) for v, p in obj["atoms"]),
            (
                (
                    number_from_jsonable(lo),
                    number_from_jsonable(hi),
                    number_from_jsonable(p),
                )
                for lo, hi, p in obj["segments"]
            ),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True)


def cdf_grid(
    law: Union[FiniteDistribution, SegmentMixture], points: int = 101
) -> tuple[list[Number], list[Number]]:
    """Equispaced grid spanning the support, with CDF values at each point."""
    lo, hi = law.support_min, law.support_max
    if points < 2:
        raise ValueError("need at least two grid points")
    step = exact_div(hi - lo, points - 1)
    xs = [lo + step * i for i in range(points)]
    return xs, [law.cdf(x) for x in xs]


def max_cdf_difference(
    a: Union[FiniteDistribution, SegmentMixture],
    b: Union[FiniteDistribution, SegmentMixture],
    points: int = 101,
) -> Number:
    """Max |F_a - F_b| over a shared grid spanning both supports.

    When both laws are exact the grid and the differences are rational, so
    two representations of the same law compare equal to literal zero.
    """
    if a.exact and b.exact:
        lo = min(a.support_min, b.support_min, key=float)
        hi = max(a.support_max, b.support_max, key=float)
        if hi == lo:
            hi = lo + 1
        xs = [lo + exact_div((hi - lo) * i, points - 1) for i in range(points)]
        return max(abs(a.cdf(x) - b.cdf(x)) for x in xs)
    lo = min(float(a.support_min), float(b.support_min))
    hi = max(float(a.support_max), float(b.support_max))
    if hi == lo:
        hi = lo + 1.0
    xs = [lo + (hi - lo) * i / (points - 1) for i in range(points)]
    return max(abs(float(a.cdf(x)) - float(b.cdf(x))) for x in xs)
