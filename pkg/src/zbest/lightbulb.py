"""The lightbulb process: toggle matrices, couplings, and exact moments.

n bulbs start off; at stage r (1-based) a uniformly random r-subset of bulbs
is toggled, independently across stages. Bulb i ends on iff its column of
the toggle matrix has odd sum, and Y counts bulbs that are on.

Rows are stored as integer bitmasks (bit i = bulb i), so the final state is
the XOR-fold of the rows and Y is a popcount. Row index r_idx is 0-based
throughout this module: row r_idx belongs to stage r_idx + 1 and carries
exactly r_idx + 1 ones. The "middle" row is index n//2 - 1 (stage n/2).

The size-bias coupling swaps the middle-stage toggles of a random pair
(I, J) with opposite toggle values whenever bulb I is off, raising Y by 2
exactly when both bulbs were off. The follow-up ("dagger") construction
applies one of four stage-swap involutions chosen by the final states of
bulbs I and J, using an auxiliary stage S and a swap partner (K or L) drawn
from the entries of row S with the opposite toggle value. The stage S may
be any variable supported off the middle stage; this implementation uses
stages {2, ..., n-2} \\ {n/2} when n >= 6, for which the partner candidate
sets are provably nonempty. For n = 4 only stages {1, 3} exist, and the
needed candidate set is empty with probability exactly 1/8, in which case
:class:`~zbest.errors.EmptyCandidateSet` is raised rather than resampling
(see :mod:`zbest.lightbulb_exact` for the exact accounting).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    EmptyCandidateSet,
    InvalidDistribution,
    NTooSmall,
    OddN,
    PreconditionViolation,
)


@dataclass(frozen=True)
class ToggleMatrix:
    """A configuration: row r_idx is a bitmask with exactly r_idx + 1 ones."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise NTooSmall("need n >= 1")
        if len(self.rows) != self.n:
            raise InvalidDistribution(f"expected {self.n} rows, got {len(self.rows)}")
        full = (1 << self.n) - 1
        for r_idx, mask in enumerate(self.rows):
            if mask & ~full:
                raise InvalidDistribution(f"row {r_idx} has bits outside [0, n)")
            if bin(mask).count("1") != r_idx + 1:
                raise InvalidDistribution(
                    f"row {r_idx} must have exactly {r_idx + 1} ones"
                )

    def bit(self, r_idx: int, i: int) -> int:
        return (self.rows[r_idx] >> i) & 1

    @property
    def middle_row(self) -> int:
        """Row index of stage n/2 (only meaningful for even n)."""
        return self.n // 2 - 1

    def parity_mask(self) -> int:
        acc = 0
        for mask in self.rows:
            acc ^= mask
        return acc


def final_states(x: ToggleMatrix) -> tuple[tuple[int, ...], int]:
    """Per-bulb on/off indicators (column sums mod 2) and their total Y."""
    par = x.parity_mask()
    indicators = tuple((par >> i) & 1 for i in range(x.n))
    return indicators, bin(par).count("1")


def swap_toggles(x: ToggleMatrix, r_idx: int, i: int, j: int) -> ToggleMatrix:
    """Exchange the stage-(r_idx+1) toggles of bulbs i and j.

    An involution; when the two toggles are equal the matrix is unchanged.
    """
    if not 0 <= r_idx < x.n:
        raise ValueError(f"row index {r_idx} out of range")
    if not (0 <= i < x.n and 0 <= j < x.n):
        raise ValueError(f"bulb indices ({i}, {j}) out of range")
    mask = x.rows[r_idx]
    if ((mask >> i) & 1) != ((mask >> j) & 1):
        mask ^= (1 << i) | (1 << j)
    rows = list(x.rows)
    rows[r_idx] = mask
    return ToggleMatrix(x.n, tuple(rows))


def sample_configuration(n: int, rng: np.random.Generator) -> ToggleMatrix:
    """Draw a configuration: row r an independent uniform (r+1)-subset.

    Each row comes from a partial Fisher-Yates pass over a shared index
    array; fresh uniform swaps make every prefix uniform regardless of the
    array's previous state, so rows are independent.
    """
    if n < 1:
        raise NTooSmall("need n >= 1")
    idx = list(range(n))
    rows = []
    for size in range(1, n + 1):
        mask = 0
        for jj in range(size):
            kk = int(rng.integers(jj, n))
            idx[jj], idx[kk] = idx[kk], idx[jj]
            mask |= 1 << idx[jj]
        rows.append(mask)
    return ToggleMatrix(n, tuple(rows))


def _nth_index_with_bit(mask: int, n: int, want: int, rank: int, skip: int = -1) -> int:
    seen = 0
    for c in range(n):
        if c == skip:
            continue
        if ((mask >> c) & 1) == want:
            if seen == rank:
                return c
            seen += 1
    raise EmptyCandidateSet(f"no index with toggle {want} at rank {rank}")


def _require_even_ge4(n: int) -> None:
    if n % 2:
        raise OddN(f"the coupling construction needs even n, got {n}")
    if n < 4:
        raise NTooSmall(f"the coupling construction needs n >= 4, got {n}")


def sample_size_bias_coupling(
    x: ToggleMatrix, rng: np.random.Generator
) -> tuple[ToggleMatrix, int, int]:
    """One step of the size-bias coupling: returns (x'', i, j).

    I is uniform on the bulbs; J is uniform on the n/2 bulbs whose middle
    toggle differs from bulb I's. The coupled configuration swaps the middle
    toggles of I and J when bulb I is off and is unchanged otherwise, so
    Y'' - Y = 2 exactly when both bulbs were off, else 0.
    """
    _require_even_ge4(x.n)
    n = x.n
    mid = x.middle_row
    i = int(rng.integers(0, n))
    b_i = x.bit(mid, i)
    rank = int(rng.integers(0, n // 2))
    j = _nth_index_with_bit(x.rows[mid], n, 1 - b_i, rank)
    par = x.parity_mask()
    if (par >> i) & 1:
        return x, i, j
    return swap_toggles(x, mid, i, j), i, j


def dagger_stage_rows(n: int) -> tuple[int, ...]:
    """Row indices from which the auxiliary stage S is drawn uniformly.

    For n >= 6: stages {2, ..., n-2} without n/2 (row indices 1..n-3 minus
    the middle row); these stages carry at least two toggles of each value,
    so the swap-partner candidate sets are never empty. For n = 4 the only
    admissible stages are {1, 3}, which cannot satisfy that guarantee.
    """
    _require_even_ge4(n)
    if n == 4:
        return (0, 2)
    mid = n // 2 - 1
    return tuple(r for r in range(1, n - 2) if r != mid)


@dataclass(frozen=True)
class CouplingSample:
    """One realized dagger coupling step with all of its randomness.

    ``s`` is the auxiliary stage's row index; ``k``/``l`` are the swap
    partners, present only for the cases that use them. Invariants checked
    on construction: the middle toggles of (i, j) differ in ``x``,
    ``y_ddagger == y_dagger + 2``, and ``|y_dagger - y| <= 2``.
    """

    x: ToggleMatrix
    i: int
    j: int
    s: int | None
    k: int | None
    l: int | None
    x_dagger: ToggleMatrix
    x_ddagger: ToggleMatrix
    y: int
    y_dagger: int
    y_ddagger: int

    def __post_init__(self) -> None:
        mid = self.x.middle_row
        if self.x.bit(mid, self.i) == self.x.bit(mid, self.j):
            raise PreconditionViolation(
                f"middle toggles of bulbs {self.i} and {self.j} must differ"
            )
        if self.y_ddagger != self.y_dagger + 2:
            raise InvalidDistribution("y_ddagger must equal y_dagger + 2")
        if abs(self.y_dagger - self.y) > 2:
            raise InvalidDistribution("|y_dagger - y| must be at most 2")


def sample_dagger_coupling(
    x: ToggleMatrix, i: int, j: int, rng: np.random.Generator
) -> CouplingSample:
    """Apply the case-dependent involution that turns bulbs i and j off.

    Requires the middle toggles of i and j to differ (the event on which
    (I, J) lives). Draws S uniformly from :func:`dagger_stage_rows`, then,
    only for the mixed final-state cases, a swap partner uniform on the
    opposite-toggle entries of row S excluding the other pinned bulb.
    Raises :class:`EmptyCandidateSet` when that set is empty (possible only
    for n = 4), rather than silently altering the construction.
    """
    _require_even_ge4(x.n)
    n = x.n
    mid = x.middle_row
    if x.bit(mid, i) == x.bit(mid, j):
        raise PreconditionViolation(
            f"middle toggles of bulbs {i} and {j} must differ"
        )
    par = x.parity_mask()
    a_i = (par >> i) & 1
    a_j = (par >> j) & 1
    y = bin(par).count("1")

    stages = dagger_stage_rows(n)
    s = stages[int(rng.integers(0, len(stages)))]
    k: int | None = None
    l: int | None = None

    if (a_i, a_j) == (0, 0):
        x_dagger = x
    elif (a_i, a_j) == (1, 1):
        x_dagger = swap_toggles(x, mid, i, j)
    else:
        if a_i == 1:
            ref, excl = i, j
        else:
            ref, excl = j, i
        srow = x.rows[s]
        want = 1 - ((srow >> ref) & 1)
        count = sum(
            1 for c in range(n) if c != excl and ((srow >> c) & 1) == want
        )
        if count == 0:
            raise EmptyCandidateSet(
                f"stage row {s}: no swap partner with toggle {want} apart from "
                f"bulb {excl} (n = {n})"
            )
        rank = int(rng.integers(0, count))
        partner = _nth_index_with_bit(srow, n, want, rank, skip=excl)
        if a_i == 1:
            k = partner
        else:
            l = partner
        x_dagger = swap_toggles(x, s, ref, partner)

    x_ddagger = swap_toggles(x_dagger, mid, i, j)
    y_dagger = bin(x_dagger.parity_mask()).count("1")
    y_ddagger = bin(x_ddagger.parity_mask()).count("1")
    return CouplingSample(
        x=x,
        i=i,
        j=j,
        s=s,
        k=k,
        l=l,
        x_dagger=x_dagger,
        x_ddagger=x_ddagger,
        y=y,
        y_dagger=y_dagger,
        y_ddagger=y_ddagger,
    )


def zero_bias_sample(n: int, rng: np.random.Generator) -> tuple[int, float]:
    """Draw (Y, Y*) with Y* carrying the Y-zero-bias law.

    Composes a fresh configuration, the (I, J) law given it, the dagger
    coupling, and an independent uniform: Y* = Y_dagger + 2U. Pointwise
    |Y* - Y| <= |Y_dagger - Y| + 2U <= 4. Randomness is consumed in the
    fixed order rows ascending, I, J, S, swap partner (when used), U.
    """
    _require_even_ge4(n)
    x = sample_configuration(n, rng)
    mid = x.middle_row
    i = int(rng.integers(0, n))
    rank = int(rng.integers(0, n // 2))
    j = _nth_index_with_bit(x.rows[mid], n, 1 - x.bit(mid, i), rank)
    cs = sample_dagger_coupling(x, i, j, rng)
    u = float(rng.random())
    return cs.y, cs.y_dagger + 2.0 * u


@dataclass(frozen=True)
class LightbulbMoments:
    """Exact mean, variance, and stage-correlation factor of Y.

    mu = n/2; sigma2 = (n/4)(1 + (n-1) lambda_n) with
    lambda_n = prod_{s=1..n} (1 - 4 s (n - s) / (n (n - 1))). For even n,
    lambda_n <= 0 and sigma2 <= n/4.
    """

    n: int
    mu: Fraction
    sigma2: Fraction
    lambda_n: Fraction

    def __post_init__(self) -> None:
        if self.n % 2 == 0:
            if self.lambda_n > 0:
                raise InvalidDistribution("even n requires lambda_n <= 0")
            if self.sigma2 > Fraction(self.n, 4):
                raise InvalidDistribution("even n requires sigma2 <= n/4")

    @property
    def sigma(self) -> float:
        return float(self.sigma2) ** 0.5


def lightbulb_moments(n: int) -> LightbulbMoments:
    """Exact moments of Y in rational arithmetic.

    For even n the product telescopes into
    -(1/(n-1)) * prod_{s<n/2} (1 - 4s(n-s)/(n(n-1)))^2; both forms are
    evaluated and must agree exactly.
    """
    if n < 2:
        raise NTooSmall("moments need n >= 2")
    denom = n * (n - 1)
    lam = Fraction(1)
    for s in range(1, n + 1):
        lam *= 1 - Fraction(4 * s * (n - s), denom)
    if n % 2 == 0:
        partial = Fraction(1)
        for s in range(1, n // 2):
            partial *= 1 - Fraction(4 * s * (n - s), denom)
        folded = -Fraction(1, n - 1) * partial * partial
        if folded != lam:
            raise RuntimeError(
                f"even-n product identity failed at n={n}: {lam} != {folded}"
            )
    sigma2 = Fraction(n, 4) * (1 + (n - 1) * lam)
    return LightbulbMoments(n=n, mu=Fraction(n, 2), sigma2=sigma2, lambda_n=lam)
