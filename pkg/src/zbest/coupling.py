"""Generalized Stein coupling triples on finite spaces, and their reweighting.

A coupling here is a finite joint law of three variables (W'', W', G) under a
working measure Q, paired with the target law of W under the base measure.
The defining identity is

    E[(W - mu) f(W)] = E_Q[ G (f(W'') - f(W')) ]        for polynomials f,

which contains classical Stein couplings (W' = W, Q = P), exchangeable
pairs, and size-bias couplings as special cases. The central manipulation is
a change of measure: multiplying atom probabilities by a nonnegative
unit-mean factor R and dividing the gain G by R yields a new coupling of the
same target. Choosing R = (W'' - W') G / Var(W) makes the difference-gain
product constant, and linear interpolation between W' and W'' by an
independent uniform then carries the zero-bias law of W.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .distributions import (
    FiniteDistribution,
    Number,
    SegmentMixture,
    all_exact,
    exact_div,
    is_exact,
)
from .errors import (
    DegenerateCoordinate,
    InvalidDistribution,
    MarginalMismatch,
    NegativeWeight,
    NonzeroMean,
    NotExchangeable,
    NotMonotone,
    NotNormalized,
    RegressionViolation,
    SignViolation,
    SupportViolation,
    ZeroVariance,
)

MOMENT_TOL = 1e-12


@dataclass(frozen=True)
class ZbestTripleLaw:
    """Finite joint law of (W'', W', G) under Q, plus the target law of W.

    ``triple_atoms`` are (w_pp, w_p, g, prob) rows. ``mu`` and ``sigma2``
    must equal the target's mean and variance (exactly in rational mode,
    within 1e-12 otherwise); the coupling identity itself is checked by
    :func:`verify_zbest_identity`, not at construction, so that corrupted
    triples can be built deliberately and detected.
    """

    triple_atoms: tuple[tuple[Number, Number, Number, Number], ...]
    target: FiniteDistribution
    mu: Number
    sigma2: Number

    def __init__(
        self,
        triple_atoms: Iterable[tuple[Number, Number, Number, Number]],
        target: FiniteDistribution,
        mu: Number | None = None,
        sigma2: Number | None = None,
    ):
        atoms = tuple(triple_atoms)
        if not atoms:
            raise InvalidDistribution("a triple law needs at least one atom")
        for _, _, _, p in atoms:
            if p < 0:
                raise InvalidDistribution(f"negative triple probability {p!r}")
        total = sum(p for *_, p in atoms)
        exact = all_exact([x for row in atoms for x in row])
        if exact:
            if total != 1:
                raise InvalidDistribution(f"triple probabilities sum to {total}, expected 1")
        elif abs(float(total) - 1.0) > MOMENT_TOL:
            raise InvalidDistribution(
                f"triple probabilities sum to {float(total)!r}, expected 1"
            )
        t_mu = target.mean
        t_var = target.variance
        mu = t_mu if mu is None else mu
        sigma2 = t_var if sigma2 is None else sigma2
        if _differs(mu, t_mu) or _differs(sigma2, t_var):
            raise InvalidDistribution(
                "mu/sigma2 must match the target's mean and variance"
            )
        if not sigma2 > 0:
            raise ZeroVariance("target variance must be positive")
        object.__setattr__(self, "triple_atoms", atoms)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def exact(self) -> bool:
        return (
            all_exact([x for row in self.triple_atoms for x in row])
            and self.target.exact
        )

    def differences(self) -> tuple[Number, ...]:
        """Per-atom D = W'' - W'."""
        return tuple(w_pp - w_p for w_pp, w_p, _, _ in self.triple_atoms)


def _differs(a: Number, b: Number) -> bool:
    if is_exact(a) and is_exact(b):
        return a != b
    return abs(float(a) - float(b)) > MOMENT_TOL


def trivial_triple(dist: FiniteDistribution) -> ZbestTripleLaw:
    """The coupling (W, 0, W) of a centered law: E[W f(W)] = E[W (f(W) - f(0))]."""
    if _differs(dist.mean, 0):
        raise InvalidDistribution("trivial triple requires a centered target")
    zero: Number = 0 if dist.exact else 0.0
    atoms = tuple((v, zero, v, p) for v, p in dist.atoms)
    return ZbestTripleLaw(atoms, dist)


def verify_zbest_identity(triple: ZbestTripleLaw, degree_max: int) -> Number:
    """Max residual of the coupling identity over monomials f(w) = w^k.

    Both sides are exact finite sums: the left over the target's atoms, the
    right over the triple's atoms. Returns
    max_{k=1..degree_max} |E[(W - mu) W^k] - E_Q[G ((W'')^k - (W')^k)]|.
    """
    if degree_max < 1:
        raise ValueError("degree_max must be >= 1")
    mu = triple.mu
    worst: Number = 0
    for k in range(1, degree_max + 1):
        lhs = sum(p * (v - mu) * v**k for v, p in triple.target.atoms)
        rhs = sum(p * g * (w_pp**k - w_p**k) for w_pp, w_p, g, p in triple.triple_atoms)
        resid = abs(lhs - rhs)
        if resid > worst:
            worst = resid
    return worst


def expected_DG(triple: ZbestTripleLaw) -> Number:
    """E_Q[(W'' - W') G]; equals sigma2 for every valid coupling."""
    return sum(p * (w_pp - w_p) * g for w_pp, w_p, g, p in triple.triple_atoms)


def bias_by_R(triple: ZbestTripleLaw, r_values: Sequence[Number]) -> ZbestTripleLaw:
    """Change of measure dP+ = R dQ with the gain divided by R.

    ``r_values`` aligns with ``triple.triple_atoms``. Requires R >= 0
    everywhere, unit mean under Q, and R > 0 wherever the difference
    W'' - W' is nonzero with positive probability. Atoms with R = 0 are
    dropped (they carry no mass under the new measure); the target, mean and
    variance are unchanged, and the returned triple satisfies the coupling
    identity whenever the input did.
    """
    atoms = triple.triple_atoms
    if len(r_values) != len(atoms):
        raise ValueError("r_values must align with triple_atoms")
    exact = triple.exact and all_exact(r_values)
    total: Number = 0
    for (w_pp, w_p, _, p), r in zip(atoms, r_values):
        if r < 0:
            raise NegativeWeight(f"R = {r!r} < 0 on atom ({w_pp!r}, {w_p!r})")
        total = total + p * r
    if exact:
        if total != 1:
            raise NotNormalized(f"E_Q[R] = {total}, expected 1")
    elif abs(float(total) - 1.0) > MOMENT_TOL:
        raise NotNormalized(f"E_Q[R] = {float(total)!r}, expected 1")
    new_atoms = []
    for (w_pp, w_p, g, p), r in zip(atoms, r_values):
        if r == 0:
            if p > 0 and w_pp != w_p:
                raise SupportViolation(
                    f"R = 0 on an atom with W'' - W' = {w_pp - w_p!r} != 0"
                )
            continue
        new_atoms.append((w_pp, w_p, exact_div(g, r), p * r))
    return ZbestTripleLaw(new_atoms, triple.target, triple.mu, triple.sigma2)


def zero_bias_via_DG(triple: ZbestTripleLaw) -> SegmentMixture:
    """Zero-bias law of the target via the canonical reweighting R = DG/sigma2.

    Requires DG >= 0 on every atom of positive probability and G != 0
    wherever D != 0. After reweighting, every surviving atom has D != 0 and
    becomes a uniform segment between min(W', W'') and max(W', W''); the
    resulting mixture is the law of U W'' + (1 - U) W' under the new
    measure, which carries the zero-bias distribution of W.
    """
    sigma2 = triple.sigma2
    r_values = []
    for w_pp, w_p, g, p in triple.triple_atoms:
        d = w_pp - w_p
        dg = d * g
        if p > 0 and dg < 0:
            raise SignViolation(f"DG = {dg!r} < 0 on atom ({w_pp!r}, {w_p!r}, {g!r})")
        if p > 0 and d != 0 and g == 0:
            raise SupportViolation(f"D = {d!r} != 0 but G = 0 on an atom")
        r_values.append(exact_div(dg, sigma2))
    reweighted = bias_by_R(triple, r_values)
    segments = []
    for w_pp, w_p, _, p in reweighted.triple_atoms:
        lo, hi = (w_p, w_pp) if w_p < w_pp else (w_pp, w_p)
        segments.append((lo, hi, p))
    return SegmentMixture(atoms=(), segments=segments)


def square_bias_zero_bias(dist: FiniteDistribution) -> SegmentMixture:
    """Zero-bias law of a centered W by square biasing: dP = w^2/sigma2 dP.

    Each atom w gets the segment from 0 to w (ordered) with mass
    w^2 p(w) / sigma2; atoms at zero carry no reweighted mass and vanish.
    Component-for-component this equals :func:`zero_bias_via_DG` applied to
    the trivial triple (W, 0, W).
    """
    mu = dist.mean
    if _differs(mu, 0):
        raise NonzeroMean(f"distribution has mean {mu!r}, expected 0")
    sigma2 = dist.variance
    if sigma2 == 0:
        raise ZeroVariance("square bias needs positive variance")
    segments = []
    for v, p in dist.atoms:
        if v == 0:
            continue
        mass = exact_div(v * v * p, sigma2)
        lo, hi = (0, v) if v > 0 else (v, 0)
        segments.append((lo, hi, mass))
    return SegmentMixture(atoms=(), segments=segments)


def interpolate_sample(w_pp: Number, w_p: Number, u: float) -> Number:
    """Linear interpolation u*W'' + (1-u)*W' for u in [0, 1]."""
    if not 0 <= u <= 1:
        raise ValueError(f"u must lie in [0, 1], got {u!r}")
    return u * w_pp + (1 - u) * w_p


def exchangeable_pair_triple(
    pair_law: Iterable[tuple[tuple[Number, Number], Number]], lam: Number
) -> ZbestTripleLaw:
    """Coupling from an exchangeable pair with a linear regression condition.

    ``pair_law`` lists atoms ((w_pp, w), prob) of an exchangeable joint law
    with centered marginals. The regression condition is validated in the
    form E[W'' | W = w] = (1 - lambda) w for every conditioning value w of
    positive mass (equivalently E[W'' - W | W = w] = -lambda w; under
    exchangeability this is the reading that makes the factor 1/(2 lambda)
    correct, and it is the form reported on failure). Returns the triple
    (W'', W, (W'' - W) / (2 lambda)).
    """
    if not 0 < lam < 1:
        raise ValueError(f"lambda must lie in (0, 1), got {lam!r}")
    merged: dict[tuple[Number, Number], Number] = {}
    for (w_pp, w), p in pair_law:
        if p < 0:
            raise InvalidDistribution(f"negative pair probability {p!r}")
        key = (w_pp, w)
        merged[key] = merged.get(key, 0) + p
    merged = {k: p for k, p in merged.items() if p != 0}
    if not merged:
        raise InvalidDistribution("pair law needs at least one atom")

    for (w_pp, w), p in merged.items():
        if merged.get((w, w_pp), 0) != p:
            raise NotExchangeable(
                f"P(W''={w_pp!r}, W={w!r}) = {p!r} but the swapped atom has "
                f"mass {merged.get((w, w_pp), 0)!r}"
            )

    marginal: dict[Number, Number] = {}
    cond_sum: dict[Number, Number] = {}
    for (w_pp, w), p in merged.items():
        marginal[w] = marginal.get(w, 0) + p
        cond_sum[w] = cond_sum.get(w, 0) + p * w_pp
    target = FiniteDistribution(marginal.items())
    if _differs(target.mean, 0):
        raise InvalidDistribution("exchangeable pair requires centered marginals")

    worst_w, worst_resid = None, -1.0
    for w, pw in marginal.items():
        cond = exact_div(cond_sum[w], pw)
        resid = abs(float(cond - (1 - lam) * w))
        if resid > worst_resid:
            worst_w, worst_resid = w, resid
    if worst_resid > 1e-10:
        raise RegressionViolation(
            "checked E[W'' | W = w] = (1 - lambda) w; worst conditioning value "
            f"w = {worst_w!r} with residual {worst_resid:.3e}"
        )

    two_lam = 2 * lam
    atoms = tuple(
        (w_pp, w, exact_div(w_pp - w, two_lam), p) for (w_pp, w), p in sorted(
            merged.items(), key=lambda kv: (float(kv[0][0]), float(kv[0][1]))
        )
    )
    return ZbestTripleLaw(atoms, target)


Coupler = Callable[[int], Iterable[tuple[tuple[tuple[int, ...], tuple[int, ...]], Number]]]


def size_bias_triple(
    indicator_joint: Iterable[tuple[tuple[int, ...], Number]],
    conditional_coupler: Coupler,
) -> ZbestTripleLaw:
    """Size-bias coupling (W^s, W, mu) of a sum of indicator coordinates.

    ``indicator_joint`` lists atoms (bits, prob) over {0,1}^n. For each
    coordinate i the coupler must return a joint law of (X, X^i) whose first
    marginal is ``indicator_joint`` and whose second is the conditional law
    of X given X_i = 1. Sampling the index I with P(I = i) proportional to
    E[X_i] and summing the coupled vector produces the size-biased sum.
    """
    joint = [(tuple(bits), p) for bits, p in indicator_joint]
    if not joint:
        raise InvalidDistribution("indicator joint needs at least one atom")
    n = len(joint[0][0])
    exact = all_exact([p for _, p in joint])

    coord_mean: list[Number] = [0] * n
    for bits, p in joint:
        for i, b in enumerate(bits):
            if b:
                coord_mean[i] = coord_mean[i] + p
    for i, m in enumerate(coord_mean):
        bad = (not 0 < m < 1) if exact else not (1e-15 < float(m) < 1 - 1e-15)
        if bad:
            raise DegenerateCoordinate(f"coordinate {i} has P(X_i = 1) = {m!r}")
    mu = sum(coord_mean)

    target = FiniteDistribution(
        _accumulate((sum(bits), p) for bits, p in joint).items()
    )

    joint_map = _accumulate((bits, p) for bits, p in joint)
    triple_atoms: dict[tuple[Number, Number], Number] = {}
    for i in range(n):
        rows = [(tuple(x), tuple(xi), p) for (x, xi), p in conditional_coupler(i)]
        x_marg = _accumulate((x, p) for x, xi, p in rows)
        _require_equal_laws(x_marg, joint_map, f"coupler({i}) X-marginal", exact)
        cond = {
            bits: exact_div(p, coord_mean[i])
            for bits, p in joint_map.items()
            if bits[i] == 1
        }
        xi_marg = _accumulate((xi, p) for x, xi, p in rows)
        _require_equal_laws(xi_marg, cond, f"coupler({i}) X^i-marginal", exact)
        weight = exact_div(coord_mean[i], mu)
        for x, xi, p in rows:
            key = (sum(xi), sum(x))
            triple_atoms[key] = triple_atoms.get(key, 0) + p * weight

    atoms = tuple(
        (w_pp, w_p, mu, p)
        for (w_pp, w_p), p in sorted(triple_atoms.items(), key=lambda kv: kv[0])
    )
    return ZbestTripleLaw(atoms, target)


def _accumulate(pairs) -> dict:
    out: dict = {}
    for k, p in pairs:
        out[k] = out.get(k, 0) + p
    return out


def _require_equal_laws(got: dict, want: dict, what: str, exact: bool) -> None:
    keys = set(got) | set(want)
    for k in keys:
        a = got.get(k, 0)
        b = want.get(k, 0)
        bad = (a != b) if exact else abs(float(a) - float(b)) > MOMENT_TOL
        if bad:
            raise MarginalMismatch(f"{what}: mass at {k!r} is {a!r}, expected {b!r}")


def independent_replacement_coupler(
    indicator_joint: Iterable[tuple[tuple[int, ...], Number]]
) -> Coupler:
    """Coupler that forces coordinate i to 1 and keeps the rest unchanged.

    Valid whenever coordinates are independent, in which case conditioning
    on X_i = 1 leaves the other coordinates' law untouched.
    """
    joint = [(tuple(bits), p) for bits, p in indicator_joint]

    def coupler(i: int):
        for bits, p in joint:
            forced = bits[:i] + (1,) + bits[i + 1 :]
            yield (bits, forced), p

    return coupler


def monotone_sizebias_to_zerobias(triple: ZbestTripleLaw) -> SegmentMixture:
    """Zero-bias law from a monotone size-bias coupling.

    Requires constant gain equal to the mean and W'' >= W' on every atom of
    positive probability; the reweighting factor is then
    (W'' - W') / E[W'' - W'], and the interpolated variable carries the
    zero-bias law. Equivalent to :func:`zero_bias_via_DG`.
    """
    mu = triple.mu
    if not mu > 0:
        raise InvalidDistribution("size-bias coupling requires a positive mean")
    for w_pp, w_p, g, p in triple.triple_atoms:
        if p == 0:
            continue
        if _differs(g, mu):
            raise InvalidDistribution(
                f"gain must be constant equal to the mean; got {g!r} != {mu!r}"
            )
        if w_pp < w_p:
            raise NotMonotone(
                f"atom with W'' = {w_pp!r} < W' = {w_p!r} (prob {p!r})"
            )
    return zero_bias_via_DG(triple)
