"""Exhaustive rational-arithmetic enumeration of the small lightbulb process.

For n in {4, 6} every configuration is enumerated (96 and 162,000 of them)
and every law the couplings induce is computed exactly:

* the law of Y and its moments, cross-checked against the closed-form
  mean/variance;
* the size-bias coupling's joint law of (Y, Y''), with the pointwise
  identity Y'' - Y = 2*1{both bulbs off} verified on every atom;
* the reweighted ("dagger") measure: reweighting the coupling's joint law
  by (y'' - y') / E[Y'' - Y'] concentrates uniformly on
  {(e, i, j) : middle toggles differ, e_i = 0, e_j = 0}, which is verified
  against the closed-form normalization;
* the exact law of Y* = Y_dagger + 2U as a mixture of length-2 segments.

For n = 4 the sample-path construction (the four stage-swap involutions) is
additionally enumerated atom by atom, quantifying the published
construction's gap: the swap-partner candidate set needed by the mixed
final-state cases is empty with probability exactly 1/8. On the remaining
7/8 of the space the constructed law is exactly proportional to the target
uniform law, so conditioning on the construction succeeding reproduces the
reweighted measure exactly; this is also verified here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import numpy as np

from .distributions import FiniteDistribution, SegmentMixture
from .errors import UnsupportedN
from .lightbulb import LightbulbMoments, dagger_stage_rows, lightbulb_moments

__all__ = ["LightbulbExact", "enumerate_exact"]


@dataclass(frozen=True)
class LightbulbExact:
    """Exact laws and verification results from full enumeration."""

    n: int
    config_count: int
    eta: Fraction
    moments: LightbulbMoments
    y_pmf: FiniteDistribution
    size_bias_pmf: FiniteDistribution
    y_dagger_pmf: FiniteDistribution
    y_ddagger_pmf: FiniteDistribution
    y_star_law: SegmentMixture
    sb_joint_pmf: tuple[tuple[tuple[int, int], Fraction], ...]
    p_size_bias_moved: Fraction
    dagger_support_size: int
    empty_candidate_prob: Fraction
    phi_defined_mass: Fraction | None
    phi_conditional_uniform: bool | None
    phi_max_abs_dagger_shift: int | None

    def to_jsonable(self) -> dict:
        def pmf_map(dist: FiniteDistribution) -> dict:
            return {
                str(int(v)): f"{Fraction(p).numerator}/{Fraction(p).denominator}"
                for v, p in dist.atoms
            }

        out = {
            "n": self.n,
            "config_count": self.config_count,
            "eta": f"{self.eta.numerator}/{self.eta.denominator}",
            "mu": str(self.moments.mu),
            "sigma2": str(self.moments.sigma2),
            "lambda_n": str(self.moments.lambda_n),
            "y_pmf": pmf_map(self.y_pmf),
            "size_bias_pmf": pmf_map(self.size_bias_pmf),
            "y_dagger_pmf": pmf_map(self.y_dagger_pmf),
            "y_ddagger_pmf": pmf_map(self.y_ddagger_pmf),
            "y_star_law": self.y_star_law.to_jsonable(),
            "p_size_bias_moved": f"{self.p_size_bias_moved.numerator}/{self.p_size_bias_moved.denominator}",
            "dagger_support_size": self.dagger_support_size,
            "empty_candidate_prob": f"{self.empty_candidate_prob.numerator}/{self.empty_candidate_prob.denominator}",
        }
        if self.phi_defined_mass is not None:
            out["phi_defined_mass"] = (
                f"{self.phi_defined_mass.numerator}/{self.phi_defined_mass.denominator}"
            )
            out["phi_conditional_uniform"] = self.phi_conditional_uniform
            out["phi_max_abs_dagger_shift"] = self.phi_max_abs_dagger_shift
        return out


def _row_masks(n: int, r: int) -> np.ndarray:
    masks = []
    for combo in combinations(range(n), r):
        m = 0
        for i in combo:
            m |= 1 << i
        masks.append(m)
    return np.array(masks, dtype=np.uint32)


def _fold_configurations(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Parity mask and middle-row mask per configuration, in product order."""
    mid = n // 2 - 1
    par = np.zeros(1, dtype=np.uint32)
    hrow = np.zeros(1, dtype=np.uint32)
    for r_idx in range(n):
        masks = _row_masks(n, r_idx + 1)
        par = (par[:, None] ^ masks[None, :]).ravel()
        if r_idx == mid:
            hrow = np.tile(masks, hrow.size)
        else:
            hrow = np.repeat(hrow, masks.size)
    return par, hrow


def enumerate_exact(n: int) -> LightbulbExact:
    """Enumerate every configuration and derived coupling law exactly.

    Supported for even n in {4, 6}; raises :class:`UnsupportedN` otherwise.
    All internal cross-checks (pointwise coupling identities, uniformity of
    the reweighted measure, closed-form moment agreement) raise RuntimeError
    on failure, so a returned object is already self-verified.
    """
    if n not in (4, 6):
        raise UnsupportedN(f"exact enumeration supports n in {{4, 6}}, got {n}")

    par, hrow = _fold_configurations(n)
    config_count = int(par.size)
    expected = 1
    for r in range(1, n + 1):
        expected *= _comb(n, r)
    if config_count != expected:
        raise RuntimeError(f"configuration count {config_count} != {expected}")

    popcount = np.array([bin(v).count("1") for v in range(1 << n)], dtype=np.int64)
    y = popcount[par]
    y_counts = np.bincount(y, minlength=n + 1)

    eta = Fraction(2, n * n * config_count)

    # loop over ordered (i, j); vectorized over configurations
    sb_counts = np.zeros(n + 3, dtype=np.int64)
    dagger_counts = np.zeros(n + 1, dtype=np.int64)
    sb_joint: dict[tuple[int, int], int] = {}
    pair_atoms = 0
    moved_atoms = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            differ = ((hrow >> i) ^ (hrow >> j)) & 1 == 1
            if not differ.any():
                continue
            a_i = (par >> i) & 1
            a_j = (par >> j) & 1
            swap_bits = np.uint32((1 << i) | (1 << j))
            y_swapped = popcount[par ^ swap_bits]
            # the coupling swaps only when bulb i is off
            y_pp = np.where(a_i == 1, y, y_swapped)
            both_off = differ & (a_i == 0) & (a_j == 0)
            expect = y + 2 * both_off.astype(np.int64)
            if not np.array_equal(np.where(differ, y_pp, 0), np.where(differ, expect, 0)):
                raise RuntimeError(
                    f"pointwise size-bias identity failed at pair ({i}, {j})"
                )
            pair_atoms += int(differ.sum())
            moved_atoms += int(both_off.sum())
            sel_y = y[differ]
            sel_pp = y_pp[differ]
            sb_counts[: n + 3] += np.bincount(sel_pp, minlength=n + 3)
            keys = sel_y * (n + 3) + sel_pp
            uniq, cnts = np.unique(keys, return_counts=True)
            for key, c in zip(uniq.tolist(), cnts.tolist()):
                pair = (key // (n + 3), key % (n + 3))
                sb_joint[pair] = sb_joint.get(pair, 0) + c
            # dagger support and pointwise +2 on it
            if both_off.any():
                if not np.array_equal(y_swapped[both_off], y[both_off] + 2):
                    raise RuntimeError("y_ddagger != y_dagger + 2 on the support")
                dagger_counts[: n + 1] += np.bincount(
                    y[both_off], minlength=n + 1
                )

    if pair_atoms != config_count * n * (n // 2):
        raise RuntimeError("base (x, i, j) atom count disagrees with n * n/2 per config")
    if eta * pair_atoms != 1:
        raise RuntimeError("eta does not normalize the base joint law")

    y_pmf = FiniteDistribution(
        (int(v), Fraction(int(c), config_count))
        for v, c in enumerate(y_counts)
        if c
    )
    moments = lightbulb_moments(n)
    if y_pmf.mean != moments.mu or y_pmf.variance != moments.sigma2:
        raise RuntimeError(
            f"enumerated moments ({y_pmf.mean}, {y_pmf.variance}) disagree with "
            f"closed form ({moments.mu}, {moments.sigma2})"
        )

    size_bias_pmf = FiniteDistribution(
        (int(v), Fraction(int(c), pair_atoms)) for v, c in enumerate(sb_counts) if c
    )
    sb_joint_pmf = tuple(
        ((int(a), int(b)), Fraction(c, pair_atoms))
        for (a, b), c in sorted(sb_joint.items())
    )

    p_moved = Fraction(moved_atoms, pair_atoms)
    if p_moved != moments.sigma2 / (2 * moments.mu):
        raise RuntimeError("P(Y'' != Y) disagrees with sigma2 / (2 mu)")

    # reweighted measure: uniform with mass eta / p_moved on the moved atoms
    if Fraction(1, moved_atoms) != eta / p_moved:
        raise RuntimeError("reweighted law normalization check failed")

    y_dagger_pmf = FiniteDistribution(
        (int(v), Fraction(int(c), moved_atoms))
        for v, c in enumerate(dagger_counts)
        if c
    )
    y_ddagger_pmf = FiniteDistribution(
        (v + 2, p) for v, p in y_dagger_pmf.atoms
    )
    y_star_law = SegmentMixture(
        atoms=(),
        segments=[(v, v + 2, p) for v, p in y_dagger_pmf.atoms],
    )

    if n == 4:
        phi = _enumerate_phi_construction(n, eta)
        empty_candidate_prob = phi["stuck"]
        phi_defined_mass = phi["defined"]
        phi_conditional_uniform = phi["conditional_uniform"]
        phi_max_shift = phi["max_shift"]
        if phi["support_size"] != moved_atoms:
            raise RuntimeError("phi-construction support disagrees with enumeration")
    else:
        # stages {2..n-2} keep at least two toggles of each value in play,
        # so no candidate set can empty out; nothing to enumerate.
        empty_candidate_prob = Fraction(0)
        phi_defined_mass = None
        phi_conditional_uniform = None
        phi_max_shift = None

    return LightbulbExact(
        n=n,
        config_count=config_count,
        eta=eta,
        moments=moments,
        y_pmf=y_pmf,
        size_bias_pmf=size_bias_pmf,
        y_dagger_pmf=y_dagger_pmf,
        y_ddagger_pmf=y_ddagger_pmf,
        y_star_law=y_star_law,
        sb_joint_pmf=sb_joint_pmf,
        p_size_bias_moved=p_moved,
        dagger_support_size=moved_atoms,
        empty_candidate_prob=empty_candidate_prob,
        phi_defined_mass=phi_defined_mass,
        phi_conditional_uniform=phi_conditional_uniform,
        phi_max_abs_dagger_shift=phi_max_shift,
    )


def _comb(n: int, r: int) -> int:
    out = 1
    for t in range(r):
        out = out * (n - t) // (t + 1)
    return out


def _enumerate_phi_construction(n: int, eta: Fraction) -> dict:
    """Atom-by-atom enumeration of the involution-based coupling (n = 4).

    Walks every (configuration, i, j, stage S, swap partner) outcome with
    its exact probability, tracking where the required candidate set is
    empty. Returns the stuck probability, the defined mass, whether the
    defined part is exactly proportional to the uniform target law, and the
    largest |y_dagger - y| over defined atoms.
    """
    stages = dagger_stage_rows(n)
    row_lists = [
        [int(m) for m in _row_masks(n, r)] for r in range(1, n + 1)
    ]
    mid = n // 2 - 1

    stuck = Fraction(0)
    law: dict[tuple[tuple[int, ...], int, int], Fraction] = {}
    support: set[tuple[tuple[int, ...], int, int]] = set()
    max_shift = 0

    for rows in product(*row_lists):
        par = 0
        for m in rows:
            par ^= m
        y = bin(par).count("1")
        hmask = rows[mid]
        for i in range(n):
            for j in range(n):
                if ((hmask >> i) ^ (hmask >> j)) & 1 == 0:
                    continue
                if (par >> i) & 1 == 0 and (par >> j) & 1 == 0:
                    support.add((rows, i, j))
                a_i = (par >> i) & 1
                a_j = (par >> j) & 1
                p_s = eta * Fraction(1, len(stages))
                for s in stages:
                    outcomes: list[tuple[tuple[int, ...], Fraction]]
                    if (a_i, a_j) == (0, 0):
                        outcomes = [(rows, p_s)]
                    elif (a_i, a_j) == (1, 1):
                        swapped = list(rows)
                        swapped[mid] ^= (1 << i) | (1 << j)
                        outcomes = [(tuple(swapped), p_s)]
                    else:
                        ref, excl = (i, j) if a_i == 1 else (j, i)
                        srow = rows[s]
                        want = 1 - ((srow >> ref) & 1)
                        cands = [
                            c
                            for c in range(n)
                            if c != excl and ((srow >> c) & 1) == want
                        ]
                        if not cands:
                            stuck += p_s
                            continue
                        outcomes = []
                        for c in cands:
                            swapped = list(rows)
                            swapped[s] ^= (1 << ref) | (1 << c)
                            outcomes.append(
                                (tuple(swapped), p_s * Fraction(1, len(cands)))
                            )
                    for new_rows, prob in outcomes:
                        new_par = 0
                        for m in new_rows:
                            new_par ^= m
                        y_d = bin(new_par).count("1")
                        if (new_par >> i) & 1 or (new_par >> j) & 1:
                            raise RuntimeError(
                                "constructed configuration does not leave bulbs "
                                f"{i}, {j} off"
                            )
                        for r_idx, m in enumerate(new_rows):
                            if bin(m).count("1") != r_idx + 1:
                                raise RuntimeError("constructed row left the state space")
                        dd_par = new_par ^ (1 << i) ^ (1 << j)
                        if bin(dd_par).count("1") != y_d + 2:
                            raise RuntimeError("y_ddagger != y_dagger + 2")
                        shift = abs(y_d - y)
                        if shift > max_shift:
                            max_shift = shift
                        if shift > 2:
                            raise RuntimeError("|y_dagger - y| exceeded 2")
                        key = (new_rows, i, j)
                        law[key] = law.get(key, Fraction(0)) + prob

    defined = sum(law.values(), Fraction(0))
    if defined + stuck != 1:
        raise RuntimeError("phi enumeration lost probability mass")
    target_per_atom = defined / len(support)
    conditional_uniform = set(law) == support and all(
        p == target_per_atom for p in law.values()
    )
    return {
        "stuck": stuck,
        "defined": defined,
        "conditional_uniform": conditional_uniform,
        "max_shift": max_shift,
        "support_size": len(support),
    }
