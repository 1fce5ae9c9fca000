"""Experiment driver: exact and Monte Carlo runs, reports, bound checks.

A run computes the distribution of the process variable Y (exactly by
enumeration/convolution, or empirically from coupled samples), standardizes
it, measures Kolmogorov and Wasserstein distances to the standard normal,
and compares them against the published coupling bounds: 6/sigma and
8.12/sigma for the lightbulb process, 1/sigma and 2.03/sigma for indicator
sums. Reports serialize to JSON (lossless) or a one-row CSV, and identical
configurations produce identical reports up to the wall-time field,
independent of the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .analytics import (
    DistanceMode,
    DistanceReport,
    distances_from_counts,
    exact_distance_report,
)
from .bernoulli import (
    BernoulliVector,
    bernoulli_bounds,
    exact_pmf,
    fraction_moved,
    mean_abs_zero_bias_shift,
)
from .distributions import FiniteDistribution, Number
from .errors import InvalidConfig, IoError, NTooSmall, OddN
from .lightbulb import lightbulb_moments
from .lightbulb_exact import enumerate_exact

#: published lightbulb bound constants (Wasserstein, Kolmogorov numerators)
LIGHTBULB_WASSERSTEIN_COEFF = 6.0
LIGHTBULB_KOLMOGOROV_COEFF = 8.12

EXACT_BERNOULLI_MAX_LEN = 30
WORKERS_ENV_VAR = "ZBEST_WORKERS"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one run.

    ``p`` entries may be :class:`fractions.Fraction` (the CLI parses decimal
    strings exactly) so that exact-mode Bernoulli runs stay rational.
    """

    process: str
    mode: str
    seed: int
    workers: int
    n: int | None = None
    p: tuple[Number, ...] | None = None
    samples: int | None = None
    output_path: str | None = None
    format: str = "json"

    def validate(self) -> None:
        if self.process not in ("lightbulb", "bernoulli"):
            raise InvalidConfig(f"process: expected lightbulb|bernoulli, got {self.process!r}")
        if self.mode not in ("exact", "mc"):
            raise InvalidConfig(f"mode: expected exact|mc, got {self.mode!r}")
        if self.format not in ("json", "csv"):
            raise InvalidConfig(f"format: expected json|csv, got {self.format!r}")
        if not 0 <= self.seed < 1 << 64:
            raise InvalidConfig(f"seed: must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.workers < 1:
            raise InvalidConfig(f"workers: must be >= 1, got {self.workers!r}")
        if self.process == "lightbulb":
            if self.n is None:
                raise InvalidConfig("n: required for the lightbulb process")
            if self.n % 2 or self.n < 4:
                raise InvalidConfig(f"n: lightbulb needs even n >= 4, got {self.n}")
            if self.mode == "exact" and self.n not in (4, 6):
                raise InvalidConfig(
                    f"n: exact lightbulb enumeration supports n in {{4, 6}}, got {self.n}"
                )
        else:
            if not self.p:
                raise InvalidConfig("p: required for the bernoulli process")
            for idx, pi in enumerate(self.p):
                if not 0 < pi < 1:
                    raise InvalidConfig(f"p[{idx}]: must lie in (0, 1), got {pi!r}")
            if self.mode == "exact" and len(self.p) > EXACT_BERNOULLI_MAX_LEN:
                raise InvalidConfig(
                    f"p: exact mode supports at most {EXACT_BERNOULLI_MAX_LEN} coordinates"
                )
        if self.mode == "mc":
            if self.samples is None or self.samples < 1:
                raise InvalidConfig(f"samples: must be >= 1 in mc mode, got {self.samples!r}")

    def echo(self) -> dict:
        return {
            "process": self.process,
            "n": self.n,
            "p": None if self.p is None else [float(v) for v in self.p],
            "mode": self.mode,
            "samples": self.samples,
            "seed": self.seed,
            "workers": self.workers,
            "format": self.format,
        }


@dataclass(frozen=True)
class ExperimentReport:
    """Everything a run measured, in the fixed serialization order."""

    config: dict
    moments: dict
    distances: DistanceReport
    bound_wasserstein: float
    bound_kolmogorov: float
    bound_margin_w: float
    bound_margin_k: float
    coupling_stats: dict
    b_n_comparison: float | None
    wall_time_seconds: float

    def to_jsonable(self) -> dict:
        return {
            "config": self.config,
            "moments": self.moments,
            "distances": self.distances.to_jsonable(),
            "bound_wasserstein": self.bound_wasserstein,
            "bound_kolmogorov": self.bound_kolmogorov,
            "bound_margin_w": self.bound_margin_w,
            "bound_margin_k": self.bound_margin_k,
            "coupling_stats": self.coupling_stats,
            "b_n_comparison": self.b_n_comparison,
            "wall_time_seconds": self.wall_time_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), indent=2) + "\n"

    @staticmethod
    def csv_columns() -> list[str]:
        return [
            "process", "n", "p", "mode", "samples", "seed", "workers", "format",
            "mu", "sigma2", "lambda_n",
            "kolmogorov", "wasserstein",
            "kolmogorov_ci_halfwidth", "wasserstein_ci_halfwidth", "distance_mode",
            "bound_wasserstein", "bound_kolmogorov",
            "bound_margin_w", "bound_margin_k",
            "mean_abs_shift", "max_abs_shift", "fraction_moved",
            "b_n_comparison", "wall_time_seconds",
        ]

    def to_csv_row(self) -> list:
        cfg = self.config
        d = self.distances
        return [
            cfg["process"],
            cfg["n"],
            "" if cfg["p"] is None else ";".join(repr(v) for v in cfg["p"]),
            cfg["mode"], cfg["samples"], cfg["seed"], cfg["workers"], cfg["format"],
            self.moments["mu"], self.moments["sigma2"], self.moments.get("lambda_n", ""),
            d.kolmogorov, d.wasserstein,
            d.kolmogorov_ci_halfwidth, d.wasserstein_ci_halfwidth, d.mode.value,
            self.bound_wasserstein, self.bound_kolmogorov,
            self.bound_margin_w, self.bound_margin_k,
            self.coupling_stats["mean_abs_shift"],
            self.coupling_stats["max_abs_shift"],
            self.coupling_stats["fraction_moved"],
            "" if self.b_n_comparison is None else self.b_n_comparison,
            self.wall_time_seconds,
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.csv_columns())
        writer.writerow(self.to_csv_row())
        return buf.getvalue()

    def margins_ok(self) -> bool:
        """``--check`` rule: margins >= 0 exactly, or >= -CI for Monte Carlo."""
        if self.distances.mode is DistanceMode.EXACT:
            return self.bound_margin_w >= 0 and self.bound_margin_k >= 0
        return (
            self.bound_margin_w >= -self.distances.wasserstein_ci_halfwidth
            and self.bound_margin_k >= -self.distances.kolmogorov_ci_halfwidth
        )


def compute_bn(n: int) -> float:
    """Kolmogorov-bound constant of the earlier size-bias analysis.

    B_n = (n/(2 sigma)) * D0 + 1.64 n / sigma^2 + 2 with
    D0 = 1/(2 sqrt(n)) + 1/(2n) + exp(-n/2)/3 and the exact sigma. Using
    sigma^2 <= n/4 gives B_n >= 1/2 + 4*1.64 + 2 = 9.06 for every even
    n >= 6, so the 8.12 constant is uniformly smaller.
    """
    if n % 2:
        raise OddN(f"B_n is defined for even n, got {n}")
    if n < 6:
        raise NTooSmall(f"B_n is defined for n >= 6, got {n}")
    mom = lightbulb_moments(n)
    sigma = mom.sigma
    sigma2 = float(mom.sigma2)
    d0 = 0.5 / math.sqrt(n) + 0.5 / n + math.exp(-n / 2.0) / 3.0
    return (n / (2.0 * sigma)) * d0 + 1.64 * n / sigma2 + 2.0


def run(config: ExperimentConfig) -> ExperimentReport:
    """Execute a run and (if configured) persist its report.

    Exact mode derives distances from exact laws; Monte Carlo mode draws the
    configured number of coupled observations over fixed-size work units
    with per-unit substreams, so identical configurations yield identical
    reports for any worker count (wall time aside).
    """
    config.validate()
    start = time.perf_counter()
    if config.process == "lightbulb":
        report = _run_lightbulb(config, start)
    else:
        report = _run_bernoulli(config, start)
    if config.output_path is not None:
        write_report(report, config.output_path, config.format)
    return report


def _standardized_counts_report(
    levels: Sequence[int], counts, mu: float, sigma: float
) -> DistanceReport:
    values = [(lv - mu) / sigma for lv in levels]
    return distances_from_counts(values, counts, 0.0, 1.0)


def _run_lightbulb(config: ExperimentConfig, start: float) -> ExperimentReport:
    n = config.n
    assert n is not None
    mom = lightbulb_moments(n)
    sigma = mom.sigma
    moments = {
        "mu": float(mom.mu),
        "sigma2": float(mom.sigma2),
        "lambda_n": float(mom.lambda_n),
    }
    if config.mode == "exact":
        ex = enumerate_exact(n)
        distances = exact_distance_report(ex.y_pmf.standardized(), 0.0, 1.0)
        # Y* - Y = (Y_dagger - Y) + 2U with Y_dagger - Y in {-2, 0}: the
        # conditional mean over U is 1 either way and the supremum is 2.
        coupling = {
            "mean_abs_shift": 1.0,
            "max_abs_shift": 2.0,
            "fraction_moved": float(ex.p_size_bias_moved),
        }
    else:
        from ._mc import lightbulb_mc

        stats = lightbulb_mc(n, config.samples, config.seed, config.workers)
        levels = list(range(n + 1))
        distances = _standardized_counts_report(
            levels, stats.y_counts, float(mom.mu), sigma
        )
        coupling = {
            "mean_abs_shift": stats.mean_abs,
            "max_abs_shift": stats.max_abs,
            "fraction_moved": stats.fraction_moved,
        }
    bound_w = LIGHTBULB_WASSERSTEIN_COEFF / sigma
    bound_k = LIGHTBULB_KOLMOGOROV_COEFF / sigma
    return ExperimentReport(
        config=config.echo(),
        moments=moments,
        distances=distances,
        bound_wasserstein=bound_w,
        bound_kolmogorov=bound_k,
        bound_margin_w=bound_w - distances.wasserstein,
        bound_margin_k=bound_k - distances.kolmogorov,
        coupling_stats=coupling,
        b_n_comparison=compute_bn(n) if n >= 6 else None,
        wall_time_seconds=time.perf_counter() - start,
    )


def _run_bernoulli(config: ExperimentConfig, start: float) -> ExperimentReport:
    assert config.p is not None
    bv = BernoulliVector(config.p)
    bounds = bernoulli_bounds(bv)
    mu = float(bv.mu)
    sigma = bv.sigma
    moments = {"mu": mu, "sigma2": float(bv.sigma2)}
    if config.mode == "exact":
        pmf = exact_pmf(bv)
        distances = exact_distance_report(pmf.standardized(), 0.0, 1.0)
        coupling = {
            "mean_abs_shift": float(mean_abs_zero_bias_shift(bv)),
            "max_abs_shift": 1.0,
            "fraction_moved": float(fraction_moved(bv)),
        }
    else:
        from ._mc import bernoulli_mc

        stats = bernoulli_mc(
            [float(v) for v in bv.p], config.samples, config.seed, config.workers
        )
        levels = list(range(len(bv) + 1))
        distances = _standardized_counts_report(levels, stats.y_counts, mu, sigma)
        coupling = {
            "mean_abs_shift": stats.mean_abs,
            "max_abs_shift": stats.max_abs,
            "fraction_moved": stats.fraction_moved,
        }
    return ExperimentReport(
        config=config.echo(),
        moments=moments,
        distances=distances,
        bound_wasserstein=bounds.wasserstein,
        bound_kolmogorov=bounds.kolmogorov,
        bound_margin_w=bounds.wasserstein - distances.wasserstein,
        bound_margin_k=bounds.kolmogorov - distances.kolmogorov,
        coupling_stats=coupling,
        b_n_comparison=None,
        wall_time_seconds=time.perf_counter() - start,
    )


def write_report(report: ExperimentReport, path: str, fmt: str) -> None:
    try:
        payload = report.to_json() if fmt == "json" else report.to_csv()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"could not write report to {path}: {exc}") from exc


def reports_equivalent(a: ExperimentReport, b: ExperimentReport) -> bool:
    """Equality of every measured field.

    Ignores wall time and the worker-count echo, the only fields that may
    legitimately differ between runs of the same experiment.
    """
    da = a.to_jsonable()
    db = b.to_jsonable()
    for d in (da, db):
        d.pop("wall_time_seconds")
        d["config"] = {k: v for k, v in d["config"].items() if k != "workers"}
    return da == db
