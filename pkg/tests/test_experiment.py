import json
import math
from fractions import Fraction

import pytest

from zbest._mc import CHUNK_SAMPLES, chunk_sizes, splitmix64_mix, substream
from zbest.errors import InvalidConfig, NTooSmall, OddN
from zbest.experiment import (
    ExperimentConfig,
    ExperimentReport,
    compute_bn,
    reports_equivalent,
    run,
)
from zbest.lightbulb import lightbulb_moments

F = Fraction


class TestConfigValidation:
    def test_process_checked(self):
        with pytest.raises(InvalidConfig, match="process"):
            run(ExperimentConfig(process="poisson", mode="exact", seed=0, workers=1))

    def test_lightbulb_needs_even_n(self):
        with pytest.raises(InvalidConfig, match="n:"):
            ExperimentConfig(
                process="lightbulb", mode="exact", seed=0, workers=1, n=5
            ).validate()

    def test_exact_lightbulb_supports_4_and_6(self):
        with pytest.raises(InvalidConfig, match="n:"):
            ExperimentConfig(
                process="lightbulb", mode="exact", seed=0, workers=1, n=8
            ).validate()

    def test_exact_bernoulli_length_cap(self):
        with pytest.raises(InvalidConfig, match="p:"):
            ExperimentConfig(
                process="bernoulli", mode="exact", seed=0, workers=1, p=(0.5,) * 31
            ).validate()

    def test_mc_needs_samples(self):
        with pytest.raises(InvalidConfig, match="samples"):
            ExperimentConfig(
                process="lightbulb", mode="mc", seed=0, workers=1, n=10
            ).validate()

    def test_p_range_checked(self):
        with pytest.raises(InvalidConfig, match=r"p\[1\]"):
            ExperimentConfig(
                process="bernoulli", mode="exact", seed=0, workers=1, p=(0.5, 1.0)
            ).validate()


class TestSubstreams:
    def test_chunk_sizes_fixed(self):
        assert chunk_sizes(CHUNK_SAMPLES * 2 + 5) == [CHUNK_SAMPLES, CHUNK_SAMPLES, 5]
        assert chunk_sizes(10) == [10]

    def test_mix_is_stable(self):
        # pinned values so the substream derivation can never drift silently
        assert splitmix64_mix(0, 0) == 16294208416658607535
        assert splitmix64_mix(42, 3) == splitmix64_mix(42, 3)
        assert splitmix64_mix(42, 3) != splitmix64_mix(42, 4)
        assert splitmix64_mix(43, 3) != splitmix64_mix(42, 3)

    def test_substreams_differ(self):
        a = substream(1, 0).random(4).tolist()
        b = substream(1, 1).random(4).tolist()
        assert a != b
        assert substream(1, 0).random(4).tolist() == a


class TestComputeBn:
    def test_n6_value(self):
        mom = lightbulb_moments(6)
        sigma = mom.sigma
        d0 = 0.5 / math.sqrt(6) + 0.5 / 6 + math.exp(-3.0) / 3
        want = 6 / (2 * sigma) * d0 + 1.64 * 6 / float(mom.sigma2) + 2
        assert abs(compute_bn(6) - want) < 1e-14
        assert compute_bn(6) > 9.06

    def test_lower_bound_chain_at_variance_cap(self):
        # with sigma2 at its cap n/4 the bound collapses to 1/2 + 6.56 + 2
        n = 6
        sigma_bar = math.sqrt(n / 4)
        chain = (n / (2 * sigma_bar)) * (1 / (2 * math.sqrt(n))) + 1.64 * n / sigma_bar**2 + 2
        assert abs(chain - 9.06) < 1e-12

    def test_range(self):
        for n in range(6, 202, 2):
            b = compute_bn(n)
            assert b >= 9.06
            assert b > 8.12

    def test_domain(self):
        with pytest.raises(OddN):
            compute_bn(7)
        with pytest.raises(NTooSmall):
            compute_bn(4)


class TestExactRuns:
    def test_lightbulb_n4(self):
        r = run(ExperimentConfig(process="lightbulb", mode="exact", seed=0, workers=1, n=4))
        assert r.moments["sigma2"] == 1.0
        assert r.bound_kolmogorov == 8.12
        assert r.bound_margin_k > 0 and r.bound_margin_w > 0
        assert r.b_n_comparison is None
        assert r.distances.kolmogorov_ci_halfwidth == 0.0
        assert r.margins_ok()

    def test_lightbulb_n6_has_bn(self):
        r = run(ExperimentConfig(process="lightbulb", mode="exact", seed=0, workers=1, n=6))
        assert r.b_n_comparison == compute_bn(6)
        assert r.b_n_comparison > r.bound_kolmogorov * lightbulb_moments(6).sigma / 8.12 * 8.12 / 8.12

    def test_bernoulli_margins(self):
        r = run(
            ExperimentConfig(
                process="bernoulli",
                mode="exact",
                seed=0,
                workers=1,
                p=tuple([F(3, 10)] * 10),
            )
        )
        sigma = math.sqrt(2.1)
        assert abs(r.bound_kolmogorov - 2.03 / sigma) < 1e-15
        assert r.bound_margin_k > 0 and r.bound_margin_w > 0
        assert r.coupling_stats["mean_abs_shift"] == 0.5


class TestMonteCarloRuns:
    @pytest.mark.parametrize("workers", [1, 4, 8])
    def test_lightbulb_deterministic_across_workers(self, workers):
        base = run(
            ExperimentConfig(
                process="lightbulb", mode="mc", seed=11, workers=1, n=10, samples=120_000
            )
        )
        other = run(
            ExperimentConfig(
                process="lightbulb", mode="mc", seed=11, workers=workers, n=10, samples=120_000
            )
        )
        assert reports_equivalent(base, other)

    def test_bernoulli_deterministic_across_workers(self):
        runs = [
            run(
                ExperimentConfig(
                    process="bernoulli",
                    mode="mc",
                    seed=5,
                    workers=w,
                    p=(0.2, 0.5, 0.9),
                    samples=100_000,
                )
            )
            for w in (1, 4, 8)
        ]
        assert reports_equivalent(runs[0], runs[1])
        assert reports_equivalent(runs[0], runs[2])

    def test_seed_changes_results(self):
        a = run(
            ExperimentConfig(
                process="bernoulli", mode="mc", seed=1, workers=1, p=(0.5, 0.5), samples=50_000
            )
        )
        b = run(
            ExperimentConfig(
                process="bernoulli", mode="mc", seed=2, workers=1, p=(0.5, 0.5), samples=50_000
            )
        )
        assert not reports_equivalent(a, b)

    def test_mc_statistics_sane(self):
        r = run(
            ExperimentConfig(
                process="lightbulb", mode="mc", seed=3, workers=2, n=10, samples=100_000
            )
        )
        assert r.coupling_stats["max_abs_shift"] <= 4.0
        assert abs(r.coupling_stats["mean_abs_shift"] - 1.0) < 0.02
        assert r.distances.kolmogorov_ci_halfwidth > 0
        assert r.margins_ok()


class TestReportSerialization:
    def _report(self):
        return run(ExperimentConfig(process="lightbulb", mode="exact", seed=9, workers=1, n=4))

    def test_json_field_names(self):
        obj = self._report().to_jsonable()
        assert list(obj) == [
            "config",
            "moments",
            "distances",
            "bound_wasserstein",
            "bound_kolmogorov",
            "bound_margin_w",
            "bound_margin_k",
            "coupling_stats",
            "b_n_comparison",
            "wall_time_seconds",
        ]
        assert list(obj["distances"]) == [
            "kolmogorov",
            "wasserstein",
            "kolmogorov_ci_halfwidth",
            "wasserstein_ci_halfwidth",
            "mode",
        ]
        assert list(obj["coupling_stats"]) == [
            "mean_abs_shift",
            "max_abs_shift",
            "fraction_moved",
        ]

    def test_json_round_trip(self):
        rep = self._report()
        parsed = json.loads(rep.to_json())
        assert parsed == rep.to_jsonable()

    def test_csv_columns_match_order(self, tmp_path):
        rep = self._report()
        text = rep.to_csv()
        header, row = text.strip().split("\n")
        assert header.split(",") == ExperimentReport.csv_columns()
        assert len(row.split(",")) == len(ExperimentReport.csv_columns())

    def test_write_json(self, tmp_path):
        out = tmp_path / "report.json"
        cfg = ExperimentConfig(
            process="lightbulb",
            mode="exact",
            seed=9,
            workers=1,
            n=4,
            output_path=str(out),
            format="json",
        )
        rep = run(cfg)
        on_disk = json.loads(out.read_text())
        assert on_disk == rep.to_jsonable()

    def test_byte_identical_reports_modulo_walltime(self, tmp_path):
        paths = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.json"
            run(
                ExperimentConfig(
                    process="lightbulb",
                    mode="mc",
                    seed=21,
                    workers=2,
                    n=8,
                    samples=70_000,
                    output_path=str(out),
                    format="json",
                )
            )
            paths.append(out)
        docs = [json.loads(p.read_text()) for p in paths]
        for d in docs:
            d.pop("wall_time_seconds")
        assert json.dumps(docs[0], sort_keys=True) == json.dumps(docs[1], sort_keys=True)
