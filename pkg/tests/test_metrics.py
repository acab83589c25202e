from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from incident_linker.metrics import (
    MetricReport,
    MetricSummary,
    accuracy_at_k,
    aggregate,
    mrr_at_k,
    ndcg_at_k,
    report_rows,
    write_reports_csv,
    write_reports_json,
)

from oracles import reference_accuracy, reference_mrr, reference_ndcg

RANKED = ["a", "b", "c", "d", "e"]


class TestAccuracy:
    def test_hit_at_one(self) -> None:
        assert accuracy_at_k(RANKED, {"a"}, 1) == 1

    def test_hit_beyond_k(self) -> None:
        assert accuracy_at_k(RANKED, {"c"}, 2) == 0
        assert accuracy_at_k(RANKED, {"c"}, 3) == 1

    def test_any_hit_counts(self) -> None:
        assert accuracy_at_k(RANKED, {"z", "b"}, 2) == 1

    def test_miss(self) -> None:
        assert accuracy_at_k(RANKED, {"z"}, 5) == 0


class TestMrr:
    def test_first_position(self) -> None:
        assert mrr_at_k(RANKED, {"a"}, 3) == 1.0

    def test_second_position(self) -> None:
        assert mrr_at_k(RANKED, {"b"}, 3) == 0.5

    def test_first_relevant_wins(self) -> None:
        assert mrr_at_k(RANKED, {"b", "d"}, 5) == 0.5

    def test_outside_cutoff(self) -> None:
        assert mrr_at_k(RANKED, {"d"}, 3) == 0.0


class TestNdcg:
    def test_perfect_single(self) -> None:
        assert ndcg_at_k(RANKED, {"a"}, 3) == pytest.approx(1.0, abs=1e-12)

    def test_rank_two_of_three(self) -> None:
        assert ndcg_at_k(RANKED, {"b"}, 3) == pytest.approx(
            0.6309297535714575, abs=1e-12
        )

    def test_two_relevant_positions_one_and_three(self) -> None:
        assert ndcg_at_k(RANKED, {"a", "c"}, 3) == pytest.approx(
            0.9197207891481876, abs=1e-12
        )

    def test_miss_is_zero(self) -> None:
        assert ndcg_at_k(RANKED, {"z"}, 5) == 0.0

    def test_ideal_truncated_by_relevant_count(self) -> None:
        # one relevant doc at rank 1 with k=5 is still a perfect ranking
        assert ndcg_at_k(RANKED, {"a"}, 5) == pytest.approx(1.0, abs=1e-12)


class TestValidation:
    @pytest.mark.parametrize("fn", [accuracy_at_k, mrr_at_k, ndcg_at_k])
    def test_k_must_be_positive(self, fn) -> None:
        with pytest.raises(ValueError):
            fn(RANKED, {"a"}, 0)

    @pytest.mark.parametrize("fn", [accuracy_at_k, mrr_at_k, ndcg_at_k])
    def test_relevant_must_be_non_empty(self, fn) -> None:
        with pytest.raises(ValueError):
            fn(RANKED, set(), 3)

    def test_duck_typed_ranked_object(self) -> None:
        class Fake:
            incident_ids = ("x", "a")

        assert accuracy_at_k(Fake(), {"a"}, 2) == 1
        assert mrr_at_k(Fake(), {"a"}, 2) == 0.5


def random_instance(rng: random.Random) -> tuple[list[str], set[str], int]:
    pool = [f"i{j}" for j in range(10)]
    ranked = rng.sample(pool, rng.randint(1, 10))
    relevant = set(rng.sample(pool, rng.randint(1, 3)))
    k = rng.choice([1, 3, 5, 10])
    return ranked, relevant, k


class TestAgainstReference:
    @given(st.integers(min_value=0, max_value=10**9))
    @settings(max_examples=300, deadline=None)
    def test_all_three_metrics(self, seed: int) -> None:
        rng = random.Random(seed)
        ranked, relevant, k = random_instance(rng)
        assert accuracy_at_k(ranked, relevant, k) == reference_accuracy(
            ranked, relevant, k
        )
        assert mrr_at_k(ranked, relevant, k) == pytest.approx(
            reference_mrr(ranked, relevant, k), abs=1e-12
        )
        assert ndcg_at_k(ranked, relevant, k) == pytest.approx(
            reference_ndcg(ranked, relevant, k), abs=1e-12
        )

    @given(st.integers(min_value=0, max_value=10**9))
    @settings(max_examples=200, deadline=None)
    def test_ranges_and_orderings(self, seed: int) -> None:
        rng = random.Random(seed)
        ranked, relevant, k = random_instance(rng)
        acc = accuracy_at_k(ranked, relevant, k)
        mrr = mrr_at_k(ranked, relevant, k)
        ndcg = ndcg_at_k(ranked, relevant, k)
        assert acc in (0, 1)
        assert 0.0 <= mrr <= 1.0
        assert 0.0 <= ndcg <= 1.0 + 1e-12
        assert mrr <= acc  # reciprocal rank can't exceed the hit indicator
        if acc == 0:
            assert mrr == 0.0 and ndcg == 0.0

    @given(st.integers(min_value=0, max_value=10**9))
    @settings(max_examples=100, deadline=None)
    def test_accuracy_and_mrr_monotone_in_k(self, seed: int) -> None:
        rng = random.Random(seed)
        ranked, relevant, _ = random_instance(rng)
        for smaller, larger in [(1, 3), (3, 5), (5, 10)]:
            assert accuracy_at_k(ranked, relevant, smaller) <= accuracy_at_k(
                ranked, relevant, larger
            )
            assert mrr_at_k(ranked, relevant, smaller) <= mrr_at_k(
                ranked, relevant, larger
            )

    @given(st.integers(min_value=0, max_value=10**9))
    @settings(max_examples=100, deadline=None)
    def test_ndcg_monotone_in_k_for_single_relevant(self, seed: int) -> None:
        # with several relevant ids a larger k can raise the ideal faster
        # than the achieved gain, so monotonicity only holds for one target
        rng = random.Random(seed)
        ranked, _, _ = random_instance(rng)
        relevant = {rng.choice([f"i{j}" for j in range(10)])}
        for smaller, larger in [(1, 3), (3, 5), (5, 10)]:
            assert (
                ndcg_at_k(ranked, relevant, smaller)
                <= ndcg_at_k(ranked, relevant, larger) + 1e-12
            )

    def test_ndcg_not_monotone_with_multiple_relevant(self) -> None:
        # both relevant ids exist, only one is ranked first: k=1 looks
        # perfect while k=2 exposes the miss
        ranked = ["a", "x"]
        relevant = {"a", "b"}
        assert ndcg_at_k(ranked, relevant, 1) == pytest.approx(1.0)
        assert ndcg_at_k(ranked, relevant, 2) < 1.0


class TestAggregate:
    def test_three_runs(self) -> None:
        summary = aggregate([[0.9], [1.0], [0.95]])
        assert summary.mean == pytest.approx(0.95, abs=1e-12)
        assert summary.std == pytest.approx(0.05, abs=1e-12)
        assert summary.n_reports == 1
        assert summary.n_runs == 3

    def test_single_run_std_zero(self) -> None:
        summary = aggregate([[1.0, 0.0, 0.5]])
        assert summary.mean == pytest.approx(0.5)
        assert summary.std == 0.0
        assert summary.n_reports == 3
        assert summary.n_runs == 1

    def test_mean_of_run_means(self) -> None:
        # within-run averaging first: runs [[1, 0]] and [[1, 1]] average
        # to 0.5 and 1.0, whose mean is 0.75
        summary = aggregate([[1.0, 0.0], [1.0, 1.0]])
        assert summary.mean == pytest.approx(0.75)

    def test_errors(self) -> None:
        with pytest.raises(ValueError):
            aggregate([])
        with pytest.raises(ValueError):
            aggregate([[]])
        with pytest.raises(ValueError):
            aggregate([[1.0], [1.0, 0.0]])


class TestReportShapes:
    def make_report(self, k: int = 5) -> MetricReport:
        return MetricReport.from_runs(
            k=k,
            accuracy_runs=[[1.0, 0.0], [1.0, 1.0]],
            mrr_runs=[[1.0, 0.0], [0.5, 1.0]],
            ndcg_runs=[[1.0, 0.0], [0.6, 1.0]],
        )

    def test_from_runs(self) -> None:
        report = self.make_report()
        assert report.k == 5
        assert report.n_reports == 2
        assert report.n_runs == 2
        assert report.accuracy.mean == pytest.approx(0.75)

    def test_mismatched_summaries_rejected(self) -> None:
        a = MetricSummary(mean=1.0, std=0.0, n_reports=5, n_runs=1)
        b = MetricSummary(mean=1.0, std=0.0, n_reports=6, n_runs=1)
        with pytest.raises(ValueError):
            MetricReport(k=1, accuracy=a, mrr=a, ndcg=b)

    def test_row_order(self) -> None:
        rows = report_rows([self.make_report(3), self.make_report(5)])
        assert [(r["k"], r["metric"]) for r in rows] == [
            (3, "accuracy"),
            (3, "mrr"),
            (3, "ndcg"),
            (5, "accuracy"),
            (5, "mrr"),
            (5, "ndcg"),
        ]

    def test_csv_deterministic_and_full_precision(self, tmp_path) -> None:
        report = self.make_report()
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_reports_csv([report], a)
        write_reports_csv([report], b)
        assert a.read_bytes() == b.read_bytes()
        text = a.read_text(encoding="utf-8")
        assert text.splitlines()[0] == "k,metric,mean,std,n"
        assert repr(report.accuracy.mean) in text

    def test_json_round_trip(self, tmp_path) -> None:
        import json

        report = self.make_report()
        out = tmp_path / "r.json"
        write_reports_json([report], out)
        rows = json.loads(out.read_text(encoding="utf-8"))
        assert len(rows) == 3
        assert rows[0]["metric"] == "accuracy"
        assert rows[0]["mean"] == report.accuracy.mean
