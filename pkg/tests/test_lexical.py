from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from incident_linker.lexical import (
    BM25Params,
    build_index,
    bm25_rank,
    bm25_score,
)

from oracles import reference_bm25

FIXTURE = {
    "d1": ["robot", "robot", "fell"],
    "d2": ["car", "crashed"],
    "d3": ["robot", "crashed"],
}


class TestFrozenFixture:
    def test_avgdl(self) -> None:
        index = build_index(FIXTURE)
        assert index.avgdl == pytest.approx(7.0 / 3.0, abs=1e-15)
        assert index.doc_count == 3

    def test_scores_match_hand_computation(self) -> None:
        index = build_index(FIXTURE)
        query = ["robot"]
        assert bm25_score(query, "d1", index) == pytest.approx(
            0.5981864372218454, abs=1e-9
        )
        assert bm25_score(query, "d3", index) == pytest.approx(
            0.4991762683023676, abs=1e-9
        )
        assert bm25_score(query, "d2", index) == 0.0

    def test_idf_value(self) -> None:
        # df(robot) = 2 of 3 docs: ln((3 - 2 + 0.5) / (2 + 0.5) + 1) = ln(1.6)
        index = build_index(FIXTURE)
        ranked = dict(bm25_rank(["robot"], index, k=3))
        # d3 has tf = 1 and |d| = 2: score = idf * 2.2 / (1 + 1.2*(0.25 + 0.75*6/7))
        idf = math.log(1.6)
        assert idf == pytest.approx(0.47000362924573563, abs=1e-15)
        denom = 1.0 + 1.2 * (0.25 + 0.75 * 2.0 / (7.0 / 3.0))
        assert ranked["d3"] == pytest.approx(idf * 2.2 / denom, abs=1e-9)

    def test_ranking_order(self) -> None:
        index = build_index(FIXTURE)
        ranked = bm25_rank(["robot"], index, k=3)
        assert [doc_id for doc_id, _ in ranked] == ["d1", "d3", "d2"]

    def test_matches_reference_implementation(self) -> None:
        index = build_index(FIXTURE)
        for doc_id in FIXTURE:
            assert bm25_score(["robot"], doc_id, index) == pytest.approx(
                reference_bm25(["robot"], doc_id, FIXTURE), abs=1e-9
            )


class TestSemantics:
    def test_query_term_set(self) -> None:
        index = build_index(FIXTURE)
        assert bm25_score(["robot", "robot"], "d1", index) == bm25_score(
            ["robot"], "d1", index
        )

    def test_unknown_terms_add_zero(self) -> None:
        index = build_index(FIXTURE)
        base = bm25_score(["robot"], "d1", index)
        assert bm25_score(["robot", "zzz"], "d1", index) == base

    def test_empty_query_all_zero(self) -> None:
        index = build_index(FIXTURE)
        ranked = bm25_rank([], index, k=3)
        assert ranked == [("d1", 0.0), ("d2", 0.0), ("d3", 0.0)]

    def test_ties_broken_by_ascending_id(self) -> None:
        index = build_index({"b": ["x"], "a": ["x"], "c": ["y"]})
        ranked = bm25_rank(["x"], index, k=3)
        assert [doc_id for doc_id, _ in ranked[:2]] == ["a", "b"]

    def test_k_caps_at_doc_count(self) -> None:
        index = build_index(FIXTURE)
        assert len(bm25_rank(["robot"], index, k=50)) == 3
        assert len(bm25_rank(["robot"], index, k=2)) == 2

    def test_rank_and_score_agree_bitwise(self) -> None:
        index = build_index(FIXTURE)
        query = ["robot", "crashed", "fell"]
        for doc_id, score in bm25_rank(query, index, k=3):
            assert score == bm25_score(query, doc_id, index)

    def test_empty_document_scores_zero(self) -> None:
        index = build_index({"d1": ["robot"], "d2": []})
        assert bm25_score(["robot"], "d2", index) == 0.0


class TestErrors:
    def test_unknown_doc(self) -> None:
        index = build_index(FIXTURE)
        with pytest.raises(ValueError, match="d99"):
            bm25_score(["robot"], "d99", index)

    def test_bad_k(self) -> None:
        index = build_index(FIXTURE)
        with pytest.raises(ValueError):
            bm25_rank(["robot"], index, k=0)

    def test_empty_corpus(self) -> None:
        with pytest.raises(ValueError):
            build_index({})

    def test_all_empty_docs(self) -> None:
        with pytest.raises(ValueError):
            build_index({"d1": [], "d2": []})

    def test_param_validation(self) -> None:
        with pytest.raises(ValueError):
            BM25Params(k1=-0.1)
        with pytest.raises(ValueError):
            BM25Params(b=1.5)


VOCAB = ["robot", "car", "drone", "crash", "fire", "leak", "bias", "fell"]


def random_corpus(rng: random.Random) -> dict[str, list[str]]:
    n = rng.randint(2, 8)
    docs = {
        f"d{i:02d}": [rng.choice(VOCAB) for _ in range(rng.randint(0, 6))]
        for i in range(n)
    }
    if all(not tokens for tokens in docs.values()):
        docs["d00"] = ["robot"]
    return docs


class TestProperties:
    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=150, deadline=None)
    def test_agrees_with_reference_everywhere(self, seed: int) -> None:
        rng = random.Random(seed)
        docs = random_corpus(rng)
        query = [rng.choice(VOCAB) for _ in range(rng.randint(0, 4))]
        index = build_index(docs)
        for doc_id in docs:
            got = bm25_score(query, doc_id, index)
            want = reference_bm25(query, doc_id, docs)
            assert got == pytest.approx(want, abs=1e-9)
            assert got >= 0.0

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=100, deadline=None)
    def test_rank_is_sorted_and_complete(self, seed: int) -> None:
        rng = random.Random(seed)
        docs = random_corpus(rng)
        query = [rng.choice(VOCAB) for _ in range(rng.randint(1, 4))]
        index = build_index(docs)
        ranked = bm25_rank(query, index, k=len(docs))
        assert sorted(doc_id for doc_id, _ in ranked) == sorted(docs)
        for (id_a, score_a), (id_b, score_b) in zip(ranked, ranked[1:]):
            assert score_a > score_b or (score_a == score_b and id_a < id_b)
        for doc_id, score in ranked:
            assert score == bm25_score(query, doc_id, index)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_more_matching_occurrences_never_hurt_rank_of_exact_dupe(
        self, seed: int
    ) -> None:
        # two identical docs tie exactly and fall back to id order
        rng = random.Random(seed)
        tokens = [rng.choice(VOCAB) for _ in range(rng.randint(1, 5))]
        docs = {"a": list(tokens), "b": list(tokens), "c": [rng.choice(VOCAB)]}
        index = build_index(docs)
        ranked = bm25_rank(tokens, index, k=3)
        pos = {doc_id: i for i, (doc_id, _) in enumerate(ranked)}
        assert pos["a"] < pos["b"]
