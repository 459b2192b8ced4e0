import logging
import math

import pytest

from simthresh.retrieval import (
    ExpansionPolicy,
    LmConfig,
    TranslationTable,
    build_index,
    build_translation_table,
    lm_score,
    load_index,
    read_jsonl_corpus,
    read_topics,
    read_trec_corpus,
    read_run,
    save_index,
    tlm_score,
    write_run,
)
from simthresh.textproc import Pipeline

from conftest import hub_model
from retrieval_oracle import dense_rank

PLAIN = Pipeline(stopwords=frozenset(), stem_enabled=False)
TOY_DOCS = [("d1", "cat cat dog"), ("d2", "dog")]


def toy_index():
    return build_index(TOY_DOCS, PLAIN)


def random_corpus(rng, n_docs, vocab_size, max_len=12):
    vocab = [f"w{i}" for i in range(vocab_size)]
    docs = {}
    for i in range(n_docs):
        length = int(rng.integers(1, max_len))
        docs[f"d{i:03d}"] = [vocab[j] for j in rng.integers(0, vocab_size, size=length)]
    return docs


class TestBuildIndex:
    def test_hand_counts(self):
        index = toy_index()
        assert dict(index.postings["cat"]) == {"d1": 2}
        assert dict(index.postings["dog"]) == {"d1": 1, "d2": 1}
        assert index.doc_lengths == {"d1": 3, "d2": 1}
        assert index.collection_term_counts == {"cat": 2, "dog": 2}
        assert index.total_tokens == 4
        assert index.doc_count == 2

    def test_duplicate_doc_id(self):
        with pytest.raises(ValueError, match="duplicate"):
            build_index([("d1", "a"), ("d1", "b")], PLAIN)

    def test_empty_corpus_scoring_error(self):
        index = build_index([], PLAIN)
        assert index.doc_count == 0
        with pytest.raises(ValueError, match="empty index"):
            lm_score(index, LmConfig(), ["cat"])

    def test_empty_document_allowed(self):
        index = build_index([("d1", "cat"), ("d2", "")], PLAIN)
        assert index.doc_lengths["d2"] == 0

    def test_postings_sorted_by_doc_id(self):
        index = build_index([("z", "cat"), ("a", "cat"), ("m", "cat")], PLAIN)
        assert [d for d, _ in index.postings["cat"]] == ["a", "m", "z"]

    def test_build_order_invariance(self, rng):
        docs = list(random_corpus(rng, 10, 8).items())
        a = build_index([(d, " ".join(t)) for d, t in docs], PLAIN)
        b = build_index([(d, " ".join(t)) for d, t in reversed(docs)], PLAIN)
        query = ["w0", "w3"]
        assert lm_score(a, LmConfig(), query) == lm_score(b, LmConfig(), query)

    def test_save_load_round_trip(self, tmp_path):
        index = toy_index()
        for name in ("idx.json", "idx.json.gz"):
            path = tmp_path / name
            save_index(index, str(path))
            loaded = load_index(str(path))
            assert loaded.postings == index.postings
            assert loaded.doc_lengths == index.doc_lengths
            assert loaded.total_tokens == index.total_tokens


class TestLmScore:
    def test_hand_example(self):
        # Only d1 contains the query term, so only d1 is ranked; the smoothing
        # arithmetic for both documents is still pinned here.
        ranked = lm_score(toy_index(), LmConfig(mu=1000), ["cat"])
        assert [d for d, _ in ranked] == ["d1"]
        assert ranked[0][1] == pytest.approx(math.log(502 / 1003), abs=1e-12)
        index = toy_index()
        p_coll = index.collection_prob("cat")
        smoothed_d2 = (0 + 1000 * p_coll) / (index.doc_lengths["d2"] + 1000)
        assert smoothed_d2 == pytest.approx(500 / 1001, abs=1e-15)
        smoothed_d1 = (2 + 1000 * p_coll) / (index.doc_lengths["d1"] + 1000)
        assert smoothed_d1 > smoothed_d2

    def test_large_mu_limit(self):
        ranked = lm_score(toy_index(), LmConfig(mu=1e9), ["cat", "dog"])
        scores = [s for _, s in ranked]
        assert max(scores) - min(scores) < 1e-6

    def test_zero_frequency_term_dropped(self, caplog):
        with caplog.at_level(logging.WARNING):
            ranked = lm_score(toy_index(), LmConfig(), ["cat", "unseen"])
        assert "unseen" in caplog.text
        assert [d for d, _ in ranked] == ["d1"]
        assert ranked == lm_score(toy_index(), LmConfig(), ["cat"])

    def test_all_terms_dropped_is_error(self):
        with pytest.raises(ValueError, match="collection evidence"):
            lm_score(toy_index(), LmConfig(), ["unseen", "alsounseen"])

    def test_tie_break_by_doc_id(self):
        index = build_index([("b", "cat"), ("a", "cat")], PLAIN)
        ranked = lm_score(index, LmConfig(), ["cat"])
        assert [d for d, _ in ranked] == ["a", "b"]

    def test_repeated_query_terms_compound(self):
        index = toy_index()
        once = dict(lm_score(index, LmConfig(), ["cat"]))
        twice = dict(lm_score(index, LmConfig(), ["cat", "cat"]))
        for doc in once:
            assert twice[doc] == pytest.approx(2 * once[doc], abs=1e-12)


class TestTranslationTable:
    def test_self_only_when_no_neighbors(self):
        emb = hub_model({"b": 0.3})
        policy = ExpansionPolicy(mode="threshold", threshold=0.9)
        table = build_translation_table(["a"], policy, emb)
        assert table.expansion("a") == [("a", 1.0)]

    def test_normalization(self):
        emb = hub_model({"b": 0.8})
        policy = ExpansionPolicy(mode="threshold", threshold=0.5)
        table = build_translation_table(["a"], policy, emb)
        entries = dict(table.expansion("a"))
        assert entries["a"] == pytest.approx(1 / 1.8, abs=1e-9)
        assert entries["b"] == pytest.approx(0.8 / 1.8, abs=1e-9)
        assert sum(entries.values()) == pytest.approx(1.0, abs=1e-12)

    def test_threshold_above_one_equals_none(self):
        emb = hub_model({"b": 0.999})
        none = build_translation_table(["a"], ExpansionPolicy(mode="none"))
        thr = build_translation_table(
            ["a"], ExpansionPolicy(mode="threshold", threshold=1.0 + 1e-9), emb
        )
        assert none.entries == thr.entries

    def test_oov_degenerates(self):
        emb = hub_model({"b": 0.8})
        policy = ExpansionPolicy(mode="threshold", threshold=0.5)
        table = build_translation_table(["zzz"], policy, emb)
        assert table.expansion("zzz") == [("zzz", 1.0)]

    def test_knn_mode(self):
        emb = hub_model({"b": 0.9, "c": 0.7, "d": 0.2})
        table = build_translation_table(["a"], ExpansionPolicy(mode="knn", k=2), emb)
        assert [t for t, _ in table.expansion("a")] == ["a", "b", "c"]

    def test_nonpositive_similarities_excluded(self):
        emb = hub_model({"b": 0.5, "c": -0.4})
        table = build_translation_table(
            ["a"], ExpansionPolicy(mode="threshold", threshold=-1.0), emb
        )
        terms = [t for t, _ in table.expansion("a")]
        assert "c" not in terms
        probs = [p for _, p in table.expansion("a")]
        assert all(0 < p <= 1 for p in probs)
        assert sum(probs) == pytest.approx(1.0, abs=1e-9)

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            ExpansionPolicy(mode="threshold")
        with pytest.raises(ValueError):
            ExpansionPolicy(mode="knn", k=0)
        with pytest.raises(ValueError):
            ExpansionPolicy(mode="fuzzy")

    def test_missing_table_entry(self):
        table = TranslationTable.self_only(["cat"])
        with pytest.raises(KeyError, match="dog"):
            tlm_score(toy_index(), LmConfig(), table, ["cat", "dog"])


class TestTlmScore:
    def test_reduction_identity_bitwise(self, rng):
        for _ in range(10):
            docs = random_corpus(rng, 12, 10)
            index = build_index([(d, " ".join(t)) for d, t in docs.items()], PLAIN)
            vocab = sorted({t for terms in docs.values() for t in terms})
            query = [vocab[i] for i in rng.integers(0, len(vocab), size=3)]
            base = lm_score(index, LmConfig(), query)
            table = TranslationTable.self_only(query)
            translated = tlm_score(index, LmConfig(), table, query)
            assert base == translated

    def test_expansion_scores_document_without_query_term(self):
        index = build_index([("d1", "cat"), ("d2", "feline")], PLAIN)
        table = TranslationTable()
        table.add("cat", [("cat", 1.0), ("feline", 0.8)])
        ranked = dict(tlm_score(index, LmConfig(), table, ["cat"]))
        assert "d2" in ranked
        base = dict(lm_score(index, LmConfig(), ["cat"]))
        assert "d2" not in base
        assert ranked["d2"] > float("-inf")

    def test_hand_example_two_docs(self):
        # expansion cat -> {cat: 0.5556, dog: 0.4444} over the toy index
        index = toy_index()
        table = TranslationTable()
        table.add("cat", [("cat", 1.0), ("dog", 0.8)])
        ranked = tlm_score(index, LmConfig(mu=1000), table, ["cat"])
        p_cat, p_dog = 1 / 1.8, 0.8 / 1.8
        want_d1 = math.log(p_cat * (502 / 1003) + p_dog * (501 / 1003))
        want_d2 = math.log(p_cat * (500 / 1001) + p_dog * (501 / 1001))
        scores = dict(ranked)
        assert scores["d1"] == pytest.approx(want_d1, abs=1e-12)
        assert scores["d2"] == pytest.approx(want_d2, abs=1e-12)
        assert [d for d, _ in ranked] == ["d1", "d2"]

    def test_dense_oracle_equivalence(self, rng):
        for trial in range(20):
            docs = random_corpus(rng, int(rng.integers(2, 20)), int(rng.integers(3, 30)))
            index = build_index([(d, " ".join(t)) for d, t in docs.items()], PLAIN)
            vocab = sorted({t for terms in docs.values() for t in terms})
            k = int(rng.integers(1, 4))
            query = [vocab[i] for i in rng.integers(0, len(vocab), size=k)]
            table = TranslationTable()
            for tq in query:
                extra = vocab[int(rng.integers(0, len(vocab)))]
                pairs = [(tq, 1.0)]
                if extra != tq:
                    pairs.append((extra, float(rng.uniform(0.1, 0.9))))
                table.add(tq, pairs)
            mu = float(rng.uniform(10, 2000))
            got = tlm_score(index, LmConfig(mu=mu), table, query)
            want = dense_rank(docs, mu, table.entries, query)
            assert [d for d, _ in got] == [d for d, _ in want]
            for (_, log_score), (_, linear) in zip(got, want):
                assert math.exp(log_score) == pytest.approx(linear, rel=1e-10)

    def test_added_unrelated_doc_keeps_relative_order(self, rng):
        # Equal-length candidates: collection-model dilution rescales every
        # smoothed probability the same way, so the ranking cannot move.
        # (With unequal lengths the ranking is NOT dilution-invariant.)
        length = 8
        docs = {}
        for i in range(10):
            terms = [f"w{j}" for j in rng.integers(0, 6, size=length)]
            docs[f"d{i:03d}"] = terms
        index_before = build_index([(d, " ".join(t)) for d, t in docs.items()], PLAIN)
        query = ["w0", "w1"]
        before = [d for d, _ in lm_score(index_before, LmConfig(), query)]
        docs["zzz"] = ["other"] * 40
        index_after = build_index([(d, " ".join(t)) for d, t in docs.items()], PLAIN)
        after = [d for d, _ in lm_score(index_after, LmConfig(), query) if d != "zzz"]
        assert before == after

    def test_equal_length_docs_order_immune_to_dilution(self, rng):
        # With equal document lengths the candidate ordering depends only on
        # term frequencies, so collection-model dilution cannot flip it.
        docs = {f"d{i}": ["q"] * i + ["x"] * (6 - i) for i in range(1, 6)}
        table = TranslationTable.self_only(["q"])
        mu = 700.0
        base = [d for d, _ in dense_rank(docs, mu, table.entries, ["q"])]
        docs_more = dict(docs)
        docs_more["filler"] = ["pad"] * 50
        diluted = [d for d, _ in dense_rank(docs_more, mu, table.entries, ["q"]) if d != "filler"]
        assert base == diluted


class TestReaders:
    def test_jsonl(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "d1", "text": "hello world"}\n{"id": "d2", "text": "bye"}\n')
        assert list(read_jsonl_corpus(str(path))) == [("d1", "hello world"), ("d2", "bye")]

    def test_jsonl_missing_field(self, tmp_path):
        path = tmp_path / "c.jsonl"
        path.write_text('{"id": "d1"}\n')
        with pytest.raises(ValueError, match="text"):
            list(read_jsonl_corpus(str(path)))

    def test_trec(self, tmp_path):
        path = tmp_path / "c.trec"
        path.write_text(
            "<DOC>\n<DOCNO> FT911-1 </DOCNO>\n<HEAD>ignored</HEAD>\n"
            "<TEXT>\nFirst body\nsecond line\n</TEXT>\n</DOC>\n"
            "<DOC>\n<DOCNO>FT911-2</DOCNO>\n<TEXT>inline</TEXT>\n</DOC>\n"
        )
        docs = list(read_trec_corpus(str(path)))
        assert docs[0][0] == "FT911-1"
        assert "First body" in docs[0][1] and "second line" in docs[0][1]
        assert "ignored" not in docs[0][1]
        assert docs[1] == ("FT911-2", "inline")

    def test_trec_unterminated(self, tmp_path):
        path = tmp_path / "c.trec"
        path.write_text("<DOC>\n<DOCNO>x</DOCNO>\n<TEXT>y</TEXT>\n")
        with pytest.raises(ValueError, match="unterminated"):
            list(read_trec_corpus(str(path)))

    def test_topics(self, tmp_path):
        path = tmp_path / "topics.tsv"
        path.write_text("301\tinternational organized crime\n302\tpoliosis\n")
        assert read_topics(str(path)) == [
            ("301", "international organized crime"),
            ("302", "poliosis"),
        ]

    def test_topics_malformed(self, tmp_path):
        path = tmp_path / "topics.tsv"
        path.write_text("301 no tab here\n")
        with pytest.raises(ValueError, match="TAB"):
            read_topics(str(path))


class TestRunIo:
    def test_round_trip(self, tmp_path):
        run = {"301": [("d2", -1.5), ("d1", -2.5)], "9": [("d9", -0.25)]}
        path = tmp_path / "run.txt"
        write_run(run, str(path), run_tag="tag1")
        lines = path.read_text().splitlines()
        assert lines[0] == "9 Q0 d9 1 -0.25 tag1"
        assert lines[1] == "301 Q0 d2 1 -1.5 tag1"
        assert lines[2] == "301 Q0 d1 2 -2.5 tag1"
        assert read_run(str(path)) == run

    def test_max_docs_cap(self, tmp_path):
        run = {"1": [(f"d{i:04d}", -float(i)) for i in range(1500)]}
        path = tmp_path / "run.txt"
        write_run(run, str(path))
        loaded = read_run(str(path))
        assert len(loaded["1"]) == 1000
