"""Query-likelihood retrieval with Dirichlet smoothing and its translation
language model extension.

Scores are accumulated in log space. The translation model generalizes the
basic model: each query term may be generated by related document terms via
translation probabilities; with self-only tables the two scorers coincide
exactly.
"""

from __future__ import annotations

import gzip
import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .embeddings import EmbeddingModel
from .textproc import Pipeline

__all__ = [
    "Index",
    "LmConfig",
    "TranslationTable",
    "ExpansionPolicy",
    "build_index",
    "save_index",
    "load_index",
    "lm_score",
    "tlm_score",
    "build_translation_table",
    "read_jsonl_corpus",
    "read_trec_corpus",
    "read_topics",
    "write_run",
    "read_run",
]

logger = logging.getLogger(__name__)

MAX_RUN_DOCS = 1000


@dataclass(frozen=True)
class LmConfig:
    """Dirichlet smoothing weight; 1000 is the conventional default."""

    mu: float = 1000.0

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ValueError("mu must be positive")


@dataclass(eq=False)
class Index:
    """Inverted index plus the collection statistics the scorers need."""

    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    collection_term_counts: dict[str, int]
    total_tokens: int
    doc_count: int

    def collection_prob(self, term: str) -> float:
        if self.total_tokens == 0:
            return 0.0
        return self.collection_term_counts.get(term, 0) / self.total_tokens


def build_index(corpus: Iterable[tuple[str, str]], pipeline: Pipeline) -> Index:
    """Index a stream of (doc_id, text). Empty documents are legal (length 0);
    duplicate ids are not."""
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    collection: dict[str, int] = {}
    total = 0
    for doc_id, text in corpus:
        if doc_id in doc_lengths:
            raise ValueError(f"duplicate doc_id {doc_id!r}")
        terms = pipeline.process(text)
        doc_lengths[doc_id] = len(terms)
        total += len(terms)
        tf: dict[str, int] = {}
        for t in terms:
            tf[t] = tf.get(t, 0) + 1
        for t, n in tf.items():
            postings.setdefault(t, []).append((doc_id, n))
            collection[t] = collection.get(t, 0) + n
    for plist in postings.values():
        plist.sort(key=lambda entry: entry[0])
    return Index(
        postings=postings,
        doc_lengths=doc_lengths,
        collection_term_counts=collection,
        total_tokens=total,
        doc_count=len(doc_lengths),
    )


def save_index(index: Index, path: str) -> None:
    """JSON serialization (gzipped when the path ends in .gz)."""
    payload = {
        "postings": {t: [[d, n] for d, n in pl] for t, pl in index.postings.items()},
        "doc_lengths": index.doc_lengths,
        "collection_term_counts": index.collection_term_counts,
        "total_tokens": index.total_tokens,
        "doc_count": index.doc_count,
    }
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "wt", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_index(path: str) -> Index:
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        payload = json.load(fh)
    return Index(
        postings={t: [(d, int(n)) for d, n in pl] for t, pl in payload["postings"].items()},
        doc_lengths={d: int(n) for d, n in payload["doc_lengths"].items()},
        collection_term_counts={t: int(n) for t, n in payload["collection_term_counts"].items()},
        total_tokens=int(payload["total_tokens"]),
        doc_count=int(payload["doc_count"]),
    )


@dataclass(eq=False)
class TranslationTable:
    """Per query term: expansion entries (term, P_T(query_term | term)).

    Entries keep their construction order; probabilities sum to 1 per term.
    """

    entries: dict[str, list[tuple[str, float]]] = field(default_factory=dict)

    def add(self, query_term: str, weighted_terms: list[tuple[str, float]]) -> None:
        total = sum(w for _, w in weighted_terms)
        if not weighted_terms or total <= 0:
            raise ValueError(f"no positive translation mass for {query_term!r}")
        self.entries[query_term] = [(t, w / total) for t, w in weighted_terms]

    def expansion(self, query_term: str) -> list[tuple[str, float]]:
        try:
            return self.entries[query_term]
        except KeyError:
            raise KeyError(f"query term {query_term!r} missing from translation table") from None

    @classmethod
    def self_only(cls, query_terms: Iterable[str]) -> "TranslationTable":
        table = cls()
        for t in query_terms:
            table.entries.setdefault(t, [(t, 1.0)])
        return table


@dataclass(frozen=True)
class ExpansionPolicy:
    """How to pick related embedding terms per query term.

    mode: "none" (self only), "threshold" (all terms with similarity >= value),
    or "knn" (top-k regardless of similarity).
    """

    mode: str = "none"
    threshold: float | None = None
    k: int | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("none", "threshold", "knn"):
            raise ValueError(f"unknown expansion mode {self.mode!r}")
        if self.mode == "threshold" and self.threshold is None:
            raise ValueError("threshold mode needs a threshold value")
        if self.mode == "knn" and (self.k is None or self.k < 1):
            raise ValueError("knn mode needs k >= 1")


def build_translation_table(
    query_terms: list[str],
    policy: ExpansionPolicy,
    embedding: EmbeddingModel | None = None,
) -> TranslationTable:
    """Similarity-normalized translation probabilities over each query term's
    expansion set, always including the term itself with similarity 1.

    Query terms absent from the embedding vocabulary degenerate to self-only
    entries, as do terms with no qualifying neighbor. Neighbors with
    non-positive similarity are discarded: they would break the probability
    simplex.
    """
    if policy.mode != "none" and embedding is None:
        raise ValueError(f"expansion mode {policy.mode!r} needs an embedding model")
    table = TranslationTable()
    for term in query_terms:
        if term in table.entries:
            continue
        pairs: list[tuple[str, float]] = [(term, 1.0)]
        if policy.mode != "none" and embedding is not None and term in embedding:
            if policy.mode == "threshold":
                neighbors = embedding.neighbors_above(term, float(policy.threshold))
            else:
                neighbors = embedding.knn(term, int(policy.k))
            pairs.extend((t, s) for t, s in neighbors if s > 0.0 and t != term)
        table.add(term, pairs)
    return table


def _prepare_query(index: Index, query_terms: list[str]) -> list[str]:
    if index.doc_count == 0:
        raise ValueError("cannot score against an empty index")
    kept = []
    for t in query_terms:
        if index.collection_term_counts.get(t, 0) > 0:
            kept.append(t)
        else:
            logger.warning("dropping query term %r: zero collection frequency", t)
    if not kept:
        raise ValueError("query has no terms with collection evidence")
    return kept


def tlm_score(
    index: Index,
    config: LmConfig,
    table: TranslationTable,
    query_terms: list[str],
) -> list[tuple[str, float]]:
    """Translation-model ranking: per query term, sum translation-weighted
    Dirichlet-smoothed document probabilities over the term's expansion set.

    Candidates are the documents containing at least one expansion-set term;
    they are returned ranked by log score (descending), doc_id breaking ties.
    """
    kept = _prepare_query(index, query_terms)
    expansions = [table.expansion(t) for t in kept]

    tf_maps: dict[str, dict[str, int]] = {}
    candidates: set[str] = set()
    for entry in expansions:
        for term, _ in entry:
            if term not in tf_maps:
                tf_maps[term] = dict(index.postings.get(term, ()))
            candidates.update(tf_maps[term])
    if not candidates:
        return []

    mu = config.mu
    p_coll = {t: index.collection_prob(t) for t in tf_maps}
    ranked: list[tuple[str, float]] = []
    for doc_id in sorted(candidates):
        length = index.doc_lengths[doc_id]
        denom = length + mu
        score = 0.0
        for entry in expansions:
            inner = 0.0
            for term, p_t in entry:
                tf = tf_maps[term].get(doc_id, 0)
                inner += p_t * ((tf + mu * p_coll[term]) / denom)
            score += math.log(inner)
        ranked.append((doc_id, score))
    ranked.sort(key=lambda pair: (-pair[1], pair[0]))
    return ranked


def lm_score(index: Index, config: LmConfig, query_terms: list[str]) -> list[tuple[str, float]]:
    """Basic query-likelihood ranking with Dirichlet smoothing.

    Implemented as the translation model with self-only tables, which makes
    the reduction identity exact by construction.
    """
    kept = _prepare_query(index, query_terms)
    return tlm_score(index, config, TranslationTable.self_only(kept), kept)


def read_jsonl_corpus(path: str) -> Iterator[tuple[str, str]]:
    """Line-delimited JSON objects with "id" and "text" fields."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON ({exc})") from None
            if "id" not in obj or "text" not in obj:
                raise ValueError(f"{path}:{lineno}: record needs 'id' and 'text' fields")
            yield str(obj["id"]), str(obj["text"])


_DOCNO_RE = re.compile(r"<DOCNO>(.*?)</DOCNO>", re.DOTALL)


def read_trec_corpus(path: str) -> Iterator[tuple[str, str]]:
    """TREC-tagged documents: <DOC> blocks with <DOCNO> and <TEXT> sections."""
    in_doc = False
    in_text = False
    doc_lines: list[str] = []
    text_lines: list[str] = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped.startswith("<DOC>"):
                in_doc, doc_lines, text_lines = True, [], []
                continue
            if stripped.startswith("</DOC>"):
                if not in_doc:
                    raise ValueError(f"{path}: </DOC> without <DOC>")
                header = "\n".join(doc_lines)
                match = _DOCNO_RE.search(header)
                if match is None:
                    raise ValueError(f"{path}: document without <DOCNO>")
                yield match.group(1).strip(), "\n".join(text_lines)
                in_doc = in_text = False
                continue
            if not in_doc:
                continue
            if stripped.startswith("<TEXT>"):
                in_text = True
                remainder = stripped[len("<TEXT>") :]
                if remainder.endswith("</TEXT>"):
                    text_lines.append(remainder[: -len("</TEXT>")])
                    in_text = False
                elif remainder:
                    text_lines.append(remainder)
                continue
            if stripped.startswith("</TEXT>"):
                in_text = False
                continue
            if in_text:
                text_lines.append(line.rstrip("\n"))
            else:
                doc_lines.append(line.rstrip("\n"))
    if in_doc:
        raise ValueError(f"{path}: unterminated <DOC> block")


def read_corpus(path: str, fmt: str) -> Iterator[tuple[str, str]]:
    if fmt == "jsonl":
        return read_jsonl_corpus(path)
    if fmt == "trec":
        return read_trec_corpus(path)
    raise ValueError(f"unknown corpus format {fmt!r}")


def read_topics(path: str) -> list[tuple[str, str]]:
    """Tab-separated lines: topic_id<TAB>query text."""
    topics = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'topic_id<TAB>query text'")
            topic_id, text = line.split("\t", 1)
            topics.append((topic_id.strip(), text))
    if not topics:
        raise ValueError(f"{path}: no topics found")
    return topics


def write_run(
    run: dict[str, list[tuple[str, float]]],
    path: str,
    run_tag: str = "simthresh",
    max_docs: int = MAX_RUN_DOCS,
) -> None:
    """TREC run format: topic_id Q0 doc_id rank score run_tag."""
    with open(path, "w", encoding="utf-8") as fh:
        for topic_id in sorted(run, key=_topic_sort_key):
            for rank, (doc_id, score) in enumerate(run[topic_id][:max_docs], start=1):
                fh.write(f"{topic_id} Q0 {doc_id} {rank} {score!r} {run_tag}\n")


def read_run(path: str) -> dict[str, list[tuple[str, float]]]:
    run: dict[str, list[tuple[str, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 whitespace-separated fields")
            topic_id, _, doc_id, _, score, _ = parts
            run.setdefault(topic_id, []).append((doc_id, float(score)))
    return run


def _topic_sort_key(topic_id: str) -> tuple[int, str]:
    # Numeric topic ids sort numerically, everything else lexicographically.
    return (0, f"{int(topic_id):020d}") if topic_id.isdigit() else (1, topic_id)
