"""Role-weighted query-likelihood retrieval.

A document's relevance combines how well its Dirichlet-smoothed language
model generates the query (Sat, a log-likelihood) with the role-weighted
share of query concepts it contains (Imp). The combination multiplies on
the likelihood scale, computed in log space as ``sat + log(imp)``.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus_index import CollectionIndex
from .expansion import ExpandedQuery
from .linguistics import ConceptualQuery, Role

log = logging.getLogger(__name__)

ROLE_ORDER = (Role.CoI, Role.DC, Role.RC, Role.SC, Role.EC)
DEFAULT_MU = 1000.0


@dataclass(frozen=True)
class SmoothingConfig:
    mu: float = DEFAULT_MU

    def __post_init__(self):
        if not self.mu >= 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")


@dataclass(frozen=True)
class RoleWeights:
    coi: float = 1.0
    dc: float = 0.8
    rc: float = 0.5
    sc: float = 0.0
    ec: float = 0.5

    def __post_init__(self):
        for name, v in zip(("CoI", "DC", "RC", "SC", "EC"), self.as_tuple()):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"weight {name}={v} outside [0, 1]")
        if self.sc != 0.0:
            raise ValueError("the SC weight is fixed at 0")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.coi, self.dc, self.rc, self.sc, self.ec)

    def weight(self, role: Role) -> float:
        return self.as_tuple()[ROLE_ORDER.index(role)]

    @classmethod
    def uniform(cls, value: float = 1.0) -> "RoleWeights":
        return cls(value, value, value, 0.0, value)

    @classmethod
    def from_genes(cls, genes: Sequence[float]) -> "RoleWeights":
        coi, dc, rc, _sc, ec = (float(g) for g in genes)
        return cls(coi, dc, rc, 0.0, ec)

    def dumps(self) -> str:
        return "".join(f"{r.value}={v!r}\n" for r, v in zip(ROLE_ORDER, self.as_tuple()))

    @classmethod
    def loads(cls, text: str) -> "RoleWeights":
        vals = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip().removeprefix("w_")
            if not sep or key not in {r.value for r in ROLE_ORDER}:
                raise ValueError(f"line {lineno}: expected ROLE=value")
            vals[key] = float(value)
        return cls(vals.get("CoI", 1.0), vals.get("DC", 0.8), vals.get("RC", 0.5),
                   vals.get("SC", 0.0), vals.get("EC", 0.5))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RoleWeights":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class ScoredDocument:
    doc_id: str
    sat: float
    imp: float
    rel: float


@dataclass
class QueryBag:
    counts: Counter
    size: int

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "QueryBag":
        c = Counter(t for t in terms if t)
        return cls(c, max(sum(c.values()), 1))


def _concepts(query: ExpandedQuery | ConceptualQuery, over: str = "expanded"):
    if isinstance(query, ExpandedQuery):
        return query.concepts if over == "expanded" else query.originals
    return query.concepts


def query_bag(query: ExpandedQuery | ConceptualQuery, over: str = "expanded") -> QueryBag:
    """Concept multiset for Sat; |q| is always the full (expanded) concept count."""
    bag = Counter(c.normalized for c in _concepts(query, over) if c.normalized)
    return QueryBag(bag, max(len(_concepts(query)), 1))


# -- scoring primitives ------------------------------------------------------------


def smoothed_prob(term: str, doc_id: str, index: CollectionIndex, cfg: SmoothingConfig) -> float:
    """Dirichlet-smoothed p(term | document)."""
    dl = index.doc_lengths[doc_id]
    if cfg.mu == 0 and dl == 0:
        raise ValueError(f"document {doc_id!r} is empty and mu = 0")
    nd = index.doc_term_count(term, doc_id)
    nc = index.collection_count(term)
    return (nd + cfg.mu * nc / index.total_tokens) / (dl + cfg.mu)


def sat(
    doc_id: str,
    bag: QueryBag | Counter,
    index: CollectionIndex,
    cfg: SmoothingConfig,
    diagnostics: list[str] | None = None,
) -> float:
    """Log-likelihood of the query bag under the document model.

    Terms absent from the whole collection have probability 0 everywhere
    and are skipped (and reported through ``diagnostics``).
    """
    counts = bag.counts if isinstance(bag, QueryBag) else bag
    total = 0.0
    for term, n in counts.items():
        if index.collection_count(term) == 0:
            if diagnostics is not None and term not in diagnostics:
                diagnostics.append(term)
            continue
        p = smoothed_prob(term, doc_id, index, cfg)
        total += n * math.log(p) if p > 0 else -math.inf
    return total


def role_counts(query, doc_id: str, index: CollectionIndex) -> tuple[int, ...]:
    """Number of query concepts present in the document, per role."""
    counts = [0] * len(ROLE_ORDER)
    for c in _concepts(query):
        if c.normalized and index.doc_term_count(c.normalized, doc_id) > 0:
            counts[ROLE_ORDER.index(c.role)] += 1
    return tuple(counts)


def _imp_from_counts(counts: Sequence[int], weights: Sequence[float], size: int) -> float:
    acc = 0.0
    for n, w in zip(counts, weights):
        acc += n * w
    return acc / size


def imp(query, doc_id: str, index: CollectionIndex, weights: RoleWeights) -> float:
    """Role-weighted share of query concepts found in the document."""
    size = max(len(_concepts(query)), 1)
    return _imp_from_counts(role_counts(query, doc_id, index), weights.as_tuple(), size)


def combine(sat_value: float, imp_value: float) -> float:
    if imp_value <= 0:
        raise ValueError("documents without matched concepts are not scored")
    return sat_value + math.log(imp_value)


def rel(query, doc_id: str, index: CollectionIndex, weights: RoleWeights,
        cfg: SmoothingConfig, over: str = "expanded") -> ScoredDocument:
    s = sat(doc_id, query_bag(query, over), index, cfg)
    i = imp(query, doc_id, index, weights)
    return ScoredDocument(doc_id, s, i, combine(s, i))


# -- per-query score table ------------------------------------------------------------


@dataclass
class TopicTable:
    """Weight-independent part of scoring one query: every candidate
    document's Sat and its per-role match counts."""

    doc_ids: list[str]
    sat: np.ndarray
    rows: np.ndarray  # unique role-count rows
    row_of: np.ndarray  # candidate -> index into rows
    size: int
    diagnostics: list[str] = field(default_factory=list)

    def rank(self, weights: RoleWeights | Sequence[float]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Indices of scored candidates in rank order, with their rel and imp."""
        w = weights.as_tuple() if isinstance(weights, RoleWeights) else tuple(weights)
        imps = [_imp_from_counts(r, w, self.size) for r in self.rows.tolist()]
        logs = [math.log(v) if v > 0 else -math.inf for v in imps]
        imp_arr = np.asarray(imps, dtype=float)[self.row_of] if imps else np.zeros(0)
        log_arr = np.asarray(logs, dtype=float)[self.row_of] if logs else np.zeros(0)
        keep = np.flatnonzero(imp_arr > 0)
        rel_arr = self.sat[keep] + log_arr[keep]
        order = keep[np.lexsort((keep, -rel_arr))]
        rel_full = np.full(len(self.doc_ids), -np.inf)
        rel_full[keep] = rel_arr
        return order, rel_full, imp_arr

    def scored(self, weights, k: int | None = None) -> list[ScoredDocument]:
        order, rel_arr, imp_arr = self.rank(weights)
        if k is not None:
            order = order[:k]
        return [
            ScoredDocument(self.doc_ids[i], float(self.sat[i]), float(imp_arr[i]), float(rel_arr[i]))
            for i in order
        ]


def candidate_documents(terms: Iterable[str], index: CollectionIndex) -> list[str]:
    docs: set[str] = set()
    for t in terms:
        if t:
            docs.update(index.docs_containing(t))
    return sorted(docs)


def build_table(query, index: CollectionIndex, cfg: SmoothingConfig,
                over: str = "expanded") -> TopicTable:
    bag = query_bag(query, over)
    concepts = _concepts(query)
    docs = candidate_documents((c.normalized for c in concepts), index)
    diagnostics: list[str] = []
    sats = [sat(d, bag, index, cfg, diagnostics) for d in docs]
    counts = [role_counts(query, d, index) for d in docs]
    if counts:
        rows, row_of = np.unique(np.asarray(counts, dtype=np.int64), axis=0, return_inverse=True)
        row_of = row_of.reshape(-1)
    else:
        rows, row_of = np.zeros((0, len(ROLE_ORDER)), dtype=np.int64), np.zeros(0, dtype=np.int64)
    if diagnostics:
        log.debug("query terms absent from collection: %s", diagnostics)
    return TopicTable(docs, np.asarray(sats, dtype=float), rows, row_of,
                      max(len(concepts), 1), diagnostics)


# -- search entry points ------------------------------------------------------------------


def _check_k(k: int) -> None:
    if k <= 0:
        raise ValueError(f"result depth must be positive, got {k}")


def search(query, index: CollectionIndex, weights: RoleWeights,
           cfg: SmoothingConfig = SmoothingConfig(), k: int = 1000,
           over: str = "expanded") -> list[ScoredDocument]:
    """Top-k documents by rel; ties by doc_id ascending."""
    _check_k(k)
    return build_table(query, index, cfg, over).scored(weights, k)


def _terms(query, index: CollectionIndex) -> list[str]:
    if isinstance(query, str):
        return index.pipeline.normalize(query)
    return [t for t in query if t]


def lm_search(query, index: CollectionIndex, cfg: SmoothingConfig = SmoothingConfig(),
              k: int = 1000) -> list[ScoredDocument]:
    """Unigram query-likelihood baseline over the raw normalized query terms."""
    _check_k(k)
    terms = _terms(query, index)
    bag = Counter(terms)
    scored = []
    for d in candidate_documents(bag, index):
        s = sat(d, bag, index, cfg)
        scored.append(ScoredDocument(d, s, 1.0, s))
    scored.sort(key=lambda sd: (-sd.rel, sd.doc_id))
    return scored[:k]


def rm_expand(query, index: CollectionIndex, k_docs: int = 10, n_terms: int = 10,
              cfg: SmoothingConfig = SmoothingConfig()) -> list[str]:
    """Pseudo-relevance feedback: append the ``n_terms`` most frequent terms
    of the top ``k_docs`` LM results (query terms excluded)."""
    terms = _terms(query, index)
    if n_terms <= 0:
        return terms
    if k_docs < 1:
        raise ValueError("k_docs must be >= 1")
    top = lm_search(terms, index, cfg, k_docs) if terms else []
    if not top:
        return terms
    freq: Counter[str] = Counter()
    for sd in top:
        freq.update(index.doc_tokens[sd.doc_id])
    present = set(terms)
    ranked = sorted(
        (t for t in freq if t not in present and t not in index.pipeline.stopwords),
        key=lambda t: (-freq[t], t),
    )
    return terms + ranked[:n_terms]


def rm_search(query, index: CollectionIndex, k_docs: int = 10, n_terms: int = 10,
              cfg: SmoothingConfig = SmoothingConfig(), k: int = 1000) -> list[ScoredDocument]:
    return lm_search(rm_expand(query, index, k_docs, n_terms, cfg), index, cfg, k)


def format_run(topic_id: str, results: Sequence[ScoredDocument], tag: str) -> list[str]:
    """TREC run lines: ``topic Q0 doc rank score tag``."""
    return [
        f"{topic_id} Q0 {sd.doc_id} {rank} {sd.rel:.6f} {tag}"
        for rank, sd in enumerate(results, 1)
    ]


def parse_run(text: str) -> tuple[str, dict[str, list[str]]]:
    """Read a TREC run back as ``(tag, {topic: ranked doc ids})``."""
    rows: dict[str, list[tuple[int, str]]] = {}
    tag = ""
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 6:
            raise ValueError(f"line {lineno}: expected 6 run columns")
        topic, _q0, doc, rank, _score, tag = parts
        rows.setdefault(topic, []).append((int(rank), doc))
    return tag, {t: [d for _, d in sorted(v)] for t, v in rows.items()}
