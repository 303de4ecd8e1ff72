"""Candidate pooling (collocates and lexical-semantic relatives) and the
four integration patterns that merge them into an expanded query."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .corpus_index import CollectionIndex, NGramModel, surrounding_terms, window_matches
from .lexical_kb import KnowledgeBase, Synset, base_forms
from .linguistics import Concept, ConceptPair, ConceptualQuery, Role
from .text import Pipeline, default_pipeline


class Pattern(str, Enum):
    IE1 = "IE1"
    IE2 = "IE2"
    IE3 = "IE3"
    IE4 = "IE4"
    NONE = "none"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, value: str | "Pattern") -> "Pattern":
        if isinstance(value, Pattern):
            return value
        for p in cls:
            if p.value.lower() == str(value).strip().lower():
                return p
        raise ValueError(f"unknown pattern {value!r}")


# pattern -> lexical pool it draws from
PATTERN_RELATION = {
    Pattern.IE1: "synonym",
    Pattern.IE2: "hypernym",
    Pattern.IE3: "hyponym",
    Pattern.IE4: "coordinate",
}
POOL_KINDS = {"synonym": "synonyms", "hypernym": "hypernyms", "hyponym": "hyponyms",
              "coordinate": "coordinates", "holonym": "holonyms", "meronym": "meronyms"}

STATISTICAL = "statistical"
LEXICAL = "lexical-semantic"

DEFAULT_K_STAT = 5
DEFAULT_K_LEX = 5
DEFAULT_DEPTH = 2
DEFAULT_MAX_FRACTION = 0.10


@dataclass(frozen=True)
class CandidateTerm:
    term: str  # normalized (stemmed) form, the identity used for merging
    surface: str
    source: str
    relation: str | None
    score: float
    origin_base: tuple[str, ...] = ()


@dataclass
class TermPool:
    kind: str
    entries: list[CandidateTerm] = field(default_factory=list)

    def terms(self) -> list[str]:
        return [c.term for c in self.entries]

    def surfaces(self) -> list[str]:
        return [c.surface for c in self.entries]

    def top(self, k: int) -> list[CandidateTerm]:
        return self.entries[: max(k, 0)]


_CLEAN = re.compile(r"^[a-z0-9]+( [a-z0-9]+)*$")


@dataclass
class TermFilter:
    """Drops candidates that would hurt retrieval: special characters,
    common words, and terms above ``max_fraction`` of the collection."""

    stopwords: frozenset[str] = frozenset()
    max_fraction: float = DEFAULT_MAX_FRACTION
    index: CollectionIndex | None = None

    def accepts(self, surface: str, term: str) -> bool:
        if not term or not _CLEAN.match(surface.lower()):
            return False
        if surface.lower() in self.stopwords or term in self.stopwords:
            return False
        if self.index is not None and self.max_fraction is not None:
            if self.index.collection_count(term) > self.max_fraction * self.index.total_tokens:
                return False
        return True


def merge_stem_variants(freqs: dict[str, int], pipeline: Pipeline) -> dict[str, tuple[int, str]]:
    """Sum frequencies of words sharing a stem -> {stem: (total, most frequent word)}."""
    groups: dict[str, list[tuple[str, int]]] = {}
    for word, f in freqs.items():
        key = pipeline.normalize_phrase(word)
        if key:
            groups.setdefault(key, []).append((word, f))
    return {
        key: (sum(f for _, f in ws), min(ws, key=lambda wf: (-wf[1], wf[0]))[0])
        for key, ws in groups.items()
    }


def pool_statistical(
    base_pairs: Sequence[ConceptPair],
    model: NGramModel,
    *,
    pipeline: Pipeline | None = None,
    index: CollectionIndex | None = None,
    term_filter: TermFilter | None = None,
    seed: int = 0,
) -> TermPool:
    """Collocates of the base pairs, ranked by 1-gram frequency.

    Window matches are visited most frequent first; the words around each
    pair are candidates. Stem variants are summed before ranking and equal
    scores are ordered by a seeded random draw.
    """
    pipeline = pipeline or default_pipeline()
    term_filter = term_filter or TermFilter(pipeline.stopwords, index=index)
    freqs: dict[str, int] = {}
    origins: dict[str, list[str]] = {}
    for pair in base_pairs:
        key = (pair.head.normalized, pair.dependent.normalized)
        label = f"{pair.head.surface}<->{pair.dependent.surface}"
        for window, _count in window_matches(key, model):
            for word in surrounding_terms(window, key):
                if word in pipeline.stopwords:
                    continue
                freqs[word] = model.unigram_counts.get(word, 0)
                if label not in origins.setdefault(word, []):
                    origins[word].append(label)
    merged = merge_stem_variants(freqs, pipeline)
    cands = []
    for term in sorted(merged):
        score, word = merged[term]
        surface = index.surface(term) if index is not None and word == term else word
        if not term_filter.accepts(surface, term):
            continue
        orig = tuple(sorted({o for w, o_list in origins.items()
                             if pipeline.normalize_phrase(w) == term for o in o_list}))
        cands.append(CandidateTerm(term, surface, STATISTICAL, None, float(score), orig))
    rng = random.Random(seed)
    keyed = [(c, rng.random()) for c in cands]
    keyed.sort(key=lambda ck: (-ck[0].score, ck[1]))
    return TermPool(STATISTICAL, [c for c, _ in keyed])


def _base_sense(kb: KnowledgeBase, c: Concept) -> list[Synset]:
    if c.sense is not None and c.sense in kb.synsets:
        return [kb[c.sense]]
    pos = c.pos if c.pos in ("noun", "verb", "adjective", "adverb") else None
    return kb.lookup_word(c.surface, pos)


def pool_lexical(
    cq: ConceptualQuery,
    kb: KnowledgeBase,
    relation: str,
    *,
    depth: int = DEFAULT_DEPTH,
    pipeline: Pipeline | None = None,
    index: CollectionIndex | None = None,
    term_filter: TermFilter | None = None,
) -> TermPool:
    """Relatives of the disambiguated CoI/DC concepts, ranked by their mean
    path similarity to all CoI/DC concepts. Verbs only contribute synonyms."""
    if relation not in POOL_KINDS:
        raise ValueError(f"unknown relation {relation!r}")
    pipeline = pipeline or default_pipeline()
    term_filter = term_filter or TermFilter(pipeline.stopwords, index=index)
    base = cq.base_terms()
    base_senses = [_base_sense(kb, b) for b in base]
    best: dict[str, CandidateTerm] = {}
    for b in base:
        if b.sense is None or b.sense not in kb.synsets:
            continue
        if b.pos == "verb" and relation != "synonym":
            continue
        synset = kb[b.sense]
        own = set(base_forms(b.surface, synset.pos)) | {b.surface.lower()}
        for target in kb.related_synsets(synset, relation, depth):
            # every lemma of a target synset enters: the candidate and its synonyms
            for lemma in target.lemmas:
                if lemma in own:
                    continue
                term = pipeline.normalize_phrase(lemma)
                if term == b.normalized or not term_filter.accepts(lemma, term):
                    continue
                sims = [max((kb.path_similarity(target, s) for s in senses), default=0.0)
                        for senses in base_senses]
                score = sum(sims) / len(sims) if sims else 0.0
                prev = best.get(term)
                origin = tuple(sorted(set((prev.origin_base if prev else ()) + (b.surface,))))
                if prev is None or score > prev.score:
                    best[term] = CandidateTerm(term, lemma, LEXICAL, relation, score, origin)
                else:
                    best[term] = CandidateTerm(prev.term, prev.surface, LEXICAL, relation,
                                               prev.score, origin)
    entries = sorted(best.values(), key=lambda c: (-c.score, c.term))
    return TermPool(POOL_KINDS[relation], entries)


def dedup(
    stat: Sequence[CandidateTerm], lex: Sequence[CandidateTerm]
) -> tuple[list[CandidateTerm], list[CandidateTerm]]:
    """Remove statistical candidates whose stem also appears lexically;
    the lexical-semantic copy (with its relation) is the one kept."""
    lex_terms = {c.term for c in lex}
    return [c for c in stat if c.term not in lex_terms], list(lex)


@dataclass
class Pools:
    statistical: TermPool
    lexical: dict[str, TermPool] = field(default_factory=dict)


@dataclass(frozen=True)
class ExpandedQuery:
    conceptual: ConceptualQuery
    expansions: tuple[Concept, ...] = ()
    pattern: Pattern = Pattern.NONE

    @property
    def originals(self) -> tuple[Concept, ...]:
        return self.conceptual.concepts

    @property
    def concepts(self) -> tuple[Concept, ...]:
        return self.conceptual.concepts + self.expansions

    def dump(self) -> str:
        """One ``term<TAB>role<TAB>relation<TAB>score`` line per concept."""
        lines = []
        for c in self.concepts:
            score = "-" if c.score is None else f"{c.score:.6f}"
            lines.append(f"{c.surface}\t{c.role}\t{c.relation or '-'}\t{score}")
        return "\n".join(lines)


def apply_pattern(
    cq: ConceptualQuery,
    pattern: Pattern | str,
    pools: Pools,
    k_stat: int = DEFAULT_K_STAT,
    k_lex: int = DEFAULT_K_LEX,
) -> ExpandedQuery:
    """Adjoin the top ``k_stat`` collocates and the top ``k_lex`` terms of the
    pattern's lexical pool. Original concepts are never touched."""
    pattern = Pattern.parse(pattern)
    if k_stat < 0 or k_lex < 0:
        raise ValueError("thresholds must be non-negative")
    if pattern is Pattern.NONE:
        return ExpandedQuery(cq, (), pattern)
    originals = {c.normalized for c in cq.concepts}
    stat = [c for c in pools.statistical.entries if c.term not in originals][:k_stat]
    relation = PATTERN_RELATION[pattern]
    lex_pool = pools.lexical.get(relation, TermPool(POOL_KINDS[relation]))
    lex = [c for c in lex_pool.entries if c.term not in originals][:k_lex]
    stat, lex = dedup(stat, lex)
    expansions = []
    pos = len(cq.concepts)
    for cand in stat + lex:
        expansions.append(Concept(
            surface=cand.surface,
            normalized=cand.term,
            role=Role.EC,
            position=pos,
            relation=cand.relation or STATISTICAL,
            score=cand.score,
        ))
        pos += 1
    return ExpandedQuery(cq, tuple(expansions), pattern)


def build_pools(
    cq: ConceptualQuery,
    model: NGramModel | None,
    kb: KnowledgeBase | None,
    relations: Iterable[str] = ("synonym", "hypernym", "hyponym", "coordinate"),
    *,
    depth: int = DEFAULT_DEPTH,
    pipeline: Pipeline | None = None,
    index: CollectionIndex | None = None,
    max_fraction: float = DEFAULT_MAX_FRACTION,
    seed: int = 0,
) -> Pools:
    pipeline = pipeline or default_pipeline()
    tf = TermFilter(pipeline.stopwords, max_fraction, index)
    pairs = cq.base_pairs()
    stat = (
        pool_statistical(pairs, model, pipeline=pipeline, index=index, term_filter=tf, seed=seed)
        if model is not None and pairs else TermPool(STATISTICAL)
    )
    lex = {}
    if kb is not None:
        for rel in relations:
            lex[rel] = pool_lexical(cq, kb, rel, depth=depth, pipeline=pipeline,
                                    index=index, term_filter=tf)
    return Pools(stat, lex)
