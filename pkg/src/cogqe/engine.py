"""Wires analysis, pooling, expansion and scoring into named retrieval systems."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .config import RunConfig
from .corpus_index import CollectionIndex, NGramModel, build_ngram_model, ingest, load_ngram_file
from .eval_harness import EvalRun, Qrels, evaluate_run
from .expansion import (
    PATTERN_RELATION, ExpandedQuery, Pattern, Pools, TermFilter, TermPool, apply_pattern,
    build_pools, pool_statistical,
)
from .lexical_kb import KnowledgeBase, load_kb
from .linguistics import (
    ConceptPair, ConceptualQuery, Role, analyze_query, default_ncp_lexicon, load_ncp_lexicon,
)
from .retrieval import (
    RoleWeights, ScoredDocument, SmoothingConfig, build_table, lm_search, rm_search,
)
from .text import Pipeline, make_pipeline

log = logging.getLogger(__name__)

LEXICAL_SYSTEMS = {"LSMT_Syn": "synonym", "LSMT_Hyper": "hypernym",
                   "LSMT_Hypo": "hyponym", "LSMT_Coord": "coordinate"}
ILSS_SYSTEMS = {f"ILSS_{p.value}": p for p in PATTERN_RELATION}
SYSTEMS = ("LM", "RM", "CRM", "LSTAT", *LEXICAL_SYSTEMS, *ILSS_SYSTEMS)


@dataclass
class QueryEngine:
    index: CollectionIndex
    model: NGramModel | None = None
    kb: KnowledgeBase | None = None
    ncp_lexicon: frozenset = field(default_factory=default_ncp_lexicon)
    smoothing: SmoothingConfig = SmoothingConfig()
    k_stat: int = 5
    k_lex: int = 5
    kb_depth: int = 2
    max_fraction: float = 0.10
    seed: int = 0
    rm_docs: int = 10
    rm_terms: int = 10

    @property
    def pipeline(self) -> Pipeline:
        return self.index.pipeline

    @classmethod
    def from_config(cls, cfg: RunConfig, index: CollectionIndex | None = None,
                    model: NGramModel | None = None) -> "QueryEngine":
        if index is None:
            pipeline = make_pipeline(cfg.stopwords, cfg.stemming)
            index = ingest(cfg.corpus, pipeline, cfg.corpus_format)
        if cfg.ngram:
            model = load_ngram_file(cfg.ngram, index.pipeline)
        elif model is None:
            model = build_ngram_model(index, cfg.window)
        kb = load_kb(cfg.kb) if cfg.kb else None
        ncp = load_ncp_lexicon(cfg.ncp) if cfg.ncp else default_ncp_lexicon()
        return cls(index, model, kb, ncp, SmoothingConfig(cfg.mu), cfg.k_stat, cfg.k_lex,
                   cfg.kb_depth, cfg.max_fraction, cfg.seed)

    # -- query processing ----------------------------------------------------

    def analyze(self, text: str) -> ConceptualQuery:
        return analyze_query(text, pipeline=self.pipeline, ncp_lexicon=self.ncp_lexicon,
                             kb=self.kb, stats=self.index)

    def pools(self, cq: ConceptualQuery) -> Pools:
        return build_pools(cq, self.model, self.kb, depth=self.kb_depth, pipeline=self.pipeline,
                           index=self.index, max_fraction=self.max_fraction, seed=self.seed)

    def expand(self, text: str, pattern: Pattern | str = Pattern.IE1,
               k_stat: int | None = None, k_lex: int | None = None) -> ExpandedQuery:
        cq = self.analyze(text)
        pattern = Pattern.parse(pattern)
        if pattern is Pattern.NONE:
            return ExpandedQuery(cq, (), pattern)
        return apply_pattern(cq, pattern, self.pools(cq),
                             self.k_stat if k_stat is None else k_stat,
                             self.k_lex if k_lex is None else k_lex)

    def sequential_expand(self, text: str) -> ExpandedQuery:
        """Collocates of adjacent content concepts only (no lexical terms)."""
        cq = self.analyze(text)
        content = [c for c in cq.concepts if c.role is not Role.SC]
        pairs = [ConceptPair(a, b, "seq") for a, b in zip(content, content[1:])]
        tf = TermFilter(self.pipeline.stopwords, self.max_fraction, self.index)
        stat = (pool_statistical(pairs, self.model, pipeline=self.pipeline, index=self.index,
                                 term_filter=tf, seed=self.seed)
                if self.model is not None and pairs else TermPool("statistical"))
        return apply_pattern(cq, Pattern.IE1, Pools(stat, {}), self.k_stat, 0)

    def system_query(self, system: str, text: str) -> ExpandedQuery:
        if system == "CRM":
            return self.expand(text, Pattern.NONE)
        if system == "LSTAT":
            return self.sequential_expand(text)
        if system in LEXICAL_SYSTEMS:
            rel = LEXICAL_SYSTEMS[system]
            pattern = next(p for p, r in PATTERN_RELATION.items() if r == rel)
            return self.expand(text, pattern, k_stat=0)
        if system in ILSS_SYSTEMS:
            return self.expand(text, ILSS_SYSTEMS[system])
        raise ValueError(f"unknown system {system!r}; choose from {', '.join(SYSTEMS)}")

    # -- retrieval --------------------------------------------------------------

    def search(self, query: ExpandedQuery | ConceptualQuery, weights: RoleWeights,
               k: int = 1000) -> list[ScoredDocument]:
        if k <= 0:
            raise ValueError("k must be positive")
        return build_table(query, self.index, self.smoothing).scored(weights, k)

    def run_system(self, system: str, text: str, weights: RoleWeights,
                   k: int = 1000) -> list[ScoredDocument]:
        if system == "LM":
            return lm_search(text, self.index, self.smoothing, k)
        if system == "RM":
            return rm_search(text, self.index, self.rm_docs, self.rm_terms, self.smoothing, k)
        return self.search(self.system_query(system, text), weights, k)

    def run_topics(self, system: str, topics: Iterable, weights: RoleWeights,
                   k: int = 1000) -> dict[str, list[ScoredDocument]]:
        """``topics`` holds objects with ``number`` and ``title``."""
        return {t.number: self.run_system(system, t.title, weights, k) for t in topics}

    def rankings(self, system: str, topics: Iterable, weights: RoleWeights,
                 k: int = 1000) -> dict[str, list[str]]:
        return {t: [sd.doc_id for sd in res]
                for t, res in self.run_topics(system, topics, weights, k).items()}

    # -- audit ----------------------------------------------------------------------

    def audit(self, text: str, pattern: Pattern | str = Pattern.IE1, qid: str | None = None) -> str:
        """Readable trace: concepts and roles, relation pairs, pools, final query."""
        pattern = Pattern.parse(pattern)
        cq = self.analyze(text)
        lines = [f"# query {qid}: {text}" if qid else f"# query: {text}", "## concepts"]
        for c in cq.concepts:
            lines.append(f"{c.surface}\t{c.pos}\t{c.role}\t{'ncp' if c.is_ncp else '-'}"
                         f"\t{c.sense or '-'}")
        lines.append("## pairs")
        base = {id(p) for p in cq.base_pairs()}
        for p in cq.relations:
            tag = "base" if id(p) in base else "-"
            lines.append(f"{p.head.surface}\t{p.dependent.surface}\t{p.relation_label}\t{tag}")
        if cq.axioms:
            lines.append("## axioms")
            lines.extend("\t".join(ax) for ax in cq.axioms)
        if pattern is Pattern.NONE:
            eq = ExpandedQuery(cq, (), pattern)
        else:
            pools = self.pools(cq)
            lines.append("## pool statistical")
            lines.extend(f"{c.surface}\t{c.score:g}" for c in pools.statistical.entries)
            for rel, pool in pools.lexical.items():
                lines.append(f"## pool {pool.kind}")
                lines.extend(f"{c.surface}\t{c.score:.6f}" for c in pool.entries)
            eq = apply_pattern(cq, pattern, pools, self.k_stat, self.k_lex)
        lines.append(f"## expanded ({pattern})")
        lines.append(eq.dump())
        return "\n".join(lines) + "\n"


def evaluate_systems(engine: QueryEngine, systems: Sequence[str], topics: Sequence,
                     qrels: Qrels, weights: RoleWeights, depth: int = 1000) -> dict[str, EvalRun]:
    """EvalRun per system name."""
    return {s: evaluate_run(s, engine.rankings(s, topics, weights, depth), qrels, depth)
            for s in systems}


def parse_weights(text: str) -> RoleWeights:
    """``"CoI=1,DC=0.8,..."`` (commas or newlines) -> RoleWeights."""
    return RoleWeights.loads(text.replace(",", "\n"))
