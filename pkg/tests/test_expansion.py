import pytest
from hypothesis import given, settings, strategies as st

from cogqe.corpus_index import build_index, build_ngram_model
from cogqe.expansion import (
    LEXICAL, STATISTICAL, CandidateTerm, Pattern, Pools, TermFilter, TermPool, apply_pattern,
    dedup, merge_stem_variants, pool_lexical, pool_statistical,
)
from cogqe.linguistics import Role, analyze_query
from cogqe.text import default_pipeline

from conftest import CAR_QUERY, FIG4_QUERY

FIG4_STAT = {"state", "years", "jails", "country", "conditions", "problems"}
FIG4_SYN = {"prison house", "grapple", "deal", "contend", "make out"}


@pytest.fixture(scope="module")
def fig4(mini_engine):
    cq = mini_engine.analyze(FIG4_QUERY)
    return cq, mini_engine.pools(cq)


def test_fig4_statistical_pool(fig4):
    _, pools = fig4
    assert FIG4_STAT <= set(pools.statistical.surfaces())
    assert all(c.source == STATISTICAL for c in pools.statistical.entries)


def test_fig4_synonym_pool(fig4):
    _, pools = fig4
    syn = pools.lexical["synonym"]
    assert FIG4_SYN <= set(syn.surfaces())
    assert all(c.relation == "synonym" and c.source == LEXICAL for c in syn.entries)


def test_statistical_pool_sorted_by_frequency(fig4):
    scores = [c.score for c in fig4[1].statistical.entries]
    assert scores == sorted(scores, reverse=True)


def test_tie_break_is_seeded(mini_engine, fig4):
    cq, _ = fig4
    model = mini_engine.model
    a = pool_statistical(cq.base_pairs(), model, index=mini_engine.index, seed=1).terms()
    b = pool_statistical(cq.base_pairs(), model, index=mini_engine.index, seed=1).terms()
    assert a == b


def test_verbs_contribute_synonyms_only(mini_engine):
    cq = mini_engine.analyze(CAR_QUERY)
    hyper = pool_lexical(cq, mini_engine.kb, "hypernym", index=mini_engine.index)
    assert not {c.surface for c in hyper.entries} & {"mend", "fix", "restore"}
    assert all("repair" not in c.origin_base for c in hyper.entries)


def test_merge_stem_variants_sums_counts():
    merged = merge_stem_variants({"book": 3, "books": 2, "journal": 4}, default_pipeline())
    assert merged["book"] == (5, "book")
    assert merged["journal"] == (4, "journal")


def test_dedup_keeps_lexical_copy():
    stat = [CandidateTerm("journal", "journal", STATISTICAL, None, 7.0)]
    lex = [CandidateTerm("journal", "journal", LEXICAL, "hyponym", 0.5, ("book",))]
    s, l = dedup(stat, lex)
    assert s == [] and l == lex


def test_term_filter():
    filler = " ".join(f"w{i}" for i in range(14))
    idx = build_index({"d1": "prison prison prison prison cell", "d2": "cell yard " + filler})
    f = TermFilter(default_pipeline().stopwords, 0.10, idx)
    assert f.accepts("yard", "yard")
    assert not f.accepts("prison", "prison")  # 4 of 21 tokens
    assert not f.accepts("the", "the")
    assert not f.accepts("c++", "c")


def test_pattern_none_and_parse(fig4):
    cq, pools = fig4
    eq = apply_pattern(cq, "none", pools)
    assert eq.expansions == () and eq.concepts == cq.concepts
    assert Pattern.parse("ie2") is Pattern.IE2
    with pytest.raises(ValueError):
        Pattern.parse("IE9")
    with pytest.raises(ValueError):
        apply_pattern(cq, Pattern.IE1, pools, k_stat=-1)


def test_expansions_are_ec_with_relation(fig4):
    cq, pools = fig4
    eq = apply_pattern(cq, Pattern.IE1, pools, 5, 5)
    assert all(c.role == Role.EC for c in eq.expansions)
    assert {c.relation for c in eq.expansions} == {"statistical", "synonym"}
    lines = eq.dump().splitlines()
    assert len(lines) == len(eq.concepts)
    assert lines[0].split("\t")[:2] == ["coping", "CoI"]


QUERIES = [FIG4_QUERY, CAR_QUERY, "overcrowded jails", "engine repair", "book journal printing"]


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(QUERIES), st.sampled_from(list(Pattern)),
       st.integers(0, 8), st.integers(0, 8))
def test_expansion_invariants(mini_engine, query, pattern, k_stat, k_lex):
    eq = mini_engine.expand(query, pattern, k_stat, k_lex)
    cq = mini_engine.analyze(query)
    # every original concept survives untouched
    assert eq.originals == cq.concepts
    # no stem duplicates among expansions or against originals
    terms = [c.normalized for c in eq.expansions]
    assert len(terms) == len(set(terms))
    assert not set(terms) & {c.normalized for c in cq.concepts}
    n_stat = sum(c.relation == "statistical" for c in eq.expansions)
    assert n_stat <= k_stat and len(eq.expansions) - n_stat <= k_lex
