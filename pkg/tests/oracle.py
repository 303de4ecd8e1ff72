"""Straight-line reference implementations used as test oracles.

Nothing here imports the scoring or evaluation code under test; only raw
token lists and concept (term, role) lists go in.
"""

from __future__ import annotations


def count_occurrences(tokens, term):
    parts = term.split()
    n = len(parts)
    return sum(1 for i in range(len(tokens) - n + 1) if list(tokens[i:i + n]) == parts)


def brute_force_rank(doc_tokens, concepts, weights, mu=1000.0):
    """Rank every document by p(q | doc) * Imp, the literal product.

    ``concepts``: list of (normalized term, role name); ``weights``: dict role -> weight.
    Returns [(doc_id, score)] sorted by score desc, doc_id asc; Imp = 0 docs dropped.
    """
    total = sum(len(t) for t in doc_tokens.values())
    coll = {}
    for term, _ in concepts:
        if term and term not in coll:
            coll[term] = sum(count_occurrences(t, term) for t in doc_tokens.values())
    size = len(concepts)
    out = []
    for doc_id in sorted(doc_tokens):
        toks = doc_tokens[doc_id]
        p = 1.0
        imp = 0.0
        for term, role in concepts:
            if not term:
                continue
            nd = count_occurrences(toks, term)
            if nd > 0:
                imp += weights[role]
            if coll[term] == 0:
                continue
            p *= (nd + mu * coll[term] / total) / (len(toks) + mu)
        imp /= size
        if imp > 0:
            out.append((doc_id, p * imp))
    out.sort(key=lambda x: (-x[1], x[0]))
    return out


def brute_force_lm(doc_tokens, terms, mu=1000.0):
    concepts = [(t, "CoI") for t in terms]
    return brute_force_rank(doc_tokens, concepts, {"CoI": 1.0}, mu)


def inversions(order, scores, rel_tol=1e-9):
    """Pairs ranked against a strictly larger oracle score (beyond float noise)."""
    bad = []
    for i in range(len(order)):
        for j in range(i + 1, len(order)):
            a, b = scores[order[i]], scores[order[j]]
            if b > a and (b - a) > rel_tol * max(abs(a), abs(b)):
                bad.append((order[i], order[j]))
    return bad


def ap(ranking, relevant):
    hits, s = 0, 0.0
    for i, d in enumerate(ranking):
        if d in relevant:
            hits += 1
            s += hits / (i + 1)
    return s / len(relevant)


def mean(xs):
    xs = list(xs)
    return sum(xs) / len(xs)
