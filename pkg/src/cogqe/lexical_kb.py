"""WordNet-style lexical knowledge base: synsets, relation traversal, WSD."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

POS_VALUES = ("noun", "verb", "adjective", "adverb")
EDGE_RELATIONS = ("hypernym", "hyponym", "holonym", "meronym")
RELATIONS = ("synonym", "hypernym", "hyponym", "coordinate", "holonym", "meronym")
_INVERSE = {"hypernym": "hyponym", "hyponym": "hypernym"}


class KBError(ValueError):
    pass


@dataclass(frozen=True)
class Synset:
    id: str
    pos: str
    lemmas: tuple[str, ...]
    gloss: str = ""
    edges: tuple[tuple[str, str], ...] = ()

    def targets(self, relation: str) -> list[str]:
        return [dst for rel, dst in self.edges if rel == relation]


@dataclass(frozen=True)
class SenseAssignment:
    concept: str
    synset_id: str | None
    score: float = 0.0

    @property
    def resolved(self) -> bool:
        return self.synset_id is not None


# WordNet morphy detachment rules
_DETACH = {
    "noun": [("s", ""), ("ses", "s"), ("xes", "x"), ("zes", "z"), ("ches", "ch"),
             ("shes", "sh"), ("men", "man"), ("ies", "y")],
    "verb": [("s", ""), ("ies", "y"), ("es", "e"), ("es", ""), ("ed", "e"),
             ("ed", ""), ("ing", "e"), ("ing", "")],
    "adjective": [("er", ""), ("est", ""), ("er", "e"), ("est", "e")],
    "adverb": [],
}


def base_forms(word: str, pos: str) -> list[str]:
    """Candidate dictionary forms of an inflected word, the word itself first."""
    word = word.lower().replace("_", " ")
    out = [word]
    for suffix, repl in _DETACH.get(pos, ()):
        if word.endswith(suffix) and len(word) > len(suffix):
            form = word[: -len(suffix)] + repl
            if form not in out:
                out.append(form)
    return out


class KnowledgeBase:
    """Immutable synset graph with a lemma index."""

    def __init__(self, synsets: Iterable[Synset] = ()):
        self.synsets: dict[str, Synset] = {}
        for s in synsets:
            if s.id in self.synsets:
                raise KBError(f"duplicate synset id {s.id!r}")
            self.synsets[s.id] = s
        self._index: dict[tuple[str, str], list[str]] = {}
        for s in self.synsets.values():
            for lemma in s.lemmas:
                self._index.setdefault((lemma, s.pos), []).append(s.id)
        self._check()
        self._dist_cache: dict[str, dict[str, int]] = {}

    def _check(self) -> None:
        for s in self.synsets.values():
            if not s.lemmas:
                raise KBError(f"synset {s.id!r} has no lemmas")
            for rel, dst in s.edges:
                if dst not in self.synsets:
                    raise KBError(f"synset {s.id!r}: {rel} edge to unknown id {dst!r}")
                inv = _INVERSE.get(rel)
                if inv and (inv, s.id) not in self.synsets[dst].edges:
                    raise KBError(f"{rel} edge {s.id}->{dst} lacks inverse {inv} edge")

    def __len__(self) -> int:
        return len(self.synsets)

    def __getitem__(self, sid: str) -> Synset:
        return self.synsets[sid]

    def lookup(self, lemma: str, pos: str) -> list[Synset]:
        """Synsets holding ``lemma`` with the given POS, most frequent sense first."""
        return [self.synsets[i] for i in self._index.get((lemma.lower(), pos), ())]

    def lookup_word(self, word: str, pos: str | None = None) -> list[Synset]:
        """Like :meth:`lookup` but tries morphological base forms and, without
        a POS, every POS in canonical order."""
        out: list[Synset] = []
        for p in ([pos] if pos else POS_VALUES):
            for form in base_forms(word, p):
                hits = self.lookup(form, p)
                if hits:
                    out.extend(h for h in hits if h not in out)
                    break
        return out

    def pos_of(self, word: str) -> set[str]:
        return {p for p in POS_VALUES if self.lookup_word(word, p)}

    # -- traversal ---------------------------------------------------------

    def _levels(self, sid: str, relation: str, depth: int) -> list[str]:
        seen = {sid}
        frontier = [sid]
        out = []
        for _ in range(depth):
            nxt = []
            for cur in frontier:
                for dst in self.synsets[cur].targets(relation):
                    if dst not in seen:
                        seen.add(dst)
                        nxt.append(dst)
            out.extend(nxt)
            frontier = nxt
            if not frontier:
                break
        return out

    def related_synsets(self, synset: Synset, relation: str, depth: int = 1) -> list[Synset]:
        if relation not in RELATIONS:
            raise KBError(f"unknown relation {relation!r}")
        if relation == "synonym":
            return [synset]
        if relation == "coordinate":
            out = []
            for h in synset.targets("hypernym"):
                for sib in self.synsets[h].targets("hyponym"):
                    if sib != synset.id and self.synsets[sib] not in out:
                        out.append(self.synsets[sib])
            return out
        return [self.synsets[i] for i in self._levels(synset.id, relation, depth)]

    def related(
        self, synset: Synset, relation: str, depth: int = 1, lemma: str | None = None
    ) -> list[str]:
        """Lemmas reachable from ``synset`` through ``relation``.

        For ``synonym`` these are the co-lemmas (everything but ``lemma``,
        which defaults to the synset's first lemma).
        """
        if relation == "synonym":
            own = lemma.lower() if lemma else synset.lemmas[0]
            return [l for l in synset.lemmas if l != own]
        out: list[str] = []
        own = set(synset.lemmas)
        for s in self.related_synsets(synset, relation, depth):
            for l in s.lemmas:
                if l not in out and l not in own:
                    out.append(l)
        return out

    # -- similarity --------------------------------------------------------

    def _distances(self, sid: str) -> dict[str, int]:
        d = self._dist_cache.get(sid)
        if d is None:
            d = {sid: 0}
            q = deque([sid])
            while q:
                cur = q.popleft()
                for rel, dst in self.synsets[cur].edges:
                    if rel in _INVERSE and dst not in d:
                        d[dst] = d[cur] + 1
                        q.append(dst)
            self._dist_cache[sid] = d
        return d

    def path_similarity(self, a: Synset, b: Synset) -> float:
        """1 / (1 + shortest hypernym/hyponym path length); 0 when unconnected."""
        dist = self._distances(a.id).get(b.id)
        return 0.0 if dist is None else 1.0 / (1.0 + dist)

    def similarity(self, a: Synset | str, b: Synset | str) -> float:
        """Path similarity; a bare term resolves to its best sense against the other side."""
        left = [a] if isinstance(a, Synset) else self.lookup_word(a)
        right = [b] if isinstance(b, Synset) else self.lookup_word(b)
        return max((self.path_similarity(x, y) for x in left for y in right), default=0.0)

    # -- serialization -----------------------------------------------------

    def dumps(self) -> str:
        lines = []
        for s in self.synsets.values():
            lemmas = "|".join(l.replace(" ", "_") for l in s.lemmas)
            lines.append(f"S\t{s.id}\t{s.pos}\t{lemmas}\t{s.gloss}")
        for s in self.synsets.values():
            for rel, dst in s.edges:
                lines.append(f"E\t{s.id}\t{rel}\t{dst}")
        return "\n".join(lines) + ("\n" if lines else "")


def parse_kb(text: str, source: str = "<kb>") -> KnowledgeBase:
    """Parse the line-oriented ``S``/``E`` record format."""
    heads: dict[str, tuple[str, tuple[str, ...], str]] = {}
    order: list[str] = []
    edges: dict[str, list[tuple[str, str]]] = {}
    pending: list[tuple[int, str, str, str]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        kind = parts[0]
        if kind == "S" and len(parts) in (4, 5):
            _, sid, pos, lemmas = parts[:4]
            gloss = parts[4] if len(parts) == 5 else ""
            if pos not in POS_VALUES:
                raise KBError(f"{source}:{lineno}: unknown POS {pos!r}")
            lem = tuple(l.strip().lower().replace("_", " ") for l in lemmas.split("|") if l.strip())
            if not lem:
                raise KBError(f"{source}:{lineno}: synset without lemmas")
            if sid in heads:
                raise KBError(f"{source}:{lineno}: duplicate synset id {sid!r}")
            heads[sid] = (pos, lem, gloss)
            order.append(sid)
        elif kind == "E" and len(parts) == 4:
            _, src, rel, dst = parts
            if rel not in EDGE_RELATIONS:
                raise KBError(f"{source}:{lineno}: unknown relation {rel!r}")
            pending.append((lineno, src, rel, dst))
        else:
            raise KBError(f"{source}:{lineno}: malformed record")
    for lineno, src, rel, dst in pending:
        for sid in (src, dst):
            if sid not in heads:
                raise KBError(f"{source}:{lineno}: edge references unknown synset {sid!r}")
        lst = edges.setdefault(src, [])
        if (rel, dst) not in lst:
            lst.append((rel, dst))
    return KnowledgeBase(
        Synset(sid, heads[sid][0], heads[sid][1], heads[sid][2], tuple(edges.get(sid, ())))
        for sid in order
    )


def load_kb(path: str | Path) -> KnowledgeBase:
    return parse_kb(Path(path).read_text(encoding="utf-8"), str(path))


# -- disambiguation ----------------------------------------------------------

Similarity = Callable[[Synset, Synset], float]


def disambiguate(
    kb: KnowledgeBase,
    word: str,
    pos: str | None,
    context: Sequence[tuple[str, str | None]],
    similarity: Similarity | None = None,
) -> SenseAssignment:
    """Pick the sense of ``word`` most related to the context words.

    A sense scores the mean, over context words that have senses, of its best
    similarity to any of that word's senses. Ties keep the earlier (more
    frequent) sense.
    """
    sim = similarity or kb.path_similarity
    senses = kb.lookup_word(word, pos)
    if not senses:
        return SenseAssignment(word, None, 0.0)
    ctx_senses = [s for s in (kb.lookup_word(w, p) for w, p in context) if s]
    best, best_score = senses[0], -1.0
    for s in senses:
        if ctx_senses:
            score = sum(max(sim(s, t) for t in cs) for cs in ctx_senses) / len(ctx_senses)
        else:
            score = 0.0
        if score > best_score:
            best, best_score = s, score
    return SenseAssignment(word, best.id, max(best_score, 0.0))


def part_whole_axioms(
    kb: KnowledgeBase, words: Sequence[tuple[str, str | None]]
) -> list[tuple[str, str, str]]:
    """``("holonym", whole, part)`` facts holding between query words.

    Component words of multi-word concepts are probed too, so "car" and
    "engine failure" yield ``holonym(car, engine)`` when the KB says so.
    """
    out: list[tuple[str, str, str]] = []
    for whole, wpos in words:
        wsenses = {s.id for s in kb.lookup_word(whole, wpos)}
        if not wsenses:
            continue
        for other, opos in words:
            if other == whole:
                continue
            parts = [other] + (other.split() if " " in other else [])
            for part in parts:
                for ps in kb.lookup_word(part, opos if part == other else "noun"):
                    hol = set(ps.targets("holonym"))
                    mer = {s for s in wsenses if ps.id in kb[s].targets("meronym")}
                    if hol & wsenses or mer:
                        fact = ("holonym", whole, part)
                        if fact not in out:
                            out.append(fact)
    return out
