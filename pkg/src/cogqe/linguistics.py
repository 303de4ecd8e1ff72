"""Query front-end: concept segmentation, NCP merging, tagging, relation
pairs and role-type assignment."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .lexical_kb import KnowledgeBase, disambiguate, part_whole_axioms
from .text import Pipeline, default_pipeline, load_word_list


class Role(str, Enum):
    CoI = "CoI"
    DC = "DC"
    RC = "RC"
    SC = "SC"
    EC = "EC"

    def __str__(self) -> str:
        return self.value


# "the more noteworthy role is kept"
PRIORITY = (Role.CoI, Role.DC, Role.RC, Role.SC, Role.EC)
BASE_ROLES = (Role.CoI, Role.DC)


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class Concept:
    surface: str
    normalized: str
    pos: str | None = None
    role: Role | None = None
    is_ncp: bool = False
    sense: str | None = None
    position: int = 0
    # expansion concepts only
    relation: str | None = None
    score: float | None = None


@dataclass(frozen=True)
class ConceptPair:
    head: Concept
    dependent: Concept
    relation_label: str

    def __post_init__(self):
        if self.head.position == self.dependent.position:
            raise QueryError("a concept cannot be paired with itself")


@dataclass(frozen=True)
class ConceptualQuery:
    concepts: tuple[Concept, ...]
    relations: tuple[ConceptPair, ...] = ()
    axioms: tuple[tuple[str, str, str], ...] = ()
    text: str = ""

    def __post_init__(self):
        positions = {c.position for c in self.concepts}
        for p in self.relations:
            if p.head.position not in positions or p.dependent.position not in positions:
                raise QueryError("relation endpoint outside the concept set")
        surfaces = {c.surface.lower() for c in self.concepts}
        for ax in self.axioms:
            for term in ax[1:]:
                if term.lower() not in surfaces and not any(
                    term.lower() in s.split() for s in surfaces
                ):
                    raise QueryError(f"axiom {ax} mentions a non-query term")

    def by_role(self, *roles: Role) -> list[Concept]:
        return [c for c in self.concepts if c.role in roles]

    def base_terms(self) -> list[Concept]:
        return self.by_role(*BASE_ROLES)

    def base_pairs(self) -> list[ConceptPair]:
        """Pairs eligible for collocate pooling: both members CoI or DC."""
        return [
            p for p in self.relations
            if p.head.role in BASE_ROLES and p.dependent.role in BASE_ROLES
        ]


# -- closed-class vocabulary ----------------------------------------------------

PREPOSITIONS = frozenset(
    "with in on at for from of by about against between into through during before "
    "after above below to under over among within without across toward towards upon "
    "via near onto".split()
)
DETERMINERS = frozenset(
    "a an the this that these those my your his her its our their some any each every "
    "no all both either neither".split()
)
_EXTRA_FUNCTION = frozenset(
    "among within without toward towards upon via onto near either neither may might "
    "must shall could would should can cannot whose whether yet also".split()
)
# verbs that only link two concepts and carry little lookup value on their own
LIGHT_VERBS = frozenset(
    "cause causes caused causing affect affects affected affecting involve involves "
    "involved involving relate relates related relating concern concerns concerning "
    "make makes made making get gets got getting take takes took taking give gives "
    "gave giving use uses used using lead leads led leading become becomes became "
    "include includes included including".split()
)
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ish", "ical", "ary")
_NOUN_SUFFIXES = ("tion", "sion", "ment", "ness", "ity", "ance", "ence", "ship")


def default_ncp_lexicon() -> frozenset[tuple[str, ...]]:
    with resources.as_file(resources.files("cogqe.data") / "ncp.txt") as p:
        return load_ncp_lexicon(p)


def load_ncp_lexicon(path: str | Path) -> frozenset[tuple[str, ...]]:
    return frozenset(tuple(phrase.split()) for phrase in load_word_list(path))


def _concept(surface: str, position: int, pipeline: Pipeline, is_ncp: bool = False) -> Concept:
    norm = pipeline.normalize_phrase(surface) or pipeline.stem_phrase(surface)
    return Concept(surface, norm, is_ncp=is_ncp, position=position)


def segment_concepts(
    query: str,
    ncp_lexicon: Iterable[tuple[str, ...]] | None = None,
    pipeline: Pipeline | None = None,
) -> list[Concept]:
    """One concept per word, in query order; stopwords are kept."""
    pipeline = pipeline or default_pipeline()
    words = re.findall(r"[A-Za-z0-9]+", query)
    if not words:
        raise QueryError("empty query")
    concepts = [_concept(w, i, pipeline) for i, w in enumerate(words)]
    if ncp_lexicon:
        concepts = detect_ncp(concepts, ncp_lexicon, pipeline)
    return concepts


def detect_ncp(
    concepts: Sequence[Concept],
    ncp_lexicon: Iterable[tuple[str, ...]],
    pipeline: Pipeline | None = None,
) -> list[Concept]:
    """Merge lexicon phrases into single NCP concepts, leftmost-longest first."""
    pipeline = pipeline or default_pipeline()
    lexicon = {tuple(w.lower() for w in p) for p in ncp_lexicon}
    longest = max((len(p) for p in lexicon), default=0)
    words = [c.surface.lower() for c in concepts]
    out: list[Concept] = []
    i = 0
    while i < len(concepts):
        for n in range(min(longest, len(concepts) - i), 1, -1):
            if tuple(words[i : i + n]) in lexicon:
                surface = " ".join(c.surface for c in concepts[i : i + n])
                out.append(_concept(surface, len(out), pipeline, is_ncp=True))
                i += n
                break
        else:
            out.append(replace(concepts[i], position=len(out)))
            i += 1
    return out


# -- part-of-speech ---------------------------------------------------------------


def _function_words(pipeline: Pipeline) -> frozenset[str]:
    return pipeline.stopwords | PREPOSITIONS | DETERMINERS | _EXTRA_FUNCTION


def pos_tag(
    concepts: Sequence[Concept],
    kb: KnowledgeBase | None = None,
    pipeline: Pipeline | None = None,
) -> list[Concept]:
    """Label each concept noun/verb/adjective/adverb/function.

    Closed-class lexicon first, then unambiguous KB evidence, then local
    context and suffix heuristics; anything left is a noun.
    """
    pipeline = pipeline or default_pipeline()
    fwords = _function_words(pipeline)
    words = [c.surface.lower() for c in concepts]

    def is_function(i: int) -> bool:
        return 0 <= i < len(concepts) and not concepts[i].is_ncp and words[i] in fwords

    def kb_pos(i: int) -> set[str]:
        if kb is None or concepts[i].is_ncp:
            return set()
        return kb.pos_of(words[i])

    def nominal(i: int) -> bool:
        # does position i look like it can head/continue a noun phrase?
        if i >= len(concepts) or is_function(i):
            return False
        if concepts[i].is_ncp:
            return True
        kp = kb_pos(i)
        if kp:
            return "noun" in kp or "adjective" in kp
        w = words[i]
        return not w.endswith(("ly", "ing", "ed"))

    tags: list[str] = []
    for i, c in enumerate(concepts):
        w = words[i]
        kp = kb_pos(i)
        if c.is_ncp:
            tag = "noun"
        elif is_function(i):
            tag = "function"
        elif i > 0 and words[i - 1] == "to" and kp != {"noun"} and not w.endswith(_NOUN_SUFFIXES):
            tag = "verb"
        elif len(kp) == 1:
            (tag,) = kp
        elif w in LIGHT_VERBS:
            tag = "verb"
        elif w.endswith("ly") and len(w) > 4:
            tag = "adverb"
        elif w.endswith(("ed", "ing")) and len(w) > 4:
            tag = "adjective" if nominal(i + 1) else "verb"
        elif w.endswith(_ADJ_SUFFIXES) and nominal(i + 1):
            tag = "adjective"
        elif kp and "noun" not in kp:
            tag = "verb" if "verb" in kp else sorted(kp)[0]
        else:
            tag = "noun"
        tags.append(tag)
    return [replace(c, pos=t) for c, t in zip(concepts, tags)]


# -- relation pairs ---------------------------------------------------------------


def _chunks(concepts: Sequence[Concept]) -> list[tuple[int, int, int]]:
    """Noun-phrase chunks as (start, end_inclusive, head) over adjacent adjectives/nouns."""
    out = []
    i = 0
    while i < len(concepts):
        if concepts[i].pos in ("adjective", "noun"):
            j = i
            while j + 1 < len(concepts) and concepts[j + 1].pos in ("adjective", "noun"):
                j += 1
            nouns = [k for k in range(i, j + 1) if concepts[k].pos == "noun"]
            if nouns:
                # trailing adjectives after the last noun are left outside the chunk
                out.append((i, nouns[-1], nouns[-1]))
                i = nouns[-1] + 1
                continue
            i = j + 1
        else:
            i += 1
    return out


def extract_relation_pairs(concepts: Sequence[Concept]) -> list[ConceptPair]:
    """Apply the head/dependent rule table to tagged concepts.

    amod (adjective -> noun), nn (noun compound), dobj (verb -> object),
    nsubj (subject -> verb) and prep_* (content head -> preposition -> noun).
    Determiners may intervene; uncovered adjectives/adverbs get a generic
    ``dep`` link to their nearest content neighbour.
    """
    cs = list(concepts)
    pairs: list[ConceptPair] = []
    chunks = _chunks(cs)
    chunk_at = {k: ch for ch in chunks for k in range(ch[0], ch[1] + 1)}

    for start, end, head in chunks:
        for k in range(start, end + 1):
            if k == head:
                continue
            label = "amod" if cs[k].pos == "adjective" else "nn"
            pairs.append(ConceptPair(cs[head], cs[k], label))

    def skip_determiners(i: int) -> int:
        while i < len(cs) and cs[i].pos == "function" and cs[i].surface.lower() in DETERMINERS:
            i += 1
        return i

    for i, c in enumerate(cs):
        if c.pos != "verb":
            continue
        j = skip_determiners(i + 1)
        if j in chunk_at and chunk_at[j][0] == j:
            pairs.append(ConceptPair(c, cs[chunk_at[j][2]], "dobj"))
        if i > 0 and (i - 1) in chunk_at and chunk_at[i - 1][1] == i - 1:
            pairs.append(ConceptPair(c, cs[chunk_at[i - 1][2]], "nsubj"))

    for i, c in enumerate(cs):
        word = c.surface.lower()
        if c.pos != "function" or word not in PREPOSITIONS:
            continue
        if word == "to" and i + 1 < len(cs) and cs[i + 1].pos == "verb":
            continue
        left = next((k for k in range(i - 1, -1, -1) if cs[k].pos != "function"), None)
        j = skip_determiners(i + 1)
        if left is None or j >= len(cs):
            continue
        if j in chunk_at and chunk_at[j][0] == j:
            right = chunk_at[j][2]
        elif cs[j].pos == "verb" and cs[j].surface.lower().endswith("ing"):
            right = j
        else:
            continue
        if left in chunk_at:
            left = chunk_at[left][2]
        if left != right:
            pairs.append(ConceptPair(cs[left], cs[right], f"prep_{word}"))

    covered = {p.head.position for p in pairs} | {p.dependent.position for p in pairs}
    content = [k for k, c in enumerate(cs) if c.pos != "function"]
    for k in content:
        if k in covered or cs[k].pos not in ("adjective", "adverb"):
            continue
        after = [m for m in content if m > k]
        before = [m for m in content if m < k]
        other = after[0] if after else (before[-1] if before else None)
        if other is not None:
            pairs.append(ConceptPair(cs[other], cs[k], "dep"))
    return pairs


# -- role assignment -----------------------------------------------------------------


@dataclass
class PairRoles:
    pair: ConceptPair
    head_role: Role | None
    dep_role: Role | None


@dataclass
class Assignments:
    """Candidate roles per relation pair, plus concepts outside every pair."""

    pair_roles: list[PairRoles]
    standalone: dict[int, Role] = field(default_factory=dict)

    def candidates(self, position: int, exclude: PairRoles | None = None) -> list[Role]:
        out = []
        for pr in self.pair_roles:
            if pr is exclude:
                continue
            if pr.pair.head.position == position and pr.head_role is not None:
                out.append(pr.head_role)
            if pr.pair.dependent.position == position and pr.dep_role is not None:
                out.append(pr.dep_role)
        if position in self.standalone:
            out.append(self.standalone[position])
        return out

    def has_unassigned(self) -> bool:
        return any(pr.head_role is None or pr.dep_role is None for pr in self.pair_roles)


def _role_for(c: Concept, label: str, side: str) -> Role | None:
    if c.pos == "function":
        return Role.SC
    if label in ("amod", "nn"):
        return Role.CoI if side == "head" else Role.DC
    if label in ("dobj", "nsubj"):
        if side == "head":
            return Role.RC if c.surface.lower() in LIGHT_VERBS else Role.CoI
        return Role.CoI
    if label.startswith("prep"):
        return Role.CoI if c.pos in ("noun", "verb") else None
    return None


def assign_roles(pairs: Sequence[ConceptPair], concepts: Sequence[Concept]) -> Assignments:
    pair_roles = [
        PairRoles(p, _role_for(p.head, p.relation_label, "head"),
                  _role_for(p.dependent, p.relation_label, "dep"))
        for p in pairs
    ]
    in_pairs = {p.head.position for p in pairs} | {p.dependent.position for p in pairs}
    standalone = {}
    for c in concepts:
        if c.role is not None:
            standalone[c.position] = c.role
        elif c.pos == "function":
            standalone[c.position] = Role.SC
        elif c.position not in in_pairs:
            standalone[c.position] = Role.CoI
    return Assignments(pair_roles, standalone)


Frequency = Callable[[str], int]


def _as_frequency(stats) -> Frequency | None:
    if stats is None or callable(stats):
        return stats
    if hasattr(stats, "collection_count"):
        return stats.collection_count
    if isinstance(stats, Mapping):
        return lambda term: stats.get(term, 0)
    raise TypeError(f"unsupported frequency source {type(stats).__name__}")


def resolve_unassigned(assignments: Assignments, stats=None) -> Assignments:
    """Fill pair slots left without a role.

    Inheritance first: a role the concept holds in another relation is
    propagated. Otherwise frequency: within the pair the more frequent
    concept becomes CoI and the other DC; equal counts make both CoI.
    ``stats`` is a CollectionIndex, a term->count mapping or a callable.
    """
    freq = _as_frequency(stats)
    out = [PairRoles(pr.pair, pr.head_role, pr.dep_role) for pr in assignments.pair_roles]
    resolved = Assignments(out, dict(assignments.standalone))
    for pr, orig in zip(out, assignments.pair_roles):
        if pr.head_role is None:
            inherited = assignments.candidates(pr.pair.head.position, exclude=orig)
            pr.head_role = pick_role(inherited) if inherited else None
        if pr.dep_role is None:
            inherited = assignments.candidates(pr.pair.dependent.position, exclude=orig)
            pr.dep_role = pick_role(inherited) if inherited else None
    for pr in out:
        if pr.head_role is not None and pr.dep_role is not None:
            continue
        if freq is None:
            raise QueryError("collection statistics required to resolve unassigned roles")
        fh, fd = freq(pr.pair.head.normalized), freq(pr.pair.dependent.normalized)
        head_r, dep_r = (
            (Role.CoI, Role.CoI) if fh == fd
            else (Role.CoI, Role.DC) if fh > fd
            else (Role.DC, Role.CoI)
        )
        pr.head_role = pr.head_role or head_r
        pr.dep_role = pr.dep_role or dep_r
    return resolved


def pick_role(roles: Iterable[Role]) -> Role:
    """Keep the most noteworthy role: CoI > DC > RC > SC > EC."""
    roles = list(roles)
    if not roles:
        raise QueryError("no candidate roles")
    return min(roles, key=PRIORITY.index)


def resolve_multiple(assignments: Assignments, concepts: Sequence[Concept] = ()) -> dict[int, Role]:
    """Collapse candidate roles to a single role per concept position."""
    positions = {c.position for c in concepts} | set(assignments.standalone)
    for pr in assignments.pair_roles:
        positions |= {pr.pair.head.position, pr.pair.dependent.position}
    function_pos = {c.position for c in concepts if c.pos == "function"}
    out = {}
    for p in sorted(positions):
        cands = assignments.candidates(p)
        if p in function_pos:
            out[p] = Role.SC
        elif cands:
            out[p] = pick_role(cands)
    return out


def build_conceptual_query(
    concepts: Sequence[Concept],
    pairs: Sequence[ConceptPair],
    axioms: Iterable[tuple[str, str, str]] = (),
    roles: Mapping[int, Role] | None = None,
    text: str = "",
) -> ConceptualQuery:
    roles = roles or {}
    final = []
    for c in concepts:
        role = roles.get(c.position, c.role)
        if role is None:
            raise QueryError(f"concept {c.surface!r} has no role")
        final.append(replace(c, role=role))
    by_pos = {c.position: c for c in final}
    rels = tuple(
        ConceptPair(by_pos[p.head.position], by_pos[p.dependent.position], p.relation_label)
        for p in pairs
    )
    return ConceptualQuery(tuple(final), rels, tuple(axioms), text)


# -- full pipeline -------------------------------------------------------------------


def _kb_pos(concept: Concept) -> str | None:
    return concept.pos if concept.pos in ("noun", "verb", "adjective", "adverb") else None


def attach_senses(cq: ConceptualQuery, kb: KnowledgeBase) -> ConceptualQuery:
    """Disambiguate CoI/DC concepts against each other and record part-whole axioms."""
    base = cq.base_terms()
    senses = {}
    for c in base:
        ctx = [(o.surface, _kb_pos(o)) for o in base if o.position != c.position]
        senses[c.position] = disambiguate(kb, c.surface, _kb_pos(c), ctx).synset_id
    concepts = tuple(replace(c, sense=senses.get(c.position, c.sense)) for c in cq.concepts)
    axioms = list(cq.axioms)
    for ax in part_whole_axioms(kb, [(c.surface.lower(), _kb_pos(c)) for c in cq.by_role(Role.CoI)]):
        if ax not in axioms:
            axioms.append(ax)
    return build_conceptual_query(concepts, cq.relations, axioms, text=cq.text)


def analyze_query(
    query: str,
    *,
    pipeline: Pipeline | None = None,
    ncp_lexicon: Iterable[tuple[str, ...]] | None = None,
    kb: KnowledgeBase | None = None,
    stats=None,
) -> ConceptualQuery:
    """Raw query text -> conceptual query with one role per concept.

    ``ncp_lexicon=None`` uses the bundled lexicon; pass an empty one to disable."""
    pipeline = pipeline or default_pipeline()
    if ncp_lexicon is None:
        ncp_lexicon = default_ncp_lexicon()
    concepts = segment_concepts(query, ncp_lexicon, pipeline)
    concepts = pos_tag(concepts, kb, pipeline)
    pairs = extract_relation_pairs(concepts)
    assignments = assign_roles(pairs, concepts)
    if assignments.has_unassigned():
        assignments = resolve_unassigned(assignments, stats)
    roles = resolve_multiple(assignments, concepts)
    cq = build_conceptual_query(concepts, pairs, roles=roles, text=query)
    return attach_senses(cq, kb) if kb is not None else cq


# -- pre-parsed queries ----------------------------------------------------------------

_PENN = {"NN": "noun", "VB": "verb", "JJ": "adjective", "RB": "adverb"}
_POS_NAMES = {"noun", "verb", "adjective", "adverb", "function"}


def _map_pos(tag: str) -> str:
    t = tag.strip()
    if t.lower() in _POS_NAMES:
        return t.lower()
    return _PENN.get(t[:2].upper(), "function")


@dataclass
class ParsedQuery:
    tokens: list[tuple[str, str, Role | None]]
    pairs: list[tuple[int, int, str]]
    qid: str | None = None


def parse_preparsed(text: str) -> list[ParsedQuery]:
    """Blank-line separated blocks of ``token<TAB>POS<TAB>role-or-_`` lines.

    ``#pair<TAB>head_idx<TAB>dep_idx<TAB>label`` lines (0-based token
    indices) and an optional ``#id<TAB>name`` line may appear in a block.
    """
    out: list[ParsedQuery] = []
    cur = ParsedQuery([], [])
    for lineno, line in enumerate(text.splitlines() + [""], 1):
        if not line.strip():
            if cur.tokens:
                for h, d, _ in cur.pairs:
                    if not (0 <= h < len(cur.tokens) and 0 <= d < len(cur.tokens)):
                        raise QueryError(f"line {lineno}: pair index out of range")
                out.append(cur)
            cur = ParsedQuery([], [])
            continue
        parts = line.rstrip("\n").split("\t")
        if parts[0] == "#pair":
            if len(parts) != 4:
                raise QueryError(f"line {lineno}: malformed pair line")
            cur.pairs.append((int(parts[1]), int(parts[2]), parts[3]))
        elif parts[0] == "#id":
            cur.qid = parts[1] if len(parts) > 1 else None
        elif parts[0].startswith("#"):
            continue
        elif len(parts) == 3:
            token, tag, role = parts
            cur.tokens.append((token, _map_pos(tag), None if role == "_" else Role(role)))
        else:
            raise QueryError(f"line {lineno}: expected token<TAB>POS<TAB>role")
    return out


def load_preparsed(path: str | Path) -> list[ParsedQuery]:
    return parse_preparsed(Path(path).read_text(encoding="utf-8"))


def analyze_preparsed(
    parsed: ParsedQuery,
    *,
    pipeline: Pipeline | None = None,
    kb: KnowledgeBase | None = None,
    stats=None,
) -> ConceptualQuery:
    """Build a conceptual query from externally tagged tokens and pairs.

    Explicit roles win; missing ones come from the rule table. Without pair
    lines the built-in pair rules are used.
    """
    pipeline = pipeline or default_pipeline()
    concepts = []
    for i, (tok, pos, role) in enumerate(parsed.tokens):
        c = _concept(tok, i, pipeline, is_ncp=" " in tok.strip())
        concepts.append(replace(c, pos=pos, role=role))
    if parsed.pairs:
        pairs = [ConceptPair(concepts[h], concepts[d], lab) for h, d, lab in parsed.pairs]
    else:
        pairs = extract_relation_pairs(concepts)
    assignments = assign_roles(pairs, concepts)
    for pr in assignments.pair_roles:
        pr.head_role = pr.pair.head.role or pr.head_role
        pr.dep_role = pr.pair.dependent.role or pr.dep_role
    if assignments.has_unassigned():
        assignments = resolve_unassigned(assignments, stats)
    roles = resolve_multiple(assignments, concepts)
    roles.update({c.position: c.role for c in concepts if c.role is not None})
    text = " ".join(t for t, _, _ in parsed.tokens)
    cq = build_conceptual_query(concepts, pairs, roles=roles, text=text)
    return attach_senses(cq, kb) if kb is not None else cq
