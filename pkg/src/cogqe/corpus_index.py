"""Document ingestion, inverted index and windowed n-gram model."""

from __future__ import annotations

import gzip
import json
import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .text import Pipeline, default_pipeline

log = logging.getLogger(__name__)

DEFAULT_WINDOW = 5
INDEX_MAGIC = b"COGQE-INDEX"
INDEX_VERSION = 1


class IngestError(Exception):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Document:
    doc_id: str
    raw_text: str
    tokens: tuple[str, ...]

    @property
    def length(self) -> int:
        return len(self.tokens)


def find_phrase(tokens: tuple[str, ...] | list[str], phrase: tuple[str, ...]) -> int:
    """Count occurrences of ``phrase`` as an adjacent token sequence."""
    n = len(phrase)
    if n == 0:
        return 0
    if n == 1:
        return sum(1 for t in tokens if t == phrase[0])
    first = phrase[0]
    return sum(
        1
        for i in range(len(tokens) - n + 1)
        if tokens[i] == first and tuple(tokens[i : i + n]) == phrase
    )


class CollectionIndex:
    """Inverted index plus the collection statistics used for smoothing.

    Read-only after construction. Multi-word terms (space-joined) are
    counted as adjacent phrase occurrences on demand.
    """

    def __init__(
        self,
        doc_tokens: Mapping[str, tuple[str, ...]],
        pipeline: Pipeline | None = None,
        surface_forms: Mapping[str, str] | None = None,
        errors: Iterable[str] = (),
    ):
        if not doc_tokens:
            raise IngestError("collection contains no documents")
        self.pipeline = pipeline or default_pipeline()
        self.doc_ids: tuple[str, ...] = tuple(sorted(doc_tokens))
        self.doc_tokens: dict[str, tuple[str, ...]] = {
            d: tuple(doc_tokens[d]) for d in self.doc_ids
        }
        self.doc_lengths: dict[str, int] = {d: len(t) for d, t in self.doc_tokens.items()}
        self.doc_count = len(self.doc_ids)
        self.surface_forms = dict(surface_forms or {})
        self.errors: tuple[str, ...] = tuple(errors)

        postings: dict[str, list[tuple[str, int]]] = defaultdict(list)
        coll: Counter[str] = Counter()
        for d in self.doc_ids:
            tf = Counter(self.doc_tokens[d])
            coll.update(tf)
            for term, n in tf.items():
                postings[term].append((d, n))
        self.postings: dict[str, list[tuple[str, int]]] = dict(postings)
        self.collection_counts: dict[str, int] = dict(coll)
        self.total_tokens = sum(self.doc_lengths.values())
        self._doc_tf = {d: Counter(t) for d, t in self.doc_tokens.items()}
        self._phrase_cache: dict[str, dict[str, int]] = {}

    # -- term statistics -------------------------------------------------

    def _phrase_postings(self, term: str) -> dict[str, int]:
        cached = self._phrase_cache.get(term)
        if cached is not None:
            return cached
        parts = tuple(term.split())
        if len(parts) <= 1:
            out = dict(self.postings.get(term, ()))
        else:
            docs = None
            for p in parts:
                ids = {d for d, _ in self.postings.get(p, ())}
                docs = ids if docs is None else docs & ids
                if not docs:
                    break
            out = {}
            for d in sorted(docs or ()):
                n = find_phrase(self.doc_tokens[d], parts)
                if n:
                    out[d] = n
        self._phrase_cache[term] = out
        return out

    def doc_term_count(self, term: str, doc_id: str) -> int:
        if " " not in term:
            return self._doc_tf[doc_id].get(term, 0)
        return self._phrase_postings(term).get(doc_id, 0)

    def collection_count(self, term: str) -> int:
        if " " not in term:
            return self.collection_counts.get(term, 0)
        return sum(self._phrase_postings(term).values())

    def docs_containing(self, term: str) -> list[str]:
        return sorted(self._phrase_postings(term))

    def surface(self, term: str) -> str:
        return self.surface_forms.get(term, term)


# -- ingestion ---------------------------------------------------------------

_DOC_RE = re.compile(r"<DOC>(.*?)</DOC>", re.S | re.I)
_DOCNO_RE = re.compile(r"<DOCNO>\s*(.*?)\s*</DOCNO>", re.S | re.I)
_TAG_RE = re.compile(r"<[^>]+>")


def parse_trec_documents(stream: str) -> list[tuple[str, str]]:
    """Split a TREC SGML stream into ``(docno, text)`` pairs."""
    out = []
    for block in _DOC_RE.findall(stream):
        m = _DOCNO_RE.search(block)
        if m is None:
            raise IngestError("<DOC> block without <DOCNO>")
        text = _TAG_RE.sub(" ", block[: m.start()] + block[m.end() :])
        out.append((m.group(1).strip(), " ".join(text.split())))
    return out


def read_documents(source: str | Path, fmt: str = "auto") -> tuple[list[tuple[str, str]], list[str]]:
    """Read raw ``(doc_id, text)`` pairs from a directory of .txt files or a TREC file.

    ``fmt`` is ``auto``, ``dir`` or ``trec``. Returns the documents and a
    list of per-file error messages.
    """
    source = Path(source)
    errors: list[str] = []
    docs: list[tuple[str, str]] = []
    if fmt not in ("auto", "dir", "trec"):
        raise ConfigError(f"unknown corpus format {fmt!r}")
    if source.exists() and fmt != "auto" and source.is_dir() != (fmt == "dir"):
        raise IngestError(f"{source} is not a {'directory' if fmt == 'dir' else 'TREC file'}")
    if source.is_dir():
        for path in sorted(source.glob("*.txt")):
            try:
                docs.append((path.stem, path.read_text(encoding="utf-8")))
            except (OSError, UnicodeDecodeError) as exc:
                errors.append(f"{path}: {exc}")
                log.warning("skipping unreadable file %s: %s", path, exc)
    elif source.is_file():
        docs = parse_trec_documents(source.read_text(encoding="utf-8"))
    else:
        raise IngestError(f"corpus not found: {source}")
    return docs, errors


def surface_map(raw_counts: Mapping[str, Counter]) -> dict[str, str]:
    """Most frequent raw word per normalized term (ties: lexicographic)."""
    return {
        term: min(c.items(), key=lambda kv: (-kv[1], kv[0]))[0]
        for term, c in raw_counts.items()
    }


def build_index(
    docs: Mapping[str, str] | Iterable[tuple[str, str]],
    pipeline: Pipeline | None = None,
    errors: Iterable[str] = (),
) -> CollectionIndex:
    pipeline = pipeline or default_pipeline()
    items = list(docs.items()) if isinstance(docs, Mapping) else list(docs)
    if not items:
        raise IngestError("collection contains no documents")
    tokens: dict[str, tuple[str, ...]] = {}
    raw_counts: dict[str, Counter] = defaultdict(Counter)
    for doc_id, text in items:
        if doc_id in tokens:
            raise IngestError(f"duplicate document id {doc_id!r}")
        toks = []
        for raw in re.findall(r"[a-z0-9]+", text.lower()):
            if raw in pipeline.stopwords:
                continue
            s = pipeline.stem_token(raw)
            if s and s not in pipeline.stopwords:
                toks.append(s)
                raw_counts[s][raw] += 1
        tokens[doc_id] = tuple(toks)
    return CollectionIndex(tokens, pipeline, surface_map(raw_counts), errors)


def ingest(source: str | Path, pipeline: Pipeline | None = None,
           fmt: str = "auto") -> CollectionIndex:
    docs, errors = read_documents(source, fmt)
    if not docs:
        raise IngestError(f"no documents found in {source}")
    return build_index(docs, pipeline, errors)


# -- n-gram model --------------------------------------------------------------


@dataclass
class NGramModel:
    window_size: int
    windows: dict[tuple[str, ...], int]
    unigram_counts: dict[str, int]
    _by_term: dict[str, set[tuple[str, ...]]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._by_term:
            by_term = defaultdict(set)
            for w in self.windows:
                for t in w:
                    by_term[t].add(w)
            self._by_term = dict(by_term)

    def windows_with(self, token: str) -> set[tuple[str, ...]]:
        return self._by_term.get(token, set())


def build_ngram_model(index: CollectionIndex, n: int = DEFAULT_WINDOW) -> NGramModel:
    if n < 2:
        raise ConfigError(f"window size must be >= 2, got {n}")
    windows: Counter[tuple[str, ...]] = Counter()
    for d in index.doc_ids:
        toks = index.doc_tokens[d]
        if not toks:
            continue
        if len(toks) < n:
            windows[toks] += 1
            continue
        for i in range(len(toks) - n + 1):
            windows[toks[i : i + n]] += 1
    return NGramModel(n, dict(windows), dict(index.collection_counts))


def _contains(window: tuple[str, ...], term: tuple[str, ...]) -> list[int]:
    n = len(term)
    return [i for i in range(len(window) - n + 1) if window[i : i + n] == term]


def _pair_positions(window, a, b):
    """Token positions covered by the pair, or None when the window lacks it."""
    pa, pb = _contains(window, a), _contains(window, b)
    if not pa or not pb:
        return None
    if a == b:
        # same term twice: needs two non-overlapping occurrences
        for i in pa:
            for j in pa:
                if j >= i + len(a):
                    return set(range(i, i + len(a))) | set(range(j, j + len(a)))
        return None
    for i in pa:
        for j in pb:
            sa, sb = set(range(i, i + len(a))), set(range(j, j + len(b)))
            if not sa & sb:
                return sa | sb
    return None


def window_matches(
    pair: tuple[str, str], model: NGramModel
) -> list[tuple[tuple[str, ...], int]]:
    """Windows holding both (normalized) terms of ``pair``, most frequent first."""
    a, b = tuple(pair[0].split()), tuple(pair[1].split())
    if not a or not b:
        return []
    cands = model.windows_with(a[0]) & model.windows_with(b[0])
    hits = [(w, model.windows[w]) for w in cands if _pair_positions(w, a, b) is not None]
    hits.sort(key=lambda wc: (-wc[1], " ".join(wc[0])))
    return hits


def surrounding_terms(window: tuple[str, ...], pair: tuple[str, str]) -> list[str]:
    """Window tokens outside the positions occupied by the pair."""
    a, b = tuple(pair[0].split()), tuple(pair[1].split())
    used = _pair_positions(window, a, b) or set()
    return [t for i, t in enumerate(window) if i not in used]


def load_ngram_file(path: str | Path, pipeline: Pipeline | None = None) -> NGramModel:
    """Load ``term1 ... termN<TAB>count`` records.

    Single-term records form the 1-gram model; when there are none, unigram
    counts are accumulated from the longer records. With a pipeline, every
    record is normalized on load and duplicates are merged.
    """
    windows: Counter[tuple[str, ...]] = Counter()
    unigrams: Counter[str] = Counter()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                text, count_s = line.rsplit("\t", 1)
                count = int(count_s)
            except ValueError:
                raise IngestError(f"{path}:{lineno}: malformed n-gram record") from None
            if count <= 0:
                raise IngestError(f"{path}:{lineno}: count must be positive")
            terms = tuple(pipeline.normalize(text)) if pipeline else tuple(text.split())
            if not terms:
                continue
            if len(terms) == 1 and len(text.split()) == 1:
                unigrams[terms[0]] += count
            else:
                windows[terms] += count
    if not unigrams:
        for w, c in windows.items():
            for t in w:
                unigrams[t] += c
    size = max((len(w) for w in windows), default=2)
    return NGramModel(max(size, 2), dict(windows), dict(unigrams))


def write_ngram_file(model: NGramModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for term, c in sorted(model.unigram_counts.items()):
            fh.write(f"{term}\t{c}\n")
        for w, c in sorted(model.windows.items()):
            fh.write(f"{' '.join(w)}\t{c}\n")


# -- persistence ------------------------------------------------------------------


def save_index(index: CollectionIndex, model: NGramModel | None, path: str | Path) -> None:
    """Write a versioned container: magic, version line, then gzipped JSON.

    The gzip header carries no timestamp, so equal inputs give equal bytes."""
    payload = {
        "stemming": index.pipeline.stemming,
        "stopwords": sorted(index.pipeline.stopwords),
        "docs": {d: " ".join(index.doc_tokens[d]) for d in index.doc_ids},
        "surface_forms": dict(sorted(index.surface_forms.items())),
        "errors": list(index.errors),
        "window_size": model.window_size if model else None,
        "windows": sorted([" ".join(w), c] for w, c in model.windows.items()) if model else [],
    }
    body = gzip.compress(json.dumps(payload, sort_keys=True).encode("utf-8"), mtime=0)
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC + b" " + str(INDEX_VERSION).encode() + b"\n")
        fh.write(body)


def load_index(path: str | Path) -> tuple[CollectionIndex, NGramModel | None]:
    data = Path(path).read_bytes()
    header, sep, body = data.partition(b"\n")
    parts = header.split(b" ")
    if not sep or len(parts) != 2 or parts[0] != INDEX_MAGIC:
        raise IngestError(f"{path}: not an index file")
    try:
        version = int(parts[1])
    except ValueError:
        raise IngestError(f"{path}: unreadable index version") from None
    if version != INDEX_VERSION:
        raise IngestError(f"{path}: index format version {version}, expected {INDEX_VERSION}")
    try:
        payload = json.loads(gzip.decompress(body).decode("utf-8"))
    except (OSError, ValueError) as e:
        raise IngestError(f"{path}: corrupt index body ({e})") from None
    pipeline = Pipeline(frozenset(payload["stopwords"]), payload["stemming"])
    tokens = {d: tuple(t.split()) for d, t in payload["docs"].items()}
    index = CollectionIndex(tokens, pipeline, payload["surface_forms"], payload["errors"])
    model = None
    if payload["window_size"]:
        windows = {tuple(w.split()): c for w, c in payload["windows"]}
        model = NGramModel(payload["window_size"], windows, dict(index.collection_counts))
    return index, model
