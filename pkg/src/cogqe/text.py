"""Tokenization, stopword filtering and Porter stemming."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from nltk.stem.porter import PorterStemmer

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_PORTER = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on anything that is not a letter or digit."""
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=200_000)
def stem(token: str) -> str:
    # Plain Porter is not idempotent ("agreed" -> "agre" -> "agr"); iterate to a
    # fixpoint so that normalizing normalized text is a no-op.
    current = token
    for _ in range(8):
        nxt = _PORTER.stem(current)
        if nxt == current:
            return current
        current = nxt
    return current


def load_word_list(path: str | Path) -> frozenset[str]:
    """Read a one-entry-per-line file, ignoring blanks and ``#`` comments."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip().lower()
            if line and not line.startswith("#"):
                words.add(line)
    return frozenset(words)


def default_stopwords() -> frozenset[str]:
    with resources.as_file(resources.files("cogqe.data") / "stopwords.txt") as p:
        return load_word_list(p)


@dataclass(frozen=True)
class Pipeline:
    """Normalization settings shared by documents and queries."""

    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    stemming: bool = True

    def stem_token(self, token: str) -> str:
        return stem(token) if self.stemming else token

    def is_stopword(self, token: str) -> bool:
        return token in self.stopwords

    def normalize(self, text: str) -> list[str]:
        out = []
        for tok in tokenize(text):
            if tok in self.stopwords:
                continue
            s = self.stem_token(tok)
            # a stem may collapse onto a stopword; drop it so the output stays stopword-free
            if s and s not in self.stopwords:
                out.append(s)
        return out

    def normalize_phrase(self, text: str) -> str:
        """Space-joined normalized form used as the key of a (multi-word) concept."""
        return " ".join(self.normalize(text))

    def stem_phrase(self, text: str) -> str:
        """Stem every token but keep stopwords; used for function-word concepts."""
        return " ".join(self.stem_token(t) for t in tokenize(text))


def normalize(text: str, pipeline: Pipeline | None = None) -> list[str]:
    return (pipeline or default_pipeline()).normalize(text)


@lru_cache(maxsize=1)
def default_pipeline() -> Pipeline:
    return Pipeline()


def make_pipeline(stopword_file: str | Path | None = None, stemming: bool = True) -> Pipeline:
    if stopword_file is None:
        return Pipeline(stemming=stemming) if not stemming else default_pipeline()
    return Pipeline(stopwords=load_word_list(stopword_file), stemming=stemming)
