"""Run configuration: a flat ``key = value`` file plus command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .corpus_index import ConfigError
from .expansion import Pattern

PATH_KEYS = ("corpus", "index", "kb", "ncp", "stopwords", "ngram", "weights_file",
             "topics", "queries", "qrels")


@dataclass
class RunConfig:
    corpus: str | None = None
    corpus_format: str = "auto"  # auto | dir | trec
    index: str | None = None
    kb: str | None = None
    ncp: str | None = None
    stopwords: str | None = None
    ngram: str | None = None  # optional external n-gram file
    topics: str | None = None
    queries: str | None = None  # pre-parsed queries; replaces topics + analysis
    qrels: str | None = None
    stemming: bool = True
    window: int = 5
    mu: float = 1000.0
    k_stat: int = 5
    k_lex: int = 5
    kb_depth: int = 2
    max_fraction: float = 0.10
    pattern: str = "IE1"
    weights: str | None = None  # e.g. "CoI=1,DC=0.8,RC=0.5,EC=0.5"
    weights_file: str | None = None
    seed: int = 0
    k: int = 1000
    # GA
    population: int = 200
    iterations: int = 100
    crossover_events: int | None = 1000
    mutation_events: int | None = 10
    patience: int | None = None
    per_query: bool = False

    def __post_init__(self):
        try:
            Pattern.parse(self.pattern)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.corpus_format not in ("auto", "dir", "trec"):
            raise ConfigError(f"unknown corpus_format {self.corpus_format!r}")
        if self.window < 2:
            raise ConfigError("window must be >= 2")
        if self.k <= 0:
            raise ConfigError("k must be positive")
        if self.k_stat < 0 or self.k_lex < 0:
            raise ConfigError("k_stat and k_lex must be non-negative")
        if self.mu < 0:
            raise ConfigError("mu must be >= 0")

    def require(self, *keys: str) -> None:
        """All named paths must be set and exist."""
        for key in keys:
            value = getattr(self, key)
            if value is None:
                raise ConfigError(f"missing required setting {key!r}")
            if not Path(value).exists():
                raise ConfigError(f"{key}: {value} does not exist")

    def check_optional(self, *keys: str) -> None:
        for key in keys:
            value = getattr(self, key)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{key}: {value} does not exist")

    def replace(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(name: str, raw: str, type_hint: str) -> Any:
    raw = raw.strip()
    if raw.lower() in ("", "none", "null") and "None" in type_hint:
        return None
    try:
        if type_hint.startswith("bool"):
            if raw.lower() in _TRUE:
                return True
            if raw.lower() in _FALSE:
                return False
            raise ValueError(raw)
        if type_hint.startswith("int"):
            return int(raw)
        if type_hint.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {type_hint}") from None
    return raw


def from_mapping(values: Mapping[str, Any], base: RunConfig | None = None,
                 root: Path | None = None) -> RunConfig:
    """Typed RunConfig from string (or already typed) values.

    Relative paths are resolved against ``root`` when given."""
    types = {f.name: str(f.type) for f in fields(RunConfig)}
    changes = {}
    for key, value in values.items():
        key = key.strip().replace("-", "_")
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, str):
            value = _convert(key, value, types[key])
        if key in PATH_KEYS and value is not None and root is not None:
            p = Path(value)
            value = str(p if p.is_absolute() else root / p)
        changes[key] = value
    return dataclasses.replace(base or RunConfig(), **changes)


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | Path | None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} does not exist")
        cfg = from_mapping(parse_config_text(p.read_text(encoding="utf-8"), str(p)),
                           cfg, p.parent)
    if overrides:
        cfg = from_mapping({k: v for k, v in overrides.items() if v is not None}, cfg)
    return cfg
