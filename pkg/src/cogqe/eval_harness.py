"""TREC topics/qrels, average precision, paired t-tests and MAP reports."""

from __future__ import annotations

import csv
import io
import logging
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

log = logging.getLogger(__name__)

DEFAULT_DEPTH = 1000
ALPHA = 0.05
SD_GUARD = 1e-12


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class Topic:
    number: str
    title: str
    description: str = ""
    narrative: str = ""


# -- topics -------------------------------------------------------------------------

_TOP_RE = re.compile(r"<top>(.*?)</top>", re.S | re.I)
_FIELD_RE = re.compile(r"<(num|title|desc|narr)>", re.I)
_PREFIX = {"num": "Number:", "title": "Topic:", "desc": "Description:", "narr": "Narrative:"}


def parse_topics_text(text: str, source: str = "<topics>") -> list[Topic]:
    topics = []
    seen = set()
    for m in _TOP_RE.finditer(text):
        line = text.count("\n", 0, m.start()) + 1
        body = m.group(1)
        fields: dict[str, str] = {}
        tags = list(_FIELD_RE.finditer(body))
        for i, t in enumerate(tags):
            end = tags[i + 1].start() if i + 1 < len(tags) else len(body)
            name = t.group(1).lower()
            value = " ".join(body[t.end():end].split())
            prefix = _PREFIX[name]
            if value.lower().startswith(prefix.lower()):
                value = value[len(prefix):].strip()
            fields[name] = value
        if not fields.get("num"):
            raise ParseError(f"{source}:{line}: topic without <num>")
        if not fields.get("title"):
            raise ParseError(f"{source}:{line}: topic {fields['num']} without <title>")
        num = fields["num"].split()[0]
        if num in seen:
            raise ParseError(f"{source}:{line}: duplicate topic number {num}")
        seen.add(num)
        topics.append(Topic(num, fields["title"], fields.get("desc", ""), fields.get("narr", "")))
    return topics


def parse_topics(path: str | Path) -> list[Topic]:
    return parse_topics_text(Path(path).read_text(encoding="utf-8"), str(path))


def format_topics(topics: Iterable[Topic]) -> str:
    blocks = []
    for t in topics:
        blocks.append(
            f"<top>\n<num> Number: {t.number}\n<title> Topic: {t.title}\n"
            f"<desc> Description:\n{t.description}\n<narr> Narrative:\n{t.narrative}\n</top>\n"
        )
    return "\n".join(blocks)


# -- qrels ----------------------------------------------------------------------------


@dataclass
class Qrels:
    judgments: dict[str, dict[str, int]] = field(default_factory=dict)

    def relevant(self, topic: str) -> set[str]:
        return {d for d, r in self.judgments.get(topic, {}).items() if r > 0}

    def topics(self) -> list[str]:
        return sorted(self.judgments, key=_topic_key)

    def is_relevant(self, topic: str, doc_id: str) -> bool:
        return self.judgments.get(topic, {}).get(doc_id, 0) > 0


def _topic_key(t: str):
    return (0, int(t), t) if t.isdigit() else (1, 0, t)


def parse_qrels_text(text: str, source: str = "<qrels>") -> Qrels:
    q = Qrels()
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 4:
            raise ParseError(f"{source}:{lineno}: expected 'topic iter doc rel'")
        topic, _it, doc, rel = parts
        try:
            value = 1 if int(rel) > 0 else 0
        except ValueError:
            raise ParseError(f"{source}:{lineno}: relevance {rel!r} is not an integer") from None
        per_topic = q.judgments.setdefault(topic, {})
        if doc in per_topic:
            warnings.warn(f"{source}:{lineno}: duplicate judgment for {topic}/{doc}; last wins")
        per_topic[doc] = value
    return q


def parse_qrels(path: str | Path) -> Qrels:
    return parse_qrels_text(Path(path).read_text(encoding="utf-8"), str(path))


def format_qrels(qrels: Qrels) -> str:
    return "".join(
        f"{t} 0 {d} {r}\n"
        for t in qrels.topics()
        for d, r in sorted(qrels.judgments[t].items())
    )


# -- metrics ------------------------------------------------------------------------------


def average_precision(ranking: Sequence[str], relevant: set[str] | frozenset[str]) -> float:
    """Sum of precision at each relevant rank, over the number of relevant docs."""
    if not relevant:
        raise ValueError("average precision undefined without relevant documents")
    hits = 0
    total = 0.0
    seen = set()
    for rank, doc in enumerate(ranking, 1):
        if doc in relevant and doc not in seen:
            hits += 1
            total += hits / rank
        seen.add(doc)
    return total / len(relevant)


def map_score(aps: Mapping[str, float] | Sequence[float] | "EvalRun") -> float:
    if isinstance(aps, EvalRun):
        aps = aps.ap
    values = list(aps.values()) if isinstance(aps, Mapping) else list(aps)
    if not values:
        raise ValueError("no evaluable topics")
    return math.fsum(values) / len(values)


@dataclass
class EvalRun:
    system: str
    rankings: dict[str, list[str]]
    ap: dict[str, float]

    @property
    def map(self) -> float:
        return map_score(self.ap)


def evaluate_run(system: str, rankings: Mapping[str, Sequence[str]], qrels: Qrels,
                 depth: int = DEFAULT_DEPTH) -> EvalRun:
    """AP for every judged topic with relevant documents; unretrieved topics score 0."""
    aps = {}
    for topic in qrels.topics():
        rel = qrels.relevant(topic)
        if not rel:
            log.warning("topic %s has no relevant documents; skipped", topic)
            continue
        aps[topic] = average_precision(list(rankings.get(topic, ()))[:depth], rel)
    return EvalRun(system, {t: list(r) for t, r in rankings.items()}, aps)


# -- significance ------------------------------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, 1000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    lfront = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
              + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(lfront)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def t_cdf(t: float, df: float) -> float:
    tail = 0.5 * t_sf_two_sided(t, df)
    return 1.0 - tail if t >= 0 else tail


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int
    significant: bool


def paired_t_test(a: Sequence[float], b: Sequence[float], alpha: float = ALPHA) -> TTestResult:
    """Two-sided paired t-test on per-topic scores ``a - b``."""
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("paired t-test needs at least two pairs")
    diffs = [x - y for x, y in zip(a, b)]
    mean = math.fsum(diffs) / n
    var = math.fsum((d - mean) ** 2 for d in diffs) / (n - 1)
    sd = math.sqrt(var)
    if mean == 0.0 and sd == 0.0:
        return TTestResult(0.0, 1.0, n - 1, False)
    if sd < SD_GUARD:
        warnings.warn("zero variance in paired differences; guarding sd")
        sd = SD_GUARD
    t = mean / (sd / math.sqrt(n))
    p = t_sf_two_sided(t, n - 1)
    return TTestResult(t, p, n - 1, p < alpha)


# -- report --------------------------------------------------------------------------------------

REPORT_HEADER = ("system", "map", "rel_improvement_pct", "significant_vs")


def compare(system: EvalRun, baseline: EvalRun) -> tuple[float, TTestResult | None]:
    """Relative MAP change in percent and the paired test over shared topics."""
    topics = sorted(set(system.ap) & set(baseline.ap), key=_topic_key)
    base_map = baseline.map
    pct = math.nan if base_map == 0 else 100.0 * (system.map - base_map) / base_map
    if system.map == base_map and base_map == 0:
        pct = 0.0
    test = None
    if len(topics) >= 2:
        test = paired_t_test([system.ap[t] for t in topics], [baseline.ap[t] for t in topics])
    return pct, test


def report_rows(runs: Sequence[EvalRun], baselines: Sequence[EvalRun] = ()) -> list[dict]:
    """One row per run. Improvement is relative to the first baseline;
    ``significant_vs`` lists baselines significantly improved upon."""
    if not runs and not baselines:
        raise ValueError("nothing to report")
    ref = baselines[0] if baselines else runs[0]
    rows = []
    for run in list(baselines) + list(runs):
        pct, _ = compare(run, ref)
        marks = []
        for b in baselines:
            if b is run:
                continue
            _, test = compare(run, b)
            if test is not None and test.significant and test.t > 0:
                marks.append(b.system)
        rows.append({
            "system": run.system,
            "map": run.map,
            "rel_improvement_pct": pct,
            "significant_vs": ";".join(marks),
        })
    return rows


def report(runs: Sequence[EvalRun], baselines: Sequence[EvalRun] = ()) -> str:
    rows = report_rows(runs, baselines)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in rows:
        w.writerow([r["system"], f"{r['map']:.4f}", f"{r['rel_improvement_pct']:.2f}",
                    r["significant_vs"]])
    return buf.getvalue()
