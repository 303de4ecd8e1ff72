"""Deterministic synthetic test collection.

Every topic is an adjective-noun query over invented words. Of its four
documents, three are relevant, but only one of them uses the query words;
the others say the same thing with synonyms or the hypernym. The fourth
document shares the modifier and talks about a sister concept, and is
judged non-relevant. Invented words are stem-stable so that surface forms,
stems and knowledge-base lemmas coincide.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .eval_harness import Qrels, Topic, format_qrels, format_topics
from .linguistics import LIGHT_VERBS
from .text import default_stopwords, stem

DEFAULT_SEED = 13
DEFAULT_TOPICS = 50
FIRST_TOPIC = 201

_ONSETS = "b d f g k l m n p r t v z".split() + ["br", "dr", "gr", "kl", "pl", "tr", "zv"]
_VOWELS = "a i o u".split()
_CODAS = "k m n p t".split()


@dataclass
class Benchmark:
    docs: list[tuple[str, str]]
    kb_text: str
    topics: list[Topic]
    qrels: Qrels

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "docs.trec", "w", encoding="utf-8") as fh:
            for doc_id, text in self.docs:
                fh.write(f"<DOC>\n<DOCNO> {doc_id} </DOCNO>\n<TEXT>\n{text}\n</TEXT>\n</DOC>\n")
        (out / "kb.txt").write_text(self.kb_text, encoding="utf-8")
        (out / "topics.txt").write_text(format_topics(self.topics), encoding="utf-8")
        (out / "qrels.txt").write_text(format_qrels(self.qrels), encoding="utf-8")


class _Words:
    """Fresh invented words, never repeated, all fixed points of the stemmer."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set()
        self.banned = default_stopwords() | LIGHT_VERBS

    def __call__(self) -> str:
        while True:
            n = self.rng.choice((2, 2, 3))
            w = "".join(self.rng.choice(_ONSETS) + self.rng.choice(_VOWELS) for _ in range(n))
            w += self.rng.choice(_CODAS)
            if w in self.used or w in self.banned or stem(w) != w:
                continue
            self.used.add(w)
            return w


def generate(seed: int = DEFAULT_SEED, n_topics: int = DEFAULT_TOPICS) -> Benchmark:
    rng = random.Random(seed)
    word = _Words(rng)
    filler = [word() for _ in range(120)]

    def pad(units: list[str], n: int) -> str:
        # units may be multi-word phrases; filler never splits a phrase
        out = list(units)
        for _ in range(n):
            out.insert(rng.randrange(len(out) + 1), rng.choice(filler))
        return " ".join(out) + "."

    docs: list[tuple[str, str]] = []
    kb_s: list[str] = []
    kb_e: list[str] = []
    topics: list[Topic] = []
    judgments: dict[str, dict[str, int]] = {}
    for t in range(n_topics):
        num = str(FIRST_TOPIC + t)
        head, syn1, syn2, hyper, coord = (word() for _ in range(5))
        mod, modsyn = word(), word()
        c1, c2, c3 = word(), word(), word()

        sid = f"t{num}"
        kb_s += [
            f"S\t{sid}.head\tnoun\t{head}|{syn1}|{syn2}\thead concept of topic {num}",
            f"S\t{sid}.hyper\tnoun\t{hyper}\tgeneralization of topic {num}",
            f"S\t{sid}.coord\tnoun\t{coord}\tsister concept of topic {num}",
            f"S\t{sid}.mod\tadjective\t{mod}|{modsyn}\tmodifier of topic {num}",
        ]
        kb_e += [
            f"E\t{sid}.head\thypernym\t{sid}.hyper",
            f"E\t{sid}.coord\thypernym\t{sid}.hyper",
            f"E\t{sid}.hyper\thyponym\t{sid}.head",
            f"E\t{sid}.hyper\thyponym\t{sid}.coord",
        ]

        r1 = pad([c1, f"{mod} {head}", c2, c3], rng.randint(3, 6))
        r2_words = [c1, f"{modsyn} {syn1}", c2]
        if rng.random() < 0.3:
            r2_words.append(head)
        r2 = pad(r2_words, rng.randint(3, 6))
        r3 = pad([syn2, hyper, c3, c1], rng.randint(3, 6))
        d_words = [mod, coord, c2] + ([head] if rng.random() < 0.5 else [])
        d = pad(d_words, rng.randint(3, 6))

        ids = [f"SYN-{num}-{k}" for k in "ABCD"]
        docs += list(zip(ids, (r1, r2, r3, d)))
        judgments[num] = {ids[0]: 1, ids[1]: 1, ids[2]: 1, ids[3]: 0}
        topics.append(Topic(num, f"{mod} {head}", f"Documents about {mod} {head}.",
                            f"Relevant documents discuss the {head} under any of its names."))
    kb_text = "# synthetic benchmark knowledge base\n" + "\n".join(kb_s + kb_e) + "\n"
    return Benchmark(sorted(docs), kb_text, topics, Qrels(judgments))
