from cogqe.benchmark import generate
from cogqe.eval_harness import parse_qrels, parse_topics
from cogqe.lexical_kb import load_kb
from cogqe.text import default_stopwords, stem

from conftest import BENCH


def test_generator_reproduces_shipped_files(tmp_path):
    generate().write(tmp_path)
    for name in ("docs.trec", "kb.txt", "topics.txt", "qrels.txt"):
        assert (tmp_path / name).read_bytes() == (BENCH / name).read_bytes(), name


def test_shape(bench_engine, bench_topics, bench_qrels):
    assert bench_engine.index.doc_count == 200
    assert len(bench_topics) == 50
    assert all(len(bench_qrels.relevant(t.number)) == 3 for t in bench_topics)
    load_kb(BENCH / "kb.txt")


def test_query_words_absent_from_two_relevant_docs():
    bench = generate(seed=3, n_topics=5)
    docs = dict(bench.docs)
    for t in bench.topics:
        mod, head = t.title.split()
        assert f"{mod} {head}" in docs[f"SYN-{t.number}-A"]
        assert head not in docs[f"SYN-{t.number}-C"].split()


def test_pseudowords_are_stem_stable():
    bench = generate(seed=4, n_topics=10)
    stop = default_stopwords()
    for _, text in bench.docs:
        for w in text.rstrip(".").split():
            assert stem(w) == w and w not in stop


def test_seed_changes_collection():
    assert generate(seed=1, n_topics=3).docs != generate(seed=2, n_topics=3).docs
