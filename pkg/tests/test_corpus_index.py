import pytest
from hypothesis import given, settings, strategies as st

from cogqe.corpus_index import (
    ConfigError, IngestError, build_index, build_ngram_model, ingest, load_index,
    load_ngram_file, parse_trec_documents, read_documents, save_index, surrounding_terms,
    window_matches, write_ngram_file,
)

from conftest import MINI


def test_parse_trec_strips_tags():
    docs = parse_trec_documents("<DOC><DOCNO> D1 </DOCNO><TEXT>hello <B>world</B></TEXT></DOC>")
    assert docs[0][0] == "D1"
    assert "world" in docs[0][1] and "<B>" not in docs[0][1]


def test_directory_ingest_records_bad_files(tmp_path):
    (tmp_path / "a.txt").write_text("Overcrowded prisons.")
    (tmp_path / "b.txt").write_bytes(b"\xff\xfe\xfa bad")
    docs, errors = read_documents(tmp_path)
    assert [d for d, _ in docs] == ["a"]
    assert len(errors) == 1


def test_missing_corpus_raises():
    with pytest.raises(IngestError):
        ingest("/nonexistent/corpus")


def test_empty_collection_rejected():
    with pytest.raises(IngestError):
        build_index({})


def test_duplicate_doc_ids_rejected():
    with pytest.raises(IngestError):
        build_index([("d", "a"), ("d", "b")])


def test_index_statistics(mini_index):
    idx = mini_index
    assert idx.doc_count == 34
    assert idx.total_tokens == sum(idx.doc_lengths.values())
    assert idx.collection_count("prison") == sum(n for _, n in idx.postings["prison"])
    assert idx.surface("jail") == "jails"
    # space-joined terms are counted as adjacent phrases
    assert idx.doc_term_count("engin failur", "C01") == 1
    assert idx.docs_containing("engin failur") == ["C01", "C06"]


def test_ngram_windows_and_short_docs():
    idx = build_index({"d1": "alpha beta gamma delta epsilon zeta", "d2": "alpha beta"})
    model = build_ngram_model(idx, 5)
    assert model.windows[("alpha", "beta")] == 1  # short doc contributes itself
    assert sum(model.windows.values()) == 3
    with pytest.raises(ConfigError):
        build_ngram_model(idx, 1)


def test_window_matches_and_surroundings():
    idx = build_index({"d1": "state overcrowded prisons years conditions"})
    model = build_ngram_model(idx, 5)
    matches = window_matches(("overcrowd", "prison"), model)
    assert len(matches) == 1
    assert surrounding_terms(matches[0][0], ("overcrowd", "prison")) == ["state", "year", "condit"]


def test_identical_pair_needs_two_occurrences():
    idx = build_index({"d1": "prison alpha beta gamma delta", "d2": "prison prison gamma"})
    model = build_ngram_model(idx, 5)
    found = [w for w, _ in window_matches(("prison", "prison"), model)]
    assert found == [("prison", "prison", "gamma")]


def test_ngram_file_round_trip(tmp_path, mini_index):
    model = build_ngram_model(mini_index, 5)
    path = tmp_path / "ngrams.tsv"
    write_ngram_file(model, path)
    back = load_ngram_file(path)
    assert back.windows == model.windows
    assert back.unigram_counts == model.unigram_counts


def test_ngram_file_errors(tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("alpha beta\tnotanumber\n")
    with pytest.raises(IngestError, match=":1:"):
        load_ngram_file(bad)


def test_index_container_round_trip_and_determinism(tmp_path, mini_index):
    model = build_ngram_model(mini_index, 5)
    a, b = tmp_path / "a.idx", tmp_path / "b.idx"
    save_index(mini_index, model, a)
    save_index(mini_index, model, b)
    assert a.read_bytes() == b.read_bytes()
    idx2, model2 = load_index(a)
    assert idx2.doc_tokens == mini_index.doc_tokens
    assert idx2.surface_forms == mini_index.surface_forms
    assert model2.windows == model.windows


def test_index_version_mismatch_rejected(tmp_path, mini_index):
    path = tmp_path / "x.idx"
    save_index(mini_index, None, path)
    data = path.read_bytes().replace(b"COGQE-INDEX 1\n", b"COGQE-INDEX 99\n", 1)
    path.write_bytes(data)
    with pytest.raises(IngestError, match="version"):
        load_index(path)
    path.write_bytes(b"garbage")
    with pytest.raises(IngestError):
        load_index(path)


words = st.sampled_from("alpha beta gamma delta prisons jails cars state".split())


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(words, min_size=1, max_size=12), min_size=1, max_size=8))
def test_postings_agree_with_tokens(doc_words):
    idx = build_index({f"d{i}": " ".join(ws) for i, ws in enumerate(doc_words)})
    for term, plist in idx.postings.items():
        for d, n in plist:
            assert idx.doc_tokens[d].count(term) == n
    assert sum(idx.collection_counts.values()) == idx.total_tokens


def test_corpus_format_must_match_source(tmp_path):
    (tmp_path / "a.txt").write_text("prison cell")
    assert ingest(tmp_path, fmt="dir").doc_count == 1
    with pytest.raises(IngestError):
        ingest(tmp_path, fmt="trec")
    with pytest.raises(ConfigError):
        ingest(tmp_path, fmt="xml")
