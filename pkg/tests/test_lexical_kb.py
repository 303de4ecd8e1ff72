import pytest

from cogqe.lexical_kb import KBError, base_forms, disambiguate, load_kb, parse_kb, part_whole_axioms

from conftest import MINI


def test_lookup_and_morphy(mini_kb):
    assert [s.id for s in mini_kb.lookup_word("prisons", "noun")] == ["prison.n.01"]
    assert [s.id for s in mini_kb.lookup_word("coping", "verb")] == ["cope.v.01"]
    assert "cope" in base_forms("coping", "verb")
    assert [s.id for s in mini_kb.lookup_word("car")] == ["car.n.01", "car.n.02"]


def test_synonyms_exclude_the_word_itself(mini_kb):
    syns = mini_kb.related(mini_kb["cope.v.01"], "synonym", lemma="cope")
    assert "cope" not in syns
    assert {"grapple", "deal", "contend", "make out"} <= set(syns)


def test_hypernyms_depth(mini_kb):
    car = mini_kb["car.n.01"]
    d1 = {s.id for s in mini_kb.related_synsets(car, "hypernym", 1)}
    d2 = {s.id for s in mini_kb.related_synsets(car, "hypernym", 2)}
    assert d1 == {"motor_vehicle.n.01"}
    assert d2 == {"motor_vehicle.n.01", "wheeled_vehicle.n.01"}


def test_coordinates_share_a_direct_hypernym(mini_kb):
    coords = {s.id for s in mini_kb.related_synsets(mini_kb["car.n.01"], "coordinate", 1)}
    assert coords == {"truck.n.01", "bus.n.01"}


def test_path_similarity(mini_kb):
    car, truck = mini_kb["car.n.01"], mini_kb["truck.n.01"]
    assert mini_kb.path_similarity(car, car) == 1.0
    assert mini_kb.path_similarity(car, truck) == pytest.approx(1 / 3)
    assert mini_kb.path_similarity(car, mini_kb["cope.v.01"]) == 0.0


def test_disambiguation_prefers_context_sense(mini_kb):
    a = disambiguate(mini_kb, "car", "noun", [("truck", "noun")])
    assert a.synset_id == "car.n.01"
    b = disambiguate(mini_kb, "car", "noun", [("bicycle", "noun")])
    # railcar and bicycle are both wheeled vehicles: one edge closer than the motor car
    assert b.synset_id == "car.n.02"
    assert not disambiguate(mini_kb, "zzz", None, []).resolved


def test_part_whole_axiom(mini_kb):
    facts = part_whole_axioms(mini_kb, [("car", "noun"), ("engine failure", "noun")])
    assert ("holonym", "car", "engine") in facts


@pytest.mark.parametrize("text, msg", [
    ("S\tx\tnounish\ta\t", "unknown POS"),
    ("S\tx\tnoun\ta\t\nE\tx\tcousin\tx", "unknown relation"),
    ("S\tx\tnoun\ta\t\nE\tx\thypernym\ty", "unknown synset"),
    ("S\tx\tnoun\ta\t\nS\tx\tnoun\tb\t", "duplicate"),
    ("Q\tjunk", "malformed"),
])
def test_parse_errors_carry_line_numbers(text, msg):
    with pytest.raises(KBError, match=msg):
        parse_kb(text, "kb")


def test_missing_inverse_edge_rejected():
    with pytest.raises(KBError):
        parse_kb("S\ta\tnoun\ta\t\nS\tb\tnoun\tb\t\nE\ta\thypernym\tb\n")


def test_dump_round_trip():
    kb = load_kb(MINI / "kb.txt")
    again = parse_kb(kb.dumps())
    assert again.dumps() == kb.dumps()
    assert again["prison.n.01"].lemmas == ("prison", "prison house")
