import pytest

import chase_sentinel as cs
from chase_sentinel.dlgp import ParseError, parse, serialize


def test_parse_rule_with_existential():
    doc = parse("[r1] typeA(X,U), typeA(U,X) :- typeB(X,Y).")
    assert not doc.facts
    (rule,) = doc.rules
    assert rule.id == "r1"
    assert sorted(rule.existentials) == ["U_1"]
    assert [a.pred for a in rule.body] == ["typeB"]
    assert [a.pred for a in rule.head] == ["typeA", "typeA"]


def test_parse_ground_fact():
    doc = parse("typeB(t,r).")
    assert doc.rules == ()
    (fact,) = doc.facts
    assert str(fact) == "typeB(t,r)"


def test_parse_empty_document():
    doc = parse("")
    assert doc.facts == () and doc.rules == ()


def test_parse_multi_atom_fact_statement():
    doc = parse("p(a), q(b).")
    assert [str(f) for f in doc.facts] == ["p(a)", "q(b)"]


def test_comments_and_whitespace():
    doc = parse("% intro\n p(a). % trailing\n% done\n")
    assert len(doc.facts) == 1


def test_variable_in_fact_is_an_error():
    with pytest.raises(ParseError) as e:
        parse("p(a).\nq(X).")
    assert e.value.line == 2


def test_arity_conflict_reports_line():
    with pytest.raises(ParseError) as e:
        parse("p(a).\np(a,b).")
    assert e.value.line == 2


def test_unterminated_statement():
    with pytest.raises(ParseError):
        parse("p(a)")
    with pytest.raises(ParseError):
        parse("[r1] q(X) :- p(X)")


def test_duplicate_labels_rejected():
    with pytest.raises(ParseError):
        parse("[r1] q(X) :- p(X).\n[r1] p(X) :- q(X).")


def test_unlabelled_rules_get_ordinal_ids():
    doc = parse("q(X) :- p(X).\ns(X) :- q(X).")
    assert [r.id for r in doc.rules] == ["r1", "r2"]


def test_rules_standardized_apart_by_ordinal():
    doc = parse("[a] q(X) :- p(X).\n[b] s(X) :- q(X).")
    ra, rb = doc.rules
    assert ra.body_vars == ("X_1",)
    assert rb.body_vars == ("X_2",)
    doc.rule_set()  # no standardization complaint


def test_round_trip_identity():
    text = """
typeB(t,r).
p(a), q(b).
[r1] typeA(X,U), typeA(U,X) :- typeB(X,Y).
[r2] typeB(Z,V) :- typeB(X,Y), typeA(X,Z), typeA(Z,X).
q2(X) :- p(X).
"""
    doc = parse(text)
    rendered = serialize(doc)
    again = parse(rendered)
    assert again.facts == doc.facts
    assert again.rules == doc.rules
    assert serialize(again) == rendered


def test_serialize_empty_and_single_fact():
    assert serialize(parse("")) == ""
    assert serialize(parse("typeB(t,r).")) == "typeB(t,r).\n"


def test_database_and_rule_set_views():
    doc = parse("p(a).\n[r] q(X) :- p(X).")
    db = doc.database()
    assert len(db) == 1 and db.first_derived_at(doc.facts[0]) == 0
    rs = doc.rule_set()
    assert rs.schema == {"q": 1, "p": 1}
