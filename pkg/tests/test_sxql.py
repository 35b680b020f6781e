"""SXQL parsing, printing round trips, macro expansion, validation."""

from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skyql.errors import (
    BadQuantifier,
    IndexOutOfRange,
    SyntaxError_,
    TypeError_,
    UnknownFlagConstant,
    UnknownMacro,
)
from skyql.schema import Schema
from skyql.sxql import (
    Binary,
    Literal,
    expand_macros,
    parse,
    print_query,
    validate,
)


@pytest.fixture(scope="module")
def schema():
    return Schema.default()


def test_minimal_query():
    t = parse("SELECT objID FROM Galaxy")
    assert t.predicate is None
    assert t.source.name == "Galaxy"
    assert len(t.select) == 1


def test_corpus_round_trip(corpus):
    for q in corpus.values():
        t = parse(q.sxql)
        assert parse(print_query(t)) == t, q.id


def test_operator_synonyms(corpus):
    for q in corpus.values():
        text = q.sxql
        swapped = re.sub(r"&&", " AND ", text)
        swapped = re.sub(r"\|\|", " OR ", swapped)
        assert parse(swapped) == parse(text), q.id


def test_keywords_case_insensitive():
    a = parse("select objID from Galaxy where r < 22")
    b = parse("SELECT objID FROM Galaxy WHERE r < 22")
    assert a == b


def test_equality_synonym():
    assert parse("SELECT x FROM C WHERE a = 1") == parse("SELECT x FROM C WHERE a == 1")


def test_between_lowers_to_comparisons():
    t = parse("SELECT x FROM C WHERE a BETWEEN 1 AND 2")
    p = t.predicate
    assert isinstance(p, Binary) and p.op == "&&"
    assert p.left.op == ">=" and p.right.op == "<="


def test_bitwise_binds_tighter_than_comparison():
    t = parse("SELECT x FROM C WHERE flags & 8 == 0")
    p = t.predicate
    assert p.op == "==" and isinstance(p.left, Binary) and p.left.op == "&"


def test_comments_and_hex():
    t = parse("SELECT x FROM C WHERE status & 0x00002000 > 0 // trailing comment")
    assert t.predicate.left.right == Literal(0x2000, hex=True)


def test_syntax_error_positions():
    with pytest.raises(SyntaxError_) as e:
        parse("SELECT objID WHERE x")
    assert e.value.line == 1 and "FROM" in e.value.expected
    with pytest.raises(SyntaxError_):
        parse("SELECT FROM Galaxy")
    with pytest.raises(SyntaxError_):
        parse("")


@settings(max_examples=200, deadline=None)
@given(st.text(min_size=0, max_size=80))
def test_parse_is_total(text):
    try:
        parse(text)
    except SyntaxError_:
        pass  # any byte string either parses or reports a syntax error


def test_parse_total_on_mutations(corpus):
    import random
    rng = random.Random(7)
    for q in list(corpus.values())[:8]:
        chars = list(q.sxql)
        for _ in range(40):
            mutated = chars[:]
            for _ in range(rng.randint(1, 4)):
                i = rng.randrange(len(mutated))
                mutated[i] = rng.choice("()[]{}?&|<>=+-*/.,'x09 ")
            try:
                parse("".join(mutated))
            except SyntaxError_:
                pass


# -- macro expansion ---------------------------------------------------------------


def test_macro_expansion_q1(schema, corpus):
    t = expand_macros(parse(corpus["Q1"].sxql), schema)
    names = [item.expr.dotted() for item in t.select]
    assert names == ["objID", "ra", "dec"]
    # flag constant became a literal with the schema's configured bit
    pred = print_query(t)
    assert str(schema.constants["OBJECT_SATUR"]) in pred


def test_macro_expansion_identity(schema):
    t = parse("SELECT objID FROM Galaxy WHERE r < 22")
    assert expand_macros(t, schema) == t


def test_run_macro_maps_through_field(schema):
    t = expand_macros(parse("SELECT RUN() FROM Galaxy"), schema)
    assert t.select[0].expr.dotted() == "field.run"


def test_unknown_macro(schema):
    with pytest.raises(UnknownMacro):
        expand_macros(parse("SELECT NOPE() FROM Galaxy"), schema)


def test_unknown_flag_constant(schema):
    with pytest.raises(UnknownFlagConstant):
        expand_macros(parse("SELECT objID FROM Galaxy WHERE objFlags & OBJECT_NO_SUCH > 0"),
                      schema)


def test_stokes_remap(schema):
    t = expand_macros(parse("SELECT objID FROM Galaxy WHERE (q[2]*q[2]) + (u[2]*u[2]) > 0.25 && u > 20"),
                      schema)
    text = print_query(t)
    assert "stokesQ[2]" in text and "stokesU[2]" in text
    assert "u > 20" in text  # bare u stays the magnitude


# -- validation ----------------------------------------------------------------------


def _validate(schema, text):
    return validate(expand_macros(parse(text), schema), schema)


def test_validate_q3_types(schema, corpus):
    b = _validate(schema, corpus["Q3"].sxql)
    assert b.cls.name == "Galaxy"
    assert b.predicate._etype == "bool"
    red = b.predicate.right.left  # reddening[2] in the second conjunct
    assert red.binding is not None and red.binding.value_type == "float32"


def test_validate_bitwise_on_float(schema):
    with pytest.raises(TypeError_):
        _validate(schema, "SELECT objID FROM Galaxy WHERE (objFlags & 1.5) > 0")


def test_validate_index_bounds(schema):
    with pytest.raises(IndexOutOfRange):
        _validate(schema, "SELECT objID FROM Galaxy WHERE petroMag[7] > 0")


def test_validate_quantifier_rules(schema):
    with pytest.raises(BadQuantifier):
        _validate(schema, "SELECT objID FROM Galaxy WHERE parent{?}.objType == 3")
    with pytest.raises(BadQuantifier):
        _validate(schema, "SELECT objID FROM Galaxy WHERE child.objType == 3")
    with pytest.raises(BadQuantifier):
        _validate(schema, "SELECT parent.child{?}.objType FROM Galaxy")


def test_validate_prox_only_in_predicates(schema):
    with pytest.raises(TypeError_):
        _validate(schema, "SELECT PROX(J2000, 1, 1, 1) FROM Galaxy")


def test_validate_unknown_member(schema):
    from skyql.errors import UnknownMember
    with pytest.raises(UnknownMember):
        _validate(schema, "SELECT nonesuch FROM Galaxy")


def test_select_names_unique(schema):
    b = _validate(schema, "SELECT r, r, r FROM Galaxy")
    assert [s.name for s in b.select] == ["r", "r_2", "r_3"]


def test_whole_array_select(schema):
    b = _validate(schema, "SELECT psfMag FROM Galaxy")
    assert b.select[0].array_length == 5
    with pytest.raises(TypeError_):
        _validate(schema, "SELECT objID FROM Galaxy WHERE psfMag > 20")
