import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ucpo.rdf import RDF_TYPE, UCPO, XSD, Graph, Iri, Literal, PrefixMap, Triple, default_prefixes
from ucpo.schema import SCHEMA_FILE, SEED_FILE, data_path
from ucpo.turtle import TurtleError, parse, parse_file, serialize

from generators import prefixes, random_graph

HEAD = "@prefix ucpo: <http://vivocaz.fr/ucpo/ns#> .\n"


def test_a_keyword_expands_to_rdf_type():
    _, g = parse(HEAD + "ucpo:henri a ucpo:User .")
    assert g.match() == [Triple(UCPO.henri, RDF_TYPE, UCPO.User)]


def test_object_list():
    _, g = parse(HEAD + "ucpo:henri ucpo:hasUserProfile ucpo:henriPro , ucpo:henriFam .")
    assert len(g) == 2
    assert {t.object for t in g} == {UCPO.henriPro, UCPO.henriFam}
    assert {(t.subject, t.predicate) for t in g} == {(UCPO.henri, UCPO.hasUserProfile)}


def test_predicate_list_literals_and_comments():
    doc = HEAD + """@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
# a comment
ucpo:x ucpo:n 42 ;   # trailing
    ucpo:d -1.50 ;
    ucpo:s "hi"@fr-CA , "typed"^^xsd:date , "plain" ;
    ucpo:i <http://elsewhere.example/y> .
"""
    pm, g = parse(doc)
    assert pm.namespace("xsd").startswith("http://www.w3.org")
    objs = {t.object for t in g}
    assert Literal("42", XSD.integer) in objs
    assert Literal("-1.50", XSD.decimal) in objs
    assert Literal("hi", lang="fr-CA") in objs
    assert Literal("typed", XSD.date) in objs
    assert Literal("plain") in objs
    assert Iri("http://elsewhere.example/y") in objs


def test_escapes_decoded():
    _, g = parse(HEAD + r'ucpo:x ucpo:s "a\tb\n\"q\" é \U0001F697" .')
    assert g.match()[0].object.lexical == 'a\tb\n"q" é \U0001F697'


def test_prefix_directive_recorded_and_prebound():
    pm, g = parse("ex:a ex:b ex:c .", prefixes=prefixes())
    assert len(g) == 1 and "ex" in pm


def test_bom_tolerated():
    _, g = parse("﻿" + HEAD + "ucpo:a a ucpo:B .")
    assert len(g) == 1


def _diag(text):
    with pytest.raises(TurtleError) as info:
        parse(text)
    assert len(info.value.diagnostics) == 1
    return info.value.diagnostics[0]


@pytest.mark.parametrize("text,kind,line,col", [
    ("ex:a ex:b ex:c .", "unbound-prefix", 1, 1),
    (HEAD + "ucpo:a ucpo:b zz:c .", "unbound-prefix", 2, 15),
    (HEAD + 'ucpo:a ucpo:b "open .', "syntax", 2, 15),
    (HEAD + "ucpo:a ucpo:b <http://x .", "syntax", 2, 24),
    (HEAD + "ucpo:a ucpo:b <http://x", "syntax", 2, 15),
    (HEAD + "ucpo:a ucpo:b ucpo:c", "syntax", 2, 21),
    (HEAD + "ucpo:a ucpo:b ucpo:c\nucpo:d ucpo:e ucpo:f .", "syntax", 3, 1),
    (HEAD + 'ucpo:a ucpo:b "x"^^<http://www.w3.org/2001/XMLSchema#integer> .', "bad-literal", 2, 15),
    (HEAD + "ucpo:a ucpo:b 1e5 .", "bad-literal", 2, 15),
])
def test_diagnostics(text, kind, line, col):
    d = _diag(text)
    assert (d.kind, d.line, d.column) == (kind, line, col)
    lines = text.lstrip("﻿").split("\n")
    assert 1 <= d.line <= len(lines)
    assert 1 <= d.column <= len(lines[d.line - 1]) + 1


@pytest.mark.parametrize("construct", [
    "ucpo:a ucpo:b ( ucpo:c ) .",
    "ucpo:a ucpo:b [ ucpo:c ucpo:d ] .",
    'ucpo:a ucpo:b """long""" .',
    "ucpo:a ucpo:b 'single' .",
    "ucpo:a ucpo:b true .",
    "@base <http://x/> .",
    '"lit" ucpo:b ucpo:c .',
])
def test_rejected_constructs(construct):
    with pytest.raises(TurtleError):
        parse(HEAD + construct)


def test_first_error_wins():
    d = _diag(HEAD + "ucpo:a ucpo:b zz:c .\nucpo:a ucpo:b \"open")
    assert d.line == 2 and d.kind == "unbound-prefix"


def test_parse_file_invalid_utf8(tmp_path):
    p = tmp_path / "bad.ttl"
    p.write_bytes(HEAD.encode() + b"ucpo:a ucpo:b \"\xff\" .")
    with pytest.raises(TurtleError) as info:
        parse_file(p)
    d = info.value.diagnostics[0]
    assert d.line == 2 and str(p) in str(info.value)


def test_empty_graph_serializes_to_prefixes_only():
    pm = default_prefixes()
    text = serialize(Graph(), pm)
    assert text.splitlines() == [f"@prefix {k}: <{v}> ." for k, v in sorted(pm.items())]


def test_single_triple_one_statement_line():
    pm = default_prefixes()
    text = serialize(Graph([Triple(UCPO.henri, RDF_TYPE, UCPO.User)]), pm)
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("@prefix")]
    assert body == ["ucpo:henri a ucpo:User ."]


def test_prefixes_sorted_by_label():
    pm = PrefixMap()
    pm.bind("zed", "http://z.example/")
    pm.bind("alpha", "http://a.example/")
    lines = serialize(Graph(), pm).splitlines()
    assert lines[0].startswith("@prefix alpha:") and lines[1].startswith("@prefix zed:")


@pytest.mark.parametrize("name", [SCHEMA_FILE, SEED_FILE])
def test_shipped_files_round_trip(name):
    pm, g = parse_file(data_path(name))
    text = serialize(g, pm)
    pm2, g2 = parse(text)
    assert g2 == g
    assert serialize(g2, pm2) == text


def test_round_trip_seeded_graphs():
    rng = random.Random(2024)
    pm = prefixes()
    for _ in range(300):
        g = random_graph(rng)
        text = serialize(g, pm)
        _, back = parse(text)
        assert back == g
        assert serialize(back, pm) == text


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32))
def test_round_trip_hypothesis(seed):
    g = random_graph(random.Random(seed), max_triples=25)
    text = serialize(g, prefixes())
    assert parse(text)[1] == g


@settings(max_examples=150, deadline=None)
@given(st.text(max_size=12), st.sampled_from(["en", "fr", None]))
def test_any_string_literal_survives(s, lang):
    lit = Literal(s, lang=lang) if lang else Literal(s)
    g = Graph([Triple(UCPO.x, UCPO.p, lit)])
    _, back = parse(serialize(g, default_prefixes()))
    assert back == g
