"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
"acceptance criteria" section of the terminal summary.
"""

import io
import random
import time
from fractions import Fraction

from ucpo import cli
from ucpo.cq import query_prefixes, run_all
from ucpo.metrics import BaseMetrics, classify_expressivity, compute_base, compute_schema
from ucpo.rdf import RDF_TYPE, RDFS, UCPO, UP, Literal, Triple
from ucpo.reasoner import materialize
from ucpo.recommender import ActiveProfile, explain, filter_hard, load_config, recommend, score
from ucpo.schema import SEED_FILE, data_path, validate
from ucpo.sparql import execute, parse_query
from ucpo.turtle import parse, serialize

from generators import (
    prefixes,
    query_graph,
    random_config,
    random_context,
    random_dag,
    random_graph,
    random_listing,
    random_profile,
    random_query,
)
from oracles import closure_types, sparql_oracle

CASES = 1000


def test_criterion_1_schema_metrics(criterion):
    counts = BaseMetrics(class_count=38, data_property_count=16, subclass_count=22,
                         object_property_count=27)
    printed = {"attribute_richness": Fraction(421053, 10**6),
               "inheritance_richness": Fraction(578947, 10**6),
               "relationship_richness": Fraction(551020, 10**6),
               "class_relation_ratio": Fraction(775510, 10**6)}
    runs = 2000
    start = time.perf_counter()
    for _ in range(runs):
        values = compute_schema(counts).rounded()
    per_call_ms = (time.perf_counter() - start) * 1000 / runs
    errors = {k: abs(Fraction(values[k]) - v) for k, v in printed.items()}
    ok = all(e <= Fraction(5, 10**7) for e in errors.values()) and per_call_ms < 1
    shown = ", ".join(f"{k}={values[k]}" for k in printed)
    assert criterion(1, ok, f"{shown}; {per_call_ms:.4f} ms per call")


def test_criterion_2_base_counts(criterion, shipped):
    b = compute_base(shipped)
    expected = dict(class_count=38, object_property_count=27, data_property_count=16,
                    properties_count=43, individual_count=159, subclass_count=22,
                    domain_axiom_count=28, range_axiom_count=33)
    wrong = {k: getattr(b, k) for k, v in expected.items() if getattr(b, k) != v}
    ratio = Fraction(b.total_axiom_count, b.class_count)
    label = classify_expressivity(shipped).label
    ok = not wrong and abs(ratio - Fraction("30.552632")) <= Fraction(1, 2) and label == "ALH(D)"
    detail = (f"counts {'match' if not wrong else f'differ {wrong}'}; "
              f"axiom/class {float(ratio):.6f} ({b.total_axiom_count}/{b.class_count}); {label}")
    assert criterion(2, ok, detail)


def test_criterion_3_listing(criterion, closure):
    text = data_path("listing1.rq").read_text(encoding="utf-8")
    start = time.perf_counter()
    query = parse_query(text, query_prefixes())
    table = execute(query, closure)
    elapsed_ms = (time.perf_counter() - start) * 1000
    users = [row[0].value for row in table.rows]
    ok = (table.header == ["user", "brand"] and 0 < len(table) <= 10
          and users == sorted(users) and table.rows == sparql_oracle(query, closure)
          and elapsed_ms < 100)
    assert criterion(3, ok, f"{len(table)} rows, oracle-equal, parse+execute {elapsed_ms:.1f} ms")


def test_criterion_4_scenarios(criterion, closure):
    cfg = load_config()
    scenarios = [
        ("louis", "louisProfile", 3, {"Peugeot 206", "Peugeot 207", "Peugeot 208"}),
        ("pierre", "pierreProfile", 3, {"Toyota RAV4 Hybrid", "Honda CR-V Hybrid", "Lexus UX Hybrid"}),
        ("henri", "henriPro", 2, {"Renault Megane", "Renault Talisman"}),
        ("henri", "henriFamily", 2, {"Renault Koleos", "Renault Scenic"}),
    ]
    outcomes = []
    for user, profile, k, want in scenarios:
        got = {r.listing.model_name for r in recommend(closure, UCPO[user], UCPO[profile], k, cfg)}
        outcomes.append((profile, got == want, got))
    ok = all(hit for _, hit, _ in outcomes)
    detail = "; ".join(f"{p} {'ok' if hit else sorted(got)}" for p, hit, got in outcomes)
    assert criterion(4, ok, detail)


# -- criterion 5 ------------------------------------------------------------------

def _turtle_round_trip(rng):
    pm = prefixes()
    for _ in range(CASES):
        g = random_graph(rng)
        if parse(serialize(g, pm))[1] != g:
            return False
    return True


def _reasoner_dag(rng):
    for _ in range(CASES):
        g, edges, assertions = random_dag(rng, max_classes=100, max_instances=300)
        c = materialize(g).graph
        types, sub = closure_types(edges, assertions)
        if {(t.subject, t.object) for t in c.match(p=RDF_TYPE)} != types:
            return False
        if {(t.subject, t.object) for t in c.match(p=RDFS.subClassOf)} != sub:
            return False
    return True


def _sparql_oracle(rng):
    pm = prefixes()
    for _ in range(CASES):
        g = query_graph(rng, max_triples=200)
        q = parse_query(random_query(rng, max_patterns=4), pm)
        if execute(q, g).rows != sparql_oracle(q, g):
            return False
    return True


def _budget_monotone(rng):
    for _ in range(CASES):
        catalog = [random_listing(rng, i) for i in range(12)]
        p = random_profile(rng)
        budget = p.preferences.get("maxBudget", Fraction(rng.randint(0, 40000)))
        tight = ActiveProfile(p.user, p.profile, {**p.preferences, "maxBudget": budget})
        loose = ActiveProfile(p.user, p.profile,
                              {**p.preferences, "maxBudget": budget + rng.randint(0, 20000)})
        if not set(filter_hard(catalog, tight)) <= set(filter_hard(catalog, loose)):
            return False
    return True


def _score_bounds(rng):
    for i in range(CASES):
        cfg = random_config(rng)
        listing, p, c = random_listing(rng, i), random_profile(rng), random_context(rng)
        s = score(listing, p, c, cfg)
        if not (0 <= s <= 1) or sum(x for _, x in explain(listing, p, c, cfg)) != s:
            return False
    return True


def test_criterion_5_property_suites(criterion):
    suites = [("turtle round-trip", _turtle_round_trip), ("reasoner DAG", _reasoner_dag),
              ("sparql oracle", _sparql_oracle), ("budget monotonicity", _budget_monotone),
              ("score bounds", _score_bounds)]
    total = 0.0
    parts = []
    ok = True
    for seed, (name, suite) in enumerate(suites):
        start = time.perf_counter()
        passed = suite(random.Random(seed))
        elapsed = time.perf_counter() - start
        total += elapsed
        ok &= passed
        parts.append(f"{name} {'ok' if passed else 'FAILED'} {elapsed:.1f}s")
    ok &= total < 60
    assert criterion(5, ok, f"{CASES} cases each; " + ", ".join(parts) + f"; total {total:.1f}s")


def test_criterion_6_validation(criterion, shipped, onto, closure):
    clean = validate(shipped, onto, closure)
    faults = {
        "unknown-property": Triple(UCPO.henri, UCPO.hasPet, UCPO.louis),
        "domain-mismatch": Triple(UCPO.henri, UCPO.hasVehiclePreference, UCPO.henriProBudget),
        "range-mismatch": Triple(UCPO.henriPro, UCPO.hasVehiclePreference, UCPO.louis),
        "datatype-mismatch": Triple(UCPO.henriPersonal, UP.age, Literal("forty-two")),
    }
    seen = {}
    for kind, triple in faults.items():
        g = shipped.copy()
        g.insert(triple)
        seen[kind] = [v.kind for v in validate(g, onto, materialize(g).graph)]
    ok = clean == [] and all(seen[k] == [k] for k in faults)
    detail = f"seed {len(clean)} violations; " + ", ".join(f"{k} -> {seen[k]}" for k in faults)
    assert criterion(6, ok, detail)


def test_criterion_7_cq_suite(criterion, closure, tmp_path):
    results = run_all(closure)
    passed = sum(r.passed for r in results)
    clean_code = cli.main(["cq"], out=io.StringIO(), err=io.StringIO())
    seed = data_path(SEED_FILE).read_text(encoding="utf-8")
    broken = tmp_path / "seed-regressed.ttl"
    broken.write_text(seed.replace("vo:hasUseCase vo:familyTravel, vo:leisure ;",
                                   "vo:hasUseCase vo:familyTravel ;", 1), encoding="utf-8")
    regressed_code = cli.main(["--data", str(broken), "cq"], out=io.StringIO(), err=io.StringIO())
    ok = passed == 8 and clean_code == 0 and regressed_code == 1 and broken.read_text() != seed
    assert criterion(7, ok, f"{passed}/8 pass; exit {clean_code} clean, {regressed_code} after regression")


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
