import dataclasses

import pytest

from ucpo.cq import (
    EXACT,
    NON_EMPTY,
    QUESTIONS,
    format_report,
    load_cases,
    query_prefixes,
    run_all,
    run_case,
)
from ucpo.rdf import UCPO, VO, Graph, Triple
from ucpo.sparql import execute, parse_query

from oracles import sparql_oracle


def test_questions_verbatim():
    assert QUESTIONS["CQ1"] == "What is demographic information of the user ?"
    assert QUESTIONS["CQ8"] == "What is the user's preferred vehicle transmission type"
    assert list(QUESTIONS) == [f"CQ{i}" for i in range(1, 9)]


def test_cases_loaded_with_goldens():
    cases = load_cases()
    assert [c.id for c in cases] == list(QUESTIONS)
    assert all(c.expectation == EXACT and c.expected_tsv for c in cases)


def test_all_pass_on_seed(closure):
    results = run_all(closure)
    assert [r.passed for r in results] == [True] * 8
    assert all(r.row_count > 0 for r in results)
    assert format_report(results).endswith("8/8 passed\n")


def test_goldens_agree_with_oracle(closure):
    for case in load_cases():
        q = parse_query(case.query_text, query_prefixes())
        rows = sparql_oracle(q, closure)
        assert len(rows) == case.expected_tsv.count("\n") - 1, case.id
        assert execute(q, closure).rows == rows


def test_all_fail_on_empty_graph():
    results = run_all(Graph())
    assert not any(r.passed for r in results)
    assert {r.diagnostic for r in results} == {"no rows"}
    assert format_report(results).endswith("0/8 passed\n")


def test_removed_triple_flips_cq7(closure):
    g = closure.copy()
    assert g.remove(Triple(VO.toyotaRav4Hybrid, VO.hasUseCase, VO.leisure))
    results = {r.id: r for r in run_all(g)}
    assert not results["CQ7"].passed
    assert results["CQ7"].diagnostic == "rows differ from golden result"
    assert all(r.passed for cid, r in results.items() if cid != "CQ7")


def test_added_fact_flips_cq8(closure):
    g = closure.copy()
    g.insert(Triple(UCPO.pierreProfileTransmission, UCPO.hasPreferredTransmission, VO.manual))
    assert not {r.id: r for r in run_all(g)}["CQ8"].passed


def test_parse_failure_is_a_fail(closure):
    case = dataclasses.replace(load_cases()[0], query_text="SELECT ?x WHERE {")
    r = run_case(case, closure)
    assert not r.passed and "syntax" in r.diagnostic


def test_non_empty_expectation(closure):
    case = dataclasses.replace(load_cases()[1], expectation=NON_EMPTY, expected_tsv=None)
    assert run_case(case, closure).passed
    assert not run_case(case, Graph()).passed


@pytest.mark.parametrize("cid", list(QUESTIONS))
def test_query_files_use_supported_subset(cid):
    case = next(c for c in load_cases() if c.id == cid)
    parse_query(case.query_text, query_prefixes())
