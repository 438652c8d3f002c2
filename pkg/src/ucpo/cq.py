"""Competency-question harness: eight informal questions, each paired with a
query file and a frozen expected result."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .diagnostics import ParseError
from .rdf import UCPO, Graph, PrefixMap, default_prefixes
from .schema import data_path
from .sparql import execute, parse_query

QUESTIONS = {
    "CQ1": "What is demographic information of the user ?",
    "CQ2": "What is the user's preferred vehicle type?",
    "CQ3": "What is the user's budget for a vehicle purchase?",
    "CQ4": "Which particular vehicle models are favored by the user?",
    "CQ5": "What is the user's driving environment?",
    "CQ6": "What is the user's preferred vehicle brand?",
    "CQ7": "What are the primary use cases for a particular vehicle model?",
    "CQ8": "What is the user's preferred vehicle transmission type",
}

NON_EMPTY = "nonEmpty"
EXACT = "exactRows"


@dataclass(frozen=True)
class CompetencyCase:
    id: str
    question: str
    query_text: str
    expectation: str
    expected_tsv: Optional[str] = None


@dataclass(frozen=True)
class CaseResult:
    id: str
    passed: bool
    row_count: int
    diagnostic: str = ""


def query_prefixes(base: Optional[PrefixMap] = None) -> PrefixMap:
    """Prefixes pre-bound for every query: ``base`` (default: the standard
    ucpo/up/vo set) plus ``upo`` as an alias of the ucpo namespace."""
    pm = (base or default_prefixes()).copy()
    pm.bind("upo", str(UCPO))
    return pm


def load_cases() -> list[CompetencyCase]:
    root = data_path("cq")
    cases = []
    for cid, question in QUESTIONS.items():
        query = (root / f"{cid}.rq").read_text(encoding="utf-8")
        golden = root / f"{cid}.tsv"
        if golden.is_file():
            cases.append(CompetencyCase(cid, question, query, EXACT,
                                        golden.read_text(encoding="utf-8")))
        else:
            cases.append(CompetencyCase(cid, question, query, NON_EMPTY))
    return cases


def run_case(case: CompetencyCase, closure: Graph,
             prefixes: Optional[PrefixMap] = None) -> CaseResult:
    try:
        query = parse_query(case.query_text, query_prefixes(prefixes))
    except ParseError as err:
        return CaseResult(case.id, False, 0, str(err))
    table = execute(query, closure)
    n = len(table)
    if case.expectation == NON_EMPTY:
        return CaseResult(case.id, n > 0, n, "" if n else "no rows")
    if n == 0:
        return CaseResult(case.id, False, 0, "no rows")
    if table.to_tsv() != case.expected_tsv:
        return CaseResult(case.id, False, n, "rows differ from golden result")
    return CaseResult(case.id, True, n)


def run_all(closure: Graph, cases: Optional[Sequence[CompetencyCase]] = None,
            prefixes: Optional[PrefixMap] = None) -> list[CaseResult]:
    if cases is None:
        cases = load_cases()
    return [run_case(c, closure, prefixes) for c in cases]


def format_report(results: Sequence[CaseResult]) -> str:
    lines = [f"{'case':<5} {'status':<6} {'rows':>5}  detail"]
    for r in results:
        lines.append(f"{r.id:<5} {'PASS' if r.passed else 'FAIL':<6} {r.row_count:>5}  {r.diagnostic}".rstrip())
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} passed")
    return "\n".join(lines) + "\n"
