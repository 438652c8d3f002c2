"""A small SPARQL subset: PREFIX, SELECT [DISTINCT], basic graph patterns,
FILTER comparisons, ORDER BY and LIMIT.

Evaluation is a nested-loop join with binding substitution. Results are
fully deterministic: without ORDER BY, rows follow the canonical order of
their complete binding tuple; ORDER BY sorts on top of that order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .diagnostics import ParseDiagnostic, ParseError, position
from .rdf import (
    RDF_LANGSTRING,
    RDF_TYPE,
    XSD,
    XSD_STRING,
    BlankNode,
    Graph,
    Iri,
    Literal,
    PrefixError,
    PrefixMap,
    StructuralError,
    Term,
    term_key,
)
from .turtle import format_term

_VAR = re.compile(r"[?$]([A-Za-z0-9_]+)")
_PNAME = re.compile(r"([A-Za-z][A-Za-z0-9_\-]*)?:([A-Za-z0-9_\-]*)")
_PNAME_NS = re.compile(r"([A-Za-z][A-Za-z0-9_\-]*)?:")
_KEYWORD = re.compile(r"[A-Za-z]+")
_NUMBER = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?")
_LANG = re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)")
_OPERATORS = ("<=", ">=", "!=", "<", ">", "=")
_FLIPPED = {"<": ">", ">": "<", "<=": ">=", ">=": "<=", "=": "=", "!=": "!="}
_UNSUPPORTED = {
    "OPTIONAL", "UNION", "MINUS", "GRAPH", "BIND", "VALUES", "SERVICE",
    "GROUP", "HAVING", "OFFSET", "CONSTRUCT", "ASK", "DESCRIBE", "BASE",
    "FROM", "INSERT", "DELETE", "COUNT", "SUM", "AVG", "MIN", "MAX",
}


class QueryError(ParseError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


PatternTerm = Union[Term, Variable]


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))

    def variables(self) -> list[Variable]:
        return [x for x in self if isinstance(x, Variable)]


@dataclass(frozen=True)
class Comparison:
    var: Variable
    op: str
    value: Term


@dataclass
class Query:
    prefixes: PrefixMap
    distinct: bool
    projection: Optional[list[Variable]]
    patterns: list[TriplePattern]
    filters: list[Comparison] = field(default_factory=list)
    order_by: list[Variable] = field(default_factory=list)
    limit: Optional[int] = None

    @property
    def variables(self) -> list[Variable]:
        """Pattern variables in order of first appearance."""
        seen: dict[Variable, None] = {}
        for pat in self.patterns:
            for v in pat.variables():
                seen.setdefault(v, None)
        return list(seen)

    @property
    def header(self) -> list[Variable]:
        return list(self.projection) if self.projection is not None else self.variables


@dataclass
class ResultTable:
    header: list[str]
    rows: list[tuple[Optional[Term], ...]]

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[Optional[Term]]:
        i = self.header.index(name)
        return [row[i] for row in self.rows]

    def to_tsv(self) -> str:
        lines = ["\t".join(f"?{h}" for h in self.header)]
        for row in self.rows:
            lines.append("\t".join("" if c is None else format_term(c, PrefixMap()) for c in row))
        return "\n".join(lines) + "\n"


class _Abort(Exception):
    def __init__(self, offset: int, message: str, kind: str = "syntax"):
        self.offset, self.message, self.kind = offset, message, kind


class _QueryParser:
    def __init__(self, text: str, prefixes: Optional[PrefixMap]):
        self.text = text
        self.pos = 0
        self.prefixes = prefixes.copy() if prefixes is not None else PrefixMap()

    def fail(self, message, kind="syntax", offset=None):
        raise _Abort(self.pos if offset is None else offset, message, kind)

    def skip_ws(self) -> None:
        text, n = self.text, len(self.text)
        while self.pos < n:
            c = text[self.pos]
            if c.isspace():
                self.pos += 1
            elif c == "#":
                end = text.find("\n", self.pos)
                self.pos = n if end < 0 else end + 1
            else:
                break

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos:self.pos + 1]

    def keyword(self) -> Optional[str]:
        """Upper-cased bare word at the cursor, without consuming it."""
        self.skip_ws()
        m = _KEYWORD.match(self.text, self.pos)
        if not m or self.text[m.end():m.end() + 1] == ":":
            return None
        return m.group(0).upper()

    def accept(self, word: str) -> bool:
        if self.keyword() == word:
            self.pos += len(word)
            return True
        return False

    def expect_keyword(self, word: str) -> None:
        if not self.accept(word):
            self.fail(f"expected {word}")

    def check_unsupported(self) -> None:
        kw = self.keyword()
        if kw in _UNSUPPORTED:
            self.fail(f"unsupported construct {kw}", "unsupported")

    def parse(self) -> Query:
        while True:
            self.check_unsupported()
            if not self.accept("PREFIX"):
                break
            self.skip_ws()
            m = _PNAME_NS.match(self.text, self.pos)
            if not m:
                self.fail("expected prefix label")
            self.pos = m.end()
            if self.peek() != "<":
                self.fail("expected namespace IRI")
            self.prefixes.bind(m.group(1) or "", self.iriref())
        self.check_unsupported()
        self.expect_keyword("SELECT")
        distinct = self.accept("DISTINCT")
        if not distinct and self.accept("REDUCED"):
            self.fail("unsupported construct REDUCED", "unsupported")
        projection: Optional[list[Variable]] = []
        projected_at: list[tuple[Variable, int]] = []
        if self.peek() == "*":
            self.pos += 1
            projection = None
        else:
            while self.peek() in ("?", "$"):
                start = self.pos
                v = self.variable()
                projection.append(v)
                projected_at.append((v, start))
            if self.peek() == "(":
                self.fail("unsupported construct: projection expressions", "unsupported")
            if not projection:
                self.fail("expected projection variables or '*'")
        self.check_unsupported()
        self.accept("WHERE")
        if self.peek() != "{":
            self.fail("expected '{'")
        self.pos += 1
        patterns, filters = self.group()
        order_by: list[tuple[Variable, int]] = []
        self.check_unsupported()
        if self.accept("ORDER"):
            self.expect_keyword("BY")
            while True:
                if self.keyword() in ("ASC", "DESC"):
                    self.fail("unsupported construct: ORDER BY modifiers", "unsupported")
                if self.peek() not in ("?", "$"):
                    break
                start = self.pos
                order_by.append((self.variable(), start))
            if not order_by:
                self.fail("expected ORDER BY variable")
        limit = None
        self.check_unsupported()
        if self.accept("LIMIT"):
            self.skip_ws()
            m = re.compile(r"\d+").match(self.text, self.pos)
            if not m:
                self.fail("expected integer after LIMIT")
            limit = int(m.group(0))
            if limit < 1:
                self.fail("LIMIT must be at least 1", offset=self.pos)
            self.pos = m.end()
        self.check_unsupported()
        if self.peek():
            self.fail(f"unexpected {self.peek()!r} after query")
        bound = {v for pat in patterns for v in pat.variables()}
        for v, at in projected_at + order_by:
            if v not in bound:
                self.fail(f"variable {v} is not used in the WHERE clause",
                          "undefined-variable", offset=at)
        return Query(self.prefixes, distinct, projection, patterns, filters,
                     [v for v, _ in order_by], limit)

    def group(self):
        patterns: list[TriplePattern] = []
        filters: list[Comparison] = []
        while True:
            self.check_unsupported()
            c = self.peek()
            if c == "}":
                self.pos += 1
                return patterns, filters
            if not c:
                self.fail("unterminated group, expected '}'")
            if c == "{":
                self.fail("unsupported construct: nested group", "unsupported")
            if c == ".":
                self.pos += 1
                continue
            if self.accept("FILTER"):
                filters.append(self.filter())
                continue
            subject = self.term(position="subject")
            self.property_list(subject, patterns)
            self.check_unsupported()
            if self.peek() not in (".", "}") and self.keyword() != "FILTER":
                self.fail("expected '.' or '}' after triple pattern")

    def property_list(self, subject, patterns) -> None:
        while True:
            pred = self.term(position="predicate")
            if self.peek() in ("/", "|", "*", "+") or self.text.startswith("? ", self.pos):
                self.fail("unsupported construct: property path", "unsupported")
            while True:
                obj = self.term(position="object")
                patterns.append(TriplePattern(subject, pred, obj))
                if self.peek() != ",":
                    break
                self.pos += 1
            if self.peek() != ";":
                return
            while self.peek() == ";":
                self.pos += 1
            if self.peek() in (".", "}"):
                return

    def filter(self) -> Comparison:
        if self.peek() != "(":
            self.fail("unsupported construct: FILTER without parenthesised comparison",
                      "unsupported")
        self.pos += 1
        left = self.filter_operand()
        op = self.operator()
        right = self.filter_operand()
        if self.peek() != ")":
            self.fail("unsupported construct: compound FILTER expression", "unsupported")
        self.pos += 1
        if isinstance(left, Variable) and not isinstance(right, Variable):
            return Comparison(left, op, right)
        if isinstance(right, Variable) and not isinstance(left, Variable):
            return Comparison(right, _FLIPPED[op], left)
        self.fail("FILTER must compare one variable with a constant", "unsupported")

    def filter_operand(self):
        self.skip_ws()
        if self.peek() in ("?", "$"):
            return self.variable()
        if _KEYWORD.match(self.text, self.pos) and self.keyword() not in ("TRUE", "FALSE") \
                and not _PNAME.match(self.text, self.pos):
            self.fail("unsupported construct: function call in FILTER", "unsupported")
        return self.term(position="object")

    def operator(self) -> str:
        self.skip_ws()
        for op in _OPERATORS:
            if self.text.startswith(op, self.pos):
                self.pos += len(op)
                return op
        if self.text.startswith("&&", self.pos) or self.text.startswith("||", self.pos):
            self.fail("unsupported construct: boolean FILTER connective", "unsupported")
        self.fail("expected comparison operator")

    def variable(self) -> Variable:
        self.skip_ws()
        m = _VAR.match(self.text, self.pos)
        if not m:
            self.fail("malformed variable")
        self.pos = m.end()
        return Variable(m.group(1))

    def term(self, position: str) -> PatternTerm:
        c = self.peek()
        start = self.pos
        if c in ("?", "$"):
            return self.variable()
        if c == "<":
            return self.iriref()
        if c == "[" or c == "(":
            self.fail("unsupported construct: blank node syntax", "unsupported")
        if c == "_":
            m = re.compile(r"_:([A-Za-z0-9_\-]+)").match(self.text, self.pos)
            if not m:
                self.fail("malformed blank node")
            self.pos = m.end()
            return BlankNode(m.group(1))
        if position == "predicate":
            if c == "a" and not re.match(r"[A-Za-z0-9_\-:]", self.text[self.pos + 1:self.pos + 2]):
                self.pos += 1
                return RDF_TYPE
            if c == "^" or c == "!":
                self.fail("unsupported construct: property path", "unsupported")
        if c in ('"', "'"):
            if position != "object":
                self.fail(f"literal in {position} position")
            return self.literal()
        if c and (c.isdigit() or c in "+-."):
            if position != "object":
                self.fail(f"literal in {position} position")
            return self.number()
        kw = self.keyword()
        if kw in ("TRUE", "FALSE"):
            self.pos += len(kw)
            return Literal(kw.lower(), XSD.boolean)
        m = _PNAME.match(self.text, self.pos)
        if not m:
            self.fail("expected a term")
        self.pos = m.end()
        try:
            return Iri(self.prefixes.namespace(m.group(1) or "") + m.group(2))
        except PrefixError:
            self.fail(f"unbound prefix {m.group(1) or ''!r}", "unbound-prefix", offset=start)

    def iriref(self) -> Iri:
        start = self.pos
        end = self.text.find(">", self.pos + 1)
        if end < 0:
            self.fail("unterminated IRI")
        # Whitespace inside <...> is dropped: line-wrapped or typeset IRIs
        # such as "<http:// example.org/>" still resolve.
        raw = "".join(self.text[self.pos + 1:end].split())
        self.pos = end + 1
        try:
            return Iri(raw)
        except StructuralError as exc:
            self.fail(str(exc), offset=start)

    def literal(self) -> Literal:
        start = self.pos
        quote = self.text[self.pos]
        if self.text.startswith(quote * 3, self.pos):
            self.fail("unsupported construct: long string", "unsupported")
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text) or self.text[self.pos] in "\r\n":
                self.fail("unterminated string", offset=start)
            c = self.text[self.pos]
            if c == quote:
                self.pos += 1
                break
            if c == "\\":
                esc = self.text[self.pos + 1:self.pos + 2]
                table = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f",
                         '"': '"', "'": "'", "\\": "\\"}
                if esc in table:
                    out.append(table[esc])
                    self.pos += 2
                    continue
                if esc in ("u", "U"):
                    width = 4 if esc == "u" else 8
                    digits = self.text[self.pos + 2:self.pos + 2 + width]
                    if re.fullmatch(r"[0-9A-Fa-f]{%d}" % width, digits):
                        out.append(chr(int(digits, 16)))
                        self.pos += 2 + width
                        continue
                self.fail("malformed escape")
            out.append(c)
            self.pos += 1
        lexical = "".join(out)
        datatype, lang = XSD_STRING, None
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            dt = self.term(position="datatype")
            if not isinstance(dt, Iri):
                self.fail("datatype must be an IRI")
            datatype = dt
        else:
            m = _LANG.match(self.text, self.pos)
            if m:
                self.pos = m.end()
                lang, datatype = m.group(1), RDF_LANGSTRING
        try:
            return Literal(lexical, datatype, lang)
        except StructuralError as exc:
            self.fail(str(exc), "bad-literal", offset=start)

    def number(self) -> Literal:
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.fail("malformed number")
        self.pos = m.end()
        text = m.group(0)
        if m.group(2):
            return Literal(text, XSD.double)
        if "." in text:
            return Literal(text, XSD.decimal)
        return Literal(text, XSD.integer)


def parse_query(text: str, prefixes: Optional[PrefixMap] = None) -> Query:
    """Parse query text. ``prefixes`` are pre-bound; the query's own PREFIX
    declarations take precedence. Raises ``QueryError`` on failure."""
    parser = _QueryParser(text, prefixes)
    try:
        return parser.parse()
    except _Abort as err:
        line, col = position(text, err.offset)
        raise QueryError([ParseDiagnostic(line, col, err.message, err.kind)]) from None


# -- evaluation --------------------------------------------------------------

Binding = dict[Variable, Term]


def _resolve(x: PatternTerm, sol: Binding) -> Optional[Term]:
    if isinstance(x, Variable):
        return sol.get(x)
    return x


def _unify(pat: TriplePattern, triple, sol: Binding) -> Optional[Binding]:
    new = None
    for x, value in zip(pat, triple):
        if isinstance(x, Variable):
            current = sol.get(x) if new is None else new.get(x)
            if current is None:
                if new is None:
                    new = dict(sol)
                new[x] = value
            elif current != value:
                return None
        elif x != value:
            return None
    return new if new is not None else dict(sol)


def _estimate(pat: TriplePattern, g: Graph) -> int:
    s, p, o = (None if isinstance(x, Variable) else x for x in pat)
    if isinstance(p, Literal) or isinstance(s, Literal):
        return 0
    return g.count(s, p, o)


def plan(patterns: Sequence[TriplePattern], g: Graph) -> list[TriplePattern]:
    """Greedy join order: cheapest pattern first, then prefer patterns that
    share a variable with what is already bound."""
    remaining = list(enumerate(patterns))
    estimates = {i: _estimate(p, g) for i, p in remaining}
    bound: set[Variable] = set()
    ordered = []
    while remaining:
        def rank(item):
            i, pat = item
            connected = not bound or any(v in bound for v in pat.variables()) \
                or not pat.variables()
            return (not connected, estimates[i], i)
        best = min(remaining, key=rank)
        remaining.remove(best)
        ordered.append(best[1])
        bound.update(best[1].variables())
    return ordered


def evaluate_bgp(patterns: Sequence[TriplePattern], g: Graph) -> list[Binding]:
    solutions: list[Binding] = [{}]
    for pat in patterns:
        nxt: list[Binding] = []
        for sol in solutions:
            s, p, o = (_resolve(x, sol) for x in pat)
            if isinstance(s, Literal) or (p is not None and not isinstance(p, Iri)):
                continue
            for t in g.candidates(s, p, o):
                new = _unify(pat, t, sol)
                if new is not None:
                    nxt.append(new)
        solutions = nxt
        if not solutions:
            break
    return solutions


def compare(left: Term, op: str, right: Term) -> Optional[bool]:
    """Evaluate ``left op right``; None when the operands are incomparable."""
    if isinstance(left, Literal) and isinstance(right, Literal):
        if left.is_numeric and right.is_numeric:
            a, b = left.number(), right.number()
            if a.is_nan() or b.is_nan():
                return None
            return _apply(op, a, b)
        if left.datatype == XSD_STRING and right.datatype == XSD_STRING:
            return _apply(op, left.lexical, right.lexical)
        if op in ("=", "!=") and left.datatype == right.datatype and left.lang == right.lang:
            return _apply(op, left, right)
        return None
    if op in ("=", "!=") and type(left) is type(right):
        return _apply(op, left, right)
    return None


def _apply(op: str, a, b) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(op)


def _passes(f: Comparison, sol: Binding) -> bool:
    value = sol.get(f.var)
    if value is None:
        return False
    return compare(value, f.op, f.value) is True


def execute(q: Query, g: Graph,
            pattern_order: Optional[Sequence[TriplePattern]] = None) -> ResultTable:
    """Run ``q`` over ``g``. ``pattern_order`` overrides the join plan."""
    order = list(pattern_order) if pattern_order is not None else plan(q.patterns, g)
    if sorted(map(repr, order)) != sorted(map(repr, q.patterns)):
        raise ValueError("pattern_order must be a permutation of the query patterns")
    solutions = [s for s in evaluate_bgp(order, g) if all(_passes(f, s) for f in q.filters)]
    full = q.variables
    solutions.sort(key=lambda s: (
        tuple(term_key(s.get(v)) for v in q.order_by),
        tuple(term_key(s.get(v)) for v in full),
    ))
    header = q.header
    rows = [tuple(s.get(v) for v in header) for s in solutions]
    if q.distinct:
        rows = list(dict.fromkeys(rows))
    if q.limit is not None:
        rows = rows[:q.limit]
    return ResultTable([v.name for v in header], rows)


def run(text: str, g: Graph, prefixes: Optional[PrefixMap] = None) -> ResultTable:
    return execute(parse_query(text, prefixes), g)
