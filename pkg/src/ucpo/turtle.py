"""Parser and canonical serializer for a closed Turtle subset.

Accepted: ``@prefix``, ``<iri>``, prefixed names, ``a``, ``_:label`` blank
nodes, object lists (``,``), predicate lists (``;``), double-quoted strings
with optional ``^^datatype`` or ``@lang``, bare integers and decimals, ``#``
comments and ``.`` terminators. Collections, ``[ ]`` property lists, long
strings, single-quoted strings, doubles and booleans are rejected.
"""

from __future__ import annotations

import re
from typing import Optional

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
    Triple,
    compact,
    term_key,
    triple_key,
)

_PNAME = re.compile(r"([A-Za-z][A-Za-z0-9_\-]*)?:([A-Za-z0-9_\-]*)")
_BNODE = re.compile(r"_:([A-Za-z0-9_\-]+)")
_LANG = re.compile(r"@([A-Za-z]+(?:-[A-Za-z0-9]+)*)")
_DECIMAL = re.compile(r"[+-]?\d*\.\d+")
_INTEGER = re.compile(r"[+-]?\d+")
_NAME_CHAR = re.compile(r"[A-Za-z0-9_\-:]")
_IRI_FORBIDDEN = set('<"{}|^`\\')
_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f",
            '"': '"', "'": "'", "\\": "\\"}


class TurtleError(ParseError):
    pass


class _Abort(Exception):
    def __init__(self, offset: int, message: str, kind: str = "syntax"):
        self.offset = offset
        self.message = message
        self.kind = kind


class _Parser:
    def __init__(self, text: str, prefixes: Optional[PrefixMap]):
        if text.startswith("\ufeff"):
            text = text[1:]
        self.text = text
        self.pos = 0
        self.prefixes = prefixes.copy() if prefixes is not None else PrefixMap()
        self.graph = Graph()

    def fail(self, message: str, kind: str = "syntax", offset: Optional[int] = None):
        raise _Abort(self.pos if offset is None else offset, message, kind)

    def skip_ws(self) -> None:
        text, n = self.text, len(self.text)
        while self.pos < n:
            c = text[self.pos]
            if c in " \t\r\n":
                self.pos += 1
            elif c == "#":
                end = text.find("\n", self.pos)
                self.pos = n if end < 0 else end + 1
            else:
                break

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str, what: str) -> None:
        if self.peek() != ch:
            found = self.peek() or "end of input"
            self.fail(f"expected {what}, found {found!r}")
        self.pos += 1

    def parse(self) -> tuple[PrefixMap, Graph]:
        while self.peek():
            if self.text.startswith("@prefix", self.pos):
                self.directive()
            elif self.text.startswith("@", self.pos):
                self.fail("unsupported directive")
            else:
                self.statement()
        return self.prefixes, self.graph

    def directive(self) -> None:
        self.pos += len("@prefix")
        if self.pos < len(self.text) and self.text[self.pos] not in " \t\r\n":
            self.fail("expected whitespace after @prefix")
        self.skip_ws()
        m = re.compile(r"([A-Za-z][A-Za-z0-9_\-]*)?:").match(self.text, self.pos)
        if not m:
            self.fail("expected prefix label")
        self.pos = m.end()
        label = m.group(1) or ""
        if self.peek() != "<":
            self.fail("expected namespace IRI")
        iri = self.iriref()
        self.expect(".", "'.' after @prefix directive")
        self.prefixes.bind(label, iri)

    def statement(self) -> None:
        subject = self.subject()
        self.predicate_object_list(subject)
        self.expect(".", "'.' at end of statement")

    def subject(self):
        c = self.peek()
        if c == "<":
            return self.iriref()
        if c == "_":
            return self.bnode()
        if c in "[(":
            self.fail("blank node property lists and collections are not supported")
        if c == '"' or c == "'" or c.isdigit() or c in "+-":
            self.fail("literal in subject position")
        return self.pname()

    def predicate_object_list(self, subject) -> None:
        while True:
            verb = self.verb()
            self.object_list(subject, verb)
            if self.peek() != ";":
                return
            while self.peek() == ";":
                self.pos += 1
            if self.peek() in (".", ""):
                return

    def verb(self) -> Iri:
        c = self.peek()
        if c == "a" and not _NAME_CHAR.match(self.text, self.pos + 1):
            self.pos += 1
            return RDF_TYPE
        if c == "<":
            return self.iriref()
        if c == "_":
            self.fail("blank node in predicate position")
        if c == '"' or c == "'" or c.isdigit() or c in "+-":
            self.fail("literal in predicate position")
        return self.pname()

    def object_list(self, subject, verb) -> None:
        while True:
            obj = self.object()
            self.graph.insert(Triple(subject, verb, obj))
            if self.peek() != ",":
                return
            self.pos += 1

    def object(self) -> Term:
        c = self.peek()
        if c == "<":
            return self.iriref()
        if c == "_":
            return self.bnode()
        if c == '"':
            return self.literal()
        if c == "'":
            self.fail("single-quoted strings are not supported")
        if c == "." and not self.text[self.pos + 1:self.pos + 2].isdigit():
            self.fail("expected object")
        if c and (c.isdigit() or c in "+-."):
            return self.number()
        if c in "[(":
            self.fail("blank node property lists and collections are not supported")
        if not c:
            self.fail("unexpected end of input, expected object")
        return self.pname()

    def iriref(self) -> Iri:
        start = self.pos
        self.pos += 1
        text, n = self.text, len(self.text)
        while self.pos < n and text[self.pos] != ">":
            c = text[self.pos]
            if c in "\r\n":
                self.fail("unterminated IRI", offset=start)
            if c <= " " or c in _IRI_FORBIDDEN:
                self.fail(f"illegal character {c!r} in IRI")
            self.pos += 1
        if self.pos >= n:
            self.fail("unterminated IRI", offset=start)
        value = text[start + 1:self.pos]
        self.pos += 1
        try:
            return Iri(value)
        except StructuralError as exc:
            self.fail(str(exc), offset=start)

    def pname(self) -> Iri:
        start = self.pos
        m = _PNAME.match(self.text, self.pos)
        if not m:
            self.fail("expected IRI or prefixed name")
        label, local = m.group(1) or "", m.group(2)
        if _NAME_CHAR.match(self.text, m.end()):
            self.fail("invalid character in local name", offset=m.end())
        self.pos = m.end()
        try:
            return Iri(self.prefixes.namespace(label) + local)
        except PrefixError:
            self.fail(f"unbound prefix {label!r}", "unbound-prefix", offset=start)

    def bnode(self) -> BlankNode:
        m = _BNODE.match(self.text, self.pos)
        if not m:
            self.fail("malformed blank node label")
        self.pos = m.end()
        return BlankNode(m.group(1))

    def string(self) -> str:
        start = self.pos
        if self.text.startswith('"""', self.pos):
            self.fail("multiline strings are not supported")
        self.pos += 1
        out = []
        text, n = self.text, len(self.text)
        while True:
            if self.pos >= n or text[self.pos] in "\r\n":
                self.fail("unterminated string", offset=start)
            c = text[self.pos]
            if c == '"':
                self.pos += 1
                return "".join(out)
            if c == "\\":
                esc = text[self.pos + 1:self.pos + 2]
                if esc in _ESCAPES:
                    out.append(_ESCAPES[esc])
                    self.pos += 2
                elif esc in ("u", "U"):
                    width = 4 if esc == "u" else 8
                    digits = text[self.pos + 2:self.pos + 2 + width]
                    if not re.fullmatch(r"[0-9A-Fa-f]{%d}" % width, digits):
                        self.fail("malformed unicode escape")
                    code = int(digits, 16)
                    if code > 0x10FFFF or 0xD800 <= code <= 0xDFFF:
                        self.fail("invalid code point in escape", "bad-literal")
                    out.append(chr(code))
                    self.pos += 2 + width
                else:
                    self.fail(f"unknown escape \\{esc}")
            else:
                out.append(c)
                self.pos += 1

    def literal(self) -> Literal:
        start = self.pos
        lexical = self.string()
        datatype, lang = XSD_STRING, None
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            datatype = self.iriref() if self.text.startswith("<", self.pos) else self.pname()
        elif self.text.startswith("@", self.pos):
            m = _LANG.match(self.text, self.pos)
            if not m:
                self.fail("malformed language tag")
            self.pos = m.end()
            lang = m.group(1)
            datatype = RDF_LANGSTRING
        try:
            return Literal(lexical, datatype, lang)
        except StructuralError as exc:
            self.fail(str(exc), "bad-literal", offset=start)

    def number(self) -> Literal:
        start = self.pos
        m = _DECIMAL.match(self.text, self.pos)
        datatype = XSD.decimal
        if not m:
            m = _INTEGER.match(self.text, self.pos)
            datatype = XSD.integer
        if not m:
            self.fail("malformed number", "bad-literal")
        end = m.end()
        if self.text[end:end + 1] in ("e", "E"):
            self.fail("double literals are not supported", "bad-literal", offset=start)
        if self.text[end:end + 1].isalpha() or self.text[end:end + 1] == "_":
            self.fail("malformed number", "bad-literal", offset=start)
        self.pos = end
        return Literal(m.group(0), datatype)


def parse(text: str, prefixes: Optional[PrefixMap] = None,
          source: Optional[str] = None) -> tuple[PrefixMap, Graph]:
    """Parse Turtle text into ``(prefix_map, graph)``.

    ``prefixes`` pre-binds labels the document may use without declaring.
    Raises ``TurtleError`` carrying a single diagnostic (first error wins).
    """
    parser = _Parser(text, prefixes)
    try:
        return parser.parse()
    except _Abort as err:
        line, col = position(parser.text, err.offset)
        raise TurtleError([ParseDiagnostic(line, col, err.message, err.kind)], source) from None


def parse_file(path, prefixes: Optional[PrefixMap] = None) -> tuple[PrefixMap, Graph]:
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        head = raw[:exc.start].decode("utf-8", "replace")
        line, col = position(head, len(head))
        raise TurtleError([ParseDiagnostic(line, col, "input is not valid UTF-8")],
                          str(path)) from None
    return parse(text, prefixes, source=str(path))


def _escape(s: str) -> str:
    out = []
    for c in s:
        if c == "\\":
            out.append("\\\\")
        elif c == '"':
            out.append('\\"')
        elif c == "\n":
            out.append("\\n")
        elif c == "\r":
            out.append("\\r")
        elif c == "\t":
            out.append("\\t")
        elif ord(c) < 0x20 or 0xD800 <= ord(c) <= 0xDFFF or ord(c) == 0x7F:
            out.append("\\u%04X" % ord(c))
        else:
            out.append(c)
    return "".join(out)


def format_term(term: Term, pm: PrefixMap) -> str:
    if isinstance(term, Iri):
        return compact(term, pm)
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    quoted = f'"{_escape(term.lexical)}"'
    if term.lang is not None:
        return f"{quoted}@{term.lang}"
    if term.datatype == XSD_STRING:
        return quoted
    if term.datatype == XSD.integer and _INTEGER.fullmatch(term.lexical):
        return term.lexical
    if term.datatype == XSD.decimal and _DECIMAL.fullmatch(term.lexical):
        return term.lexical
    return f"{quoted}^^{compact(term.datatype, pm)}"


def serialize(graph: Graph, pm: PrefixMap) -> str:
    """Canonical Turtle: sorted prefixes, one block per subject.

    ``rdf:type`` is written first as ``a``; other predicates and all objects
    follow canonical term order.
    """
    lines = [f"@prefix {label}: <{ns}> ." for label, ns in pm.items()]
    blocks = []
    by_subject: dict = {}
    for t in sorted(graph.triple_set(), key=triple_key):
        by_subject.setdefault(t.subject, {}).setdefault(t.predicate, []).append(t.object)
    for subject, preds in by_subject.items():
        order = sorted(preds, key=lambda p: (p != RDF_TYPE, term_key(p)))
        parts = []
        for p in order:
            verb = "a" if p == RDF_TYPE else format_term(p, pm)
            objs = ", ".join(format_term(o, pm) for o in sorted(preds[p], key=term_key))
            parts.append(f"{verb} {objs}")
        head = format_term(subject, pm)
        blocks.append(f"{head} " + " ;\n    ".join(parts) + " .")
    if blocks:
        lines.append("")
        lines.append("\n\n".join(blocks))
    return "\n".join(lines) + "\n"
