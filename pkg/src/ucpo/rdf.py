"""RDF terms, an indexed in-memory triple set and prefix handling.

Every read operation returns results in one canonical order (subject, then
predicate, then object; IRIs before blank nodes before literals) so callers
never need to sort.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Iterable, Iterator, NamedTuple, Optional, Union

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_BAD_IRI_CHAR = re.compile(r'[\x00-\x20\s<>"{}|^`\\]')
_LANG_TAG = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")
_LOCAL_NAME = re.compile(r"^[A-Za-z0-9_\-]*$")
_PREFIX_LABEL = re.compile(r"^([A-Za-z][A-Za-z0-9_\-]*)?$")


class StructuralError(ValueError):
    """A term or triple violates RDF positional or lexical rules."""


class PrefixError(KeyError):
    """A prefixed name uses a label that is not bound."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unbound prefix"


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if not self.value or _BAD_IRI_CHAR.search(self.value):
            raise StructuralError(f"invalid IRI {self.value!r}")
        if not _SCHEME.match(self.value):
            raise StructuralError(f"IRI is not absolute: {self.value!r}")

    # Hand-written: terms are hashed constantly by the indexes and the
    # generated versions build a tuple on every call.
    def __hash__(self) -> int:
        return hash(self.value)

    def __eq__(self, other: object) -> bool:
        return other.__class__ is Iri and other.value == self.value

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __post_init__(self) -> None:
        if not self.label or not _LOCAL_NAME.match(self.label):
            raise StructuralError(f"invalid blank node label {self.label!r}")

    def __hash__(self) -> int:
        return hash(("_:", self.label))

    def __eq__(self, other: object) -> bool:
        return other.__class__ is BlankNode and other.label == self.label

    def __str__(self) -> str:
        return f"_:{self.label}"


class Namespace(str):
    """An IRI prefix; attribute or item access yields the expanded Iri."""

    def term(self, local: str) -> Iri:
        return Iri(self + local)

    def __getattr__(self, local: str) -> Iri:
        if local.startswith("__"):
            raise AttributeError(local)
        return self.term(local)

    def __getitem__(self, local):  # type: ignore[override]
        if isinstance(local, str):
            return self.term(local)
        return str.__getitem__(self, local)


RDF = Namespace("http://www.w3.org/1999/02/22-rdf-syntax-ns#")
RDFS = Namespace("http://www.w3.org/2000/01/rdf-schema#")
OWL = Namespace("http://www.w3.org/2002/07/owl#")
XSD = Namespace("http://www.w3.org/2001/XMLSchema#")
UCPO = Namespace("http://vivocaz.fr/ucpo/ns#")
UP = Namespace("http://vivocaz.fr/up/ns#")
VO = Namespace("http://vivocaz.fr/vo/ns#")

RDF_TYPE = RDF.type
XSD_STRING = XSD.string
RDF_LANGSTRING = RDF.langString

INTEGER_TYPES = frozenset(
    XSD[n]
    for n in (
        "integer", "int", "long", "short", "byte", "nonNegativeInteger",
        "positiveInteger", "nonPositiveInteger", "negativeInteger",
        "unsignedInt", "unsignedLong", "unsignedShort", "unsignedByte",
    )
)
NUMERIC_TYPES = INTEGER_TYPES | {XSD.decimal, XSD.float, XSD.double}


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: Iri = XSD_STRING
    lang: Optional[str] = None

    def __post_init__(self) -> None:
        if not isinstance(self.lexical, str):
            raise StructuralError("literal lexical form must be a string")
        if self.lang is not None:
            if not _LANG_TAG.match(self.lang):
                raise StructuralError(f"invalid language tag {self.lang!r}")
            if self.datatype == XSD_STRING:
                object.__setattr__(self, "datatype", RDF_LANGSTRING)
            elif self.datatype != RDF_LANGSTRING:
                raise StructuralError("language tag requires rdf:langString")
        elif self.datatype == RDF_LANGSTRING:
            raise StructuralError("rdf:langString literal without language tag")
        if self.datatype in NUMERIC_TYPES:
            try:
                self.number()
            except (InvalidOperation, ValueError) as exc:
                raise StructuralError(
                    f"{self.lexical!r} is not a valid {self.datatype.value}"
                ) from exc

    def __hash__(self) -> int:
        return hash((self.lexical, self.datatype.value, self.lang))

    def __eq__(self, other: object) -> bool:
        return (other.__class__ is Literal and other.lexical == self.lexical
                and other.datatype == self.datatype and other.lang == self.lang)

    @property
    def is_numeric(self) -> bool:
        return self.datatype in NUMERIC_TYPES

    def number(self) -> Decimal:
        """Numeric value of the lexical form. Integers reject fractions."""
        text = self.lexical.strip()
        if self.datatype in INTEGER_TYPES:
            if not re.fullmatch(r"[+-]?\d+", text):
                raise ValueError(self.lexical)
            return Decimal(text)
        if self.datatype == XSD.decimal:
            if not re.fullmatch(r"[+-]?(\d+(\.\d*)?|\.\d+)", text):
                raise ValueError(self.lexical)
            return Decimal(text)
        value = Decimal(text)
        if not value.is_finite() and text.lower().lstrip("+-") not in ("inf", "nan"):
            raise ValueError(self.lexical)
        return value

    def __str__(self) -> str:
        return self.lexical


Term = Union[Iri, BlankNode, Literal]
Subject = Union[Iri, BlankNode]

def term_key(term: Optional[Term]) -> tuple:
    """Canonical sort key: IRIs < blank nodes < literals, then by string."""
    if term is None:
        return (-1, "", "", "")
    if isinstance(term, Iri):
        return (0, term.value, "", "")
    if isinstance(term, BlankNode):
        return (1, term.label, "", "")
    return (2, term.lexical, term.datatype.value, term.lang or "")


class Triple(NamedTuple):
    subject: Subject
    predicate: Iri
    object: Term


def triple_key(t: Triple) -> tuple:
    return (term_key(t.subject), term_key(t.predicate), term_key(t.object))


def check_triple(t: Triple) -> Triple:
    s, p, o = t
    if not isinstance(s, (Iri, BlankNode)):
        raise StructuralError(f"subject must be an IRI or blank node, got {s!r}")
    if not isinstance(p, Iri):
        raise StructuralError(f"predicate must be an IRI, got {p!r}")
    if not isinstance(o, (Iri, BlankNode, Literal)):
        raise StructuralError(f"object must be an RDF term, got {o!r}")
    return t if isinstance(t, Triple) else Triple(s, p, o)


class Graph:
    """A set of triples with subject, predicate, object, (s,p) and (p,o) indexes.

    Mutations require exclusive access; reads are side-effect free.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples: set[Triple] = set()
        self._by_s: dict[Term, set[Triple]] = {}
        self._by_p: dict[Term, set[Triple]] = {}
        self._by_o: dict[Term, set[Triple]] = {}
        self._by_sp: dict[tuple, set[Triple]] = {}
        self._by_po: dict[tuple, set[Triple]] = {}
        for t in triples:
            self.insert(t)

    def _indexes(self, t: Triple):
        s, p, o = t
        return (
            (self._by_s, s),
            (self._by_p, p),
            (self._by_o, o),
            (self._by_sp, (s, p)),
            (self._by_po, (p, o)),
        )

    def insert(self, t: Triple) -> bool:
        """Add a triple; returns False when it was already present."""
        t = check_triple(t)
        if t in self._triples:
            return False
        self._triples.add(t)
        for index, key in self._indexes(t):
            index.setdefault(key, set()).add(t)
        return True

    add = insert

    def update(self, triples: Iterable[Triple]) -> int:
        return sum(1 for t in triples if self.insert(t))

    def remove(self, t: Triple) -> bool:
        if t not in self._triples:
            return False
        self._triples.discard(t)
        for index, key in self._indexes(t):
            bucket = index[key]
            bucket.discard(t)
            if not bucket:
                del index[key]
        return True

    def __len__(self) -> int:
        return len(self._triples)

    size = __len__

    def __contains__(self, t: object) -> bool:
        return t in self._triples

    contains = __contains__

    def __iter__(self) -> Iterator[Triple]:
        return iter(sorted(self._triples, key=triple_key))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples

    def __repr__(self) -> str:
        return f"<Graph with {len(self)} triples>"

    def copy(self) -> "Graph":
        g = Graph()
        g._triples = set(self._triples)
        for name in ("_by_s", "_by_p", "_by_o", "_by_sp", "_by_po"):
            setattr(g, name, {k: set(v) for k, v in getattr(self, name).items()})
        return g

    def triple_set(self) -> frozenset[Triple]:
        return frozenset(self._triples)

    def candidates(self, s=None, p=None, o=None) -> Iterable[Triple]:
        """Unordered matches, using the narrowest index available."""
        if s is not None and p is not None and o is not None:
            t = Triple(s, p, o)
            return (t,) if t in self._triples else ()
        if s is not None and p is not None:
            return self._by_sp.get((s, p), ())
        if p is not None and o is not None:
            return self._by_po.get((p, o), ())
        buckets = []
        if s is not None:
            buckets.append(self._by_s.get(s, ()))
        if p is not None:
            buckets.append(self._by_p.get(p, ()))
        if o is not None:
            buckets.append(self._by_o.get(o, ()))
        if not buckets:
            return self._triples
        bucket = min(buckets, key=len)
        return [
            t for t in bucket
            if (s is None or t[0] == s) and (o is None or t[2] == o)
        ]

    def count(self, s=None, p=None, o=None) -> int:
        found = self.candidates(s, p, o)
        return len(found) if hasattr(found, "__len__") else sum(1 for _ in found)

    def match(self, s: Optional[Term] = None, p: Optional[Iri] = None,
              o: Optional[Term] = None) -> list[Triple]:
        """Triples agreeing with every bound position, in canonical order."""
        return sorted(self.candidates(s, p, o), key=triple_key)

    def objects(self, s=None, p=None) -> list[Term]:
        return sorted({t[2] for t in self.candidates(s, p, None)}, key=term_key)

    def subjects(self, p=None, o=None) -> list[Term]:
        return sorted({t[0] for t in self.candidates(None, p, o)}, key=term_key)

    def value(self, s, p) -> Optional[Term]:
        """First object of (s, p, *) in canonical order, or None."""
        objs = self.objects(s, p)
        return objs[0] if objs else None


class PrefixMap:
    """Prefix label to namespace bindings. Rebinding a label replaces it."""

    def __init__(self, bindings: Optional[dict[str, str]] = None):
        self._map: dict[str, str] = {}
        for label, ns in (bindings or {}).items():
            self.bind(label, ns)

    def bind(self, label: str, namespace: Union[str, Iri]) -> None:
        if not _PREFIX_LABEL.match(label):
            raise StructuralError(f"invalid prefix label {label!r}")
        ns = namespace.value if isinstance(namespace, Iri) else str(namespace)
        Iri(ns)
        self._map[label] = ns

    def namespace(self, label: str) -> str:
        try:
            return self._map[label]
        except KeyError:
            raise PrefixError(f"unbound prefix {label!r}") from None

    def __contains__(self, label: object) -> bool:
        return label in self._map

    def __iter__(self):
        return iter(sorted(self._map))

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PrefixMap):
            return NotImplemented
        return self._map == other._map

    def items(self) -> list[tuple[str, str]]:
        return sorted(self._map.items())

    def copy(self) -> "PrefixMap":
        return PrefixMap(dict(self._map))

    def merged(self, other: "PrefixMap") -> "PrefixMap":
        pm = self.copy()
        for label, ns in other.items():
            pm.bind(label, ns)
        return pm

    def expand(self, name: str) -> Iri:
        return expand(name, self)

    def compact(self, iri: Iri) -> str:
        return compact(iri, self)


def expand(name: str, pm: PrefixMap) -> Iri:
    """Resolve ``label:local`` against the prefix map."""
    label, sep, local = name.partition(":")
    if not sep:
        raise StructuralError(f"{name!r} is not a prefixed name")
    if not _LOCAL_NAME.match(local):
        raise StructuralError(f"invalid local name in {name!r}")
    return Iri(pm.namespace(label) + local)


def compact(iri: Iri, pm: PrefixMap) -> str:
    """Shortest prefixed name for ``iri``, or ``<iri>`` if none applies.

    The longest matching namespace wins; equal namespaces resolve to the
    alphabetically first label.
    """
    best = None
    for label, ns in pm.items():
        if iri.value.startswith(ns) and _LOCAL_NAME.match(iri.value[len(ns):]):
            if best is None or len(ns) > len(best[1]):
                best = (label, ns)
    if best is None:
        return f"<{iri.value}>"
    return f"{best[0]}:{iri.value[len(best[1]):]}"


def default_prefixes() -> PrefixMap:
    return PrefixMap({
        "rdf": RDF, "rdfs": RDFS, "owl": OWL, "xsd": XSD,
        "ucpo": UCPO, "up": UP, "vo": VO,
    })
