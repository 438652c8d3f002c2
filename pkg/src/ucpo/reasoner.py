"""Forward-chaining materialization for the ALH(D) fragment.

Rules, applied semi-naively until nothing new is derived:

  subclass-trans    (A subClassOf B), (B subClassOf C)      => (A subClassOf C)
  subprop-trans     (p subPropertyOf q), (q subPropertyOf r) => (p subPropertyOf r)
  subprop-inherit   (x p y), (p subPropertyOf q)            => (x q y)
  domain            (x p y), (p domain C)                   => (x type C)
  range             (x p y), (p range C), y not a literal   => (y type C)
  type-inherit      (x type C), (C subClassOf D)            => (x type D)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .rdf import RDF_TYPE, RDFS, Graph, Iri, Literal, Term, Triple, term_key

SUBCLASS = RDFS.subClassOf
SUBPROP = RDFS.subPropertyOf
DOMAIN = RDFS.domain
RANGE = RDFS.range

RULES = (
    "subclass-trans",
    "subprop-trans",
    "subprop-inherit",
    "domain",
    "range",
    "type-inherit",
)


class CycleError(ValueError):
    def __init__(self, relation: str, members: list[Term]):
        self.relation = relation
        self.members = members
        names = " -> ".join(str(m) for m in members)
        super().__init__(f"{relation} cycle: {names}")


@dataclass
class ClosureResult:
    graph: Graph
    inferred_count: int
    iterations: int


def find_cycle(edges: Iterable[tuple[Term, Term]]) -> Optional[list[Term]]:
    """Return one cycle (first node repeated at the end) or None."""
    succ: dict[Term, list[Term]] = {}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
    for nbrs in succ.values():
        nbrs.sort(key=term_key)
    state: dict[Term, int] = {}
    for root in sorted(succ, key=term_key):
        if state.get(root):
            continue
        stack = [(root, iter(succ.get(root, ())))]
        path = [root]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                path.pop()
                state[node] = 2
                continue
            mark = state.get(nxt, 0)
            if mark == 1:
                return path[path.index(nxt):] + [nxt]
            if mark == 0:
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, iter(succ.get(nxt, ()))))
    return None


def check_acyclic(graph: Graph) -> None:
    for pred, name in ((SUBCLASS, "subClassOf"), (SUBPROP, "subPropertyOf")):
        cycle = find_cycle((t.subject, t.object) for t in graph.candidates(p=pred))
        if cycle:
            raise CycleError(name, cycle)


class _Closure:
    def __init__(self, graph: Graph):
        self.g = graph

    def derive(self, rule: str, delta: Graph) -> set[Triple]:
        g = self.g
        out: set[Triple] = set()
        if rule == "subclass-trans":
            for t in delta.candidates(p=SUBCLASS):
                for u in g.candidates(s=t.object, p=SUBCLASS):
                    out.add(Triple(t.subject, SUBCLASS, u.object))
                for u in g.candidates(p=SUBCLASS, o=t.subject):
                    out.add(Triple(u.subject, SUBCLASS, t.object))
        elif rule == "subprop-trans":
            for t in delta.candidates(p=SUBPROP):
                for u in g.candidates(s=t.object, p=SUBPROP):
                    out.add(Triple(t.subject, SUBPROP, u.object))
                for u in g.candidates(p=SUBPROP, o=t.subject):
                    out.add(Triple(u.subject, SUBPROP, t.object))
        elif rule == "subprop-inherit":
            for t in delta.candidates():
                for u in g.candidates(s=t.predicate, p=SUBPROP):
                    if isinstance(u.object, Iri):
                        out.add(Triple(t.subject, u.object, t.object))
            for u in delta.candidates(p=SUBPROP):
                if isinstance(u.subject, Iri) and isinstance(u.object, Iri):
                    for t in g.candidates(p=u.subject):
                        out.add(Triple(t.subject, u.object, t.object))
        elif rule == "domain":
            for t in delta.candidates():
                for u in g.candidates(s=t.predicate, p=DOMAIN):
                    if not isinstance(u.object, Literal):
                        out.add(Triple(t.subject, RDF_TYPE, u.object))
            for u in delta.candidates(p=DOMAIN):
                if isinstance(u.subject, Iri) and not isinstance(u.object, Literal):
                    for t in g.candidates(p=u.subject):
                        out.add(Triple(t.subject, RDF_TYPE, u.object))
        elif rule == "range":
            for t in delta.candidates():
                if isinstance(t.object, Literal):
                    continue
                for u in g.candidates(s=t.predicate, p=RANGE):
                    if not isinstance(u.object, Literal):
                        out.add(Triple(t.object, RDF_TYPE, u.object))
            for u in delta.candidates(p=RANGE):
                if isinstance(u.subject, Iri) and not isinstance(u.object, Literal):
                    for t in g.candidates(p=u.subject):
                        if not isinstance(t.object, Literal):
                            out.add(Triple(t.object, RDF_TYPE, u.object))
        elif rule == "type-inherit":
            for t in delta.candidates(p=RDF_TYPE):
                for u in g.candidates(s=t.object, p=SUBCLASS):
                    out.add(Triple(t.subject, RDF_TYPE, u.object))
            for u in delta.candidates(p=SUBCLASS):
                for t in g.candidates(p=RDF_TYPE, o=u.subject):
                    out.add(Triple(t.subject, RDF_TYPE, u.object))
        else:
            raise ValueError(f"unknown rule {rule!r}")
        return out


def materialize(graph: Graph, rule_order: Optional[Sequence[str]] = None) -> ClosureResult:
    """Compute the fixpoint of the rule set over ``graph`` (left untouched).

    ``rule_order`` changes the order rules fire within a round; the resulting
    closure is the same for every order. Raises ``CycleError`` if the
    subclass or subproperty hierarchy is cyclic.
    """
    check_acyclic(graph)
    order = tuple(rule_order) if rule_order is not None else RULES
    if sorted(order) != sorted(RULES):
        raise ValueError(f"rule_order must be a permutation of {RULES}")
    closure = graph.copy()
    engine = _Closure(closure)
    delta = graph.copy()
    inferred = 0
    iterations = 0
    while len(delta):
        iterations += 1
        fresh = Graph()
        for rule in order:
            # Derivations from this round's delta join against the whole
            # closure, so triples added earlier in the round are seen too.
            for t in engine.derive(rule, delta):
                if closure.insert(t):
                    fresh.insert(t)
        inferred += len(fresh)
        delta = fresh
    check_acyclic(closure)
    return ClosureResult(closure, inferred, iterations)


def instances_of(closure: Graph, cls: Iri) -> list[Term]:
    """Every x with (x type cls) in ``closure``, in canonical order."""
    return closure.subjects(RDF_TYPE, cls)


def superclasses(closure: Graph, cls: Term) -> set[Term]:
    """``cls`` together with all its ancestors in a materialized closure."""
    return {cls} | {t.object for t in closure.candidates(s=cls, p=SUBCLASS)}


def superproperties(closure: Graph, prop: Term) -> set[Term]:
    return {prop} | {t.object for t in closure.candidates(s=prop, p=SUBPROP)}
