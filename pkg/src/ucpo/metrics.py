"""Base and schema metrics of an ontology graph, plus DL expressivity.

Counting rules:

* classes, object properties and data properties are the subjects of
  ``rdf:type owl:Class`` (or ``rdfs:Class``), ``owl:ObjectProperty`` and
  ``owl:DatatypeProperty`` declarations;
* individuals are distinct subjects typed with anything other than an
  OWL/RDFS meta class;
* the inheritance count H is the number of ``rdfs:subClassOf`` triples
  between two declared classes;
* domain and range counts only look at object properties;
* the total axiom count is the number of triples in the graph.

Schema metrics use the data-property count as NA, H as the inheritance
count and the object-property count as P (non-inheritance relationships):

    AR = NA / C      IR = H / C      RR = P / (H + P)
    axiom/class = axioms / C          class/relation = C / (H + P)
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

from .rdf import OWL, RDF_TYPE, RDFS, Graph
from .schema import META_TYPES


class UndefinedMetricError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class BaseMetrics:
    class_count: int = 0
    object_property_count: int = 0
    data_property_count: int = 0
    properties_count: int = 0
    individual_count: int = 0
    subclass_count: int = 0
    domain_axiom_count: int = 0
    range_axiom_count: int = 0
    total_axiom_count: int = 0

    def to_json(self) -> dict:
        out = {_camel(k): v for k, v in asdict(self).items()}
        out["subClassOfCount"] = out.pop("subclassCount")
        return {k: out[k] for k in _BASE_KEYS}


@dataclass(frozen=True)
class SchemaMetrics:
    attribute_richness: Fraction
    inheritance_richness: Fraction
    relationship_richness: Fraction
    axiom_class_ratio: Fraction
    class_relation_ratio: Fraction

    def rounded(self, places: int = 6) -> dict[str, Decimal]:
        return {k: round_half_up(v, places) for k, v in asdict(self).items()}

    def to_json(self) -> dict:
        return {_camel(k): float(v) for k, v in self.rounded().items()}


@dataclass(frozen=True)
class ExpressivityReport:
    features: frozenset[str]
    label: str


_BASE_KEYS = (
    "classCount", "objectPropertyCount", "dataPropertyCount", "propertiesCount",
    "individualCount", "subClassOfCount", "domainAxiomCount", "rangeAxiomCount",
    "totalAxiomCount",
)


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(w.capitalize() for w in rest)


def round_half_up(value: Fraction, places: int = 6) -> Decimal:
    q = Decimal(1).scaleb(-places)
    exact = Decimal(value.numerator) / Decimal(value.denominator)
    return exact.quantize(q, rounding=ROUND_HALF_UP)


def _declared(g: Graph, *types) -> set:
    return {t.subject for typ in types for t in g.candidates(p=RDF_TYPE, o=typ)}


def compute_base(g: Graph) -> BaseMetrics:
    classes = _declared(g, OWL.Class, RDFS.Class)
    object_props = _declared(g, OWL.ObjectProperty)
    data_props = _declared(g, OWL.DatatypeProperty)
    individuals = {
        t.subject for t in g.candidates(p=RDF_TYPE)
        if t.object not in META_TYPES
    } - classes - object_props - data_props
    subclass = sum(
        1 for t in g.candidates(p=RDFS.subClassOf)
        if t.subject in classes and t.object in classes
    )
    domains = sum(1 for t in g.candidates(p=RDFS.domain) if t.subject in object_props)
    ranges = sum(1 for t in g.candidates(p=RDFS.range) if t.subject in object_props)
    return BaseMetrics(
        class_count=len(classes),
        object_property_count=len(object_props),
        data_property_count=len(data_props),
        properties_count=len(object_props) + len(data_props),
        individual_count=len(individuals),
        subclass_count=subclass,
        domain_axiom_count=domains,
        range_axiom_count=ranges,
        total_axiom_count=len(g),
    )


def compute_schema(b: BaseMetrics) -> SchemaMetrics:
    c = b.class_count
    h = b.subclass_count
    p = b.object_property_count
    if c == 0:
        raise UndefinedMetricError("schema metrics are undefined for an ontology without classes")
    if h + p == 0:
        raise UndefinedMetricError(
            "relationship richness and class/relation ratio need at least one relationship")
    return SchemaMetrics(
        attribute_richness=Fraction(b.data_property_count, c),
        inheritance_richness=Fraction(h, c),
        relationship_richness=Fraction(p, h + p),
        axiom_class_ratio=Fraction(b.total_axiom_count, c),
        class_relation_ratio=Fraction(c, h + p),
    )


def classify_expressivity(tbox: Graph) -> ExpressivityReport:
    features = {"AL"}
    if tbox.count(p=RDFS.subPropertyOf):
        features.add("H")
    if tbox.count(p=RDF_TYPE, o=OWL.DatatypeProperty):
        features.add("D")
    label = "AL" + ("H" if "H" in features else "") + ("(D)" if "D" in features else "")
    return ExpressivityReport(frozenset(features), label)


def report(g: Graph) -> dict:
    """The JSON document printed by ``ucpo metrics --json``."""
    base = compute_base(g)
    return {
        "base": base.to_json(),
        "schema": compute_schema(base).to_json(),
        "expressivity": classify_expressivity(g).label,
    }
