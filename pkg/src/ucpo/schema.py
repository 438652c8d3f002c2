"""The User Contextual Profile Ontology: TBox definition, shipped files and
instance validation.

Demographic and social classes reuse the ``up:`` namespace, profile, context
and preference classes live under ``ucpo:``, and vehicle-domain classes
under ``vo:``. Classes and properties whose ``note`` is set are
reconstructions added so that the published counts are met; the note is
emitted as an ``rdfs:comment``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from graphlib import CycleError as _GraphCycle, TopologicalSorter
from importlib import resources
from typing import Optional

from .rdf import (
    OWL,
    RDF_TYPE,
    RDFS,
    UCPO,
    UP,
    VO,
    XSD,
    Graph,
    Iri,
    Literal,
    PrefixMap,
    Term,
    Triple,
    default_prefixes,
)
from .reasoner import CycleError, superclasses, superproperties
from .turtle import parse

ONTOLOGY_IRI = Iri("http://vivocaz.fr/ucpo/ns")
RECONSTRUCTED = "Reconstruction: not named in the original class diagrams."
SCHEMA_FILE = "ucpo-schema.ttl"
SEED_FILE = "seed-data.ttl"

# Types that mark schema declarations rather than individuals.
META_TYPES = frozenset({
    OWL.Class, RDFS.Class, OWL.ObjectProperty, OWL.DatatypeProperty,
    OWL.AnnotationProperty, OWL.Ontology, OWL.NamedIndividual, OWL.Restriction,
    Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#Property"),
})
ANNOTATION_PREDICATES = frozenset({RDFS.label, RDFS.comment, RDFS.seeAlso, RDFS.isDefinedBy})
SCHEMA_PREDICATES = frozenset({RDFS.subClassOf, RDFS.subPropertyOf, RDFS.domain, RDFS.range})


@dataclass(frozen=True)
class ClassDef:
    iri: Iri
    parents: frozenset[Iri] = frozenset()
    label: str = ""
    note: Optional[str] = None


@dataclass(frozen=True)
class ObjectPropertyDef:
    iri: Iri
    domains: frozenset[Iri]
    ranges: frozenset[Iri]
    parents: frozenset[Iri] = frozenset()
    label: str = ""
    note: Optional[str] = None


@dataclass(frozen=True)
class DataPropertyDef:
    iri: Iri
    domains: frozenset[Iri]
    datatype: Iri
    label: str = ""
    note: Optional[str] = None


@dataclass(frozen=True)
class IndividualDef:
    iri: Iri
    cls: Iri
    label: str


@dataclass
class OntologyDescriptor:
    classes: list[ClassDef]
    object_props: list[ObjectPropertyDef]
    data_props: list[DataPropertyDef]
    namespaces: PrefixMap
    individuals: list[IndividualDef] = field(default_factory=list)

    @property
    def class_iris(self) -> set[Iri]:
        return {c.iri for c in self.classes}

    def lookup(self, iri: Term):
        """The object or data property definition for ``iri``, or None."""
        index = self.__dict__.get("_index")
        if index is None:
            index = {d.iri: d for d in (*self.object_props, *self.data_props)}
            self.__dict__["_index"] = index
        return index.get(iri)

    @property
    def subclass_axiom_count(self) -> int:
        return sum(len(c.parents) for c in self.classes)

    @property
    def domain_axiom_count(self) -> int:
        return sum(len(p.domains) for p in self.object_props)

    @property
    def range_axiom_count(self) -> int:
        return sum(len(p.ranges) for p in self.object_props)

    def check(self) -> None:
        """Raise if a hierarchy is cyclic or a domain/range is undeclared."""
        declared = self.class_iris
        for name, nodes in (
            ("subClassOf", {c.iri: c.parents for c in self.classes}),
            ("subPropertyOf", {p.iri: p.parents for p in self.object_props}),
        ):
            try:
                tuple(TopologicalSorter(nodes).static_order())
            except _GraphCycle as exc:
                raise CycleError(name, list(exc.args[1])) from None
        for c in self.classes:
            _require(c.parents <= declared, f"{c.iri} has an undeclared parent")
        for p in self.object_props:
            _require((p.domains | p.ranges) <= declared, f"{p.iri} references an undeclared class")
        for p in self.data_props:
            _require(p.domains <= declared, f"{p.iri} has an undeclared domain")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def _fs(*iris: Iri) -> frozenset[Iri]:
    return frozenset(iris)


def _classes() -> list[ClassDef]:
    R = RECONSTRUCTED
    ctx, cdim, pref, pp = UCPO.Context, UCPO.ContextDimension, UCPO.Preference, UCPO.PersonalProfile
    out = [
        ClassDef(UCPO.User, label="User"),
        ClassDef(UCPO.UserProfile, label="User profile"),
        ClassDef(ctx, label="Context"),
        ClassDef(UCPO.UserContext, _fs(ctx), "User context"),
        ClassDef(UCPO.ProfileContext, _fs(ctx), "Profile context"),
        ClassDef(cdim, label="Context dimension", note=R),
        ClassDef(UCPO.Time, _fs(cdim), "Time"),
        ClassDef(UCPO.Location, _fs(cdim), "Location"),
        ClassDef(UCPO.Activity, _fs(cdim), "Activity"),
        ClassDef(UCPO.Device, _fs(cdim), "Device"),
        ClassDef(pref, label="Preference"),
    ]
    for name, label in (
        ("VehicleType", "Vehicle type"), ("RouteType", "Route type"), ("Mileage", "Mileage"),
        ("Color", "Color"), ("NumberOfPlaces", "Number of places"), ("State", "State"),
        ("Budget", "Budget"), ("Brand", "Brand"),
    ):
        out.append(ClassDef(UCPO[name], _fs(pref), label))
    out.append(ClassDef(UCPO.TransmissionPreference, _fs(pref), "Transmission preference", R))
    out.append(ClassDef(pp, label="Personal profile"))
    for name, label in (
        ("Gender", "Gender"), ("Address", "Address"), ("Occupation", "Occupation"),
        ("Income", "Income"), ("Language", "Language"), ("MaritalStatus", "Marital status"),
        ("Education", "Education"),
    ):
        out.append(ClassDef(UP[name], _fs(pp), label))
    for name, label in (
        ("Vehicle", "Vehicle"), ("Model", "Vehicle model"), ("Manufacturer", "Manufacturer"),
        ("BodyType", "Body type"), ("FuelType", "Fuel type"), ("Transmission", "Transmission"),
        ("ExteriorColor", "Exterior color"), ("VehicleCondition", "Vehicle condition"),
        ("DrivingEnvironment", "Driving environment"), ("UseCase", "Use case"),
    ):
        out.append(ClassDef(VO[name], label=label, note=R))
    return out


def _object_properties() -> list[ObjectPropertyDef]:
    R = RECONSTRUCTED
    ctx, cdim = UCPO.Context, UCPO.ContextDimension
    has_pp = UCPO.hasPersonalProfile

    def op(iri, domains, ranges, label, parents=(), note=None):
        return ObjectPropertyDef(iri, frozenset(domains), frozenset(ranges),
                                 frozenset(parents), label, note)

    return [
        op(UCPO.hasUserProfile, [UCPO.User], [UCPO.UserProfile], "has user profile"),
        # Context-typed ranges are declared alongside the specific class.
        op(UCPO.hasUserContext, [UCPO.User], [UCPO.UserContext, ctx], "has user context"),
        op(UCPO.hasProfileContext, [UCPO.UserProfile], [UCPO.ProfileContext, ctx],
           "has profile context"),
        op(UCPO.hasPreference, [UCPO.UserProfile], [UCPO.Preference], "has preference"),
        op(UCPO.hasVehiclePreference, [UCPO.UserProfile], [UCPO.Preference],
           "has vehicle preference", [UCPO.hasPreference]),
        op(has_pp, [UCPO.User], [UCPO.PersonalProfile], "has personal profile"),
        op(UCPO.hasTime, [ctx], [UCPO.Time, cdim], "has time"),
        op(UCPO.hasLocation, [ctx], [UCPO.Location, cdim], "has location"),
        op(UCPO.hasActivity, [ctx], [UCPO.Activity, cdim], "has activity"),
        op(UCPO.hasDevice, [ctx], [UCPO.Device, cdim], "has device"),
        # Second domain repeats the parent class for readers that only
        # look at the top of the context hierarchy.
        op(UCPO.likesModel, [UCPO.ProfileContext, ctx], [VO.Model], "likes model", note=R),
        op(UCPO.hasFavoriteBrand, [UCPO.Brand], [VO.Manufacturer], "has favorite brand"),
        op(UCPO.hasPreferredVehicleType, [UCPO.VehicleType], [VO.BodyType],
           "has preferred vehicle type", note=R),
        op(UCPO.hasPreferredRouteType, [UCPO.RouteType], [VO.DrivingEnvironment],
           "has preferred route type", note=R),
        op(UCPO.hasPreferredColor, [UCPO.Color], [VO.ExteriorColor], "has preferred color", note=R),
        op(UCPO.hasPreferredState, [UCPO.State], [VO.VehicleCondition],
           "has preferred state", note=R),
        op(UCPO.hasPreferredTransmission, [UCPO.TransmissionPreference], [VO.Transmission],
           "has preferred transmission", note=R),
        op(UP.hasGender, [UCPO.User], [UP.Gender], "has gender", [has_pp]),
        op(UP.hasOccupation, [UCPO.User], [UP.Occupation], "has occupation", [has_pp]),
        op(UP.hasMaritalStatus, [UCPO.User], [UP.MaritalStatus], "has marital status", [has_pp]),
        op(VO.hasModel, [VO.Vehicle], [VO.Model], "has model", note=R),
        op(VO.hasBrand, [VO.Model], [VO.Manufacturer], "has brand", note=R),
        op(VO.hasBodyType, [VO.Model], [VO.BodyType], "has body type", note=R),
        op(VO.hasFuelType, [VO.Vehicle], [VO.FuelType], "has fuel type", note=R),
        op(VO.hasColor, [VO.Vehicle], [VO.ExteriorColor], "has color", note=R),
        op(VO.hasCondition, [VO.Vehicle], [VO.VehicleCondition], "has condition", note=R),
        op(VO.hasUseCase, [VO.Model], [VO.UseCase], "has use case", note=R),
    ]


def _data_properties() -> list[DataPropertyDef]:
    R = RECONSTRUCTED
    pp = UCPO.PersonalProfile
    rows = [
        (UP.firstName, pp, XSD.string, "first name", None),
        (UP.lastName, pp, XSD.string, "last name", None),
        (UP.age, pp, XSD.integer, "age", None),
        (UP.numberOfChildren, pp, XSD.integer, "number of children", None),
        (UCPO.profileName, UCPO.UserProfile, XSD.string, "profile name", R),
        (UCPO.maxMileage, UCPO.Mileage, XSD.integer, "maximum mileage (km)", R),
        (UCPO.minSeats, UCPO.NumberOfPlaces, XSD.integer, "minimum number of seats", R),
        (UCPO.maxBudget, UCPO.Budget, XSD.decimal, "maximum budget (EUR)", R),
        (UCPO.timestamp, UCPO.Time, XSD.dateTime, "timestamp", R),
        (VO.modelName, VO.Model, XSD.string, "model name", R),
        (VO.price, VO.Vehicle, XSD.decimal, "price (EUR)", R),
        (VO.seats, VO.Vehicle, XSD.integer, "seats", R),
        (VO.mileage, VO.Vehicle, XSD.integer, "mileage (km)", R),
        (VO.safetyScore, VO.Vehicle, XSD.decimal, "safety score (0-5)", R),
        (VO.fuelEfficiency, VO.Vehicle, XSD.decimal, "fuel consumption (l/100 km)", R),
        (VO.productionYear, VO.Vehicle, XSD.integer, "production year", R),
    ]
    return [DataPropertyDef(iri, _fs(dom), dt, label, note) for iri, dom, dt, label, note in rows]


def _individuals() -> list[IndividualDef]:
    groups = [
        (UP.Gender, UP, [("male", "male"), ("female", "female")]),
        (UP.MaritalStatus, UP, [("single", "single"), ("married", "married"),
                                ("divorced", "divorced")]),
        (UP.Education, UP, [("secondaryEducation", "secondary education"),
                            ("bachelorDegree", "bachelor degree"),
                            ("masterDegree", "master degree")]),
        (UP.Language, UP, [("french", "French"), ("english", "English")]),
        (VO.BodyType, VO, [("sedan", "sedan"), ("suv", "SUV"), ("hatchback", "hatchback"),
                           ("minivan", "minivan"), ("coupe", "coupe"), ("pickup", "pickup")]),
        (VO.FuelType, VO, [("petrol", "petrol"), ("diesel", "diesel"), ("hybrid", "hybrid"),
                           ("electric", "electric")]),
        (VO.Transmission, VO, [("manual", "manual"), ("automatic", "automatic")]),
        (VO.ExteriorColor, VO, [("grey", "grey"), ("white", "white"), ("black", "black"),
                                ("blue", "blue"), ("red", "red")]),
        (VO.VehicleCondition, VO, [("newCondition", "new"), ("usedCondition", "used")]),
        (VO.DrivingEnvironment, VO, [("city", "city streets"), ("highway", "highway"),
                                     ("mixedRoads", "mixed roads"),
                                     ("countryside", "countryside")]),
        (VO.UseCase, VO, [("commuting", "commuting"), ("familyTravel", "family travel"),
                          ("businessTravel", "business travel"), ("leisure", "leisure"),
                          ("offRoad", "off-road driving")]),
    ]
    return [IndividualDef(ns[name], cls, label) for cls, ns, items in groups for name, label in items]


def descriptor() -> OntologyDescriptor:
    onto = OntologyDescriptor(_classes(), _object_properties(), _data_properties(),
                              default_prefixes(), _individuals())
    onto.check()
    return onto


def _lit(text: str) -> Literal:
    return Literal(text)


def tbox_graph(onto: OntologyDescriptor) -> Graph:
    g = Graph()
    add = g.insert
    add(Triple(ONTOLOGY_IRI, RDF_TYPE, OWL.Ontology))
    add(Triple(ONTOLOGY_IRI, RDFS.label, _lit("User Contextual Profile Ontology")))
    add(Triple(ONTOLOGY_IRI, RDFS.comment, _lit(
        "User profiles, per-profile context and vehicle preferences for vehicle sales.")))
    for c in onto.classes:
        add(Triple(c.iri, RDF_TYPE, OWL.Class))
        add(Triple(c.iri, RDFS.label, _lit(c.label)))
        for parent in c.parents:
            add(Triple(c.iri, RDFS.subClassOf, parent))
        if c.note:
            add(Triple(c.iri, RDFS.comment, _lit(c.note)))
    for p in onto.object_props:
        add(Triple(p.iri, RDF_TYPE, OWL.ObjectProperty))
        add(Triple(p.iri, RDFS.label, _lit(p.label)))
        for d in p.domains:
            add(Triple(p.iri, RDFS.domain, d))
        for r in p.ranges:
            add(Triple(p.iri, RDFS.range, r))
        for parent in p.parents:
            add(Triple(p.iri, RDFS.subPropertyOf, parent))
        if p.note:
            add(Triple(p.iri, RDFS.comment, _lit(p.note)))
    for p in onto.data_props:
        add(Triple(p.iri, RDF_TYPE, OWL.DatatypeProperty))
        add(Triple(p.iri, RDFS.label, _lit(p.label)))
        for d in p.domains:
            add(Triple(p.iri, RDFS.domain, d))
        add(Triple(p.iri, RDFS.range, p.datatype))
        if p.note:
            add(Triple(p.iri, RDFS.comment, _lit(p.note)))
    for ind in onto.individuals:
        add(Triple(ind.iri, RDF_TYPE, ind.cls))
        add(Triple(ind.iri, RDFS.label, _lit(ind.label)))
    return g


def build_ucpo() -> tuple[OntologyDescriptor, Graph]:
    onto = descriptor()
    return onto, tbox_graph(onto)


def data_path(name: str):
    return resources.files("ucpo") / "data" / name


def read_data(name: str) -> str:
    return data_path(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def _shipped(name: str) -> tuple[PrefixMap, frozenset[Triple]]:
    pm, g = parse(read_data(name), source=name)
    return pm, g.triple_set()


def schema_graph() -> Graph:
    """The shipped ``ucpo-schema.ttl``."""
    return Graph(_shipped(SCHEMA_FILE)[1])


def seed_data() -> Graph:
    """The shipped ``seed-data.ttl``: users, profiles, contexts and catalog."""
    return Graph(_shipped(SEED_FILE)[1])


def shipped_prefixes() -> PrefixMap:
    return _shipped(SCHEMA_FILE)[0].merged(_shipped(SEED_FILE)[0])


# -- validation --------------------------------------------------------------

VIOLATION_KINDS = ("unknown-class", "unknown-property", "domain-mismatch",
                   "range-mismatch", "datatype-mismatch")


@dataclass(frozen=True)
class ValidationViolation:
    subject: Term
    kind: str
    detail: str
    triple: Triple


def _datatype_ok(lit: Literal, datatype: Iri) -> bool:
    if lit.datatype == datatype:
        return True
    # xsd:integer values are valid xsd:decimal values.
    return datatype == XSD.decimal and lit.datatype == XSD.integer


def _is_schema_subject(onto: OntologyDescriptor, graph: Graph, s: Term) -> bool:
    if s == ONTOLOGY_IRI or s in onto.class_iris or onto.lookup(s) is not None:
        return True
    return any(t in META_TYPES for t in graph.objects(s, RDF_TYPE))


def validate(graph: Graph, onto: OntologyDescriptor, closure: Graph) -> list[ValidationViolation]:
    """Check every instance triple of ``graph`` against the ontology.

    Types come from explicit ``rdf:type`` assertions in ``graph``, widened
    through the class hierarchy in ``closure``. Types the reasoner derived
    from domain or range axioms are deliberately not used: they would make
    every domain and range check pass trivially. Properties inherit the
    domains and ranges of their super-properties.
    """
    declared = onto.class_iris
    asserted: dict[Term, set[Term]] = {}
    for t in graph.candidates(p=RDF_TYPE):
        asserted.setdefault(t.subject, set()).add(t.object)

    def types_of(x: Term) -> set[Term]:
        out: set[Term] = set()
        for c in asserted.get(x, ()):
            out |= superclasses(closure, c)
        return out

    def constraints(prop: Iri, kind: str) -> set[Term]:
        found: set[Term] = set()
        for sup in superproperties(closure, prop):
            defn = onto.lookup(sup)
            if defn is None:
                continue
            if kind == "domain":
                found |= defn.domains
            elif isinstance(defn, ObjectPropertyDef):
                found |= defn.ranges
        return found

    violations: list[ValidationViolation] = []
    for t in graph:
        s, p, o = t
        if _is_schema_subject(onto, graph, s):
            continue
        if p in ANNOTATION_PREDICATES:
            continue
        if p == RDF_TYPE:
            if o not in declared and o not in META_TYPES:
                violations.append(ValidationViolation(s, "unknown-class", f"{o} is not a declared class", t))
            continue
        if p in SCHEMA_PREDICATES:
            continue
        defn = onto.lookup(p)
        if defn is None:
            violations.append(ValidationViolation(s, "unknown-property", f"{p} is not declared", t))
            continue
        missing = constraints(p, "domain") - types_of(s)
        if missing:
            names = ", ".join(sorted(str(m) for m in missing))
            violations.append(ValidationViolation(s, "domain-mismatch",
                                                  f"subject of {p} is not a {names}", t))
        if isinstance(defn, DataPropertyDef):
            if not isinstance(o, Literal) or not _datatype_ok(o, defn.datatype):
                violations.append(ValidationViolation(
                    s, "datatype-mismatch", f"value of {p} must be {defn.datatype}", t))
            continue
        if isinstance(o, Literal):
            violations.append(ValidationViolation(s, "range-mismatch",
                                                  f"object of {p} must be a resource", t))
            continue
        missing = constraints(p, "range") - types_of(o)
        if missing:
            names = ", ".join(sorted(str(m) for m in missing))
            violations.append(ValidationViolation(s, "range-mismatch",
                                                  f"object of {p} is not a {names}", t))
    return violations
