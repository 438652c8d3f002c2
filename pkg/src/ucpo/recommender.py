"""Per-profile, context-aware vehicle recommendations.

Pipeline: read the active profile's preferences and its profile context from
a materialized closure, drop every listing that breaks a stated preference,
then rank the survivors by

    w_brand * brandAffinity + w_model * modelAffinity
      + w_attr * attributeFit + w_ctx * contextFit

with all arithmetic in exact fractions. Weights and the activity/route
mapping tables come from a flat ``key = value`` file; the packaged default
is ``data/recommender.conf`` and ``UCPO_CONFIG`` points at an override.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .rdf import RDF_TYPE, UCPO, VO, Graph, Iri, Literal, Term, term_key
from .schema import read_data

CONFIG_ENV = "UCPO_CONFIG"
CONFIG_FILE = "recommender.conf"

CRITERIA = ("brandAffinity", "modelAffinity", "attributeFit", "contextFit")
PREFERENCE_KINDS = ("vehicleType", "routeType", "maxMileage", "color", "minSeats",
                    "state", "maxBudget", "brand")
NEUTRAL = Fraction(1, 2)

# categorical preference kind -> property linking the preference node to its value
_CATEGORICAL = {
    "brand": UCPO.hasFavoriteBrand,
    "vehicleType": UCPO.hasPreferredVehicleType,
    "routeType": UCPO.hasPreferredRouteType,
    "color": UCPO.hasPreferredColor,
    "state": UCPO.hasPreferredState,
}


class NotFoundError(LookupError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScoringConfig:
    weights: Mapping[str, Fraction]
    activity_types: Mapping[Iri, frozenset] = field(default_factory=dict)
    route_use_cases: Mapping[Iri, frozenset] = field(default_factory=dict)


@dataclass(frozen=True)
class ActiveProfile:
    """Preferences keyed by kind. Categorical values are frozensets of IRIs;
    numeric values are Fractions (maxBudget) or ints (maxMileage, minSeats)."""

    user: Iri
    profile: Iri
    preferences: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class ContextSnapshot:
    time: Optional[Literal] = None
    location: Optional[Term] = None
    activity: Optional[Term] = None
    device: Optional[Term] = None
    liked_models: frozenset = frozenset()
    liked_brands: frozenset = frozenset()


@dataclass(frozen=True)
class VehicleListing:
    iri: Iri
    model: Optional[Iri]
    model_name: str
    brand: Optional[Iri]
    vehicle_type: Optional[Iri]
    price: Optional[Fraction]
    seats: Optional[int]
    mileage: Optional[int]
    color: Optional[Iri]
    state: Optional[Iri]
    safety_score: Optional[Fraction]
    fuel_type: Optional[Iri]
    use_cases: frozenset = frozenset()


@dataclass(frozen=True)
class Recommendation:
    listing: VehicleListing
    score: Fraction
    explanation: tuple[tuple[str, Fraction], ...]

    def to_json(self) -> dict:
        return {
            "iri": self.listing.iri.value,
            "model": self.listing.model_name,
            "score": _fixed(self.score),
            "explanation": [[name, _fixed(part)] for name, part in self.explanation],
        }


def _fixed(x: Fraction, places: int = 4) -> float:
    exact = Decimal(x.numerator) / Decimal(x.denominator)
    return float(exact.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP))


# -- configuration -------------------------------------------------------------

def _resolve(name: str, ns) -> Iri:
    return Iri(name) if "://" in name else ns[name]


def parse_config(text: str) -> ScoringConfig:
    """Parse ``weight.<criterion>``, ``activity.<name>`` and ``route.<name>``
    entries. Bare names resolve against ucpo: (keys) and vo: (values)."""
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#",), inline_comment_prefixes=None)
    cp.optionxform = str
    try:
        cp.read_string("[ucpo]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    weights: dict[str, Fraction] = {}
    activity: dict[Iri, frozenset] = {}
    route: dict[Iri, frozenset] = {}
    for key, value in cp["ucpo"].items():
        group, _, name = key.partition(".")
        if group == "weight":
            if name not in CRITERIA:
                raise ConfigError(f"unknown criterion {name!r}")
            try:
                weights[name] = Fraction(value.strip())
            except ValueError:
                raise ConfigError(f"weight.{name} is not a number: {value!r}") from None
            if weights[name] < 0:
                raise ConfigError(f"weight.{name} is negative")
        elif group == "activity":
            activity[_resolve(name, UCPO)] = frozenset(_resolve(v, VO) for v in value.split())
        elif group == "route":
            route[_resolve(name, VO)] = frozenset(_resolve(v, VO) for v in value.split())
        else:
            raise ConfigError(f"unknown key {key!r}")
    missing = [c for c in CRITERIA if c not in weights]
    if missing:
        raise ConfigError(f"missing weights: {', '.join(missing)}")
    if sum(weights.values()) != 1:
        raise ConfigError("weights must sum to 1")
    return ScoringConfig(weights, activity, route)


def load_config(path: Optional[os.PathLike] = None) -> ScoringConfig:
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return parse_config(read_data(CONFIG_FILE))
    return parse_config(Path(path).read_text(encoding="utf-8"))


# -- extraction ----------------------------------------------------------------

def _first(g: Graph, s: Term, p: Iri) -> Optional[Term]:
    values = g.objects(s, p)
    return values[0] if values else None


def _number(term: Optional[Term]) -> Optional[Fraction]:
    if isinstance(term, Literal) and term.is_numeric:
        return Fraction(term.number())
    return None


def extract_profile(closure: Graph, user: Iri, profile: Iri) -> tuple[ActiveProfile, ContextSnapshot]:
    if not closure.contains((user, UCPO.hasUserProfile, profile)):
        if not closure.contains((user, RDF_TYPE, UCPO.User)):
            raise NotFoundError(f"unknown user {user}")
        raise NotFoundError(f"{user} has no profile {profile}")

    prefs: dict[str, object] = {}
    # hasPreference covers hasVehiclePreference once the closure is taken.
    for node in closure.objects(profile, UCPO.hasPreference):
        for kind, prop in _CATEGORICAL.items():
            found = closure.objects(node, prop)
            if found:
                prefs[kind] = prefs.get(kind, frozenset()) | frozenset(found)
        # Several numeric limits of one kind: the strictest wins.
        for kind, prop, pick in (("maxBudget", UCPO.maxBudget, min),
                                 ("maxMileage", UCPO.maxMileage, min),
                                 ("minSeats", UCPO.minSeats, max)):
            for lit in closure.objects(node, prop):
                value = _number(lit)
                if value is None or value < 0:
                    continue
                if kind != "maxBudget":
                    value = int(value)
                prefs[kind] = pick(prefs[kind], value) if kind in prefs else value

    time = location = activity = device = None
    liked: set[Term] = set()
    for ctx in closure.objects(profile, UCPO.hasProfileContext):
        t = _first(closure, ctx, UCPO.hasTime)
        if t is not None and time is None:
            stamp = _first(closure, t, UCPO.timestamp)
            time = stamp if isinstance(stamp, Literal) else None
        location = location or _first(closure, ctx, UCPO.hasLocation)
        activity = activity or _first(closure, ctx, UCPO.hasActivity)
        device = device or _first(closure, ctx, UCPO.hasDevice)
        liked.update(closure.objects(ctx, UCPO.likesModel))
    brands = {b for m in liked for b in closure.objects(m, VO.hasBrand)}
    snapshot = ContextSnapshot(time, location, activity, device, frozenset(liked), frozenset(brands))
    return ActiveProfile(user, profile, prefs), snapshot


def listings(closure: Graph) -> list[VehicleListing]:
    """Every ``vo:Vehicle`` in the closure, in canonical IRI order."""
    out = []
    for v in closure.subjects(RDF_TYPE, VO.Vehicle):
        if not isinstance(v, Iri):
            continue
        model = _first(closure, v, VO.hasModel)
        name = _first(closure, model, VO.modelName) if model is not None else None
        seats, mileage = _number(_first(closure, v, VO.seats)), _number(_first(closure, v, VO.mileage))
        out.append(VehicleListing(
            iri=v,
            model=model,
            model_name=name.lexical if isinstance(name, Literal) else (model.value if model else v.value),
            brand=_first(closure, model, VO.hasBrand) if model is not None else None,
            vehicle_type=_first(closure, model, VO.hasBodyType) if model is not None else None,
            price=_number(_first(closure, v, VO.price)),
            seats=None if seats is None else int(seats),
            mileage=None if mileage is None else int(mileage),
            color=_first(closure, v, VO.hasColor),
            state=_first(closure, v, VO.hasCondition),
            safety_score=_number(_first(closure, v, VO.safetyScore)),
            fuel_type=_first(closure, v, VO.hasFuelType),
            use_cases=frozenset(closure.objects(model, VO.hasUseCase)) if model is not None else frozenset(),
        ))
    return out


# -- filtering and scoring -----------------------------------------------------

def satisfies(listing: VehicleListing, p: ActiveProfile) -> bool:
    prefs = p.preferences
    checks = (
        ("maxBudget", listing.price, lambda have, want: have <= want),
        ("maxMileage", listing.mileage, lambda have, want: have <= want),
        ("minSeats", listing.seats, lambda have, want: have >= want),
        ("brand", listing.brand, lambda have, want: have in want),
        ("vehicleType", listing.vehicle_type, lambda have, want: have in want),
        ("color", listing.color, lambda have, want: have in want),
        ("state", listing.state, lambda have, want: have in want),
    )
    for kind, have, ok in checks:
        if kind in prefs and (have is None or not ok(have, prefs[kind])):
            return False
    return True


def filter_hard(candidates: Sequence[VehicleListing], p: ActiveProfile) -> list[VehicleListing]:
    return [c for c in candidates if satisfies(c, p)]


def _closeness(value, limit) -> Fraction:
    if limit == 0:
        return Fraction(1) if value == 0 else Fraction(0)
    return min(Fraction(1), max(Fraction(0), 1 - Fraction(value) / Fraction(limit)))


def attribute_fit(listing: VehicleListing, p: ActiveProfile, cfg: ScoringConfig) -> Fraction:
    terms: list[Fraction] = []
    prefs = p.preferences
    if "maxBudget" in prefs:
        terms.append(_closeness(listing.price or 0, prefs["maxBudget"]))
    if "maxMileage" in prefs:
        terms.append(_closeness(listing.mileage or 0, prefs["maxMileage"]))
    if "minSeats" in prefs:
        terms.append(Fraction(int(listing.seats is not None and listing.seats >= prefs["minSeats"])))
    for kind, have in (("brand", listing.brand), ("vehicleType", listing.vehicle_type),
                       ("color", listing.color), ("state", listing.state)):
        if kind in prefs:
            terms.append(Fraction(int(have in prefs[kind])))
    if "routeType" in prefs:
        suited = frozenset().union(*(cfg.route_use_cases.get(r, frozenset())
                                     for r in prefs["routeType"]))
        terms.append(Fraction(int(bool(suited & listing.use_cases))) if suited else NEUTRAL)
    if not terms:
        return NEUTRAL
    return sum(terms, Fraction(0)) / len(terms)


def context_fit(listing: VehicleListing, c: ContextSnapshot, cfg: ScoringConfig) -> Fraction:
    implied = cfg.activity_types.get(c.activity) if c.activity is not None else None
    if not implied:
        return NEUTRAL
    return Fraction(1) if listing.vehicle_type in implied else Fraction(0)


def components(listing: VehicleListing, p: ActiveProfile, c: ContextSnapshot,
               cfg: ScoringConfig) -> dict[str, Fraction]:
    return {
        "brandAffinity": Fraction(int(listing.brand is not None and listing.brand in c.liked_brands)),
        "modelAffinity": Fraction(int(listing.model is not None and listing.model in c.liked_models)),
        "attributeFit": attribute_fit(listing, p, cfg),
        "contextFit": context_fit(listing, c, cfg),
    }


def explain(listing: VehicleListing, p: ActiveProfile, c: ContextSnapshot,
            cfg: ScoringConfig) -> tuple[tuple[str, Fraction], ...]:
    parts = components(listing, p, c, cfg)
    return tuple((name, cfg.weights[name] * parts[name]) for name in CRITERIA)


def score(listing: VehicleListing, p: ActiveProfile, c: ContextSnapshot,
          cfg: Optional[ScoringConfig] = None) -> Fraction:
    cfg = cfg or load_config()
    return sum((part for _, part in explain(listing, p, c, cfg)), Fraction(0))


def rank(candidates: Sequence[VehicleListing], p: ActiveProfile, c: ContextSnapshot,
         cfg: ScoringConfig) -> list[Recommendation]:
    recs = []
    for listing in candidates:
        parts = explain(listing, p, c, cfg)
        recs.append(Recommendation(listing, sum((x for _, x in parts), Fraction(0)), parts))
    recs.sort(key=lambda r: (-r.score, r.listing.model_name, term_key(r.listing.iri)))
    return recs


def recommend(closure: Graph, user: Iri, profile: Iri, k: int,
              cfg: Optional[ScoringConfig] = None) -> list[Recommendation]:
    if k < 1:
        raise ValueError("k must be at least 1")
    cfg = cfg or load_config()
    active, snapshot = extract_profile(closure, user, profile)
    return rank(filter_hard(listings(closure), active), active, snapshot, cfg)[:k]
