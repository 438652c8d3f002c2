"""Knowledge-graph engine for the User Contextual Profile Ontology (UCPO)."""

__version__ = "0.1.0"
