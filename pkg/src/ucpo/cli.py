"""Command-line entry point.

    ucpo [--schema FILE] [--data FILE ...] COMMAND [options] [--then COMMAND [options]] ...

Commands share one session per invocation. Without an explicit ``load`` the
session reads ``--schema`` and ``--data`` (the packaged files by default).
Exit status: 0 success, 1 domain failure (violations, failing CQs, unknown
user or profile), 2 usage, parse or file errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import cq, metrics, recommender
from .diagnostics import ParseError
from .rdf import UCPO, Graph, Iri, PrefixError, PrefixMap, StructuralError, expand
from .reasoner import CycleError, materialize
from .schema import (
    SCHEMA_FILE,
    SEED_FILE,
    OntologyDescriptor,
    data_path,
    descriptor,
    validate,
)
from .sparql import execute, parse_query
from .turtle import parse_file, serialize

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
THEN = "--then"


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class Session:
    paths: list[str]
    prefixes: PrefixMap = field(default_factory=PrefixMap)
    raw: Optional[Graph] = None
    closure: Optional[Graph] = None
    onto: Optional[OntologyDescriptor] = None
    diagnostics: list[str] = field(default_factory=list)

    def load(self, paths: Sequence[str]) -> None:
        prefixes, graph = PrefixMap(), Graph()
        for path in map(_locate, paths):
            if not Path(path).is_file():
                raise CommandError(f"{path}: no such file", EXIT_USAGE)
            try:
                pm, g = parse_file(path)
            except ParseError as err:
                self.diagnostics = [str(err)]
                raise CommandError(str(err), EXIT_USAGE) from None
            prefixes = prefixes.merged(pm)
            graph.update(g.triple_set())
        try:
            closure = materialize(graph).graph
        except CycleError as err:
            raise CommandError(str(err), EXIT_DOMAIN) from None
        self.paths = list(paths)
        self.prefixes, self.raw, self.closure = prefixes, graph, closure
        self.onto = descriptor()
        self.diagnostics = []

    def ensure(self) -> None:
        if self.closure is None:
            self.load(self.paths)


def _locate(path: str) -> str:
    """A local file wins; a bare name falls back to the packaged data file."""
    if Path(path).is_file() or Path(path).name != path:
        return path
    packaged = data_path(path)
    return str(packaged) if packaged.is_file() else path


def _default_paths(schema: Optional[str], data: Optional[list[str]]) -> list[str]:
    schema = schema or str(data_path(SCHEMA_FILE))
    data = data if data is not None else [str(data_path(SEED_FILE))]
    return [schema, *data]


def _resolve(name: str, pm: PrefixMap) -> Iri:
    """Bare names are ucpo: local names; ``p:x`` expands; ``<iri>`` is taken as is."""
    try:
        if name.startswith("<") and name.endswith(">"):
            return Iri(name[1:-1])
        if "://" in name:
            return Iri(name)
        if ":" in name:
            return expand(name, pm)
        return UCPO[name]
    except (PrefixError, StructuralError) as exc:
        raise CommandError(f"cannot resolve {name!r}: {exc}", EXIT_USAGE) from None


# -- commands ------------------------------------------------------------------

def cmd_load(s: Session, a, out: TextIO) -> int:
    s.load(a.paths)
    out.write(f"loaded {len(s.raw)} triples from {len(a.paths)} file(s); "
              f"closure has {len(s.closure)} triples\n")
    return EXIT_OK


def cmd_validate(s: Session, a, out: TextIO) -> int:
    s.ensure()
    violations = validate(s.raw, s.onto, s.closure)
    for v in violations:
        out.write(f"{v.kind}\t{v.subject}\t{v.detail}\n")
    out.write(f"{len(violations)} violation(s)\n")
    return EXIT_DOMAIN if violations else EXIT_OK


def cmd_query(s: Session, a, out: TextIO) -> int:
    if (a.file is None) == (a.expr is None):
        raise CommandError("query needs exactly one of FILE or -e TEXT", EXIT_USAGE)
    if a.file is not None:
        try:
            text = Path(_locate(a.file)).read_text(encoding="utf-8")
        except OSError as exc:
            raise CommandError(f"{a.file}: {exc.strerror or exc}", EXIT_USAGE) from None
        source = a.file
    else:
        text, source = a.expr, "<query>"
    s.ensure()
    try:
        query = parse_query(text, cq.query_prefixes(s.prefixes))
    except ParseError as err:
        raise CommandError(str(err.with_source(source)), EXIT_USAGE) from None
    out.write(execute(query, s.closure).to_tsv())
    return EXIT_OK


def cmd_metrics(s: Session, a, out: TextIO) -> int:
    s.ensure()
    try:
        doc = metrics.report(s.raw)
    except metrics.UndefinedMetricError as err:
        raise CommandError(str(err), EXIT_DOMAIN) from None
    if a.json:
        out.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_OK
    for key, value in doc["base"].items():
        out.write(f"{key:<22} {value}\n")
    for key, value in doc["schema"].items():
        out.write(f"{key:<22} {value:.6f}\n")
    out.write(f"{'expressivity':<22} {doc['expressivity']}\n")
    return EXIT_OK


def cmd_recommend(s: Session, a, out: TextIO) -> int:
    if a.k < 1:
        raise CommandError("--k must be at least 1", EXIT_USAGE)
    s.ensure()
    try:
        cfg = recommender.load_config()
    except (OSError, recommender.ConfigError) as exc:
        raise CommandError(f"recommender config: {exc}", EXIT_USAGE) from None
    user, profile = _resolve(a.user, s.prefixes), _resolve(a.profile, s.prefixes)
    try:
        recs = recommender.recommend(s.closure, user, profile, a.k, cfg)
    except recommender.NotFoundError as err:
        raise CommandError(str(err), EXIT_DOMAIN) from None
    out.write(json.dumps([r.to_json() for r in recs], indent=2) + "\n")
    return EXIT_OK


def cmd_cq(s: Session, a, out: TextIO) -> int:
    s.ensure()
    results = cq.run_all(s.closure, prefixes=s.prefixes)
    out.write(cq.format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_DOMAIN


def cmd_serialize(s: Session, a, out: TextIO) -> int:
    s.ensure()
    text = serialize(s.raw, s.prefixes)
    if a.out:
        try:
            Path(a.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise CommandError(f"{a.out}: {exc.strerror or exc}", EXIT_USAGE) from None
    else:
        out.write(text)
    return EXIT_OK


# -- argument handling ---------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CommandError(f"{self.prog}: {message}", EXIT_USAGE)


def _global_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ucpo", add_help=True,
                description="User Contextual Profile Ontology toolkit.")
    p.add_argument("--schema", help="TBox Turtle file (default: packaged schema)")
    p.add_argument("--data", action="append",
                   help="ABox Turtle file, repeatable (default: packaged seed data)")
    return p


def _command_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ucpo")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    c = sub.add_parser("load", help="load Turtle files into the session")
    c.add_argument("paths", nargs="+")
    c.set_defaults(run=cmd_load)
    sub.add_parser("validate", help="check instance data").set_defaults(run=cmd_validate)
    c = sub.add_parser("query", help="run a query file or inline text, print TSV")
    c.add_argument("file", nargs="?")
    c.add_argument("-e", dest="expr", metavar="TEXT")
    c.set_defaults(run=cmd_query)
    c = sub.add_parser("metrics", help="base and schema metrics")
    c.add_argument("--json", action="store_true")
    c.set_defaults(run=cmd_metrics)
    c = sub.add_parser("recommend", help="top-k vehicles for a user profile, as JSON")
    c.add_argument("--user", required=True)
    c.add_argument("--profile", required=True)
    c.add_argument("--k", type=int, default=3)
    c.set_defaults(run=cmd_recommend)
    sub.add_parser("cq", help="run the competency-question suite").set_defaults(run=cmd_cq)
    c = sub.add_parser("serialize", help="write the loaded graph as canonical Turtle")
    c.add_argument("--out")
    c.set_defaults(run=cmd_serialize)
    return p


def _split(argv: Sequence[str]) -> list[list[str]]:
    chunks: list[list[str]] = [[]]
    for arg in argv:
        if arg == THEN:
            chunks.append([])
        else:
            chunks[-1].append(arg)
    return chunks


_COMMANDS = ("load", "validate", "query", "metrics", "recommend", "cq", "serialize")


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None,
         err: Optional[TextIO] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    err = err or sys.stderr
    chunks = _split(argv)
    head = chunks[0]
    first_cmd = next((i for i, x in enumerate(head) if x in _COMMANDS), len(head))
    try:
        if "-h" in head[:first_cmd] or "--help" in head[:first_cmd] or not head:
            _global_parser().print_help(out)
            _command_parser().print_help(out)
            return EXIT_OK if head else EXIT_USAGE
        opts = _global_parser().parse_args(head[:first_cmd])
        chunks[0] = head[first_cmd:]
        commands = [_command_parser().parse_args(chunk) for chunk in chunks]
        session = Session(_default_paths(opts.schema, opts.data))
        for a in commands:
            code = a.run(session, a, out)
            if code != EXIT_OK:
                return code
        return EXIT_OK
    except CommandError as exc:
        err.write(f"error: {exc}\n")
        return exc.code
    except SystemExit as exc:  # argparse --help inside a command
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
