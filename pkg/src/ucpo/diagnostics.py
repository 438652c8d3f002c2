from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    kind: str = "syntax"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.kind}: {self.message}"


class ParseError(ValueError):
    """Raised by the Turtle and query parsers; carries the diagnostics."""

    def __init__(self, diagnostics: list[ParseDiagnostic], source: str | None = None):
        self.diagnostics = list(diagnostics)
        self.source = source
        super().__init__(self._render())

    def _render(self) -> str:
        prefix = f"{self.source}:" if self.source else ""
        return "; ".join(f"{prefix}{d}" for d in self.diagnostics)

    def with_source(self, source: str) -> "ParseError":
        return type(self)(self.diagnostics, source)


def position(text: str, offset: int) -> tuple[int, int]:
    """1-based (line, column) of ``offset`` within ``text``."""
    offset = max(0, min(offset, len(text)))
    line = text.count("\n", 0, offset) + 1
    start = text.rfind("\n", 0, offset) + 1
    return line, offset - start + 1
