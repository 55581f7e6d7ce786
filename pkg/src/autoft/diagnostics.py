"""Source locations, diagnostics, and error types shared by all stages.

Every parse or validation problem is reported as a :class:`Diagnostic` so a
single run can surface all of them at once instead of stopping at the first.
Only conditions that make it impossible to continue (no module header, an
unterminated annotation region) are raised as exceptions.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """A 1-based position in an input file."""

    file: str
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1:
            raise ValueError(f"span must be 1-based, got {self.line}:{self.column}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    """One reportable problem, keyed by a stable machine-readable code."""

    severity: str  # "error" or "warning"
    code: str
    message: str
    span: SourceSpan | None = None
    snippet: str = ""

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def render(self, color: bool = False) -> str:
        loc = f"{self.span}: " if self.span else ""
        sev = self.severity
        if color:
            tint = "\x1b[31m" if self.is_error else "\x1b[33m"
            sev = f"{tint}{self.severity}\x1b[0m"
        text = f"{loc}{sev}[{self.code}]: {self.message}"
        if self.snippet:
            text += f"\n    {self.snippet.strip()}"
        return text


def error(code: str, message: str, span: SourceSpan | None = None, snippet: str = "") -> Diagnostic:
    return Diagnostic("error", code, message, span, snippet)


def warning(code: str, message: str, span: SourceSpan | None = None, snippet: str = "") -> Diagnostic:
    return Diagnostic("warning", code, message, span, snippet)


def errors_in(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.is_error]


class AutoFtError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AutoFtError):
    """Input could not be parsed far enough to continue.

    Carries the diagnostics collected up to the fatal point.
    """

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(d.message for d in diagnostics) or "parse error")


class GenerationError(AutoFtError):
    """Validation failed, no testbench was produced."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__(f"{len(errors_in(diagnostics))} validation error(s)")


class UnknownSignalError(AutoFtError):
    """A property references a signal the trace does not define."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"trace has no column for signal '{name}'")


class SpaceTooLargeError(AutoFtError):
    """Requested trace enumeration exceeds the configured bound."""


class UnsupportedToolError(AutoFtError):
    """Requested an output flavor for a tool this generator does not know."""
