from __future__ import annotations

from pathlib import Path

import pytest

from autoft import GenOptions, generate_bundle
from autoft.parser import Annotation, ParsedModule

ACCEPTANCE_RESULTS: list[str] = []


def record_acceptance(number: int, title: str, status: str, detail: str = "") -> None:
    extra = f" ({detail})" if detail else ""
    ACCEPTANCE_RESULTS.append(f"criterion {number} [{title}]: {status}{extra}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

FIXTURE_NAMES = ["fifo", "pipeline", "noc_buffer", "noc_buffer_buggy", "mmu_stub"]


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.sv"


def load_fixture(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")


def gen_fixture(name: str, **kwargs):
    opts = GenOptions(**kwargs) if kwargs else GenOptions(tool="both")
    return generate_bundle(load_fixture(name), str(fixture_path(name)), opts)


@pytest.fixture(scope="session")
def fixture_bundles():
    return {name: gen_fixture(name) for name in FIXTURE_NAMES}


def render_annotation(ann: Annotation) -> str:
    if ann.kind == "relation":
        rel = ann.payload
        arrow = "-in>" if rel.direction == "incoming" else "-out>"
        return f"{rel.tname}: {rel.p} {arrow} {rel.q}"
    attr = ann.payload
    width = f"{attr.width_expr} " if attr.width_expr else ""
    if attr.decl == "assign":
        return f"{width}{attr.field_name} = {attr.expr}"
    direction = "input" if attr.decl == "input_decl" else "output"
    return f"{direction} {width}{attr.field_name}"


def render_module(pm: ParsedModule) -> str:
    """Canonical single-file rendering used by the round-trip tests."""
    lines = [f"// AUTOSVA {render_annotation(a)}" for a in pm.annotations]
    header = f"module {pm.module_name}"
    if pm.parameters:
        params = ", ".join(f"parameter {p.name} = {p.value_expr}" for p in pm.parameters)
        header += f" #({params})"
    lines.append(header + " (")
    ports = []
    for s in pm.signals:
        if s.opaque_type:
            ports.append(f"    {s.direction} {s.opaque_type} {s.name}")
        else:
            width = f"{s.width_expr} " if s.width_expr else ""
            ports.append(f"    {s.direction} wire {width}{s.name}")
    lines.append(",\n".join(ports))
    lines.append(");")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def module_projection(pm: ParsedModule):
    """Structural view of a ParsedModule, ignoring spans and diagnostics."""
    return (
        pm.module_name,
        tuple((p.name, p.value_expr) for p in pm.parameters),
        tuple((s.direction, s.name, s.width_expr, s.opaque_type) for s in pm.signals),
        tuple((a.kind, a.payload) for a in pm.annotations),
    )
