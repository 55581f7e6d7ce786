"""Render the testbench bundle: property module, bind file, tool drivers.

All output is a pure function of the parsed input and the options. Files use
LF line endings, end with a newline, and contain no timestamps or absolute
paths, so regenerating a bundle always reproduces it byte for byte.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import Diagnostic, GenerationError, UnsupportedToolError, error, errors_in
from .options import TOOL_BOTH, TOOL_JASPERGOLD, TOOL_SYMBIYOSYS, GenOptions
from .parser import ParsedModule, parse_module
from .properties import ASSUME, GeneratedProperty, apply_link_transforms, gen_properties, scope_names
from .signals import (
    KIND_ATTRIB_WIRE,
    KIND_COUNTER,
    KIND_HANDSHAKE,
    KIND_INFLIGHT,
    KIND_SAMPLED,
    KIND_SYMBOLIC,
    AuxSignal,
    TransactionAux,
    synth_module_aux,
)
from .transactions import Transaction, build_transactions

_BANNER = "Machine generated; do not edit."


@dataclass(frozen=True)
class GeneratedFile:
    name: str
    text: str


@dataclass
class TestbenchBundle:
    """Everything one generation run produces."""

    dut: str
    property_module: GeneratedFile
    bind_file: GeneratedFile
    tool_files: list[GeneratedFile]
    warnings: list[str]
    transactions: list[Transaction] = field(default_factory=list)
    properties: list[GeneratedProperty] = field(default_factory=list)
    aux: list[TransactionAux] = field(default_factory=list)
    parameters: list[str] = field(default_factory=list)
    opts: GenOptions = field(default_factory=GenOptions)
    source_module: ParsedModule | None = None

    def files(self) -> list[GeneratedFile]:
        return [self.property_module, self.bind_file, *self.tool_files]


def _render_width(width_expr: str) -> str:
    return f"{width_expr} " if width_expr else ""


def _port_lines(pm: ParsedModule) -> list[str]:
    """The DUT ports mirrored as inputs, plus explicitly declared attributes."""
    lines = []
    for sig in pm.signals:
        if sig.opaque_type:
            lines.append(f"input {sig.opaque_type} {sig.name}")
        else:
            lines.append(f"input wire {_render_width(sig.width_expr)}{sig.name}")
    for ann in pm.explicit_attribs():
        attr = ann.payload
        if attr.decl == "input_decl":
            lines.append(f"input wire {_render_width(attr.width_expr)}{attr.field_name}")
        elif attr.decl == "output_decl":
            lines.append(f"output wire {_render_width(attr.width_expr)}{attr.field_name}")
    return lines


def _always_reset(opts: GenOptions, reset_body: str, update_body: list[str]) -> list[str]:
    cond = opts.rst_expr
    lines = [f"always @(posedge {opts.clk}) begin", f"    if ({cond})", f"        {reset_body}"]
    lines += update_body
    lines.append("end")
    return lines


def _render_aux(aux: AuxSignal, opts: GenOptions) -> list[str]:
    w = _render_width(aux.width_expr)
    if aux.kind == KIND_ATTRIB_WIRE:
        return [f"wire {w}{aux.name} = {aux.refs['expr']};"]
    if aux.kind == KIND_HANDSHAKE:
        expr = aux.refs["val"]
        if "ack" in aux.refs:
            expr = f"{aux.refs['val']} && {aux.refs['ack']}"
        return [f"wire {aux.name} = {expr};"]
    if aux.kind == KIND_COUNTER:
        width_param = aux.refs["width_param"]
        limit_param = aux.refs["limit_param"]
        inc, dec = aux.refs["inc"], aux.refs["dec"]
        return [
            f"localparam {width_param} = $clog2({limit_param} + 1);",
            f"logic [{width_param}-1:0] {aux.name};",
            *_always_reset(
                opts,
                f"{aux.name} <= '0;",
                [
                    f"    else if ({inc} && !{dec})",
                    f"        {aux.name} <= {aux.name} + 1'b1;",
                    f"    else if ({dec} && !{inc})",
                    f"        {aux.name} <= {aux.name} - 1'b1;",
                ],
            ),
        ]
    if aux.kind == KIND_SYMBOLIC:
        return [
            f"(* anyconst *) logic {w}{aux.name};",
            f"{aux.name}_stable: assume property (@(posedge {opts.clk}) $stable({aux.name}));",
        ]
    if aux.kind == KIND_INFLIGHT:
        set_c = f"{aux.refs['set_hsk']} && ({aux.refs['set_id']} == {aux.refs['symb']})"
        clr_c = f"{aux.refs['clr_hsk']} && ({aux.refs['clr_id']} == {aux.refs['symb']})"
        return [
            f"logic {aux.name};",
            *_always_reset(
                opts,
                f"{aux.name} <= 1'b0;",
                [
                    f"    else if ({set_c})",
                    f"        {aux.name} <= 1'b1;",
                    f"    else if ({clr_c})",
                    f"        {aux.name} <= 1'b0;",
                ],
            ),
        ]
    if aux.kind == KIND_SAMPLED:
        cap = f"{aux.refs['hsk']} && ({aux.refs['id']} == {aux.refs['symb']})"
        return [
            f"logic {w}{aux.name};",
            *_always_reset(
                opts,
                f"{aux.name} <= '0;",
                [f"    else if ({cap})", f"        {aux.name} <= {aux.refs['data']};"],
            ),
        ]
    raise ValueError(f"unknown aux kind '{aux.kind}'")


def _render_property(p: GeneratedProperty, opts: GenOptions) -> list[str]:
    head = f"@(posedge {opts.clk}) disable iff ({opts.rst_expr})"
    body = f"{head}\n    {p.ltl_text}"
    if p.directive == ASSUME:
        return [
            f"if (ASSERT_INPUTS) begin : {p.name}_asrt",
            f"    {p.name}: assert property ({body});",
            f"end else begin : {p.name}_assm",
            f"    {p.name}: assume property ({body});",
            "end",
        ]
    return [f"{p.name}: {p.directive} property ({body});"]


def _relation_text(t: Transaction) -> str:
    arrow = "-in>" if t.direction == "incoming" else "-out>"
    return f"{t.tname}: {t.p.name} {arrow} {t.q.name}"


def emit_property_module(
    pm: ParsedModule,
    txns: list[Transaction],
    aux: list[TransactionAux],
    props: list[list[GeneratedProperty]],
    opts: GenOptions,
) -> GeneratedFile:
    """Render `<dut>_prop.sv` with modeling and properties per transaction."""
    dut = pm.module_name
    lines: list[str] = [f"// Interface transaction properties for {dut}. {_BANNER}", ""]

    params = [f"parameter {p.name} = {p.value_expr}" for p in pm.parameters]
    params.append(f"parameter ASSERT_INPUTS = {1 if opts.assert_inputs else 0}")
    for t in txns:
        limit = opts.outstanding_limit(t.tname)
        params.append(f"parameter {t.tname.upper()}_MAX_OUTSTANDING = {limit}")

    imports = f" {' '.join(pm.imports)}" if pm.imports else ""
    lines.append(f"module {dut}_prop{imports} #(")
    lines.extend(f"    {p}{',' if i < len(params) - 1 else ''}" for i, p in enumerate(params))
    lines.append(") (")
    ports = _port_lines(pm)
    lines.extend(f"    {p}{',' if i < len(ports) - 1 else ''}" for i, p in enumerate(ports))
    lines.append(");")

    for t, t_aux, t_props in zip(txns, aux, props):
        lines.append("")
        lines.append(f"// ---- transaction {_relation_text(t)} ----")
        lines.append("")
        for a in t_aux.signals:
            lines.extend(_render_aux(a, opts))
        regular = [p for p in t_props if p.guard_macro is None]
        guarded = [p for p in t_props if p.guard_macro == "XPROP"]
        for p in regular:
            lines.append("")
            lines.extend(_render_property(p, opts))
        if guarded:
            lines.append("")
            lines.append("`ifdef XPROP")
            for p in guarded:
                lines.extend(_render_property(p, opts))
            lines.append("`endif")

    lines.append("")
    lines.append("endmodule")
    return GeneratedFile(f"{dut}_prop.sv", "\n".join(lines) + "\n")


def emit_bind_file(pm: ParsedModule) -> GeneratedFile:
    """Render the bind unit attaching `<dut>_prop` inside every `<dut>`."""
    dut = pm.module_name
    lines = [f"// Bind {dut}_prop into {dut}. {_BANNER}"]
    if pm.parameters:
        lines.append(f"bind {dut} {dut}_prop #(")
        for i, p in enumerate(pm.parameters):
            comma = "," if i < len(pm.parameters) - 1 else ""
            lines.append(f"    .{p.name}({p.name}){comma}")
        lines.append(f") {dut}_prop_i (.*);")
    else:
        lines.append(f"bind {dut} {dut}_prop {dut}_prop_i (.*);")
    return GeneratedFile(f"{dut}_bind.svh", "\n".join(lines) + "\n")


def _sby_text(dut: str, sources: list[str], opts: GenOptions) -> str:
    lines = [f"# SymbiYosys configuration for {dut}. {_BANNER}"]
    depth = 20 if opts.bounded is None else max(20, opts.bounded * 2 + 10)
    if opts.bounded is None:
        lines += [
            "",
            "[tasks]",
            "prove",
            "live",
            "",
            "[options]",
            "prove: mode prove",
            "live: mode live",
            f"depth {depth}",
            "",
            "[engines]",
            "prove: smtbmc",
            "live: aiger suprove",
        ]
    else:
        lines += [
            "",
            "[options]",
            "mode prove",
            f"depth {depth}",
            "",
            "[engines]",
            "smtbmc",
        ]
    lines += ["", "[script]"]
    lines.append(f"read -formal -sv {' '.join(sources)}")
    lines.append(f"prep -top {dut}")
    lines += ["", "[files]"]
    lines.extend(sources)
    return "\n".join(lines) + "\n"


def _tcl_text(dut: str, sources: list[str], opts: GenOptions) -> str:
    lines = [
        f"# JasperGold setup for {dut}. {_BANNER}",
        "clear -all",
        f"analyze -sv12 {' '.join(sources)}",
        f"elaborate -top {dut}",
        f"clock {opts.clk}",
        f"reset -expression {{{opts.rst_expr}}}",
        "# Datapath abstraction: enable the datapath-ignore option of your",
        "# tool version here; the exact directive is license material.",
        "prove -all",
        "report",
    ]
    return "\n".join(lines) + "\n"


def emit_tool_files(
    pm: ParsedModule, tool: str, opts: GenOptions, extra_sources: tuple[str, ...] = ()
) -> list[GeneratedFile]:
    """Driver files for the selected proof tool(s).

    Sources are listed by basename; run the tool next to the bundle with the
    DUT file copied or linked alongside (see the README recipe).
    """
    dut = pm.module_name
    sources = [f"{dut}.sv", f"{dut}_prop.sv", f"{dut}_bind.svh", *extra_sources]
    if tool == TOOL_SYMBIYOSYS:
        return [GeneratedFile(f"{dut}.sby", _sby_text(dut, sources, opts))]
    if tool == TOOL_JASPERGOLD:
        return [GeneratedFile(f"{dut}.tcl", _tcl_text(dut, sources, opts))]
    if tool == TOOL_BOTH:
        return [
            GeneratedFile(f"{dut}.tcl", _tcl_text(dut, sources, opts)),
            GeneratedFile(f"{dut}.sby", _sby_text(dut, sources, opts)),
        ]
    raise UnsupportedToolError(f"unsupported tool '{tool}'")


def generate_bundle(source: str, path: str, opts: GenOptions) -> TestbenchBundle:
    """Run the whole pipeline on one annotated source text.

    Raises GenerationError carrying every collected diagnostic when any stage
    reports an error; warnings are attached to the returned bundle.
    """
    pm = parse_module(source, path)
    diags: list[Diagnostic] = list(pm.diagnostics)

    txns, build_diags = build_transactions(pm)
    diags.extend(build_diags)

    aux, synth_diags = synth_module_aux(txns, pm, opts)
    diags.extend(synth_diags)

    props: list[list[GeneratedProperty]] = []
    for t, t_aux in zip(txns, aux):
        t_props = gen_properties(t, t_aux, opts, diags)
        props.append(apply_link_transforms(t_props, assert_inputs=opts.assert_inputs))

    if errors_in(diags):
        raise GenerationError(diags)

    bundle = TestbenchBundle(
        dut=pm.module_name,
        property_module=emit_property_module(pm, txns, aux, props, opts),
        bind_file=emit_bind_file(pm),
        tool_files=emit_tool_files(pm, opts.tool, opts),
        warnings=[d.render() for d in diags],
        transactions=txns,
        properties=[p for group in props for p in group],
        aux=aux,
        parameters=[p.name for p in pm.parameters],
        opts=opts,
        source_module=pm,
    )
    return bundle


def generate_bundle_from_file(path: Path, opts: GenOptions) -> TestbenchBundle:
    return generate_bundle(path.read_text(encoding="utf-8"), str(path), opts)


def link_submodule_fts(
    parent: TestbenchBundle,
    children: list[tuple[TestbenchBundle, bool, bool]],
    flags: dict | None = None,
) -> TestbenchBundle:
    """Fold child testbenches into a parent bundle.

    `children` pairs each child bundle with its (am, as) flags; `flags` may
    instead give uniform {"AM": bool, "AS": bool} for every child. With am the
    parent property module gains a bind of the child's property module (with
    ASSERT_INPUTS=1 when as is also set) and the tool files list the child's
    files; without am the child leaves no trace in the parent.
    """
    if flags is not None:
        children = [(b, bool(flags.get("AM")), bool(flags.get("AS"))) for b, _, _ in children]

    tnames: dict[str, str] = {t.tname: parent.dut for t in parent.transactions}
    diags: list[Diagnostic] = []
    for child, am, _ in children:
        if not am:
            continue
        for t in child.transactions:
            if t.tname in tnames:
                diags.append(
                    error(
                        "duplicate-transaction-name",
                        f"transaction '{t.tname}' defined by both '{tnames[t.tname]}' and '{child.dut}'",
                    )
                )
            else:
                tnames[t.tname] = child.dut
    if diags:
        raise GenerationError(diags)

    bind_lines = []
    extra_sources: list[str] = []
    linked_props = list(parent.properties)
    for child, am, as_ in children:
        if not am:
            continue
        override = " #(.ASSERT_INPUTS(1))" if as_ else ""
        bind_lines.append(f"bind {child.dut} {child.dut}_prop{override} {child.dut}_prop_i (.*);")
        extra_sources += [f"{child.dut}.sv", f"{child.dut}_prop.sv"]
        child_props = apply_link_transforms(child.properties, mode="as" if as_ else "am")
        linked_props += scope_names(child_props, child.dut)

    if not bind_lines:
        return parent

    text = parent.property_module.text
    insert = "// ---- linked submodule testbenches ----\n" + "\n".join(bind_lines) + "\n\n"
    text = text.replace("endmodule\n", insert + "endmodule\n")

    pm = parent.source_module
    if pm is None:
        raise ValueError("parent bundle has no parsed module attached")
    return TestbenchBundle(
        dut=parent.dut,
        property_module=GeneratedFile(parent.property_module.name, text),
        bind_file=parent.bind_file,
        tool_files=emit_tool_files(pm, parent.opts.tool, parent.opts, tuple(extra_sources)),
        warnings=list(parent.warnings),
        transactions=parent.transactions,
        properties=linked_props,
        aux=parent.aux,
        parameters=parent.parameters,
        opts=parent.opts,
        source_module=pm,
    )


def write_bundle(bundle: TestbenchBundle, outdir: Path) -> Path:
    """Write all files under `<outdir>/<dut>/` and return that directory."""
    target = outdir / bundle.dut
    target.mkdir(parents=True, exist_ok=True)
    for f in bundle.files():
        (target / f.name).write_text(f.text, encoding="utf-8", newline="\n")
    return target
