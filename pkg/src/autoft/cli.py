"""Command line front end.

Subcommands:

* `gen`    parse one annotated RTL file and write the testbench bundle;
* `check`  generate in memory and run the built-in reference machine for the
           module over the generated properties;
* `link`   generate a parent and child bundles and fold the children into the
           parent's testbench.

Exit codes: 0 success, 1 validation or check failure (every diagnostic is
printed, not just the first), 2 usage errors. Warnings go to stderr and never
block generation. Set AUTOFT_COLOR=1/0 to force or suppress colored
diagnostics.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .diagnostics import Diagnostic, GenerationError, ParseError
from .emit import TestbenchBundle, generate_bundle, link_submodule_fts, write_bundle
from .models import MODEL_REGISTRY, check_bundle_on_model
from .options import DEFAULT_MAX_OUTSTANDING, TOOLS, GenOptions, SubmoduleLink

USAGE_ERROR = 2
VALIDATION_ERROR = 1


def _use_color() -> bool:
    env = os.environ.get("AUTOFT_COLOR")
    if env == "1":
        return True
    if env == "0":
        return False
    return sys.stderr.isatty()


def _print_diagnostics(diags: list[Diagnostic]) -> None:
    color = _use_color()
    for d in diags:
        print(d.render(color), file=sys.stderr)


def _print_warnings(bundle: TestbenchBundle) -> None:
    for w in bundle.warnings:
        print(w, file=sys.stderr)


def _parse_max_outstanding(values: list[str] | None) -> tuple[int, dict[str, int]]:
    default = DEFAULT_MAX_OUTSTANDING
    overrides: dict[str, int] = {}
    for item in values or []:
        try:
            if "=" in item:
                tname, _, num = item.partition("=")
                overrides[tname.strip()] = int(num)
            else:
                default = int(item)
        except ValueError:
            raise ValueError(f"--max-outstanding expects N or TNAME=N, got '{item}'") from None
    return default, overrides


def _options_from_args(args: argparse.Namespace) -> GenOptions:
    default, overrides = _parse_max_outstanding(getattr(args, "max_outstanding", None))
    return GenOptions(
        input_path=Path(args.input),
        outdir=Path(getattr(args, "outdir", "out")),
        tool=getattr(args, "tool", "symbiyosys"),
        clk=args.clk,
        rst=args.rst,
        rst_active_low=not args.rst_active_high,
        assert_inputs=getattr(args, "assert_inputs", False),
        bounded=getattr(args, "bounded", None),
        max_outstanding=default,
        max_outstanding_overrides=overrides,
    )


def _generate(path: Path, opts: GenOptions) -> TestbenchBundle:
    return generate_bundle(path.read_text(encoding="utf-8"), str(path), opts)


def _cmd_gen(args: argparse.Namespace) -> int:
    path = Path(args.input)
    if not path.is_file():
        print(f"error: input file '{path}' not found", file=sys.stderr)
        return USAGE_ERROR
    try:
        opts = _options_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        bundle = _generate(path, opts)
    except (GenerationError, ParseError) as exc:
        _print_diagnostics(exc.diagnostics)
        return VALIDATION_ERROR
    _print_warnings(bundle)
    target = write_bundle(bundle, opts.outdir)
    for f in bundle.files():
        print(f"wrote {target / f.name}")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    path = Path(args.input)
    if not path.is_file():
        print(f"error: input file '{path}' not found", file=sys.stderr)
        return USAGE_ERROR
    try:
        opts = _options_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        bundle = _generate(path, opts)
    except (GenerationError, ParseError) as exc:
        _print_diagnostics(exc.diagnostics)
        return VALIDATION_ERROR
    _print_warnings(bundle)
    factory = MODEL_REGISTRY.get(bundle.dut)
    if factory is None:
        known = ", ".join(sorted(MODEL_REGISTRY))
        print(f"error: no reference model for module '{bundle.dut}' (known: {known})", file=sys.stderr)
        return USAGE_ERROR
    model = factory()
    report = check_bundle_on_model(bundle.transactions, bundle.properties, model)
    print(report.summary())
    violated = report.violated()
    if violated:
        print(f"{len(violated)} violated verdict(s):", file=sys.stderr)
        for e in violated:
            ids = " ".join(f"{n}={v}" for n, v in e.symb_values)
            where = f"trace {e.trace_index}" + (f", {ids}" if ids else "")
            print(f"  {e.verdict} [{e.kind}, {where}]", file=sys.stderr)
        return VALIDATION_ERROR
    return 0


def _parse_child_spec(spec: str) -> tuple[Path, bool, bool]:
    path_text, _, flag_text = spec.partition("=")
    flags = {f.strip() for f in flag_text.split(",") if f.strip()}
    unknown = flags - {"am", "as"}
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown child flags {sorted(unknown)} in '{spec}'")
    return Path(path_text), "am" in flags, "as" in flags


def _cmd_link(args: argparse.Namespace) -> int:
    parent_path = Path(args.input)
    if not parent_path.is_file():
        print(f"error: input file '{parent_path}' not found", file=sys.stderr)
        return USAGE_ERROR
    children_specs = []
    for spec in args.child or []:
        try:
            children_specs.append(_parse_child_spec(spec))
        except argparse.ArgumentTypeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return USAGE_ERROR
    for child_path, _, _ in children_specs:
        if not child_path.is_file():
            print(f"error: child file '{child_path}' not found", file=sys.stderr)
            return USAGE_ERROR
    try:
        opts = _options_from_args(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    opts.submodule_links = [
        SubmoduleLink(path=p, am=am, as_=as_) for p, am, as_ in children_specs
    ]
    try:
        parent = _generate(parent_path, opts)
        children = []
        for child_path, am, as_ in children_specs:
            children.append((_generate(child_path, opts), am, as_))
        linked = link_submodule_fts(parent, children)
    except (GenerationError, ParseError) as exc:
        _print_diagnostics(exc.diagnostics)
        return VALIDATION_ERROR
    _print_warnings(linked)
    target = write_bundle(linked, opts.outdir)
    for f in linked.files():
        print(f"wrote {target / f.name}")
    for child, am, _ in children:
        if am:
            child_dir = write_bundle(child, opts.outdir)
            for f in child.files():
                print(f"wrote {child_dir / f.name}")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", help="annotated RTL file")
    parser.add_argument("--clk", default="clk", help="clock port name (default: clk)")
    parser.add_argument("--rst", default="rst_n", help="reset port name (default: rst_n)")
    parser.add_argument(
        "--rst-active-high", action="store_true",
        help="treat the reset as active high (default: active low)",
    )
    parser.add_argument(
        "--bounded", type=int, metavar="N",
        help="replace unbounded eventualities with an N-cycle window",
    )
    parser.add_argument(
        "--max-outstanding", action="append", metavar="N|TNAME=N",
        help="outstanding counter capacity, globally or per transaction",
    )


def _add_gen_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-o", "--outdir", default="out", help="output directory (default: out)")
    parser.add_argument("--tool", choices=TOOLS, default="symbiyosys", help="proof tool to drive")
    parser.add_argument(
        "--assert-inputs", action="store_true",
        help="emit with ASSERT_INPUTS=1 so environment assumptions become assertions",
    )


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autoft",
        description="Generate formal testbenches from annotated RTL module interfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a testbench bundle")
    _add_common(gen)
    _add_gen_flags(gen)
    gen.set_defaults(func=_cmd_gen)

    check = sub.add_parser("check", help="run the built-in reference machine against the generated properties")
    _add_common(check)
    check.set_defaults(func=_cmd_check)

    link = sub.add_parser("link", help="generate a parent bundle with child testbenches folded in")
    _add_common(link)
    _add_gen_flags(link)
    link.add_argument(
        "--child", action="append", metavar="PATH[=am[,as]]",
        help="child RTL file with link flags, repeatable",
    )
    link.set_defaults(func=_cmd_link)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
