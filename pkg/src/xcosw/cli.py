"""Command-line front end.

    xcosw validate <file>
    xcosw simulate <file> [--tf 3 --solver adaptive --out run.csv --plot run.png]
    xcosw convert <file> --to xml|json [--out <file>]
    xcosw blocks
    xcosw serve [--port 8080 --jobs 4 --static-dir frontend/dist]

Exit codes: 0 success, 1 validation or simulation failure, 2 I/O and parse
problems (argparse also uses 2 for bad flags).  Diagnostics and error text go
to stderr except for `validate`, whose diagnostic listing is its output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .blocks import palette_json
from .compiler import compile_diagram, validate
from .export import dumps_result, export_csv
from .interchange import SchemaViolationError, from_interchange_json, to_interchange_json
from .model import Diagram, DiagramError, OptionsError
from .solver import SolverError, simulate
from .xcosxml import XcosXmlError, parse_xcos_xml, serialize_xcos_xml

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


def _fail(message: str, code: int) -> int:
    print(f"xcosw: {message}", file=sys.stderr)
    return code


def load_diagram_file(path: str) -> Diagram:
    """Read a diagram from disk, picking the format by extension or content.

    Raises:
        OSError: unreadable file.
        XcosXmlError, SchemaViolationError, DiagramError: unparseable content.
    """
    data = Path(path).read_bytes()
    name = path.lower()
    if name.endswith(".json"):
        return from_interchange_json(data)
    if name.endswith(".xml"):
        return parse_xcos_xml(data)
    head = data.lstrip()[:1]
    if head == b"{":
        return from_interchange_json(data)
    return parse_xcos_xml(data)


def _write_output(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
        print(f"xcosw: wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(data.decode("utf-8"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xcosw",
        description="Block-diagram simulation workbench (validate, simulate, "
                    "convert, serve).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="report diagnostics for a diagram file")
    p.add_argument("file")

    p = sub.add_parser("simulate", help="run a diagram and export the result")
    p.add_argument("file")
    p.add_argument("--t0", type=float, default=None, help="start time [s]")
    p.add_argument("--tf", type=float, default=None, help="final time [s]")
    p.add_argument("--solver", choices=("rk4", "adaptive"), default=None)
    p.add_argument("--dt", type=float, default=None, help="fixed step size [s]")
    p.add_argument("--rtol", type=float, default=None, help="relative tolerance")
    p.add_argument("--atol", type=float, default=None, help="absolute tolerance")
    p.add_argument("--max-step", type=float, default=None, help="adaptive step cap [s]")
    p.add_argument("--out", default=None, help="write the series here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot", default=None, metavar="IMAGE",
                   help="also render the probes to an image file (png/svg/pdf)")

    p = sub.add_parser("convert", help="translate between XML and interchange JSON")
    p.add_argument("file")
    p.add_argument("--to", required=True, choices=("xml", "json"))
    p.add_argument("--out", default=None)

    sub.add_parser("blocks", help="print the palette as JSON")

    p = sub.add_parser("serve", help="start the HTTP simulation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None,
                   help="TCP port (default: $XCOSW_PORT or 8080)")
    p.add_argument("--jobs", type=int, default=None, help="simulation worker count")
    p.add_argument("--budget", type=float, default=30.0,
                   help="wall-clock seconds allowed per simulation request")
    p.add_argument("--static-dir", default=None,
                   help="serve this directory (the editor bundle) at /")

    return parser


def _cmd_validate(args) -> int:
    try:
        diagram = load_diagram_file(args.file)
    except OSError as e:
        return _fail(f"cannot read {args.file}: {e}", EXIT_IO)
    except (XcosXmlError, SchemaViolationError, DiagramError) as e:
        return _fail(f"cannot parse {args.file}: {e}", EXIT_IO)
    diagnostics = validate(diagram)
    for d in diagnostics:
        print(d.format_line())
    return EXIT_INVALID if any(d.severity == "error" for d in diagnostics) else EXIT_OK


def _cmd_simulate(args) -> int:
    try:
        diagram = load_diagram_file(args.file)
    except OSError as e:
        return _fail(f"cannot read {args.file}: {e}", EXIT_IO)
    except (XcosXmlError, SchemaViolationError, DiagramError) as e:
        return _fail(f"cannot parse {args.file}: {e}", EXIT_IO)

    opts = diagram.settings.override(
        t0=args.t0, tf=args.tf, solver=args.solver, dt=args.dt,
        rtol=args.rtol, atol=args.atol, max_step=args.max_step,
    )
    try:
        opts.check()
    except OptionsError as e:
        return _fail(f"bad simulation options: {e}", EXIT_INVALID)

    diagnostics = validate(diagram)
    errors = [d for d in diagnostics if d.severity == "error"]
    if errors:
        for d in diagnostics:
            print(d.format_line(), file=sys.stderr)
        return EXIT_INVALID
    for d in diagnostics:  # warnings only
        print(d.format_line(), file=sys.stderr)

    try:
        result = simulate(compile_diagram(diagram), opts)
    except SolverError as e:
        return _fail(f"simulation failed: {e}", EXIT_INVALID)

    payload = export_csv(result) if args.format == "csv" else dumps_result(result)
    _write_output(payload, args.out)
    if args.plot:
        from .plotting import save_result_plot  # matplotlib import is slow; defer

        save_result_plot(result, args.plot, title=diagram.title or Path(args.file).stem)
        print(f"xcosw: wrote {args.plot}", file=sys.stderr)
    return EXIT_OK


def _cmd_convert(args) -> int:
    try:
        diagram = load_diagram_file(args.file)
    except OSError as e:
        return _fail(f"cannot read {args.file}: {e}", EXIT_IO)
    except (XcosXmlError, SchemaViolationError, DiagramError) as e:
        return _fail(f"cannot parse {args.file}: {e}", EXIT_IO)
    if args.to == "xml":
        _write_output(serialize_xcos_xml(diagram), args.out)
    else:
        _write_output(to_interchange_json(diagram) + b"\n", args.out)
    return EXIT_OK


def _cmd_blocks(args) -> int:
    print(json.dumps(palette_json(), indent=2))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("XCOSW_PORT", "8080"))
    app = create_app(budget_s=args.budget, jobs=args.jobs, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "convert": _cmd_convert,
    "blocks": _cmd_blocks,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
