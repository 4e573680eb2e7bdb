"""``revc`` command line: compile, run, simulate, check, bench, types."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, pipeline
from .bexp import pretty
from .circuit import CircuitFormatError, loads
from .evaluator import SizeLimitExceeded, eval_bexp_program

EXIT_OK, EXIT_USER, EXIT_VERIFY = 0, 1, 2


def _stats_line(stats, as_json: bool) -> str:
    if as_json:
        return json.dumps(stats.as_dict())
    return f"bits={stats.bits} gates={stats.gates} toffolis={stats.toffolis}"


def _dump_types(prog, out) -> None:
    print(f"{prog.filename}: {prog.signature}", file=out)
    for n in prog.signature.notes:
        print(f"  note: {n}", file=out)
    if prog.signature.bounds is not None:
        for line in prog.signature.bounds.lines():
            print(f"  bound: {line}", file=out)


def cmd_compile(args) -> int:
    prog = pipeline.load(args.file)
    if args.dump_types:
        _dump_types(prog, sys.stdout)
    if args.dump_bexp:
        exprs, n_in = eval_bexp_program(prog.term, prog.signature)
        for k, e in enumerate(exprs):
            print(f"out{k} = {pretty(e)}")
    unit = pipeline.compile_(prog, args.mode, args.cleanup)
    if args.output:
        text = pipeline.circuit_text(unit, Path(prog.filename).stem)
        if args.output == "-":
            sys.stdout.write(text)
        else:
            Path(args.output).write_text(text)
    print(_stats_line(unit.stats, args.json))
    return EXIT_OK


def cmd_run(args) -> int:
    prog = pipeline.load(args.file)
    bits = pipeline.program_inputs(prog, args.input or [])
    print(pipeline.format_bits(pipeline.run(prog, bits)))
    return EXIT_OK


def cmd_simulate(args) -> int:
    cf = loads(Path(args.circuit).read_text())
    bits = []
    for v in args.input or []:
        bits += pipeline.parse_bits(v, len(cf.inputs) if len(args.input) == 1 else None)
    print(pipeline.format_bits(pipeline.simulate(cf, bits)))
    return EXIT_OK


def cmd_check(args) -> int:
    prog = pipeline.load(args.file)
    circuit = loads(Path(args.circuit).read_text()) if args.circuit else None
    report = pipeline.check(prog, circuit)
    for line in report.lines(prog.filename):
        print(line)
    if report.modular:
        print("note: exact BDDs exceeded the budget; checked with call arguments abstracted")
    if not report.checks and not report.notes:
        print(f"PASS no checks in {prog.filename}")
    return EXIT_OK if report.ok and not report.notes else EXIT_VERIFY


def _selected(only) -> list:
    """Benchmarks named by ``--only``: a family name picks every listed size."""
    if not only:
        return list(bench.BENCHMARKS)
    out = []
    for item in only:
        family = [b for b in bench.BENCHMARKS if b.name == item]
        picked = family or [bench.get(item)]
        out.extend(b for b in picked if b not in out)
    return out


def cmd_bench(args) -> int:
    modes = ["default", "space"] if args.mode == "both" else [args.mode]
    rows, regressions = [], 0
    for b in _selected(args.only):
        for mode in modes:
            prog = pipeline.load_source(b.source(), b.file)
            try:
                got = pipeline.compile_(prog, mode, args.cleanup).stats
                stats = (got.bits, got.gates, got.toffolis)
            except SizeLimitExceeded:
                stats = None
            want = bench.RECORDED.get((b.label, mode)) if args.cleanup == "lazy" else None
            if want is None and stats is None:
                status = "n/a"
            elif want is None:
                status = "new"
            elif stats is None or any(g > w for g, w in zip(stats, want)):
                status = "REGRESSION"
                regressions += 1
            elif stats != want:
                status = "improved"
            else:
                status = "ok"
            rows.append((b.label, mode, stats, status))
    if args.json:
        print(json.dumps([
            {"name": l, "mode": m, "stats": None if s is None else dict(zip(("bits", "gates", "toffolis"), s)),
             "status": st} for l, m, s, st in rows], indent=2))
    else:
        print(f"{'benchmark':<22}{'mode':<9}{'bits':>6}{'gates':>8}{'toffolis':>10}  status")
        for l, m, s, st in rows:
            nums = "".join(f"{x:>{w}}" for x, w in zip(s, (6, 8, 10))) if s else f"{'size cap':>24}"
            print(f"{l:<22}{m:<9}{nums}  {st}")
    return EXIT_VERIFY if regressions else EXIT_OK


def cmd_types(args) -> int:
    _dump_types(pipeline.load(args.file), sys.stdout)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("revc.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="revc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def source_arg(sp):
        sp.add_argument("file", help="program file, or a bundled benchmark such as modAdd-32")

    def modes(sp, both=False):
        sp.add_argument("--mode", choices=["default", "space", *(["both"] if both else [])], default="default")
        sp.add_argument("--cleanup", choices=["eager", "lazy"], default="lazy")

    c = sub.add_parser("compile", help="compile to a reversible circuit")
    source_arg(c)
    modes(c)
    c.add_argument("-o", "--output", help="write the circuit here ('-' for stdout)")
    c.add_argument("--json", action="store_true", help="print stats as JSON")
    c.add_argument("--dump-bexp", action="store_true", help="print the output expressions")
    c.add_argument("--dump-types", action="store_true", help="print the inferred signature")
    c.set_defaults(fn=cmd_compile)

    r = sub.add_parser("run", help="evaluate with the reference interpreter")
    source_arg(r)
    r.add_argument("--input", action="append",
                   help="bits, first bit first; repeat once per parameter, or 0x.. per parameter")
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("simulate", help="simulate a circuit file")
    s.add_argument("circuit")
    s.add_argument("--input", action="append", help="bits for the declared inputs, in order")
    s.set_defaults(fn=cmd_simulate)

    k = sub.add_parser("check", help="check asserts and cleans; with a circuit, validate it too")
    source_arg(k)
    k.add_argument("circuit", nargs="?")
    k.set_defaults(fn=cmd_check)

    b = sub.add_parser("bench", help="compile the bundled benchmarks")
    modes(b, both=True)
    b.add_argument("--only", nargs="*", help="benchmark names or labels")
    b.add_argument("--json", action="store_true")
    b.set_defaults(fn=cmd_bench)

    t = sub.add_parser("types", help="print the inferred signature")
    source_arg(t)
    t.set_defaults(fn=cmd_types)

    v = sub.add_parser("serve", help="run the HTTP service")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=8000)
    v.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except pipeline.CheckFailure as e:
        print(f"revc: {e}", file=sys.stderr)
        return EXIT_VERIFY
    except (*pipeline.UserError, CircuitFormatError, OSError) as e:
        # KeyError's str() adds quotes
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"revc: error: {msg}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
