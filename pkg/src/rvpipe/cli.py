"""Batch front door: assemble, run, compare, serve, list examples.

Exit codes: 0 success, 1 assembly diagnostics, 2 runtime fault (including
exhausted console input), 3 cycle limit hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import diagram as diagram_mod
from . import pipeline
from .asm import disassemble, try_assemble
from .history import Simulation
from .pipeline import SimOptions
from .programs import EXAMPLES, get_example
from .service import SessionStore, serve

EXIT_OK, EXIT_ASM, EXIT_FAULT, EXIT_LIMIT = 0, 1, 2, 3

_STAT_ROWS = ("cycles", "retired", "raw_stalls", "load_use_stalls",
              "flushes", "flush_bubbles", "cpi")


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _assemble_or_exit(path: str):
    image, diagnostics = try_assemble(_read_source(path))
    for d in diagnostics:
        print(f"{path}:{d.render()}", file=sys.stderr)
    if image is None:
        raise SystemExit(EXIT_ASM)
    return image


def _execute(image, forwarding: bool, max_cycles: int,
             tape: list[str], interactive: bool) -> Simulation:
    """Run to completion, feeding console reads from the tape then stdin."""
    sim = Simulation(image, SimOptions(forwarding=forwarding, max_cycles=max_cycles),
                     input_tape=tape)
    while True:
        status = sim.run()
        if status != "awaiting_input":
            return sim
        if interactive and sys.stdin.isatty():
            try:
                line = input(f"[{sim.pending.kind}] ")
            except EOFError:
                print("error: console input exhausted", file=sys.stderr)
                raise SystemExit(EXIT_FAULT)
        else:
            line = sys.stdin.readline()
            if line == "":
                print("error: console input exhausted", file=sys.stderr)
                raise SystemExit(EXIT_FAULT)
            line = line.rstrip("\n")
        if not sim.provide_input(line):
            print(f"error: could not parse {line!r} for {sim.pending.kind}; retrying",
                  file=sys.stderr)


def _print_transcript(sim: Simulation) -> None:
    out = "".join(e.text for e in sim.state.transcript if e.direction == "out")
    if out:
        sys.stdout.write(out)
        if not out.endswith("\n"):
            sys.stdout.write("\n")


def _stats_table(columns: list[tuple[str, dict]]) -> str:
    names = [name for name, _ in columns]
    rows = []
    header = ["metric"] + names + (["delta"] if len(columns) == 2 else [])
    rows.append(header)
    for key in _STAT_ROWS:
        row = [key]
        vals = []
        for _, stats in columns:
            v = stats[key]
            vals.append(v)
            row.append("-" if v is None else (f"{v:.3f}" if isinstance(v, float) else str(v)))
        if len(columns) == 2:
            a, b = vals
            if a is None or b is None:
                row.append("-")
            else:
                d = b - a
                row.append(f"{d:+.3f}" if isinstance(d, float) else f"{d:+d}")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
                     for r in rows)


def _status_exit(sim: Simulation) -> int:
    state = sim.state.pipe
    if state.status == "faulted":
        print(f"fault: {state.fault.message} (stage {state.fault.stage})", file=sys.stderr)
        return EXIT_FAULT
    if state.status == "halted" and state.reason == "cycle-limit":
        print(f"error: cycle limit ({sim.options.max_cycles}) exceeded", file=sys.stderr)
        return EXIT_LIMIT
    return EXIT_OK


def _cmd_asm(args) -> int:
    image = _assemble_or_exit(args.file)
    print(disassemble(image, with_source=args.source))
    return EXIT_OK


def _cmd_run(args) -> int:
    image = _assemble_or_exit(args.file)
    tape: list[str] = []
    if args.input:
        tape = Path(args.input).read_text(encoding="utf-8").splitlines()
    sim = _execute(image, not args.no_forwarding, args.max_cycles, tape,
                   interactive=not args.input)
    _print_transcript(sim)
    if args.trace:
        for snap in sim.snapshots()[1:]:
            occ = " ".join(
                f"{s}={snap.stages[s].disasm if snap.stages[s] else '-'}"
                for s in pipeline.STAGES)
            print(f"cycle {snap.cycle:>4}: {occ}")
    if args.diagram:
        d = diagram_mod.build(sim.snapshots())
        if args.diagram == "squashed":
            d = diagram_mod.squash(d)
        if args.csv:
            Path(args.csv).write_text(diagram_mod.render_csv(d), encoding="utf-8")
        else:
            print(diagram_mod.render_text(d))
    if args.stats:
        stats = sim.stats()
        if args.json:
            print(json.dumps(stats))
        else:
            print(_stats_table([("value", stats)]))
    code = _status_exit(sim)
    if code == EXIT_OK and args.exit_code and sim.state.pipe.exit_code:
        return sim.state.pipe.exit_code
    return code


def _cmd_compare(args) -> int:
    modes = [m.strip() for m in args.modes.split(",")] if args.modes else None
    if args.file2 is None and modes is None:
        modes = ["fwd", "nofwd"]
    runs: list[tuple[str, Simulation]] = []
    tape = (Path(args.input).read_text(encoding="utf-8").splitlines()
            if args.input else [])

    def run_one(path: str, forwarding: bool, label: str) -> None:
        image = _assemble_or_exit(path)
        sim = _execute(image, forwarding, args.max_cycles, list(tape),
                       interactive=False)
        runs.append((label, sim))

    if args.file2 is not None:
        fwd = True if modes is None else modes[0] != "nofwd"
        run_one(args.file, fwd, Path(args.file).stem)
        run_one(args.file2, fwd, Path(args.file2).stem)
    else:
        for mode in modes:
            if mode not in ("fwd", "nofwd"):
                print(f"error: unknown mode {mode!r} (use fwd,nofwd)", file=sys.stderr)
                return EXIT_ASM
            run_one(args.file, mode == "fwd", mode)
    columns = [(label, sim.stats()) for label, sim in runs]
    if args.json:
        payload = {label: stats for label, stats in columns}
        if len(columns) == 2:
            payload["delta"] = {
                k: (None if columns[0][1][k] is None or columns[1][1][k] is None
                    else columns[1][1][k] - columns[0][1][k])
                for k in _STAT_ROWS
            }
        print(json.dumps(payload))
    else:
        print(_stats_table(columns))
    worst = EXIT_OK
    for _, sim in runs:
        worst = max(worst, _status_exit(sim))
    return worst


def _cmd_serve(args) -> int:
    host, _, port = args.listen.rpartition(":")
    store = SessionStore(max_sessions=args.max_sessions, ttl=args.ttl,
                         max_cycles=args.max_cycles)
    serve(host or "127.0.0.1", int(port), store, static_dir=args.static)
    return EXIT_OK


def _cmd_examples(args) -> int:
    if args.write:
        outdir = Path(args.write)
        outdir.mkdir(parents=True, exist_ok=True)
        for e in EXAMPLES:
            (outdir / f"{e['name']}.s").write_text(e["source"], encoding="utf-8")
            print(f"wrote {outdir / (e['name'] + '.s')}")
        return EXIT_OK
    if args.show:
        e = get_example(args.show)
        if e is None:
            print(f"error: no example named {args.show!r}", file=sys.stderr)
            return EXIT_ASM
        print(e["source"], end="")
        return EXIT_OK
    for e in EXAMPLES:
        print(f"{e['name']:<12} {e['title']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rvpipe",
                                description="RV64IM five-stage pipeline simulator")
    sub = p.add_subparsers(dest="command", required=True)

    asm = sub.add_parser("asm", help="assemble a file and print the listing")
    asm.add_argument("file")
    asm.add_argument("--source", action="store_true",
                     help="append source line annotations")
    asm.set_defaults(fn=_cmd_asm)

    run = sub.add_parser("run", help="assemble and run a file")
    run.add_argument("file")
    run.add_argument("--no-forwarding", action="store_true")
    run.add_argument("--max-cycles", type=int, default=10000)
    run.add_argument("--diagram", choices=["full", "squashed"])
    run.add_argument("--csv", help="write the diagram as CSV to this path")
    run.add_argument("--stats", action="store_true")
    run.add_argument("--trace", action="store_true",
                     help="print per-cycle stage occupancy")
    run.add_argument("--json", action="store_true", help="stats as JSON")
    run.add_argument("--input", help="file preloading the console input tape")
    run.add_argument("--exit-code", action="store_true",
                     help="propagate the program's exit2 code")
    run.set_defaults(fn=_cmd_run)

    cmp_ = sub.add_parser("compare", help="run twice and diff the stats")
    cmp_.add_argument("file")
    cmp_.add_argument("file2", nargs="?")
    cmp_.add_argument("--modes", help="comma list from {fwd,nofwd} (default fwd,nofwd)")
    cmp_.add_argument("--max-cycles", type=int, default=10000)
    cmp_.add_argument("--input", help="file preloading the console input tape")
    cmp_.add_argument("--json", action="store_true")
    cmp_.set_defaults(fn=_cmd_compare)

    srv = sub.add_parser("serve", help="start the HTTP session service")
    srv.add_argument("--listen", default="127.0.0.1:8000")
    srv.add_argument("--max-sessions", type=int, default=256)
    srv.add_argument("--ttl", type=float, default=1800.0,
                     help="idle session lifetime in seconds")
    srv.add_argument("--max-cycles", type=int, default=None,
                     help="cap per-session cycle budgets")
    srv.add_argument("--static", default=None,
                     help="serve this directory (a built web UI) at /")
    srv.set_defaults(fn=_cmd_serve)

    ex = sub.add_parser("examples", help="list or export the built-in programs")
    ex.add_argument("--write", help="write all examples as .s files into a directory")
    ex.add_argument("--show", help="print one example's source")
    ex.set_defaults(fn=_cmd_examples)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: --help exits 0, usage errors map to 1
        return EXIT_OK if exc.code in (0, None) else EXIT_ASM
    try:
        return args.fn(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ASM
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
