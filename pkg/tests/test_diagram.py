"""Pipeline diagrams: structure, stall/flush marks, squashing, round trips."""

from __future__ import annotations

from rvpipe import assemble
from rvpipe.diagram import (build, check_invariants, expand, parse_csv,
                            render_csv, render_text, squash)
from rvpipe.history import Simulation
from rvpipe.pipeline import SimOptions

from .corpus import CORPUS, run_pipelined


def trace_of(source: str, forwarding=True, tape=()):
    sim = Simulation(assemble(source), SimOptions(forwarding=forwarding), tape)
    sim.run()
    return sim.snapshots()


def cells_of(diagram, row):
    return [c for c in diagram.rows[row].cells]


def test_three_independent_instructions_shift_one_column():
    d = build(trace_of("addi x1, x0, 1\naddi x2, x0, 2\naddi x3, x0, 3"))
    assert d.cycles == 7 and len(d.rows) == 3
    want = ["IF", "ID", "EX", "MEM", "WB"]
    for r in range(3):
        cells = cells_of(d, r)
        assert cells[r:r + 5] == want
        assert all(c == "" for c in cells[:r]) and all(c == "" for c in cells[r + 5:])


def test_single_instruction_csv_row():
    d = build(trace_of("addi x1, x0, 1"))
    csv_text = render_csv(d)
    first_row = csv_text.splitlines()[1]
    assert first_row.endswith("IF,ID,EX,MEM,WB")


def test_load_use_consumer_shows_held_decode():
    d = build(trace_of("ld x1, -8(sp)\nadd x3, x1, x1"))
    consumer = cells_of(d, 1)
    assert consumer[1:7] == ["IF", "ID", "ID*", "EX", "MEM", "WB"]


def test_taken_branch_rows_flushed_with_bubble_tails():
    src = ("beq x0, x0, target\naddi x5, x0, 1\naddi x6, x0, 2\n"
           "addi x7, x0, 3\ntarget: addi x1, x0, 9")
    d = build(trace_of(src))
    flushed = [r for r in d.rows if r.flushed]
    assert len(flushed) == 3
    w1 = cells_of(d, 1)  # was in EX when squashed at cycle 4
    assert w1[1:4] == ["IF", "ID", "FL"]
    assert w1[4:6] == ["BUB", "BUB"]
    w3 = cells_of(d, 3)  # was in IF when squashed
    assert w3[3] == "FL" and w3[4:8] == ["BUB"] * 4
    target = next(r for r in d.rows if "x1, x0, 9" in r.disasm)
    assert not target.flushed


def test_invariants_hold_on_every_corpus_trace():
    for program in CORPUS:
        for fwd in (True, False):
            sim = run_pipelined(program, fwd)
            d = build(sim.snapshots())
            assert check_invariants(d) == [], (program.name, fwd)


def test_straight_line_squash_is_identity_shaped():
    d = build(trace_of("addi x1, x0, 1\naddi x2, x0, 2"))
    s = squash(d)
    assert s.blocks == ()
    assert [r.cells for r in s.rows] == [r.cells for r in d.rows]
    assert expand(s) == d


def test_counted_loop_collapses_with_annotation():
    sim = run_pipelined(next(p for p in CORPUS if p.name == "loop_sum"), True)
    d = build(sim.snapshots())
    s = squash(d)
    assert s.blocks, "steady-state iterations should collapse"
    assert max(b.repeat for b in s.blocks) >= 3
    assert len(s.rows) < len(d.rows)
    assert expand(s) == d


def test_single_instruction_self_loop_collapses():
    sim = Simulation(assemble("L: beq x0, x0, L"), SimOptions(max_cycles=200))
    sim.run()
    d = build(sim.snapshots())
    s = squash(d)
    assert s.blocks and s.blocks[0].repeat >= 40
    assert s.blocks[0].period == 4  # MEM-resolved redirect refetches every 4 cycles
    assert len(s.rows) <= 3
    assert expand(s) == d


def test_alternating_patterns_do_not_collapse():
    # taken/not-taken alternation changes the per-iteration pattern
    src = ("li t0, 0\nli t1, 6\nloop: andi t2, t0, 1\nbeqz t2, skip\n"
           "addi t0, t0, 1\nj next\nskip: addi t0, t0, 1\nnext: blt t0, t1, loop")
    d = build(trace_of(src))
    s = squash(d)
    assert expand(s) == d


def test_expand_squash_round_trip_on_corpus():
    for program in CORPUS:
        for fwd in (True, False):
            d = build(run_pipelined(program, fwd).snapshots())
            assert expand(squash(d)) == d, (program.name, fwd)


def test_csv_round_trip_on_corpus():
    for program in CORPUS:
        d = build(run_pipelined(program, True).snapshots())
        assert parse_csv(render_csv(d)) == d, program.name
        s = squash(d)
        assert parse_csv(render_csv(s)) == s, program.name


def test_render_text_legend_and_wrapping():
    d = build(trace_of("ld x1, -8(sp)\nadd x3, x1, x1"))
    text = render_text(d)
    assert "ID*" in text
    src = ("beq x0, x0, target\naddi x5, x0, 1\naddi x6, x0, 2\n"
           "addi x7, x0, 3\ntarget: addi x1, x0, 9")
    text = render_text(build(trace_of(src)))
    assert "FL" in text and "◦" in text
    narrow = render_text(build(trace_of(src)), width=60)
    assert len(narrow.splitlines()) > len(text.splitlines())  # banks wrapped
    loop = next(p for p in CORPUS if p.name == "loop_sum")
    squashed = squash(build(run_pipelined(loop, True).snapshots()))
    assert "repeat x" in render_text(squashed)


def test_diagram_is_a_pure_function_of_the_trace():
    trace = trace_of("addi x1, x0, 1\naddi x2, x0, 2")
    assert build(trace) == build(trace)
