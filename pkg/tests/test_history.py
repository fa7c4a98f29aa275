"""Reversible execution: exact restore, inverse stepping, tape determinism."""

from __future__ import annotations

import json
import random

import pytest

from rvpipe import assemble
from rvpipe.history import AtCycleZero, HistoryError, HistoryLog, Simulation
from rvpipe.pipeline import SimOptions, initial_snapshot, init
from rvpipe.service import snapshot_json

from .corpus import CORPUS, run_pipelined


def fresh(source: str, tape=(), forwarding=True) -> Simulation:
    return Simulation(assemble(source), SimOptions(forwarding=forwarding), tape)


RAW3 = "addi x1, x0, 1\naddi x2, x0, 2\nadd x3, x1, x2"


def test_record_restore_cycle_zero():
    sim = fresh(RAW3)
    state0 = sim.log.restore(0)
    assert state0.pipe.cycle == 0
    assert all(t is None for t in sim.snapshot.stages.values())


def test_record_rejects_out_of_order_and_over_limit():
    image = assemble(RAW3)
    log = HistoryLog(max_cycles=3)
    sim = init(image, SimOptions(max_cycles=3))
    log.record(0, sim, initial_snapshot(sim))
    with pytest.raises(HistoryError):
        log.record(2, sim, initial_snapshot(sim))
    log.record(1, sim, initial_snapshot(sim))
    log.record(2, sim, initial_snapshot(sim))
    log.record(3, sim, initial_snapshot(sim))
    with pytest.raises(HistoryError):
        log.record(4, sim, initial_snapshot(sim))


def test_step_back_is_the_inverse_of_step():
    sim = fresh(RAW3)
    for _ in range(4):
        before = sim.state
        cursor = sim.cursor
        sim.step_forward()
        sim.step_back()
        assert sim.cursor == cursor
        assert sim.state == before
        assert sim.state is before  # checkpoints are the original objects
        sim.step_forward()


def test_step_back_at_cycle_zero_errors():
    sim = fresh(RAW3)
    with pytest.raises(AtCycleZero):
        sim.step_back()


def test_restore_then_replay_reproduces_snapshots():
    sim = fresh(RAW3)
    sim.run()
    recorded = [e.snapshot for e in sim.log.entries]
    for _ in range(sim.cursor - 2):
        sim.step_back()
    while sim.cursor < sim.frontier:
        sim.step_forward()
    replayed = [e.snapshot for e in sim.log.entries]
    assert replayed == recorded


def test_random_walks_end_identical_to_straight_runs():
    program = next(p for p in CORPUS if p.name == "read_int_loop")
    straight = run_pipelined(program, True)
    rng = random.Random(12)
    for _ in range(100):
        walker = fresh(program.source, tape=program.tape)
        # do a random dance of forward/backward moves
        for _ in range(rng.randint(1, 60)):
            if rng.random() < 0.6:
                walker.step_forward()
            elif walker.cursor > 0:
                walker.step_back()
        target = rng.randint(0, min(walker.frontier, straight.frontier))
        while walker.cursor > target:
            walker.step_back()
        while walker.cursor < target:
            walker.step_forward()
        assert walker.state == straight.log.restore(target)
        assert walker.snapshot == straight.log.entry(target).snapshot


def test_tape_replay_is_byte_identical_across_runs():
    program = next(p for p in CORPUS if p.name == "string_io")
    runs = []
    for _ in range(2):
        sim = fresh(program.source, tape=program.tape)
        sim.run()
        runs.append(json.dumps([snapshot_json(e.snapshot) for e in sim.log.entries],
                               sort_keys=True))
    assert runs[0] == runs[1]


def test_stepping_across_a_read_never_reprompts():
    src = "li a7, 5\necall\nmv s0, a0\nli a7, 10\necall"
    sim = fresh(src)
    status = sim.run()
    assert status == "awaiting_input"
    assert sim.pending is not None and sim.pending.kind == "read_int"
    assert sim.provide_input("42")
    sim.run()
    assert sim.state.pipe.status == "halted"
    frontier = sim.frontier
    # rewind to before the read, then walk forward: no prompt, same states
    while sim.cursor > 0:
        sim.step_back()
    while sim.cursor < frontier:
        out = sim.step_forward()
        assert not isinstance(out, type(sim.pending))
    assert sim.state.machine.read_reg(8) == 42
    assert sim.state.pipe.status == "halted"


def test_provide_input_reprompts_on_garbage():
    sim = fresh("li a7, 5\necall")
    sim.run()
    assert sim.status == "awaiting_input"
    assert not sim.provide_input("abc")
    assert sim.status == "awaiting_input"
    assert sim.provide_input("  -7 ")
    assert sim.state.machine.read_reg(10) == (1 << 64) - 7


def test_provide_input_requires_a_pending_prompt():
    sim = fresh(RAW3)
    with pytest.raises(HistoryError):
        sim.provide_input("1")


def test_inverse_law_across_every_corpus_program():
    for program in CORPUS:
        sim = fresh(program.source, tape=program.tape)
        steps = 0
        while sim.state.pipe.status == "running" and steps < 30:
            before = sim.state
            out = sim.step_forward()
            if out is None or out is sim.pending:
                break
            steps += 1
            sim.step_back()
            assert sim.state == before, program.name
            sim.step_forward()
