"""Reversible execution: per-cycle checkpoints, backward stepping, input tape.

Every cycle is checkpointed (the states are immutable and share structure, so
a checkpoint is a reference).  Restoring cycle c therefore yields the exact
SimState observed at c.  Console inputs live on a tape owned by the log;
stepping forward over a cycle that already consumed input replays the
recorded entry instead of prompting again, which is what makes walking back
and forth across a read syscall deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import pipeline
from .pipeline import HazardEvent, NeedInput, SimOptions, SimState, Snapshot, Stepped
from .syscalls import InputParseError, parse_input


class HistoryError(Exception):
    pass


class AtCycleZero(HistoryError):
    pass


@dataclass(frozen=True)
class HistoryEntry:
    sim: SimState
    snapshot: Snapshot
    events: tuple[HazardEvent, ...]
    inputs_consumed: int


class HistoryLog:
    """Cycle-indexed checkpoints plus the console input tape."""

    def __init__(self, max_cycles: int):
        self.max_cycles = max_cycles
        self.entries: list[HistoryEntry] = []
        self.cursor = 0
        self.input_tape: list[str] = []

    @property
    def latest(self) -> int:
        return len(self.entries) - 1

    def record(self, cycle: int, sim: SimState, snapshot: Snapshot,
               events: tuple[HazardEvent, ...] = ()) -> None:
        if cycle != len(self.entries):
            raise HistoryError(f"out-of-order record: cycle {cycle}, expected {len(self.entries)}")
        if cycle > self.max_cycles:
            raise HistoryError(f"cycle {cycle} beyond the {self.max_cycles}-cycle limit")
        self.entries.append(HistoryEntry(sim, snapshot, events,
                                         sim.pipe.inputs_consumed))

    def restore(self, cycle: int) -> SimState:
        return self.entries[cycle].sim

    def entry(self, cycle: int) -> HistoryEntry:
        return self.entries[cycle]


@dataclass(frozen=True)
class PendingPrompt:
    kind: str
    cycle: int  # the cycle that will complete once input arrives


class Simulation:
    """Drives one simulation with full history: the session's engine room.

    Forward steps at the frontier execute the pipeline and record; forward
    steps behind the frontier replay recorded entries.  ``status`` folds the
    pending-input state in: it is "awaiting_input" while a read syscall is
    blocked at the frontier.
    """

    def __init__(self, image, options: SimOptions | None = None,
                 input_tape: list[str] | tuple = ()):
        self.image = image
        self.options = options or SimOptions()
        sim = pipeline.init(image, self.options)
        self.log = HistoryLog(self.options.max_cycles)
        self.log.input_tape = list(input_tape)
        self.log.record(0, sim, pipeline.initial_snapshot(sim))
        self.pending: PendingPrompt | None = None

    # -- views ---------------------------------------------------------------

    @property
    def cursor(self) -> int:
        return self.log.cursor

    @property
    def frontier(self) -> int:
        return self.log.latest

    @property
    def state(self) -> SimState:
        return self.log.restore(self.cursor)

    @property
    def snapshot(self) -> Snapshot:
        return self.log.entry(self.cursor).snapshot

    @property
    def at_frontier(self) -> bool:
        return self.cursor == self.frontier

    @property
    def status(self) -> str:
        if self.pending is not None and self.at_frontier:
            return "awaiting_input"
        return self.state.pipe.status

    def stats(self) -> dict:
        return pipeline.stats(self.state)

    # -- stepping --------------------------------------------------------------

    def step_forward(self) -> HistoryEntry | PendingPrompt | None:
        """One cycle forward: replay from history or execute at the frontier.

        Returns the new entry, the pending prompt when input is required, or
        None when the simulation cannot advance (halted/faulted).
        """
        if self.cursor < self.frontier:
            self.log.cursor += 1
            return self.log.entry(self.cursor)
        sim = self.state
        if sim.pipe.status != "running":
            return None
        out = pipeline.step(sim, self.log.input_tape)
        if isinstance(out, NeedInput):
            self.pending = PendingPrompt(out.kind, sim.pipe.cycle + 1)
            return self.pending
        assert isinstance(out, Stepped)
        self.log.record(out.sim.pipe.cycle, out.sim, out.snapshot, out.events)
        self.log.cursor = out.sim.pipe.cycle
        self.pending = None
        return self.log.entry(self.cursor)

    def step_back(self) -> HistoryEntry:
        """Move the cursor one cycle back; exact restore by construction."""
        if self.cursor == 0:
            raise AtCycleZero("already at cycle 0")
        self.log.cursor -= 1
        return self.log.entry(self.cursor)

    def provide_input(self, text: str) -> bool:
        """Feed one console line; returns False (re-prompt) on a parse error.

        On success the text joins the input tape and the blocked cycle
        completes immediately.
        """
        if self.pending is None or not self.at_frontier:
            raise HistoryError("no pending console read")
        try:
            parse_input(self.pending.kind, text)
        except InputParseError:
            return False
        self.log.input_tape.append(text)
        out = self.step_forward()
        assert isinstance(out, HistoryEntry), "validated input must unblock the read"
        return True

    def run(self, max_new_cycles: int | None = None) -> str:
        """Advance until halt/fault/awaiting-input or a step budget; returns status."""
        steps = 0
        while self.status == "running":
            if max_new_cycles is not None and steps >= max_new_cycles:
                break
            out = self.step_forward()
            if out is None or isinstance(out, PendingPrompt):
                break
            steps += 1
        return self.status

    # -- derived data ----------------------------------------------------------

    def snapshots(self) -> list[Snapshot]:
        """Snapshot stream from cycle 0 up to the cursor (inclusive)."""
        return [e.snapshot for e in self.log.entries[: self.cursor + 1]]

    def events_at(self, cycle: int) -> tuple[HazardEvent, ...]:
        return self.log.entry(cycle).events
