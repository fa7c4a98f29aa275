"""The classic instructions-by-cycles pipeline diagram, full and squashed.

Cell legend (fixed and round-trippable):

* ``IF ID EX MEM WB``  - the stage the instruction occupies that cycle
* ``ID*`` (any stage + ``*``) - held in place by a stall
* ``FL``  - the cycle the instruction was squashed (wrong path or exit)
* ``o`` (rendered ``◦`` in text mode) - the bubble left by a squashed
  instruction draining through the remaining stages
* empty  - not in the pipeline

Bubbles inserted by stalls have no row of their own; they show up as the
consumer's held cells.  Squashing collapses maximal runs of consecutive loop
iterations with identical instruction sequences, identical relative stage
patterns, and a constant period; expanding a squashed diagram reproduces the
full one exactly.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, replace

STAGES = ("IF", "ID", "EX", "MEM", "WB")
_STAGE_INDEX = {s: i for i, s in enumerate(STAGES)}

FLUSH_CELL = "FL"
BUBBLE_CELL = "BUB"
_BUBBLE_TEXT = "◦"
_BUBBLE_CSV = "o"


@dataclass(frozen=True)
class DiagramRow:
    seq: int
    addr: int
    disasm: str
    source_line: int | None
    flushed: bool
    cells: tuple[str, ...]  # index c-1 -> cell for cycle c

    @property
    def label(self) -> str:
        line = self.source_line if self.source_line is not None else "-"
        return f"{self.addr:#010x} L{line}: {self.disasm}"


@dataclass(frozen=True)
class Block:
    """One collapsed run: `row_count` rows starting at `first_row`, seen
    `repeat` times, each iteration `period` cycles after the previous."""

    first_row: int
    row_count: int
    repeat: int
    period: int


@dataclass(frozen=True)
class PipelineDiagram:
    mode: str  # full | squashed
    cycles: int
    rows: tuple[DiagramRow, ...]
    blocks: tuple[Block, ...] = ()


def build(trace) -> PipelineDiagram:
    """Full diagram from a snapshot stream (cycle 0 entry included)."""
    if not trace:
        raise ValueError("empty trace")
    n = trace[-1].cycle
    rows: dict[int, dict] = {}
    prev_stage: dict[int, str] = {}

    def row_for(tag) -> dict:
        r = rows.get(tag.seq)
        if r is None:
            r = {"tag": tag, "flushed": False, "cells": [""] * n}
            rows[tag.seq] = r
        return r

    for snap in trace:
        c = snap.cycle
        if c == 0:
            continue
        this_stage: dict[int, str] = {}
        for stage in STAGES:
            tag = snap.stages.get(stage)
            if tag is None:
                continue
            r = row_for(tag)
            held = prev_stage.get(tag.seq) == stage
            r["cells"][c - 1] = stage + "*" if held else stage
            this_stage[tag.seq] = stage
        for tag in snap.flushed:
            r = row_for(tag)
            r["flushed"] = True
            stage = this_stage.get(tag.seq)
            r["cells"][c - 1] = FLUSH_CELL
            # the squashed slot drains as a bubble through the rest of the pipe
            if stage is not None:
                for k, _ in enumerate(STAGES[_STAGE_INDEX[stage] + 1:], start=1):
                    if c + k <= n:
                        r["cells"][c + k - 1] = BUBBLE_CELL
        prev_stage = this_stage

    out = []
    for seq in sorted(rows):
        r = rows[seq]
        tag = r["tag"]
        out.append(DiagramRow(seq=seq, addr=tag.addr, disasm=tag.disasm,
                              source_line=tag.source_line, flushed=r["flushed"],
                              cells=tuple(r["cells"])))
    return PipelineDiagram(mode="full", cycles=n, rows=tuple(out))


# ---------------------------------------------------------------------------
# Squashing

def _first_cell_col(row: DiagramRow) -> int:
    for i, cell in enumerate(row.cells):
        if cell:
            return i + 1
    return 0


def _segments(rows) -> list[tuple[int, int]]:
    """Iteration boundaries: a row fetched at the same or a lower address
    than its predecessor starts a new segment (backward control transfer;
    equality covers a one-instruction loop branching to itself)."""
    bounds = [0]
    for i in range(1, len(rows)):
        if rows[i].addr <= rows[i - 1].addr:
            bounds.append(i)
    bounds.append(len(rows))
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]


def _signature(rows, seg) -> tuple:
    lo, hi = seg
    base = _first_cell_col(rows[lo])
    sig = []
    for r in rows[lo:hi]:
        cells = tuple((i + 1 - base, cell) for i, cell in enumerate(r.cells) if cell)
        sig.append((r.addr, r.disasm, r.source_line, r.flushed, cells))
    return tuple(sig)


def squash(diagram: PipelineDiagram) -> PipelineDiagram:
    """Collapse steady-state loop iterations into annotated blocks."""
    if diagram.mode != "full":
        raise ValueError("squash expects a full-mode diagram")
    rows = diagram.rows
    segs = _segments(rows)
    sigs = [_signature(rows, s) for s in segs]
    bases = [_first_cell_col(rows[s[0]]) for s in segs]

    kept: list[DiagramRow] = []
    blocks: list[Block] = []
    i = 0
    while i < len(segs):
        j = i + 1
        period = None
        while j < len(segs) and sigs[j] == sigs[i]:
            delta = bases[j] - bases[j - 1]
            if period is None:
                period = delta
            elif delta != period:
                break
            j += 1
        repeat = j - i
        if repeat >= 2:
            blocks.append(Block(first_row=len(kept),
                                row_count=segs[i][1] - segs[i][0],
                                repeat=repeat, period=period))
            kept.extend(rows[segs[i][0]:segs[i][1]])
            i = j
        else:
            kept.extend(rows[segs[i][0]:segs[i][1]])
            i += 1
    return PipelineDiagram(mode="squashed", cycles=diagram.cycles,
                           rows=tuple(replace(r, seq=k) for k, r in enumerate(kept)),
                           blocks=tuple(blocks))


def expand(diagram: PipelineDiagram) -> PipelineDiagram:
    """Invert squash; the result is cell-identical to the original full diagram."""
    if diagram.mode != "squashed":
        raise ValueError("expand expects a squashed diagram")
    by_first = {b.first_row: b for b in diagram.blocks}
    out: list[DiagramRow] = []
    i = 0
    while i < len(diagram.rows):
        block = by_first.get(i)
        if block is None:
            out.append(diagram.rows[i])
            i += 1
            continue
        rep = diagram.rows[i:i + block.row_count]
        for it in range(block.repeat):
            shift = it * block.period
            for r in rep:
                cells = [""] * diagram.cycles
                for idx, cell in enumerate(r.cells):
                    if cell:
                        cells[idx + shift] = cell
                out.append(replace(r, cells=tuple(cells)))
        i += block.row_count
    return PipelineDiagram(mode="full", cycles=diagram.cycles,
                           rows=tuple(replace(r, seq=k) for k, r in enumerate(out)))


# ---------------------------------------------------------------------------
# Rendering

def render_text(diagram: PipelineDiagram, width: int = 120) -> str:
    """Fixed-width table; cycle columns wrap into banks to fit `width`."""
    label_w = max([len(r.label) for r in diagram.rows], default=5)
    label_w = min(label_w, 48)
    cell_w = 4
    per_bank = max(1, (width - label_w - 2) // (cell_w + 1))
    lines: list[str] = []
    blocks_at = {b.first_row: b for b in diagram.blocks}
    for lo in range(0, diagram.cycles, per_bank):
        hi = min(diagram.cycles, lo + per_bank)
        header = " " * (label_w + 2) + " ".join(f"{c:>{cell_w}}" for c in range(lo + 1, hi + 1))
        lines.append(header)
        for idx, row in enumerate(diagram.rows):
            block = blocks_at.get(idx)
            if block is not None:
                lines.append(f"  -- next {block.row_count} row(s) repeat x{block.repeat}, "
                             f"one iteration every {block.period} cycles --")
            cells = []
            for c in range(lo, hi):
                cell = row.cells[c] if c < len(row.cells) else ""
                cells.append(f"{_BUBBLE_TEXT if cell == BUBBLE_CELL else cell:>{cell_w}}")
            label = row.label[:label_w]
            lines.append(f"{label:<{label_w}}  " + " ".join(cells))
        if hi < diagram.cycles:
            lines.append("")
    return "\n".join(lines)


def render_csv(diagram: PipelineDiagram) -> str:
    """Loss-free CSV: header row, one row per instruction, `#` metadata rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["instr"] + [str(c) for c in range(1, diagram.cycles + 1)])
    for row in diagram.rows:
        cells = [_BUBBLE_CSV if c == BUBBLE_CELL else c for c in row.cells]
        w.writerow([row.label] + cells)
    w.writerow(["#mode", diagram.mode])
    for b in diagram.blocks:
        w.writerow(["#block", b.first_row, b.row_count, b.repeat, b.period])
    return buf.getvalue()


_LABEL_RE = re.compile(r"^(0x[0-9a-fA-F]+) L(\d+|-): (.*)$")


def parse_csv(text: str) -> PipelineDiagram:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    cycles = len(header) - 1
    rows: list[DiagramRow] = []
    mode = "full"
    blocks: list[Block] = []
    for line in reader:
        if not line:
            continue
        if line[0] == "#mode":
            mode = line[1]
            continue
        if line[0] == "#block":
            blocks.append(Block(*[int(v) for v in line[1:5]]))
            continue
        m = _LABEL_RE.match(line[0])
        if not m:
            raise ValueError(f"bad row label {line[0]!r}")
        cells = tuple(BUBBLE_CELL if c == _BUBBLE_CSV else c for c in line[1:1 + cycles])
        cells = cells + ("",) * (cycles - len(cells))
        rows.append(DiagramRow(
            seq=len(rows), addr=int(m.group(1), 16), disasm=m.group(3),
            source_line=None if m.group(2) == "-" else int(m.group(2)),
            flushed=FLUSH_CELL in cells, cells=cells))
    return PipelineDiagram(mode=mode, cycles=cycles, rows=tuple(rows),
                           blocks=tuple(blocks))


def to_json(diagram: PipelineDiagram) -> dict:
    return {
        "mode": diagram.mode,
        "cycles": diagram.cycles,
        "rows": [
            {
                "seq": r.seq,
                "addr": f"{r.addr:#x}",
                "disasm": r.disasm,
                "source_line": r.source_line,
                "flushed": r.flushed,
                "label": r.label,
                "cells": list(r.cells),
            }
            for r in diagram.rows
        ],
        "blocks": [
            {"first_row": b.first_row, "row_count": b.row_count,
             "repeat": b.repeat, "period": b.period}
            for b in diagram.blocks
        ],
    }


# ---------------------------------------------------------------------------
# Structural checks (used by tests and exposed for callers that want them)

def check_invariants(diagram: PipelineDiagram) -> list[str]:
    """Returns a list of violations (empty when the diagram is well-formed)."""
    problems = []
    for c in range(diagram.cycles):
        seen = set()
        for row in diagram.rows:
            cell = row.cells[c]
            stage = cell.rstrip("*")
            if stage in _STAGE_INDEX:
                if stage in seen:
                    problems.append(f"stage {stage} twice in cycle {c + 1}")
                seen.add(stage)
    for row in diagram.rows:
        filled = [i for i, cell in enumerate(row.cells) if cell]
        if filled and filled[-1] - filled[0] + 1 != len(filled):
            problems.append(f"row {row.seq} has gaps")
        order = [
            _STAGE_INDEX[c.rstrip("*")]
            for c in row.cells if c.rstrip("*") in _STAGE_INDEX
        ]
        for a, b in zip(order, order[1:]):
            if b not in (a, a + 1):
                problems.append(f"row {row.seq} stage order broken")
                break
        held_first = [c for c in row.cells if c][:1]
        if held_first and held_first[0].endswith("*"):
            problems.append(f"row {row.seq} starts held")
    return problems
