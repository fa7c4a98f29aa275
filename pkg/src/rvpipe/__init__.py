"""rvpipe: a cycle-accurate, reversible five-stage RV64IM pipeline simulator."""

from .asm import (AssemblyError, Diagnostic, ProgramImage, assemble,
                  disassemble, try_assemble)
from .diagram import (PipelineDiagram, build as build_diagram, expand,
                      parse_csv, render_csv, render_text, squash)
from .history import AtCycleZero, HistoryLog, Simulation
from .isa import (Instruction, IllegalInstruction, catalog, decode, encode,
                  exec_semantics)
from .machine import MachineState, MemAccessFault, SegmentLayout
from .pipeline import (SimOptions, SimState, Snapshot, forward_select,
                       hazard_check, init, run, stats, step)
from .programs import EXAMPLES
from .service import SessionStore, serve
from .syscalls import SYSCALL_KINDS

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "AtCycleZero", "Diagnostic", "EXAMPLES",
    "IllegalInstruction", "Instruction", "HistoryLog", "MachineState",
    "MemAccessFault", "PipelineDiagram", "ProgramImage", "SegmentLayout",
    "SessionStore", "SimOptions", "SimState", "Simulation", "Snapshot",
    "SYSCALL_KINDS", "assemble", "build_diagram", "catalog", "decode",
    "disassemble", "encode", "exec_semantics", "expand", "forward_select",
    "hazard_check", "init", "parse_csv", "render_csv", "render_text", "run",
    "serve", "squash", "stats", "step", "try_assemble",
]
