"""Console syscalls dispatched at ecall commit.

The code in a7 selects the service; a0/a1 carry arguments.  The table follows
the widespread educational convention:

    1  print_int     4  print_string   5  read_int     8  read_string
    9  sbrk         10  exit          11  print_char  12  read_char
   17  exit2

Reads block: the pipeline surfaces ``awaiting_input`` and the blocked cycle
completes once a line of input is supplied (or is satisfied immediately from
a pre-recorded input tape, which is what makes backward stepping across I/O
deterministic).
"""

from __future__ import annotations

from dataclasses import dataclass

from .isa import to_s64, to_u64
from .machine import MachineState, MemAccessFault

A0, A1, A7 = 10, 11, 17

SYSCALL_KINDS = {
    1: "print_int",
    4: "print_string",
    5: "read_int",
    8: "read_string",
    9: "sbrk",
    10: "exit",
    11: "print_char",
    12: "read_char",
    17: "exit2",
}

READ_KINDS = {"read_int", "read_string", "read_char"}
EXIT_KINDS = {"exit", "exit2"}


@dataclass(frozen=True)
class ConsoleEvent:
    direction: str  # out | in
    text: str
    cycle: int


@dataclass(frozen=True)
class NeedInput:
    """The ecall at the commit point wants console input that is not on the tape."""

    kind: str


@dataclass(frozen=True)
class UnknownSyscall(Exception):
    code: int

    def __str__(self) -> str:
        return f"unknown syscall code {self.code}"


@dataclass(frozen=True)
class SyscallOutcome:
    machine: MachineState
    events: tuple[ConsoleEvent, ...] = ()
    reg_write: tuple[int, int] | None = None  # (rd, value) committed this cycle
    exit_reason: str | None = None
    exit_code: int | None = None
    consumed_input: bool = False


class InputParseError(ValueError):
    pass


def parse_input(kind: str, text: str) -> int | str:
    """Validate and convert one console line for the pending read kind."""
    if kind == "read_int":
        stripped = text.strip()
        body = stripped[1:] if stripped[:1] in ("+", "-") else stripped
        if not body or not body.isdigit():
            raise InputParseError(f"not an integer: {text!r}")
        return to_u64(int(stripped, 10))
    if kind == "read_char":
        if not text:
            raise InputParseError("empty input for read_char")
        return ord(text[0]) & 0xFF
    if kind == "read_string":
        return text.rstrip("\n")
    raise ValueError(f"not a read kind: {kind}")


def _read_cstring(machine: MachineState, addr: int, pc: int | None) -> str:
    out = bytearray()
    a = addr
    while True:
        if machine.segment_of(a) is None:
            raise MemAccessFault("out_of_segment", a, 1, pc)
        b = machine.load_byte_raw(a)
        if b == 0:
            return out.decode("latin-1")
        out.append(b)
        a += 1
        if len(out) > 1 << 20:  # unterminated string guard
            raise MemAccessFault("out_of_segment", a, 1, pc)


def dispatch(machine: MachineState, cycle: int, pc: int,
             tape: tuple[str, ...] | list, consumed: int) -> SyscallOutcome | NeedInput:
    """Commit one ecall.  Raises UnknownSyscall / MemAccessFault on bad input.

    When the syscall is a read and the tape has no unconsumed entry, returns
    NeedInput without touching any state.
    """
    code = to_s64(machine.read_reg(A7))
    kind = SYSCALL_KINDS.get(code)
    if kind is None:
        raise UnknownSyscall(code)
    a0 = machine.read_reg(A0)

    if kind in READ_KINDS:
        if consumed >= len(tape):
            return NeedInput(kind)
        raw = tape[consumed]
        value = parse_input(kind, raw)
        event = ConsoleEvent("in", raw, cycle)
        if kind == "read_int" or kind == "read_char":
            m = machine.write_reg(A0, value)
            return SyscallOutcome(m, (event,), reg_write=(A0, m.read_reg(A0)),
                                  consumed_input=True)
        # read_string: write up to a1-1 bytes plus NUL, truncating
        buf_len = to_s64(machine.read_reg(A1))
        data = value.encode("latin-1", errors="replace")
        m = machine
        if buf_len > 0:
            data = data[:buf_len - 1]
            for i, b in enumerate(data):
                m = m.store(a0 + i, 1, b, pc)
            m = m.store(a0 + len(data), 1, 0, pc)
        return SyscallOutcome(m, (event,), consumed_input=True)

    if kind == "print_int":
        return SyscallOutcome(machine, (ConsoleEvent("out", str(to_s64(a0)), cycle),))
    if kind == "print_char":
        return SyscallOutcome(machine, (ConsoleEvent("out", chr(a0 & 0xFF), cycle),))
    if kind == "print_string":
        text = _read_cstring(machine, a0, pc)
        return SyscallOutcome(machine, (ConsoleEvent("out", text, cycle),))
    if kind == "sbrk":
        m, old = machine.sbrk(to_s64(a0), pc)
        m = m.write_reg(A0, old)
        return SyscallOutcome(m, (), reg_write=(A0, old))
    if kind == "exit":
        return SyscallOutcome(machine, (), exit_reason="exit", exit_code=0)
    if kind == "exit2":
        return SyscallOutcome(machine, (), exit_reason="exit",
                              exit_code=to_s64(a0) & 0xFF)
    raise AssertionError(kind)
