"""Cycle-accurate five-stage pipeline (IF, ID, EX, MEM, WB).

Conventions, fixed here and relied on by the timing tests:

* Synchronous latches: what a stage consumes in cycle c was latched at the
  end of cycle c-1.  A snapshot for cycle c shows the work done during c.
* The register file writes in the first half-cycle and reads in the second,
  so a decode-stage read observes a same-cycle write-back.  Without
  forwarding this fixes the distance-1 RAW penalty at exactly 2 stalls.
* Forwarding (when enabled) serves the EX operand muxes from the EX/MEM and
  EX/MEM-over-MEM/WB priority; loads cannot bypass from EX/MEM, which is why
  a load-use pair still stalls one cycle.
* All control transfers resolve in MEM with predict-not-taken; a taken
  branch or any jump squashes the occupants of IF, ID and EX and redirects
  fetch.
* Syscalls commit at WB.  Because their register result is born at the
  commit point, an ecall acts as an a0 producer for hazard detection; a
  consumer of a0 stalls while the ecall sits in EX or MEM, in both modes.
* Fetch stops once the fetch pc walks past the last text word; the run
  halts when the pipeline drains (or earlier on exit/ebreak, a fault, or
  the cycle limit).

Everything is immutable: ``step`` maps one SimState to the next, which makes
per-cycle history snapshots exact and cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import syscalls
from .isa import (
    Instruction, IllegalInstruction, exec_semantics, format_instruction,
    mem_width, reads_rs1, reads_rs2, writes_rd, source_regs, to_u64,
    LOADS, STORES,
)
from .machine import MachineState, MemAccessFault
from .syscalls import ConsoleEvent, NeedInput

COLOR_COUNT = 8
STAGES = ("IF", "ID", "EX", "MEM", "WB")

FWD_REGISTER, FWD_EX_MEM, FWD_MEM_WB = 0, 1, 2
_FWD_NAMES = {FWD_EX_MEM: "ex_mem", FWD_MEM_WB: "mem_wb"}


@dataclass(frozen=True)
class SimOptions:
    forwarding: bool = True
    max_cycles: int = 10000


@dataclass(frozen=True)
class Tag:
    """Identity of one dynamic instruction instance."""

    seq: int
    addr: int
    disasm: str
    source_line: int | None
    color: int


@dataclass(frozen=True)
class IFID:
    tag: Tag
    pc: int
    word: int
    instr: Instruction | IllegalInstruction


@dataclass(frozen=True)
class IDEX:
    tag: Tag
    instr: Instruction
    pc: int
    rs1_value: int
    rs2_value: int


@dataclass(frozen=True)
class EXMEM:
    tag: Tag
    instr: Instruction
    pc: int
    alu_out: int
    store_data: int
    taken: bool
    target: int | None
    wb_rd: int | None
    wb_from_mem: bool


@dataclass(frozen=True)
class MEMWB:
    tag: Tag
    instr: Instruction
    pc: int
    value: int
    wb_rd: int | None
    from_mem: bool
    next_pc: int


@dataclass(frozen=True)
class SimFault:
    kind: str
    message: str
    stage: str
    addr: int | None = None
    width: int | None = None
    pc: int | None = None


@dataclass(frozen=True)
class HazardEvent:
    cycle: int
    kind: str  # raw_stall | load_use_stall | control_flush
    stage: str
    consumer: Tag | None
    producer: Tag | None
    registers: tuple[int, ...] = ()


@dataclass(frozen=True)
class ForwardUse:
    operand: str  # a | b
    source: str  # ex_mem | mem_wb


@dataclass(frozen=True)
class Component:
    id: str
    label: str
    stage: str
    description: str
    signals: dict


@dataclass(frozen=True)
class Snapshot:
    """Everything the UI needs to draw one cycle."""

    cycle: int
    status: str
    reason: str | None
    stages: dict  # stage name -> Tag | None
    flushed: tuple[Tag, ...]
    forwards: tuple[ForwardUse, ...]
    events: tuple[HazardEvent, ...]
    components: tuple[Component, ...]


@dataclass(frozen=True)
class PipeState:
    cycle: int
    fetch_pc: int
    if_tag: Tag | None  # pending fetch attempt kept across a stall
    if_id: IFID | None
    id_ex: IDEX | None
    ex_mem: EXMEM | None
    mem_wb: MEMWB | None
    status: str = "running"  # running | halted | faulted
    reason: str | None = None
    exit_code: int | None = None
    fault: SimFault | None = None
    retired: int = 0
    raw_stalls: int = 0
    load_use_stalls: int = 0
    flushes: int = 0
    flush_bubbles: int = 0
    seq_next: int = 0
    inputs_consumed: int = 0


@dataclass(frozen=True)
class SimState:
    machine: MachineState
    pipe: PipeState
    transcript: tuple[ConsoleEvent, ...]
    options: SimOptions
    image: object  # ProgramImage; shared, read-only


@dataclass(frozen=True)
class Stepped:
    sim: SimState
    snapshot: Snapshot
    events: tuple[HazardEvent, ...]


@dataclass(frozen=True)
class RunResult:
    sim: SimState
    trace: list
    stats: dict
    pending: NeedInput | None = None


def init(image, options: SimOptions | None = None) -> SimState:
    """Cycle 0: empty pipeline, pc at the entry point, registers zero but sp."""
    options = options or SimOptions()
    if not image.text:
        raise ValueError("empty text segment")
    machine = MachineState.from_image(image)
    pipe = PipeState(cycle=0, fetch_pc=image.entry, if_tag=None,
                     if_id=None, id_ex=None, ex_mem=None, mem_wb=None)
    return SimState(machine=machine, pipe=pipe, transcript=(),
                    options=options, image=image)


def stats(sim: SimState) -> dict:
    p = sim.pipe
    return {
        "cycles": p.cycle,
        "retired": p.retired,
        "raw_stalls": p.raw_stalls,
        "load_use_stalls": p.load_use_stalls,
        "flushes": p.flushes,
        "flush_bubbles": p.flush_bubbles,
        "cpi": (p.cycle / p.retired) if p.retired else None,
    }


# ---------------------------------------------------------------------------
# Hazard detection and forwarding (pure rule functions)

def _produced_reg(instr) -> int | None:
    """Register an in-flight instruction will write, for hazard purposes.

    An ecall may write a0 at commit (reads, sbrk), which no bypass can serve,
    so it is treated as an a0 producer here.
    """
    if instr is None:
        return None
    if isinstance(instr, IllegalInstruction):
        return None
    if instr.mnemonic == "ecall":
        return syscalls.A0
    if writes_rd(instr) and instr.rd:
        return instr.rd
    return None


def hazard_check(id_instr, ex_latch, mem_latch, forwarding: bool):
    """Decide whether the instruction in decode must stall this cycle.

    Returns (stall, kind, registers, producer_latch).  With forwarding the
    only data stall is load-use (plus the commit-time ecall case); without
    it, any producer still in EX or MEM forces a wait, since the first
    half-cycle write-back makes WB conflicts resolve for free.
    """
    if id_instr is None or isinstance(id_instr, IllegalInstruction):
        return False, None, (), None
    sources = source_regs(id_instr)
    if not sources:
        return False, None, (), None

    def match(latch):
        if latch is None:
            return ()
        rd = _produced_reg(latch.instr)
        return tuple(r for r in sources if r == rd)

    if forwarding:
        if ex_latch is not None and not isinstance(ex_latch.instr, IllegalInstruction):
            hit = match(ex_latch)
            if hit and ex_latch.instr.mnemonic in LOADS:
                return True, "load_use_stall", hit, ex_latch
            if hit and ex_latch.instr.mnemonic == "ecall":
                return True, "raw_stall", hit, ex_latch
        if mem_latch is not None and not isinstance(mem_latch.instr, IllegalInstruction):
            hit = match(mem_latch)
            if hit and mem_latch.instr.mnemonic == "ecall":
                return True, "raw_stall", hit, mem_latch
        return False, None, (), None

    for latch in (ex_latch, mem_latch):
        hit = match(latch)
        if hit:
            return True, "raw_stall", hit, latch
    return False, None, (), None


def forward_select(instr: Instruction, ex_mem: EXMEM | None, mem_wb: MEMWB | None):
    """Pick each EX operand's source: register file, EX/MEM, or MEM/WB.

    EX/MEM wins when both match (most recent producer); loads cannot serve
    from EX/MEM because their value is not ready until the end of MEM, and
    the load-use stall guarantees that case never reaches here.  x0 never
    forwards.
    """

    def pick(reg: int | None, needed: bool) -> int:
        if not needed or not reg:
            return FWD_REGISTER
        if ex_mem is not None and ex_mem.wb_rd == reg and not ex_mem.wb_from_mem:
            return FWD_EX_MEM
        if mem_wb is not None and mem_wb.wb_rd == reg:
            return FWD_MEM_WB
        return FWD_REGISTER

    fa = pick(instr.rs1, reads_rs1(instr))
    fb = pick(instr.rs2, reads_rs2(instr))
    return fa, fb


# ---------------------------------------------------------------------------
# The clock step

def step(sim: SimState, input_tape=()) -> Stepped | NeedInput:
    """Advance exactly one clock; returns NeedInput (state untouched) when an
    ecall read reaches the commit point with no tape entry left."""
    pipe = sim.pipe
    if pipe.status != "running":
        raise RuntimeError(f"cannot step a {pipe.status} simulation")
    image = sim.image
    opts = sim.options
    cycle = pipe.cycle + 1

    machine = sim.machine
    transcript = sim.transcript
    events: list[HazardEvent] = []
    flushed: list[Tag] = []

    status = "running"
    reason: str | None = None
    exit_code: int | None = None
    fault: SimFault | None = None
    retired = pipe.retired
    consumed = pipe.inputs_consumed
    seq_next = pipe.seq_next

    text_base = machine.layout.text_base
    text_end = machine.text_end

    # -- fetch peek (pure): who occupies IF this cycle -----------------------
    fetch_pc = pipe.fetch_pc
    if_occ: Tag | None = None
    fetched_tw = None
    fetch_fault: SimFault | None = None
    if pipe.if_tag is not None:
        if_occ = pipe.if_tag
        fetched_tw = image.text_map[fetch_pc]
    elif fetch_pc == text_end:
        pass  # nothing left to fetch: drain
    elif fetch_pc % 4:
        fetch_fault = SimFault("misaligned", f"misaligned fetch at {fetch_pc:#x}",
                               "IF", addr=fetch_pc, width=4)
    elif text_base <= fetch_pc < text_end:
        fetched_tw = image.text_map[fetch_pc]
        if_occ = Tag(seq_next, fetch_pc, format_instruction(fetched_tw.instr),
                     fetched_tw.source_line, seq_next % COLOR_COUNT)
        seq_next += 1
    else:
        fetch_fault = SimFault("out_of_segment",
                               f"instruction fetch outside the text segment at {fetch_pc:#x}",
                               "IF", addr=fetch_pc, width=4)

    # -- WB: commit (register write in the first half-cycle) -----------------
    wb_in = pipe.mem_wb
    wb_write: tuple[int, int] | None = None
    halted_by_commit = False
    if wb_in is not None:
        ins = wb_in.instr
        if ins.mnemonic == "ecall":
            try:
                out = syscalls.dispatch(machine, cycle, ins.addr, input_tape, consumed)
            except syscalls.UnknownSyscall as exc:
                status, fault = "faulted", SimFault("unknown_syscall", str(exc), "WB", pc=ins.addr)
                out = None
            except MemAccessFault as exc:
                status = "faulted"
                fault = SimFault(exc.kind, str(exc), "WB", addr=exc.addr,
                                 width=exc.width, pc=ins.addr)
                out = None
            if isinstance(out, NeedInput):
                return out
            if out is not None:
                machine = out.machine
                transcript = transcript + out.events
                consumed += 1 if out.consumed_input else 0
                wb_write = out.reg_write
                if out.exit_reason:
                    status, reason = "halted", out.exit_reason
                    exit_code = out.exit_code
                    halted_by_commit = True
                machine = machine.with_pc(wb_in.next_pc)
                retired += 1
        elif ins.mnemonic == "ebreak":
            status, reason = "halted", "ebreak"
            halted_by_commit = True
            machine = machine.with_pc(wb_in.next_pc)
            retired += 1
        else:
            if wb_in.wb_rd is not None:
                machine = machine.write_reg(wb_in.wb_rd, wb_in.value)
                if wb_in.wb_rd:
                    wb_write = (wb_in.wb_rd, wb_in.value)
            machine = machine.with_pc(wb_in.next_pc)
            retired += 1

    # -- MEM: memory access and control-flow resolution ----------------------
    mem_in = pipe.ex_mem
    redirect: int | None = None
    mem_value = 0
    mem_loaded = False
    new_mem_wb: MEMWB | None = None
    if mem_in is not None:
        value = mem_in.alu_out
        ins = mem_in.instr
        if status == "running":
            try:
                if ins.mnemonic in LOADS:
                    value = machine.load(mem_in.alu_out, mem_width(ins.mnemonic),
                                         signed=not ins.mnemonic.endswith("u"), pc=ins.addr)
                    mem_value, mem_loaded = value, True
                elif ins.mnemonic in STORES:
                    machine = machine.store(mem_in.alu_out, mem_width(ins.mnemonic),
                                            mem_in.store_data, pc=ins.addr)
            except MemAccessFault as exc:
                status = "faulted"
                fault = SimFault(exc.kind, str(exc), "MEM", addr=exc.addr,
                                 width=exc.width, pc=ins.addr)
            if status == "running" and mem_in.target is not None:
                redirect = mem_in.target
                events.append(HazardEvent(cycle, "control_flush", "MEM",
                                          consumer=None, producer=mem_in.tag))
        new_mem_wb = MEMWB(tag=mem_in.tag, instr=ins, pc=mem_in.pc, value=value,
                           wb_rd=mem_in.wb_rd, from_mem=mem_loaded,
                           next_pc=mem_in.target if mem_in.target is not None
                           else to_u64(mem_in.pc + 4))

    # -- EX: ALU with forwarding muxes ---------------------------------------
    ex_in = pipe.id_ex
    new_ex_mem: EXMEM | None = None
    forwards: list[ForwardUse] = []
    fwd_a = fwd_b = FWD_REGISTER
    ex_scratch = None
    if ex_in is not None and status == "running":
        a, b = ex_in.rs1_value, ex_in.rs2_value
        if opts.forwarding:
            fwd_a, fwd_b = forward_select(ex_in.instr, pipe.ex_mem, pipe.mem_wb)
            if fwd_a == FWD_EX_MEM:
                a = pipe.ex_mem.alu_out
            elif fwd_a == FWD_MEM_WB:
                a = pipe.mem_wb.value
            if fwd_b == FWD_EX_MEM:
                b = pipe.ex_mem.alu_out
            elif fwd_b == FWD_MEM_WB:
                b = pipe.mem_wb.value
            forwards = [ForwardUse(op, _FWD_NAMES[code])
                        for op, code in (("a", fwd_a), ("b", fwd_b))
                        if code != FWD_REGISTER]
        sem = exec_semantics(ex_in.instr, a, b, ex_in.pc)
        wb_rd = None
        wb_from_mem = False
        if sem.writeback is not None:
            wb_rd = sem.writeback[0]
            wb_from_mem = sem.writeback[1] == "mem"
        new_ex_mem = EXMEM(tag=ex_in.tag, instr=ex_in.instr, pc=ex_in.pc,
                           alu_out=sem.alu_out, store_data=b,
                           taken=sem.branch_taken, target=sem.next_pc_override,
                           wb_rd=wb_rd, wb_from_mem=wb_from_mem)
        ex_scratch = (a, b, sem)

    # -- ID: decode, register read (second half-cycle), hazard check ---------
    id_in = pipe.if_id
    new_id_ex: IDEX | None = None
    stall = False
    stall_kind = None
    stall_regs: tuple[int, ...] = ()
    id_reads = (0, 0, 0, 0)  # rs1 idx, rs2 idx, rs1 data, rs2 data
    if id_in is not None and status == "running":
        if isinstance(id_in.instr, IllegalInstruction):
            # a same-cycle redirect squashes this slot before it can trap
            if redirect is None:
                status = "faulted"
                fault = SimFault("illegal_instruction",
                                 f"illegal instruction {id_in.word:#010x} at {id_in.pc:#x}",
                                 "ID", addr=id_in.pc, pc=id_in.pc)
        else:
            ins = id_in.instr
            r1 = ins.rs1 if reads_rs1(ins) and ins.rs1 is not None else 0
            r2 = ins.rs2 if reads_rs2(ins) and ins.rs2 is not None else 0
            v1, v2 = machine.read_reg(r1), machine.read_reg(r2)
            id_reads = (r1, r2, v1, v2)
            stall, stall_kind, stall_regs, producer = hazard_check(
                ins, pipe.id_ex, pipe.ex_mem, opts.forwarding)
            if stall:
                events.append(HazardEvent(cycle, stall_kind, "ID",
                                          consumer=id_in.tag,
                                          producer=producer.tag if producer else None,
                                          registers=stall_regs))
            else:
                new_id_ex = IDEX(tag=id_in.tag, instr=ins, pc=id_in.pc,
                                 rs1_value=v1, rs2_value=v2)

    # -- IF: fetch or hold ----------------------------------------------------
    if status == "running" and fetch_fault is not None and redirect is None:
        status, fault = "faulted", fetch_fault
    if stall:
        new_if_id = pipe.if_id
        new_fetch_pc = fetch_pc
        new_if_tag = if_occ
    elif fetched_tw is not None:
        new_if_id = IFID(tag=if_occ, pc=fetch_pc, word=fetched_tw.word,
                         instr=fetched_tw.instr)
        new_fetch_pc = fetch_pc + 4
        new_if_tag = None
    else:
        new_if_id = None
        new_fetch_pc = fetch_pc
        new_if_tag = None

    # -- flush / exit-squash overrides ----------------------------------------
    raw_stalls = pipe.raw_stalls
    load_use_stalls = pipe.load_use_stalls
    flushes = pipe.flushes
    flush_bubbles = pipe.flush_bubbles
    if redirect is not None and status in ("running",):
        flushed = [t for t in (if_occ,
                               id_in.tag if id_in else None,
                               ex_in.tag if ex_in else None) if t is not None]
        events = [e for e in events if e.kind == "control_flush"]
        stall = False
        new_if_id = None
        new_id_ex = None
        new_ex_mem = None
        new_if_tag = None
        new_fetch_pc = redirect
        flushes += 1
        flush_bubbles += len(flushed)
    elif halted_by_commit:
        flushed = [t for t in (if_occ,
                               id_in.tag if id_in else None,
                               ex_in.tag if ex_in else None,
                               mem_in.tag if mem_in else None) if t is not None]
        new_if_id = new_id_ex = new_ex_mem = new_mem_wb = None
        new_if_tag = None
        new_fetch_pc = fetch_pc
    if stall:
        if stall_kind == "load_use_stall":
            load_use_stalls += 1
        else:
            raw_stalls += 1

    # -- end-of-cycle status -------------------------------------------------
    if status == "running":
        drained = (new_if_id is None and new_id_ex is None and new_ex_mem is None
                   and new_mem_wb is None and new_if_tag is None
                   and not (text_base <= new_fetch_pc < text_end))
        if drained:
            status, reason = "halted", "drain"
        elif cycle >= opts.max_cycles:
            status, reason = "halted", "cycle-limit"

    new_pipe = PipeState(
        cycle=cycle, fetch_pc=new_fetch_pc, if_tag=new_if_tag,
        if_id=new_if_id, id_ex=new_id_ex, ex_mem=new_ex_mem, mem_wb=new_mem_wb,
        status=status, reason=reason, exit_code=exit_code, fault=fault,
        retired=retired, raw_stalls=raw_stalls, load_use_stalls=load_use_stalls,
        flushes=flushes, flush_bubbles=flush_bubbles,
        seq_next=seq_next, inputs_consumed=consumed,
    )
    new_sim = SimState(machine=machine, pipe=new_pipe, transcript=transcript,
                       options=opts, image=image)

    stages = {
        "IF": if_occ,
        "ID": id_in.tag if id_in else None,
        "EX": ex_in.tag if ex_in else None,
        "MEM": mem_in.tag if mem_in else None,
        "WB": wb_in.tag if wb_in else None,
    }
    components = _build_components(
        sim, new_sim, cycle, fetch_pc, fetched_tw, id_in, id_reads, stall,
        stall_kind, ex_in, ex_scratch, fwd_a, fwd_b, mem_in, mem_value,
        mem_loaded, wb_in, wb_write, redirect)
    snapshot = Snapshot(cycle=cycle, status=status, reason=reason,
                        stages=stages, flushed=tuple(flushed),
                        forwards=tuple(forwards), events=tuple(events),
                        components=components)
    return Stepped(sim=new_sim, snapshot=snapshot, events=tuple(events))


def run(sim: SimState, input_tape=(), until_cycle: int | None = None) -> RunResult:
    """Repeat step until a status change, the tape runs dry, or a cycle bound."""
    trace = []
    pending = None
    while sim.pipe.status == "running":
        if until_cycle is not None and sim.pipe.cycle >= until_cycle:
            break
        out = step(sim, input_tape)
        if isinstance(out, NeedInput):
            pending = out
            break
        sim = out.sim
        trace.append(out.snapshot)
    return RunResult(sim=sim, trace=trace, stats=stats(sim), pending=pending)


# ---------------------------------------------------------------------------
# Datapath introspection

_COMPONENT_INFO = {
    "pc": ("PC", "IF",
           "Program counter: byte address of the instruction being fetched this cycle."),
    "instr_mem": ("Instruction memory", "IF",
                  "Read-only memory holding the text segment; returns the 32-bit word at the fetch address."),
    "if_id": ("IF/ID latch", "IF/ID",
              "Pipeline register between fetch and decode; its content is the decode stage's input this cycle."),
    "reg_file": ("Register file", "ID",
                 "32 x 64-bit registers. Written in the first half-cycle by write-back and read in the second half by decode, so a same-cycle read sees the new value. x0 is hard-wired to zero."),
    "imm_gen": ("Immediate generator", "ID",
                "Extracts the instruction's immediate field and sign-extends it to 64 bits."),
    "control": ("Control unit", "ID",
                "Derives the control signals (register write, memory read/write, ALU operand source, branch/jump) from the decoded instruction."),
    "hazard_unit": ("Hazard detection unit", "ID",
                    "Stalls fetch and decode and inserts a bubble into execute when decode needs a value that cannot arrive in time (load-use, commit-time syscall results, or any in-flight producer when forwarding is off)."),
    "id_ex": ("ID/EX latch", "ID/EX",
              "Pipeline register between decode and execute; carries the register values, immediate and control bits execute consumes this cycle."),
    "alu": ("ALU and operand muxes", "EX",
            "Computes arithmetic/logic results, memory addresses and branch comparisons. The operand muxes pick the register value (0), the EX/MEM bypass (1) or the MEM/WB bypass (2)."),
    "branch_adder": ("Branch target adder", "EX",
                     "Computes the control-transfer target: pc + offset for branches and jal, rs1 + offset for jalr."),
    "fwd_unit": ("Forwarding unit", "EX",
                 "Compares execute's source registers with the destinations held in EX/MEM and MEM/WB and steers the newest value onto the ALU inputs; EX/MEM wins ties."),
    "ex_mem": ("EX/MEM latch", "EX/MEM",
               "Pipeline register between execute and memory; carries the ALU result, store data and resolved branch decision."),
    "data_mem": ("Data memory", "MEM",
                 "Performs the load or store for the instruction in the memory stage; taken control transfers redirect fetch from here."),
    "mem_wb": ("MEM/WB latch", "MEM/WB",
               "Pipeline register between memory and write-back; carries the value about to be committed."),
    "wb_mux": ("Write-back mux", "WB",
               "Selects the ALU result or the loaded value and writes it to the register file; writes to x0 are discarded."),
}


def component_ids(forwarding: bool) -> list[str]:
    ids = list(_COMPONENT_INFO)
    if not forwarding:
        ids.remove("fwd_unit")
    return ids


def _comp(cid: str, signals: dict) -> Component:
    label, stage, desc = _COMPONENT_INFO[cid]
    return Component(cid, label, stage, desc, signals)


def _control_bits(instr) -> dict:
    if instr is None or isinstance(instr, IllegalInstruction):
        return {"active": False, "reg_write": False, "mem_read": False,
                "mem_write": False, "alu_src_imm": False, "branch": False,
                "jump": False, "wb_from_mem": False}
    m = instr.mnemonic
    return {
        "active": True,
        "reg_write": writes_rd(instr) and bool(instr.rd),
        "mem_read": m in LOADS,
        "mem_write": m in STORES,
        "alu_src_imm": instr.format in ("I", "S", "U") and m not in ("ecall", "ebreak"),
        "branch": instr.format == "B",
        "jump": m in ("jal", "jalr"),
        "wb_from_mem": m in LOADS,
    }


def _build_components(old_sim, new_sim, cycle, fetch_pc, fetched_tw, id_in,
                      id_reads, stall, stall_kind, ex_in, ex_scratch,
                      fwd_a, fwd_b, mem_in, mem_value, mem_loaded,
                      wb_in, wb_write, redirect) -> tuple[Component, ...]:
    opts = old_sim.options
    comps: list[Component] = []
    comps.append(_comp("pc", {
        "value": to_u64(fetch_pc),
        "next_value": to_u64(new_sim.pipe.fetch_pc),
    }))
    comps.append(_comp("instr_mem", {
        "active": fetched_tw is not None,
        "addr": to_u64(fetch_pc),
        "word": fetched_tw.word if fetched_tw else 0,
    }))
    comps.append(_comp("if_id", {
        "occupied": id_in is not None,
        "pc": to_u64(id_in.pc) if id_in else 0,
        "word": id_in.word if id_in else 0,
    }))
    r1, r2, v1, v2 = id_reads
    comps.append(_comp("reg_file", {
        "rs1": r1, "rs2": r2, "rs1_data": v1, "rs2_data": v2,
        "wb_rd": wb_write[0] if wb_write else 0,
        "wb_data": wb_write[1] if wb_write else 0,
        "wb_enable": wb_write is not None,
    }))
    id_instr = id_in.instr if id_in and not isinstance(id_in.instr, IllegalInstruction) else None
    comps.append(_comp("imm_gen", {
        "active": id_instr is not None and id_instr.imm is not None,
        "imm": to_u64(id_instr.imm) if id_instr is not None and id_instr.imm is not None else 0,
    }))
    comps.append(_comp("control", _control_bits(id_instr)))
    comps.append(_comp("hazard_unit", {
        "stall": stall,
        "load_use": stall_kind == "load_use_stall",
    }))
    comps.append(_comp("id_ex", {
        "occupied": ex_in is not None,
        "pc": to_u64(ex_in.pc) if ex_in else 0,
        "rs1_value": ex_in.rs1_value if ex_in else 0,
        "rs2_value": ex_in.rs2_value if ex_in else 0,
        "imm": to_u64(ex_in.instr.imm) if ex_in and ex_in.instr.imm is not None else 0,
        "rd": ex_in.instr.rd if ex_in and ex_in.instr.rd is not None else 0,
    }))
    if ex_scratch is not None:
        a, b, sem = ex_scratch
        alu_sig = {"active": True, "input_a": a, "input_b": b,
                   "result": sem.alu_out, "forward_a": fwd_a, "forward_b": fwd_b}
        instr = ex_in.instr
        if instr.format in ("B",) or instr.mnemonic == "jal":
            target = to_u64(ex_in.pc + instr.imm)
            badder = {"active": True, "base": to_u64(ex_in.pc),
                      "offset": to_u64(instr.imm), "target": target}
        elif instr.mnemonic == "jalr":
            badder = {"active": True, "base": a, "offset": to_u64(instr.imm),
                      "target": to_u64(a + instr.imm) & ~1}
        else:
            badder = {"active": False, "base": 0, "offset": 0, "target": 0}
    else:
        alu_sig = {"active": False, "input_a": 0, "input_b": 0, "result": 0,
                   "forward_a": 0, "forward_b": 0}
        badder = {"active": False, "base": 0, "offset": 0, "target": 0}
    comps.append(_comp("alu", alu_sig))
    comps.append(_comp("branch_adder", badder))
    if opts.forwarding:
        comps.append(_comp("fwd_unit", {"forward_a": fwd_a, "forward_b": fwd_b}))
    comps.append(_comp("ex_mem", {
        "occupied": mem_in is not None,
        "alu_out": mem_in.alu_out if mem_in else 0,
        "store_data": mem_in.store_data if mem_in else 0,
        "rd": mem_in.wb_rd if mem_in and mem_in.wb_rd is not None else 0,
        "taken": bool(mem_in.taken) if mem_in else False,
        "target": to_u64(mem_in.target) if mem_in and mem_in.target is not None else 0,
    }))
    mem_instr = mem_in.instr if mem_in else None
    is_load = mem_instr is not None and mem_instr.mnemonic in LOADS
    is_store = mem_instr is not None and mem_instr.mnemonic in STORES
    comps.append(_comp("data_mem", {
        "read": is_load, "write": is_store,
        "addr": mem_in.alu_out if (is_load or is_store) else 0,
        "data_in": mem_in.store_data if is_store else 0,
        "data_out": mem_value if mem_loaded else 0,
        "redirect": redirect is not None,
        "redirect_target": to_u64(redirect) if redirect is not None else 0,
    }))
    comps.append(_comp("mem_wb", {
        "occupied": wb_in is not None,
        "value": wb_in.value if wb_in else 0,
        "rd": wb_in.wb_rd if wb_in and wb_in.wb_rd is not None else 0,
        "from_mem": bool(wb_in.from_mem) if wb_in else False,
    }))
    comps.append(_comp("wb_mux", {
        "write_enable": wb_write is not None,
        "rd": wb_write[0] if wb_write else 0,
        "value": wb_write[1] if wb_write else 0,
        "from_mem": bool(wb_in.from_mem) if wb_in else False,
    }))
    return tuple(comps)


def initial_snapshot(sim: SimState) -> Snapshot:
    """Cycle 0: five bubbles, latches empty, pc at the entry point."""
    blank_step = _build_components(sim, sim, 0, sim.pipe.fetch_pc, None, None,
                                   (0, 0, 0, 0), False, None, None, None, 0, 0,
                                   None, 0, False, None, None, None)
    return Snapshot(cycle=0, status=sim.pipe.status, reason=sim.pipe.reason,
                    stages={s: None for s in STAGES}, flushed=(),
                    forwards=(), events=(), components=blank_step)
