"""RV64IM instruction set: decoding, encoding, and architectural semantics.

Everything in here is a pure function over immutable values.  The module is
the single rulebook shared by the assembler (which encodes) and the pipeline
(which decodes and executes); neither adds instruction knowledge of its own.

Covered: the full 64-bit base integer set minus ``fence``, plus the eight
multiply/divide instructions and their five word forms.  ``ecall`` is the
syscall entry; ``ebreak`` decodes and halts the simulation with a diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1
MASK32 = (1 << 32) - 1

REG_COUNT = 32

# ABI register names, index order.
ABI_NAMES = (
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2",
    "s0", "s1", "a0", "a1", "a2", "a3", "a4", "a5",
    "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7",
    "s8", "s9", "s10", "s11", "t3", "t4", "t5", "t6",
)

#: name -> index, accepting x0..x31, ABI names, and fp (alias for s0).
REG_LOOKUP: dict[str, int] = {f"x{i}": i for i in range(REG_COUNT)}
REG_LOOKUP.update({name: i for i, name in enumerate(ABI_NAMES)})
REG_LOOKUP["fp"] = 8


def sign_extend(value: int, bits: int) -> int:
    """Interpret the low `bits` of value as two's complement."""
    value &= (1 << bits) - 1
    if value & (1 << (bits - 1)):
        return value - (1 << bits)
    return value


def to_u64(value: int) -> int:
    return value & MASK64


def to_s64(value: int) -> int:
    return sign_extend(value, 64)


def sext32_u64(value: int) -> int:
    """Sign-extend the low 32 bits of value up to an unsigned 64-bit word."""
    return to_u64(sign_extend(value, 32))


@dataclass(frozen=True)
class Instruction:
    """One decoded RV64IM instruction in canonical form.

    The immediate is always the fully sign-extended value (byte offsets for
    branches/jumps, the 20-bit field value for lui/auipc, the shift amount
    for immediate shifts).  Absent operand fields are None.
    """

    mnemonic: str
    format: str  # one of R I S B U J
    rd: int | None = None
    rs1: int | None = None
    rs2: int | None = None
    imm: int | None = None
    addr: int = 0
    source_line: int | None = None
    raw: int = 0

    def operand_key(self) -> tuple:
        """Identity up to placement: mnemonic and canonical operands."""
        return (self.mnemonic, self.rd, self.rs1, self.rs2, self.imm)


@dataclass(frozen=True)
class IllegalInstruction:
    """Marker for a word with no legal decoding.

    Deliberately a value rather than an exception: the pipeline traps on it
    when it reaches the decode stage, so the faulting cycle can still be
    shown.
    """

    raw: int
    addr: int = 0
    source_line: int | None = None

    @property
    def mnemonic(self) -> str:
        return "<illegal>"


@dataclass(frozen=True)
class IsaEntry:
    mnemonic: str
    format: str
    opcode: int
    funct3: int | None
    funct7: int | None
    syntax: str
    description: str


def _r(m: str, f3: int, f7: int, desc: str) -> IsaEntry:
    return IsaEntry(m, "R", 0b0110011, f3, f7, f"{m} rd, rs1, rs2", desc)


def _rw(m: str, f3: int, f7: int, desc: str) -> IsaEntry:
    return IsaEntry(m, "R", 0b0111011, f3, f7, f"{m} rd, rs1, rs2", desc)


def _i(m: str, f3: int, desc: str, opcode: int = 0b0010011, syntax: str | None = None) -> IsaEntry:
    return IsaEntry(m, "I", opcode, f3, None, syntax or f"{m} rd, rs1, imm", desc)


def _load(m: str, f3: int, desc: str) -> IsaEntry:
    return IsaEntry(m, "I", 0b0000011, f3, None, f"{m} rd, offset(rs1)", desc)


def _store(m: str, f3: int, desc: str) -> IsaEntry:
    return IsaEntry(m, "S", 0b0100011, f3, None, f"{m} rs2, offset(rs1)", desc)


def _branch(m: str, f3: int, desc: str) -> IsaEntry:
    return IsaEntry(m, "B", 0b1100011, f3, None, f"{m} rs1, rs2, label", desc)


CATALOG: tuple[IsaEntry, ...] = (
    IsaEntry("lui", "U", 0b0110111, None, None, "lui rd, imm20",
             "load the 20-bit immediate into bits 31:12 of rd, sign-extended to 64 bits"),
    IsaEntry("auipc", "U", 0b0010111, None, None, "auipc rd, imm20",
             "rd = pc + (imm20 << 12), immediate sign-extended from 32 bits"),
    IsaEntry("jal", "J", 0b1101111, None, None, "jal rd, label",
             "rd = pc + 4; jump to pc + offset"),
    IsaEntry("jalr", "I", 0b1100111, 0b000, None, "jalr rd, offset(rs1)",
             "rd = pc + 4; jump to (rs1 + offset) with bit 0 cleared"),
    _branch("beq", 0b000, "branch to label if rs1 == rs2"),
    _branch("bne", 0b001, "branch to label if rs1 != rs2"),
    _branch("blt", 0b100, "branch to label if rs1 < rs2 (signed)"),
    _branch("bge", 0b101, "branch to label if rs1 >= rs2 (signed)"),
    _branch("bltu", 0b110, "branch to label if rs1 < rs2 (unsigned)"),
    _branch("bgeu", 0b111, "branch to label if rs1 >= rs2 (unsigned)"),
    _load("lb", 0b000, "load byte, sign-extended"),
    _load("lh", 0b001, "load halfword, sign-extended"),
    _load("lw", 0b010, "load word, sign-extended"),
    _load("ld", 0b011, "load doubleword"),
    _load("lbu", 0b100, "load byte, zero-extended"),
    _load("lhu", 0b101, "load halfword, zero-extended"),
    _load("lwu", 0b110, "load word, zero-extended"),
    _store("sb", 0b000, "store low byte of rs2"),
    _store("sh", 0b001, "store low halfword of rs2"),
    _store("sw", 0b010, "store low word of rs2"),
    _store("sd", 0b011, "store doubleword rs2"),
    _i("addi", 0b000, "rd = rs1 + imm"),
    _i("slti", 0b010, "rd = 1 if rs1 < imm (signed) else 0"),
    _i("sltiu", 0b011, "rd = 1 if rs1 < imm (unsigned) else 0"),
    _i("xori", 0b100, "rd = rs1 ^ imm"),
    _i("ori", 0b110, "rd = rs1 | imm"),
    _i("andi", 0b111, "rd = rs1 & imm"),
    IsaEntry("slli", "I", 0b0010011, 0b001, 0b0000000, "slli rd, rs1, shamt",
             "shift rs1 left by shamt (0-63)"),
    IsaEntry("srli", "I", 0b0010011, 0b101, 0b0000000, "srli rd, rs1, shamt",
             "shift rs1 right logically by shamt (0-63)"),
    IsaEntry("srai", "I", 0b0010011, 0b101, 0b0100000, "srai rd, rs1, shamt",
             "shift rs1 right arithmetically by shamt (0-63)"),
    _i("addiw", 0b000, "rd = sign-extended 32-bit sum rs1 + imm", opcode=0b0011011),
    IsaEntry("slliw", "I", 0b0011011, 0b001, 0b0000000, "slliw rd, rs1, shamt",
             "32-bit left shift by shamt (0-31), result sign-extended"),
    IsaEntry("srliw", "I", 0b0011011, 0b101, 0b0000000, "srliw rd, rs1, shamt",
             "32-bit logical right shift by shamt (0-31), result sign-extended"),
    IsaEntry("sraiw", "I", 0b0011011, 0b101, 0b0100000, "sraiw rd, rs1, shamt",
             "32-bit arithmetic right shift by shamt (0-31), result sign-extended"),
    _r("add", 0b000, 0b0000000, "rd = rs1 + rs2"),
    _r("sub", 0b000, 0b0100000, "rd = rs1 - rs2"),
    _r("sll", 0b001, 0b0000000, "rd = rs1 << (rs2 & 63)"),
    _r("slt", 0b010, 0b0000000, "rd = 1 if rs1 < rs2 (signed) else 0"),
    _r("sltu", 0b011, 0b0000000, "rd = 1 if rs1 < rs2 (unsigned) else 0"),
    _r("xor", 0b100, 0b0000000, "rd = rs1 ^ rs2"),
    _r("srl", 0b101, 0b0000000, "rd = rs1 >> (rs2 & 63), logical"),
    _r("sra", 0b101, 0b0100000, "rd = rs1 >> (rs2 & 63), arithmetic"),
    _r("or", 0b110, 0b0000000, "rd = rs1 | rs2"),
    _r("and", 0b111, 0b0000000, "rd = rs1 & rs2"),
    _rw("addw", 0b000, 0b0000000, "32-bit rs1 + rs2, sign-extended"),
    _rw("subw", 0b000, 0b0100000, "32-bit rs1 - rs2, sign-extended"),
    _rw("sllw", 0b001, 0b0000000, "32-bit left shift by rs2 & 31, sign-extended"),
    _rw("srlw", 0b101, 0b0000000, "32-bit logical right shift by rs2 & 31, sign-extended"),
    _rw("sraw", 0b101, 0b0100000, "32-bit arithmetic right shift by rs2 & 31, sign-extended"),
    _r("mul", 0b000, 0b0000001, "rd = low 64 bits of rs1 * rs2"),
    _r("mulh", 0b001, 0b0000001, "rd = high 64 bits of signed rs1 * signed rs2"),
    _r("mulhsu", 0b010, 0b0000001, "rd = high 64 bits of signed rs1 * unsigned rs2"),
    _r("mulhu", 0b011, 0b0000001, "rd = high 64 bits of unsigned rs1 * unsigned rs2"),
    _r("div", 0b100, 0b0000001, "signed division; by zero gives -1, overflow gives the dividend"),
    _r("divu", 0b101, 0b0000001, "unsigned division; by zero gives all ones"),
    _r("rem", 0b110, 0b0000001, "signed remainder; by zero gives the dividend"),
    _r("remu", 0b111, 0b0000001, "unsigned remainder; by zero gives the dividend"),
    _rw("mulw", 0b000, 0b0000001, "32-bit multiply, sign-extended"),
    _rw("divw", 0b100, 0b0000001, "32-bit signed division, sign-extended"),
    _rw("divuw", 0b101, 0b0000001, "32-bit unsigned division, sign-extended"),
    _rw("remw", 0b110, 0b0000001, "32-bit signed remainder, sign-extended"),
    _rw("remuw", 0b111, 0b0000001, "32-bit unsigned remainder, sign-extended"),
    # funct7 carries the funct12 discriminator for the two SYSTEM encodings
    IsaEntry("ecall", "I", 0b1110011, 0b000, 0b0000000, "ecall",
             "environment call: invoke the syscall selected by a7"),
    IsaEntry("ebreak", "I", 0b1110011, 0b000, 0b0000001, "ebreak",
             "breakpoint: halts the simulation with a diagnostic"),
)

BY_MNEMONIC: dict[str, IsaEntry] = {e.mnemonic: e for e in CATALOG}

LOADS = {"lb", "lh", "lw", "ld", "lbu", "lhu", "lwu"}
STORES = {"sb", "sh", "sw", "sd"}
BRANCHES = {"beq", "bne", "blt", "bge", "bltu", "bgeu"}
JUMPS = {"jal", "jalr"}
SHIFT_IMMS = {"slli", "srli", "srai", "slliw", "srliw", "sraiw"}
SYSTEM = {"ecall", "ebreak"}

_MEM_WIDTH = {"b": 1, "h": 2, "w": 4, "d": 8}


def mem_width(mnemonic: str) -> int:
    return _MEM_WIDTH[mnemonic[1]]


def reads_rs1(instr: Instruction) -> bool:
    if instr.mnemonic in SYSTEM:
        return False
    return instr.format in ("R", "I", "S", "B")


def reads_rs2(instr: Instruction) -> bool:
    return instr.format in ("R", "S", "B")


def writes_rd(instr: Instruction) -> bool:
    if instr.mnemonic in SYSTEM:
        return False
    return instr.format in ("R", "I", "U", "J")


def source_regs(instr: Instruction) -> tuple[int, ...]:
    """Registers the instruction actually reads in decode, x0 excluded."""
    regs = []
    if reads_rs1(instr) and instr.rs1:
        regs.append(instr.rs1)
    if reads_rs2(instr) and instr.rs2 and instr.rs2 not in regs:
        regs.append(instr.rs2)
    return tuple(regs)


# ---------------------------------------------------------------------------
# Decoding

def _imm_i(word: int) -> int:
    return sign_extend(word >> 20, 12)


def _imm_s(word: int) -> int:
    return sign_extend(((word >> 25) << 5) | ((word >> 7) & 0x1F), 12)


def _imm_b(word: int) -> int:
    v = (((word >> 31) & 1) << 12) | (((word >> 7) & 1) << 11)
    v |= (((word >> 25) & 0x3F) << 5) | (((word >> 8) & 0xF) << 1)
    return sign_extend(v, 13)


def _imm_u(word: int) -> int:
    return sign_extend(word >> 12, 20)


def _imm_j(word: int) -> int:
    v = (((word >> 31) & 1) << 20) | (((word >> 12) & 0xFF) << 12)
    v |= (((word >> 20) & 1) << 11) | (((word >> 21) & 0x3FF) << 1)
    return sign_extend(v, 21)


_OPCODE_FMT = {
    0b0110111: "lui",
    0b0010111: "auipc",
    0b1101111: "jal",
}

_BY_F3: dict[int, dict[int, str]] = {}
for _e in CATALOG:
    if _e.opcode in (0b1100011, 0b0000011, 0b0100011) or (
            _e.opcode in (0b0010011, 0b0011011) and _e.funct7 is None):
        _BY_F3.setdefault(_e.opcode, {})[_e.funct3] = _e.mnemonic

_BY_F3_F7: dict[tuple[int, int, int], str] = {
    (e.opcode, e.funct3, e.funct7): e.mnemonic
    for e in CATALOG
    if e.opcode in (0b0110011, 0b0111011)
}


def decode(word: int, addr: int = 0, source_line: int | None = None) -> Instruction | IllegalInstruction:
    """Decode a 32-bit word, returning an illegal-instruction marker on failure."""
    word &= 0xFFFFFFFF
    opcode = word & 0x7F
    rd = (word >> 7) & 0x1F
    f3 = (word >> 12) & 0x7
    rs1 = (word >> 15) & 0x1F
    rs2 = (word >> 20) & 0x1F
    f7 = (word >> 25) & 0x7F

    def ins(mnemonic: str, fmt: str, **fields) -> Instruction:
        return Instruction(mnemonic, fmt, addr=addr, source_line=source_line,
                           raw=word, **fields)

    bad = IllegalInstruction(raw=word, addr=addr, source_line=source_line)

    if opcode == 0b0110111 or opcode == 0b0010111:
        return ins(_OPCODE_FMT[opcode], "U", rd=rd, imm=_imm_u(word))
    if opcode == 0b1101111:
        return ins("jal", "J", rd=rd, imm=_imm_j(word))
    if opcode == 0b1100111:
        if f3 != 0:
            return bad
        return ins("jalr", "I", rd=rd, rs1=rs1, imm=_imm_i(word))
    if opcode == 0b1100011:
        m = _BY_F3[opcode].get(f3)
        return ins(m, "B", rs1=rs1, rs2=rs2, imm=_imm_b(word)) if m else bad
    if opcode == 0b0000011:
        m = _BY_F3[opcode].get(f3)
        return ins(m, "I", rd=rd, rs1=rs1, imm=_imm_i(word)) if m else bad
    if opcode == 0b0100011:
        m = _BY_F3[opcode].get(f3)
        return ins(m, "S", rs1=rs1, rs2=rs2, imm=_imm_s(word)) if m else bad
    if opcode == 0b0010011:
        if f3 == 0b001 or f3 == 0b101:
            funct6 = word >> 26
            shamt = (word >> 20) & 0x3F
            if f3 == 0b001 and funct6 == 0:
                return ins("slli", "I", rd=rd, rs1=rs1, imm=shamt)
            if f3 == 0b101 and funct6 == 0:
                return ins("srli", "I", rd=rd, rs1=rs1, imm=shamt)
            if f3 == 0b101 and funct6 == 0b010000:
                return ins("srai", "I", rd=rd, rs1=rs1, imm=shamt)
            return bad
        m = _BY_F3[opcode].get(f3)
        return ins(m, "I", rd=rd, rs1=rs1, imm=_imm_i(word)) if m else bad
    if opcode == 0b0011011:
        if f3 == 0b000:
            return ins("addiw", "I", rd=rd, rs1=rs1, imm=_imm_i(word))
        shamt = (word >> 20) & 0x1F
        if f3 == 0b001 and f7 == 0:
            return ins("slliw", "I", rd=rd, rs1=rs1, imm=shamt)
        if f3 == 0b101 and f7 == 0:
            return ins("srliw", "I", rd=rd, rs1=rs1, imm=shamt)
        if f3 == 0b101 and f7 == 0b0100000:
            return ins("sraiw", "I", rd=rd, rs1=rs1, imm=shamt)
        return bad
    if opcode == 0b0110011 or opcode == 0b0111011:
        m = _BY_F3_F7.get((opcode, f3, f7))
        return ins(m, "R", rd=rd, rs1=rs1, rs2=rs2) if m else bad
    if opcode == 0b1110011:
        if f3 == 0 and rd == 0 and rs1 == 0:
            if (word >> 20) == 0:
                return ins("ecall", "I")
            if (word >> 20) == 1:
                return ins("ebreak", "I")
        return bad
    return bad


# ---------------------------------------------------------------------------
# Encoding

class EncodeError(ValueError):
    pass


def _check_reg(name: str, idx: int | None) -> int:
    if idx is None or not 0 <= idx < REG_COUNT:
        raise EncodeError(f"bad register index for {name}: {idx}")
    return idx


def _check_range(mnemonic: str, imm: int | None, lo: int, hi: int, even: bool = False) -> int:
    if imm is None or not lo <= imm <= hi:
        raise EncodeError(f"immediate {imm} out of range [{lo}, {hi}] for {mnemonic}")
    if even and imm % 2:
        raise EncodeError(f"immediate {imm} must be even for {mnemonic}")
    return imm


def encode(instr: Instruction) -> int:
    """Produce the 32-bit word for a canonical instruction.

    Raises EncodeError for unknown mnemonics, out-of-range immediates, or
    bad register indices.
    """
    entry = BY_MNEMONIC.get(instr.mnemonic)
    if entry is None:
        raise EncodeError(f"unknown mnemonic: {instr.mnemonic}")
    m = instr.mnemonic
    op = entry.opcode

    if m == "ecall":
        return 0x00000073
    if m == "ebreak":
        return 0x00100073

    if entry.format == "R":
        rd = _check_reg("rd", instr.rd)
        rs1 = _check_reg("rs1", instr.rs1)
        rs2 = _check_reg("rs2", instr.rs2)
        return (entry.funct7 << 25) | (rs2 << 20) | (rs1 << 15) | (entry.funct3 << 12) | (rd << 7) | op
    if entry.format == "I":
        rd = _check_reg("rd", instr.rd)
        rs1 = _check_reg("rs1", instr.rs1)
        if m in SHIFT_IMMS:
            hi = 63 if m in ("slli", "srli", "srai") else 31
            shamt = _check_range(m, instr.imm, 0, hi)
            top = (entry.funct7 or 0) << 25
            return top | (shamt << 20) | (rs1 << 15) | (entry.funct3 << 12) | (rd << 7) | op
        imm = _check_range(m, instr.imm, -2048, 2047)
        return ((imm & 0xFFF) << 20) | (rs1 << 15) | (entry.funct3 << 12) | (rd << 7) | op
    if entry.format == "S":
        rs1 = _check_reg("rs1", instr.rs1)
        rs2 = _check_reg("rs2", instr.rs2)
        imm = _check_range(m, instr.imm, -2048, 2047)
        return (((imm >> 5) & 0x7F) << 25) | (rs2 << 20) | (rs1 << 15) | (entry.funct3 << 12) | ((imm & 0x1F) << 7) | op
    if entry.format == "B":
        rs1 = _check_reg("rs1", instr.rs1)
        rs2 = _check_reg("rs2", instr.rs2)
        imm = _check_range(m, instr.imm, -4096, 4094, even=True)
        word = (((imm >> 12) & 1) << 31) | (((imm >> 5) & 0x3F) << 25)
        word |= (rs2 << 20) | (rs1 << 15) | (entry.funct3 << 12)
        word |= (((imm >> 1) & 0xF) << 8) | (((imm >> 11) & 1) << 7) | op
        return word
    if entry.format == "U":
        rd = _check_reg("rd", instr.rd)
        imm = _check_range(m, instr.imm, -(1 << 19), (1 << 19) - 1)
        return ((imm & 0xFFFFF) << 12) | (rd << 7) | op
    if entry.format == "J":
        rd = _check_reg("rd", instr.rd)
        imm = _check_range(m, instr.imm, -(1 << 20), (1 << 20) - 2, even=True)
        word = (((imm >> 20) & 1) << 31) | (((imm >> 1) & 0x3FF) << 21)
        word |= (((imm >> 11) & 1) << 20) | (((imm >> 12) & 0xFF) << 12) | (rd << 7) | op
        return word
    raise EncodeError(f"unhandled format {entry.format}")


# ---------------------------------------------------------------------------
# Execution semantics

@dataclass(frozen=True)
class MemAction:
    kind: str  # load | store
    width: int
    signed: bool


@dataclass(frozen=True)
class SemanticResult:
    """Pure outcome of one instruction given its operand values and pc."""

    alu_out: int
    branch_taken: bool = False
    next_pc_override: int | None = None
    mem_action: MemAction | None = None
    writeback: tuple[int, str] | None = None  # (rd, "alu" | "mem")


def _shamt64(v: int) -> int:
    return v & 63


def _shamt32(v: int) -> int:
    return v & 31


def _div_trunc(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _div64(a: int, b: int) -> int:
    sa, sb = to_s64(a), to_s64(b)
    if sb == 0:
        return MASK64
    if sa == -(1 << 63) and sb == -1:
        return to_u64(sa)
    return to_u64(_div_trunc(sa, sb))


def _rem64(a: int, b: int) -> int:
    sa, sb = to_s64(a), to_s64(b)
    if sb == 0:
        return to_u64(sa)
    if sa == -(1 << 63) and sb == -1:
        return 0
    return to_u64(sa - _div_trunc(sa, sb) * sb)


def _divu64(a: int, b: int) -> int:
    return MASK64 if b == 0 else a // b


def _remu64(a: int, b: int) -> int:
    return a if b == 0 else a % b


def _div32(a: int, b: int) -> int:
    sa, sb = sign_extend(a, 32), sign_extend(b, 32)
    if sb == 0:
        return MASK64
    if sa == -(1 << 31) and sb == -1:
        return sext32_u64(sa)
    return sext32_u64(_div_trunc(sa, sb))


def _rem32(a: int, b: int) -> int:
    sa, sb = sign_extend(a, 32), sign_extend(b, 32)
    if sb == 0:
        return sext32_u64(sa)
    if sa == -(1 << 31) and sb == -1:
        return 0
    return sext32_u64(sa - _div_trunc(sa, sb) * sb)


def _divu32(a: int, b: int) -> int:
    a &= MASK32
    b &= MASK32
    return MASK64 if b == 0 else sext32_u64(a // b)


def _remu32(a: int, b: int) -> int:
    a &= MASK32
    b &= MASK32
    return sext32_u64(a) if b == 0 else sext32_u64(a % b)


_ALU_RR = {
    "add": lambda a, b: to_u64(a + b),
    "sub": lambda a, b: to_u64(a - b),
    "sll": lambda a, b: to_u64(a << _shamt64(b)),
    "slt": lambda a, b: int(to_s64(a) < to_s64(b)),
    "sltu": lambda a, b: int(a < b),
    "xor": lambda a, b: a ^ b,
    "srl": lambda a, b: a >> _shamt64(b),
    "sra": lambda a, b: to_u64(to_s64(a) >> _shamt64(b)),
    "or": lambda a, b: a | b,
    "and": lambda a, b: a & b,
    "addw": lambda a, b: sext32_u64(a + b),
    "subw": lambda a, b: sext32_u64(a - b),
    "sllw": lambda a, b: sext32_u64(a << _shamt32(b)),
    "srlw": lambda a, b: sext32_u64((a & MASK32) >> _shamt32(b)),
    "sraw": lambda a, b: sext32_u64(sign_extend(a, 32) >> _shamt32(b)),
    "mul": lambda a, b: to_u64(a * b),
    "mulh": lambda a, b: to_u64((to_s64(a) * to_s64(b)) >> 64),
    "mulhsu": lambda a, b: to_u64((to_s64(a) * b) >> 64),
    "mulhu": lambda a, b: (a * b) >> 64,
    "div": _div64,
    "divu": _divu64,
    "rem": _rem64,
    "remu": _remu64,
    "mulw": lambda a, b: sext32_u64(a * b),
    "divw": _div32,
    "divuw": _divu32,
    "remw": _rem32,
    "remuw": _remu32,
}

_ALU_RI = {
    "addi": lambda a, i: to_u64(a + i),
    "slti": lambda a, i: int(to_s64(a) < i),
    "sltiu": lambda a, i: int(a < to_u64(i)),
    "xori": lambda a, i: to_u64(a ^ to_u64(i)),
    "ori": lambda a, i: to_u64(a | to_u64(i)),
    "andi": lambda a, i: a & to_u64(i),
    "slli": lambda a, i: to_u64(a << i),
    "srli": lambda a, i: a >> i,
    "srai": lambda a, i: to_u64(to_s64(a) >> i),
    "addiw": lambda a, i: sext32_u64(a + i),
    "slliw": lambda a, i: sext32_u64(a << i),
    "srliw": lambda a, i: sext32_u64((a & MASK32) >> i),
    "sraiw": lambda a, i: sext32_u64(sign_extend(a, 32) >> i),
}

_BRANCH_CMP = {
    "beq": lambda a, b: a == b,
    "bne": lambda a, b: a != b,
    "blt": lambda a, b: to_s64(a) < to_s64(b),
    "bge": lambda a, b: to_s64(a) >= to_s64(b),
    "bltu": lambda a, b: a < b,
    "bgeu": lambda a, b: a >= b,
}


def exec_semantics(instr: Instruction, rs1_value: int, rs2_value: int, pc: int) -> SemanticResult:
    """Architectural effect of one instruction; a pure function.

    rs1_value/rs2_value are the (possibly forwarded) 64-bit operand values.
    Illegal instructions must be trapped before this point.
    """
    m = instr.mnemonic
    a = rs1_value & MASK64
    b = rs2_value & MASK64

    if m in _ALU_RR:
        return SemanticResult(alu_out=_ALU_RR[m](a, b), writeback=(instr.rd, "alu"))
    if m in _ALU_RI:
        return SemanticResult(alu_out=_ALU_RI[m](a, instr.imm), writeback=(instr.rd, "alu"))
    if m == "lui":
        return SemanticResult(alu_out=sext32_u64(instr.imm << 12), writeback=(instr.rd, "alu"))
    if m == "auipc":
        return SemanticResult(alu_out=to_u64(pc + sign_extend(instr.imm << 12, 32)),
                              writeback=(instr.rd, "alu"))
    if m in _BRANCH_CMP:
        taken = _BRANCH_CMP[m](a, b)
        return SemanticResult(alu_out=int(taken), branch_taken=taken,
                              next_pc_override=to_u64(pc + instr.imm) if taken else None)
    if m == "jal":
        return SemanticResult(alu_out=to_u64(pc + 4), branch_taken=True,
                              next_pc_override=to_u64(pc + instr.imm),
                              writeback=(instr.rd, "alu"))
    if m == "jalr":
        return SemanticResult(alu_out=to_u64(pc + 4), branch_taken=True,
                              next_pc_override=to_u64(a + instr.imm) & ~1,
                              writeback=(instr.rd, "alu"))
    if m in LOADS:
        return SemanticResult(alu_out=to_u64(a + instr.imm),
                              mem_action=MemAction("load", mem_width(m), not m.endswith("u")),
                              writeback=(instr.rd, "mem"))
    if m in STORES:
        return SemanticResult(alu_out=to_u64(a + instr.imm),
                              mem_action=MemAction("store", mem_width(m), False))
    if m in SYSTEM:
        return SemanticResult(alu_out=0)
    raise ValueError(f"no semantics for {m}")


# ---------------------------------------------------------------------------
# Rendering and the reference catalog

def format_operands(instr: Instruction) -> str:
    m = instr.mnemonic
    if m in SYSTEM:
        return ""
    if m in LOADS or m == "jalr":
        return f"x{instr.rd}, {instr.imm}(x{instr.rs1})"
    if m in STORES:
        return f"x{instr.rs2}, {instr.imm}(x{instr.rs1})"
    if m in BRANCHES:
        return f"x{instr.rs1}, x{instr.rs2}, {instr.imm}"
    if instr.format == "R":
        return f"x{instr.rd}, x{instr.rs1}, x{instr.rs2}"
    if instr.format == "I":
        return f"x{instr.rd}, x{instr.rs1}, {instr.imm}"
    if instr.format == "U":
        return f"x{instr.rd}, {hex(instr.imm & 0xFFFFF)}"
    if instr.format == "J":
        return f"x{instr.rd}, {instr.imm}"
    raise ValueError(f"unrenderable {m}")


def format_instruction(instr: Instruction | IllegalInstruction) -> str:
    """Canonical disassembly text; reassembling it reproduces the word."""
    if isinstance(instr, IllegalInstruction):
        return f".word {hex(instr.raw)}"
    ops = format_operands(instr)
    return f"{instr.mnemonic} {ops}" if ops else instr.mnemonic


DIRECTIVES: tuple[tuple[str, str], ...] = (
    (".text", "switch to the text (code) segment"),
    (".data", "switch to the static data segment"),
    (".byte", "emit one or more 8-bit values"),
    (".half", "emit one or more 16-bit values"),
    (".word", "emit one or more 32-bit values"),
    (".dword", "emit one or more 64-bit values"),
    (".asciiz", "emit a NUL-terminated string"),
    (".string", "alias for .asciiz"),
    (".space", "reserve N zeroed bytes"),
    (".align", "align the location counter to 2^N bytes"),
    (".globl", "accepted for compatibility; has no effect"),
)


def catalog() -> dict:
    """Machine-readable instruction/directive listing for reference panels."""
    return {
        "instructions": [
            {
                "mnemonic": e.mnemonic,
                "format": e.format,
                "syntax": e.syntax,
                "description": e.description,
            }
            for e in CATALOG
        ],
        "directives": [{"name": n, "description": d} for n, d in DIRECTIVES],
    }
