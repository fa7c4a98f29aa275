"""Independent RV64IM reference encoder for oracle checks.

Written straight off the opcode tables of the ISA manual, using bit-string
concatenation rather than shift/mask arithmetic so that it shares no code
(and no bugs) with the package under test.
"""

from __future__ import annotations


def _b(value: int, width: int) -> str:
    return format(value & ((1 << width) - 1), f"0{width}b")


def _word(bits: str) -> int:
    assert len(bits) == 32, len(bits)
    return int(bits, 2)


def _r_type(f7: str, f3: str, op: str, rd: int, rs1: int, rs2: int) -> int:
    return _word(f7 + _b(rs2, 5) + _b(rs1, 5) + f3 + _b(rd, 5) + op)


def _i_type(f3: str, op: str, rd: int, rs1: int, imm: int) -> int:
    return _word(_b(imm, 12) + _b(rs1, 5) + f3 + _b(rd, 5) + op)


def _s_type(f3: str, op: str, rs1: int, rs2: int, imm: int) -> int:
    i = _b(imm, 12)
    return _word(i[0:7] + _b(rs2, 5) + _b(rs1, 5) + f3 + i[7:12] + op)


def _b_type(f3: str, op: str, rs1: int, rs2: int, imm: int) -> int:
    i = _b(imm, 13)  # i[0] = bit 12 ... i[12] = bit 0
    return _word(i[0] + i[2:8] + _b(rs2, 5) + _b(rs1, 5) + f3 + i[8:12] + i[1] + op)


def _u_type(op: str, rd: int, imm: int) -> int:
    return _word(_b(imm, 20) + _b(rd, 5) + op)


def _j_type(op: str, rd: int, imm: int) -> int:
    i = _b(imm, 21)  # i[0] = bit 20 ... i[20] = bit 0
    return _word(i[0] + i[10:20] + i[9] + i[1:9] + _b(rd, 5) + op)


_OP = "0110011"
_OP32 = "0111011"
_OPIMM = "0010011"
_OPIMM32 = "0011011"
_LOAD = "0000011"
_STORE = "0100011"
_BRANCH = "1100011"

_R_TABLE = {
    "add": ("0000000", "000", _OP), "sub": ("0100000", "000", _OP),
    "sll": ("0000000", "001", _OP), "slt": ("0000000", "010", _OP),
    "sltu": ("0000000", "011", _OP), "xor": ("0000000", "100", _OP),
    "srl": ("0000000", "101", _OP), "sra": ("0100000", "101", _OP),
    "or": ("0000000", "110", _OP), "and": ("0000000", "111", _OP),
    "addw": ("0000000", "000", _OP32), "subw": ("0100000", "000", _OP32),
    "sllw": ("0000000", "001", _OP32), "srlw": ("0000000", "101", _OP32),
    "sraw": ("0100000", "101", _OP32),
    "mul": ("0000001", "000", _OP), "mulh": ("0000001", "001", _OP),
    "mulhsu": ("0000001", "010", _OP), "mulhu": ("0000001", "011", _OP),
    "div": ("0000001", "100", _OP), "divu": ("0000001", "101", _OP),
    "rem": ("0000001", "110", _OP), "remu": ("0000001", "111", _OP),
    "mulw": ("0000001", "000", _OP32), "divw": ("0000001", "100", _OP32),
    "divuw": ("0000001", "101", _OP32), "remw": ("0000001", "110", _OP32),
    "remuw": ("0000001", "111", _OP32),
}

_I_TABLE = {
    "addi": ("000", _OPIMM), "slti": ("010", _OPIMM), "sltiu": ("011", _OPIMM),
    "xori": ("100", _OPIMM), "ori": ("110", _OPIMM), "andi": ("111", _OPIMM),
    "addiw": ("000", _OPIMM32), "jalr": ("000", "1100111"),
    "lb": ("000", _LOAD), "lh": ("001", _LOAD), "lw": ("010", _LOAD),
    "ld": ("011", _LOAD), "lbu": ("100", _LOAD), "lhu": ("101", _LOAD),
    "lwu": ("110", _LOAD),
}

_SHIFT_TABLE = {
    # mnemonic -> (upper bits, funct3, opcode, shamt width)
    "slli": ("000000", "001", _OPIMM, 6), "srli": ("000000", "101", _OPIMM, 6),
    "srai": ("010000", "101", _OPIMM, 6),
    "slliw": ("0000000", "001", _OPIMM32, 5), "srliw": ("0000000", "101", _OPIMM32, 5),
    "sraiw": ("0100000", "101", _OPIMM32, 5),
}

_S_TABLE = {"sb": "000", "sh": "001", "sw": "010", "sd": "011"}
_B_TABLE = {"beq": "000", "bne": "001", "blt": "100", "bge": "101",
            "bltu": "110", "bgeu": "111"}

REF_MNEMONICS = (
    list(_R_TABLE) + list(_I_TABLE) + list(_SHIFT_TABLE) + list(_S_TABLE)
    + list(_B_TABLE) + ["lui", "auipc", "jal", "ecall", "ebreak"]
)


def ref_encode(mnemonic: str, rd: int | None = None, rs1: int | None = None,
               rs2: int | None = None, imm: int | None = None) -> int:
    if mnemonic in _R_TABLE:
        f7, f3, op = _R_TABLE[mnemonic]
        return _r_type(f7, f3, op, rd, rs1, rs2)
    if mnemonic in _I_TABLE:
        f3, op = _I_TABLE[mnemonic]
        return _i_type(f3, op, rd, rs1, imm)
    if mnemonic in _SHIFT_TABLE:
        upper, f3, op, width = _SHIFT_TABLE[mnemonic]
        bits = upper + _b(imm, 12 - len(upper)) + _b(rs1, 5) + f3 + _b(rd, 5) + op
        return _word(bits)
    if mnemonic in _S_TABLE:
        return _s_type(_S_TABLE[mnemonic], _STORE, rs1, rs2, imm)
    if mnemonic in _B_TABLE:
        return _b_type(_B_TABLE[mnemonic], _BRANCH, rs1, rs2, imm)
    if mnemonic == "lui":
        return _u_type("0110111", rd, imm)
    if mnemonic == "auipc":
        return _u_type("0010111", rd, imm)
    if mnemonic == "jal":
        return _j_type("1101111", rd, imm)
    if mnemonic == "ecall":
        return 0x00000073
    if mnemonic == "ebreak":
        return 0x00100073
    raise KeyError(mnemonic)
