"""Two-pass RV64IM assembler with pseudo-instructions and line diagnostics.

Pass 1 walks the parsed statements assigning addresses and collecting the
symbol table; pseudo-instructions are expanded there so their sizes are
known.  Pass 2 resolves symbols and encodes.  All problems are collected as
diagnostics rather than stopping at the first error.

Supported directives: .text .data .byte .half .word .dword .asciiz/.string
.space .align .globl.  Registers are accepted by number and ABI name,
comments start with '#', literals may be decimal, hex, binary, or quoted
characters.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import isa
from .isa import Instruction, IllegalInstruction, REG_LOOKUP, sign_extend
from .machine import SegmentLayout

_PSEUDO_MNEMONICS = {
    "nop", "mv", "li", "la", "not", "neg", "seqz", "snez",
    "beqz", "bnez", "bgt", "ble", "bgtu", "bleu", "j", "jr", "ret", "call",
}

_DATA_DIRECTIVES = {".byte": 1, ".half": 2, ".word": 4, ".dword": 8}

_LABEL_RE = re.compile(r"[A-Za-z_.$][A-Za-z0-9_.$]*")
_INT_RE = re.compile(r"[+-]?(0[xX][0-9a-fA-F]+|0[bB][01]+|\d+)$")
_CHAR_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, '"': 34, "'": 39}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    severity: str  # error | warning
    message: str
    snippet: str

    def render(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class AssemblyError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        first = diagnostics[0].render() if diagnostics else "assembly failed"
        extra = f" (+{len(diagnostics) - 1} more)" if len(diagnostics) > 1 else ""
        super().__init__(first + extra)


@dataclass(frozen=True)
class TextWord:
    addr: int
    word: int
    instr: Instruction | IllegalInstruction
    source_line: int


@dataclass(frozen=True)
class ProgramImage:
    text: tuple[TextWord, ...]
    static_data: dict  # addr -> byte value
    symbols: dict  # label -> address
    entry: int
    source: str
    layout: SegmentLayout
    text_map: dict = field(default_factory=dict)  # addr -> TextWord

    @classmethod
    def build(cls, text, static_data, symbols, entry, source, layout):
        text = tuple(text)
        return cls(text=text, static_data=dict(static_data), symbols=dict(symbols),
                   entry=entry, source=source, layout=layout,
                   text_map={tw.addr: tw for tw in text})


# ---------------------------------------------------------------------------
# Tokens and operands

@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class RegOp:
    idx: int


@dataclass(frozen=True)
class ImmOp:
    value: int


@dataclass(frozen=True)
class SymOp:
    name: str
    offset: int = 0


@dataclass(frozen=True)
class MemOp:
    offset: object  # ImmOp | SymOp
    base: int


@dataclass(frozen=True)
class StrOp:
    data: bytes


# internal relocation-style operands produced by `la` expansion
@dataclass(frozen=True)
class HiOp:
    sym: SymOp


@dataclass(frozen=True)
class LoOp:
    sym: SymOp


@dataclass
class Statement:
    mnemonic: Token
    operands: list[Token]


def _strip_comment(line: str) -> str:
    quote = None
    i = 0
    while i < len(line):
        ch = line[i]
        if quote:
            if ch == "\\":
                i += 1
            elif ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            return line[:i]
        i += 1
    return line


def _split_operands(text: str, line_no: int, base_col: int) -> list[Token]:
    """Split on top-level commas, respecting quotes and parentheses."""
    out: list[Token] = []
    depth = 0
    quote = None
    start = 0
    i = 0
    while i <= len(text):
        ch = text[i] if i < len(text) else ","
        if quote:
            if ch == "\\":
                i += 1
            elif ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif ch == "," and depth == 0:
            piece = text[start:i]
            stripped = piece.strip()
            col = base_col + start + (len(piece) - len(piece.lstrip()))
            out.append(Token(stripped, line_no, col + 1))
            start = i + 1
        i += 1
    if out and out[-1].text == "" and text.strip() != "":
        pass
    return [t for t in out if t.text != ""] if text.strip() else []


def parse_int(text: str) -> int | None:
    text = text.strip()
    if len(text) >= 3 and text[0] == "'" and text[-1] == "'":
        inner = text[1:-1]
        if inner.startswith("\\") and len(inner) == 2 and inner[1] in _CHAR_ESCAPES:
            return _CHAR_ESCAPES[inner[1]]
        if len(inner) == 1:
            return ord(inner)
        return None
    if _INT_RE.match(text):
        body = text.lstrip("+-")
        base = 16 if body[:2].lower() == "0x" else 2 if body[:2].lower() == "0b" else 10
        magnitude = int(body[2:] if base != 10 else body, base)
        return -magnitude if text.startswith("-") else magnitude
    return None


def _parse_string(text: str) -> bytes | None:
    if len(text) < 2 or text[0] != '"' or text[-1] != '"':
        return None
    out = bytearray()
    i = 1
    while i < len(text) - 1:
        ch = text[i]
        if ch == "\\":
            i += 1
            if i >= len(text) - 1 or text[i] not in _CHAR_ESCAPES:
                return None
            out.append(_CHAR_ESCAPES[text[i]])
        else:
            out.append(ord(ch))
        i += 1
    return bytes(out)


class _Parser:
    """Shared diagnostics sink plus operand parsing helpers."""

    def __init__(self, source: str):
        self.source_lines = source.splitlines()
        self.diagnostics: list[Diagnostic] = []

    def error(self, line: int, column: int, message: str, snippet: str = "") -> None:
        self.diagnostics.append(Diagnostic(line, max(1, column), "error", message, snippet))

    def warn(self, line: int, column: int, message: str, snippet: str = "") -> None:
        self.diagnostics.append(Diagnostic(line, max(1, column), "warning", message, snippet))

    def parse_operand(self, tok: Token):
        """One operand: register, immediate, symbol(+off), or offset(base)."""
        text = tok.text
        if text in REG_LOOKUP:
            return RegOp(REG_LOOKUP[text])
        value = parse_int(text)
        if value is not None:
            return ImmOp(value)
        if text.endswith(")") and "(" in text:
            pos = text.rindex("(")
            inner = text[pos + 1:-1].strip()
            if inner not in REG_LOOKUP:
                self.error(tok.line, tok.column, f"bad base register {inner!r}", text)
                return None
            off_text = text[:pos].strip()
            if off_text == "":
                return MemOp(ImmOp(0), REG_LOOKUP[inner])
            off = self._imm_or_sym(off_text, tok)
            if off is None:
                return None
            return MemOp(off, REG_LOOKUP[inner])
        sym = self._imm_or_sym(text, tok)
        if sym is None:
            self.error(tok.line, tok.column, f"cannot parse operand {text!r}", text)
        return sym

    def _imm_or_sym(self, text: str, tok: Token):
        value = parse_int(text)
        if value is not None:
            return ImmOp(value)
        m = re.match(rf"({_LABEL_RE.pattern})\s*([+-])\s*(.+)$", text)
        if m:
            off = parse_int(m.group(3))
            if off is None:
                self.error(tok.line, tok.column, f"bad offset in {text!r}", text)
                return None
            if m.group(2) == "-":
                off = -off
            return SymOp(m.group(1), off)
        if _LABEL_RE.fullmatch(text):
            return SymOp(text)
        self.error(tok.line, tok.column, f"cannot parse operand {text!r}", text)
        return None


# ---------------------------------------------------------------------------
# Pseudo-instruction expansion

@dataclass(frozen=True)
class BaseOp:
    """A base instruction with symbolic operands awaiting resolution."""

    mnemonic: str
    rd: int | None = None
    rs1: int | None = None
    rs2: int | None = None
    imm: object = None  # int | SymOp | HiOp | LoOp | None
    token: Token | None = None
    source_line: int = 0


def li_expansion(rd: int, value: int) -> list[tuple]:
    """Shortest lui/addi/slli ladder producing the 64-bit constant."""
    seq: list[tuple] = []

    def rec(v: int) -> None:
        if -2048 <= v <= 2047:
            seq.append(("addi", rd, 0, v))
            return
        if -(1 << 31) <= v < (1 << 31):
            hi = (v + 0x800) >> 12
            lo = v - (hi << 12)
            if -(1 << 19) <= hi < (1 << 19):
                seq.append(("lui", rd, None, hi))
                if lo:
                    seq.append(("addi", rd, rd, lo))
                return
        lo = sign_extend(v & 0xFFF, 12)
        rec((v - lo) >> 12)
        seq.append(("slli", rd, rd, 12))
        if lo:
            seq.append(("addi", rd, rd, lo))

    rec(value)
    return seq


def expand_pseudo(mnemonic: str, ops: list, token: Token, parser: _Parser) -> list[BaseOp] | None:
    """Expand one pseudo-instruction into 1-8 base instructions.

    Returns None (with a diagnostic recorded) when the operands do not fit
    the pseudo's shape.
    """
    line = token.line

    def bad(msg: str):
        parser.error(token.line, token.column, msg, token.text)
        return None

    def reg(i: int) -> int | None:
        return ops[i].idx if i < len(ops) and isinstance(ops[i], RegOp) else None

    def base(m, rd=None, rs1=None, rs2=None, imm=None):
        return BaseOp(m, rd, rs1, rs2, imm, token=token, source_line=line)

    def target(i: int):
        if i < len(ops) and isinstance(ops[i], (SymOp, ImmOp)):
            return ops[i] if isinstance(ops[i], SymOp) else ops[i].value
        return None

    if mnemonic == "nop":
        if ops:
            return bad("nop takes no operands")
        return [base("addi", 0, 0, imm=0)]
    if mnemonic == "mv":
        rd, rs = reg(0), reg(1)
        if rd is None or rs is None or len(ops) != 2:
            return bad("expected: mv rd, rs")
        return [base("addi", rd, rs, imm=0)]
    if mnemonic == "li":
        rd = reg(0)
        if rd is None or len(ops) != 2 or not isinstance(ops[1], ImmOp):
            return bad("expected: li rd, integer")
        value = ops[1].value
        if not -(1 << 63) <= value < (1 << 64):
            return bad("li constant wider than 64 bits")
        if value >= (1 << 63):
            value -= 1 << 64
        return [base(m, rd_, rs1_, imm=imm_) for m, rd_, rs1_, imm_ in li_expansion(rd, value)]
    if mnemonic == "la":
        rd = reg(0)
        if rd is None or len(ops) != 2 or not isinstance(ops[1], SymOp):
            return bad("expected: la rd, label")
        return [base("lui", rd, imm=HiOp(ops[1])),
                base("addi", rd, rd, imm=LoOp(ops[1]))]
    if mnemonic == "not":
        rd, rs = reg(0), reg(1)
        if rd is None or rs is None:
            return bad("expected: not rd, rs")
        return [base("xori", rd, rs, imm=-1)]
    if mnemonic == "neg":
        rd, rs = reg(0), reg(1)
        if rd is None or rs is None:
            return bad("expected: neg rd, rs")
        return [base("sub", rd, 0, rs)]
    if mnemonic == "seqz":
        rd, rs = reg(0), reg(1)
        if rd is None or rs is None:
            return bad("expected: seqz rd, rs")
        return [base("sltiu", rd, rs, imm=1)]
    if mnemonic == "snez":
        rd, rs = reg(0), reg(1)
        if rd is None or rs is None:
            return bad("expected: snez rd, rs")
        return [base("sltu", rd, 0, rs)]
    if mnemonic in ("beqz", "bnez"):
        rs, t = reg(0), target(1)
        if rs is None or t is None:
            return bad(f"expected: {mnemonic} rs, label")
        return [base("beq" if mnemonic == "beqz" else "bne", rs1=rs, rs2=0, imm=t)]
    if mnemonic in ("bgt", "ble", "bgtu", "bleu"):
        a, b, t = reg(0), reg(1), target(2)
        if a is None or b is None or t is None:
            return bad(f"expected: {mnemonic} rs1, rs2, label")
        swapped = {"bgt": "blt", "ble": "bge", "bgtu": "bltu", "bleu": "bgeu"}[mnemonic]
        return [base(swapped, rs1=b, rs2=a, imm=t)]
    if mnemonic == "j":
        t = target(0)
        if t is None or len(ops) != 1:
            return bad("expected: j label")
        return [base("jal", 0, imm=t)]
    if mnemonic == "jr":
        rs = reg(0)
        if rs is None or len(ops) != 1:
            return bad("expected: jr rs")
        return [base("jalr", 0, rs, imm=0)]
    if mnemonic == "ret":
        if ops:
            return bad("ret takes no operands")
        return [base("jalr", 0, 1, imm=0)]
    if mnemonic == "call":
        t = target(0)
        if t is None or len(ops) != 1:
            return bad("expected: call label")
        return [base("jal", 1, imm=t)]
    return bad(f"unknown pseudo-instruction {mnemonic!r}")


# ---------------------------------------------------------------------------
# The assembler proper

@dataclass
class _TextItem:
    op: BaseOp
    addr: int = 0


@dataclass
class _DataItem:
    addr: int
    data: bytes = b""
    fill: int = 0
    sym_words: list = field(default_factory=list)  # (offset, width, SymOp, Token)


def _operand_schema(mnemonic: str) -> str:
    if mnemonic in isa.SYSTEM:
        return ""
    if mnemonic in isa.LOADS or mnemonic == "jalr":
        return "mem"
    if mnemonic in isa.STORES:
        return "mem"
    if mnemonic in isa.BRANCHES:
        return "branch"
    entry = isa.BY_MNEMONIC[mnemonic]
    return {"R": "rrr", "I": "rri", "U": "ri", "J": "rt"}[entry.format]


def try_assemble(source: str, layout: SegmentLayout | None = None):
    """Assemble, returning (image or None, diagnostics).

    The image is None iff at least one error diagnostic was produced;
    warnings may accompany a successful image.
    """
    layout = layout or SegmentLayout()
    parser = _Parser(source)

    # parse into labeled statements
    parsed: list[tuple[list[Token], Statement | None]] = []
    for line_no, raw in enumerate(source.splitlines(), start=1):
        body = _strip_comment(raw)
        labels: list[Token] = []
        rest = body
        col = 1
        while True:
            stripped = rest.lstrip()
            col += len(rest) - len(stripped)
            m = re.match(rf"({_LABEL_RE.pattern})\s*:", stripped)
            if not m:
                break
            labels.append(Token(m.group(1), line_no, col))
            consumed = m.end()
            rest = stripped[consumed:]
            col += consumed
        stripped = rest.lstrip()
        col += len(rest) - len(stripped)
        stmt = None
        if stripped:
            m = re.match(r"\S+", stripped)
            mnemonic = Token(m.group(0).lower(), line_no, col)
            opstext = stripped[m.end():]
            operands = _split_operands(opstext, line_no, col + m.end())
            stmt = Statement(mnemonic, operands)
        if labels or stmt:
            parsed.append((labels, stmt))

    symbols: dict[str, int] = {}
    pending_labels: list[Token] = []
    globl_requests: list[Token] = []
    text_items: list[_TextItem] = []
    data_items: list[_DataItem] = []

    segment = "text"
    text_loc = layout.text_base
    data_loc = layout.static_base

    def define_label(tok: Token) -> None:
        if tok.text in REG_LOOKUP:
            parser.error(tok.line, tok.column, f"label {tok.text!r} shadows a register name", tok.text)
            return
        if tok.text in symbols or any(p.text == tok.text for p in pending_labels):
            parser.error(tok.line, tok.column, f"duplicate label {tok.text!r}", tok.text)
            return
        pending_labels.append(tok)

    def bind_pending(addr: int) -> None:
        # labels bind at the next emission so directive auto-alignment moves them
        for tok in pending_labels:
            symbols[tok.text] = addr
        pending_labels.clear()

    def emit_text(op: BaseOp) -> None:
        nonlocal text_loc
        bind_pending(text_loc)
        text_items.append(_TextItem(op, text_loc))
        text_loc += 4

    def raw_text_words(stmt: Statement, width: int) -> None:
        # .word/.dword inside .text: raw (possibly illegal) instruction words
        for tok in stmt.operands:
            value = parse_int(tok.text)
            if value is None or not -(1 << (width * 8 - 1)) <= value < (1 << (width * 8)):
                parser.error(tok.line, tok.column,
                             f"bad {stmt.mnemonic.text} value {tok.text!r} in .text", tok.text)
                continue
            value &= (1 << (width * 8)) - 1
            for piece in range(width // 4):
                emit_text(BaseOp("__word", imm=(value >> (32 * piece)) & 0xFFFFFFFF,
                                 token=tok, source_line=tok.line))

    def data_values(stmt: Statement, width: int) -> None:
        nonlocal data_loc
        if segment != "data":
            if width in (4, 8):
                raw_text_words(stmt, width)
            else:
                parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                             f"{stmt.mnemonic.text} outside .data", stmt.mnemonic.text)
            return
        if data_loc % width:
            data_loc += width - data_loc % width
        bind_pending(data_loc)
        if not stmt.operands:
            parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                         f"{stmt.mnemonic.text} needs at least one value", stmt.mnemonic.text)
            return
        item = _DataItem(data_loc)
        buf = bytearray()
        for tok in stmt.operands:
            value = parse_int(tok.text)
            if value is not None:
                lo, hi = -(1 << (width * 8 - 1)), (1 << (width * 8)) - 1
                if not lo <= value <= hi:
                    parser.error(tok.line, tok.column,
                                 f"value {tok.text} does not fit in {width} byte(s)", tok.text)
                    value = 0
                buf += (value & ((1 << (width * 8)) - 1)).to_bytes(width, "little")
            elif width in (4, 8) and _LABEL_RE.fullmatch(tok.text):
                item.sym_words.append((len(buf), width, SymOp(tok.text), tok))
                buf += bytes(width)
            else:
                parser.error(tok.line, tok.column, f"bad {stmt.mnemonic.text} value {tok.text!r}",
                             tok.text)
        item.data = bytes(buf)
        data_items.append(item)
        data_loc += len(buf)

    for labels, stmt in parsed:
        for tok in labels:
            define_label(tok)
        if stmt is None:
            continue
        name = stmt.mnemonic.text
        if name.startswith("."):
            if name == ".text":
                bind_pending(text_loc if segment == "text" else data_loc)
                segment = "text"
            elif name == ".data":
                bind_pending(text_loc if segment == "text" else data_loc)
                segment = "data"
            elif name in _DATA_DIRECTIVES:
                data_values(stmt, _DATA_DIRECTIVES[name])
            elif name in (".asciiz", ".string"):
                if segment != "data":
                    parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                                 f"{name} outside .data", name)
                elif len(stmt.operands) != 1 or (s := _parse_string(stmt.operands[0].text)) is None:
                    parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                                 f"{name} needs one quoted string", name)
                else:
                    bind_pending(data_loc)
                    data_items.append(_DataItem(data_loc, s + b"\0"))
                    data_loc += len(s) + 1
            elif name == ".space":
                n = parse_int(stmt.operands[0].text) if len(stmt.operands) == 1 else None
                if segment != "data":
                    parser.error(stmt.mnemonic.line, stmt.mnemonic.column, ".space outside .data", name)
                elif n is None or n < 0:
                    parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                                 ".space needs a non-negative size", name)
                else:
                    bind_pending(data_loc)
                    data_items.append(_DataItem(data_loc, bytes(n)))
                    data_loc += n
            elif name == ".align":
                k = parse_int(stmt.operands[0].text) if len(stmt.operands) == 1 else None
                if k is None or not 0 <= k <= 12:
                    parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                                 ".align needs a power-of-two exponent in [0, 12]", name)
                else:
                    step = 1 << k
                    if segment == "data":
                        if data_loc % step:
                            data_loc += step - data_loc % step
                    else:
                        while text_loc % step:
                            emit_text(BaseOp("addi", 0, 0, imm=0,
                                             token=stmt.mnemonic, source_line=stmt.mnemonic.line))
            elif name == ".globl":
                if len(stmt.operands) == 1 and _LABEL_RE.fullmatch(stmt.operands[0].text):
                    globl_requests.append(stmt.operands[0])
                else:
                    parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                                 ".globl needs one label", name)
            else:
                parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                             f"unknown directive {name!r}", name)
            continue

        ops = [parser.parse_operand(t) for t in stmt.operands]
        if any(o is None for o in ops):
            continue
        if name in _PSEUDO_MNEMONICS:
            if segment != "text":
                parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                             "instruction outside .text", name)
                continue
            expanded = expand_pseudo(name, ops, stmt.mnemonic, parser)
            if expanded:
                for op in expanded:
                    emit_text(op)
            continue
        if name not in isa.BY_MNEMONIC or name == "fence":
            parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                         f"unknown mnemonic {name!r}", name)
            continue
        if segment != "text":
            parser.error(stmt.mnemonic.line, stmt.mnemonic.column,
                         "instruction outside .text", name)
            continue
        op = _shape_base(name, ops, stmt, parser)
        if op is not None:
            emit_text(op)

    bind_pending(text_loc if segment == "text" else data_loc)

    # pass 2: resolve and encode
    text_words: list[TextWord] = []
    for item in text_items:
        op = item.op
        if op.mnemonic == "__word":
            word = op.imm
            text_words.append(TextWord(item.addr, word,
                                       isa.decode(word, item.addr, op.source_line),
                                       op.source_line))
            continue
        imm = _resolve_imm(op, item.addr, symbols, parser, layout)
        if imm is _UNRESOLVED:
            continue
        instr = Instruction(op.mnemonic, isa.BY_MNEMONIC[op.mnemonic].format,
                            rd=op.rd, rs1=op.rs1, rs2=op.rs2, imm=imm,
                            addr=item.addr, source_line=op.source_line)
        try:
            word = isa.encode(instr)
        except isa.EncodeError as exc:
            tok = op.token
            parser.error(tok.line, tok.column, str(exc), tok.text)
            continue
        canonical = isa.decode(word, item.addr, op.source_line)
        text_words.append(TextWord(item.addr, word, canonical, op.source_line))

    static_data: dict[int, int] = {}
    for item in data_items:
        buf = bytearray(item.data)
        for offset, width, sym, tok in item.sym_words:
            if sym.name not in symbols:
                parser.error(tok.line, tok.column, f"undefined label {sym.name!r}", tok.text)
                continue
            buf[offset:offset + width] = (symbols[sym.name] & ((1 << (width * 8)) - 1)) \
                .to_bytes(width, "little")
        for i, b in enumerate(buf):
            static_data[item.addr + i] = b

    for tok in globl_requests:
        if tok.text not in symbols:
            parser.warn(tok.line, tok.column, f".globl of undefined label {tok.text!r}", tok.text)

    if not text_words and not any(d.severity == "error" for d in parser.diagnostics):
        parser.error(1, 1, "program has no instructions (empty text segment)", "")

    if any(d.severity == "error" for d in parser.diagnostics):
        return None, parser.diagnostics

    image = ProgramImage.build(text_words, static_data, symbols,
                               layout.text_base, source, layout)
    return image, parser.diagnostics


_UNRESOLVED = object()


def _shape_base(name: str, ops: list, stmt: Statement, parser: _Parser) -> BaseOp | None:
    """Check operand shapes for a base instruction and build its BaseOp."""
    tok = stmt.mnemonic
    schema = _operand_schema(name)

    def bad(expected: str):
        parser.error(tok.line, tok.column,
                     f"expected: {expected}", tok.text)
        return None

    syntax = isa.BY_MNEMONIC[name].syntax
    if schema == "":
        if ops:
            return bad(syntax)
        return BaseOp(name, token=tok, source_line=tok.line)
    if schema == "rrr":
        if len(ops) != 3 or not all(isinstance(o, RegOp) for o in ops):
            return bad(syntax)
        return BaseOp(name, ops[0].idx, ops[1].idx, ops[2].idx, token=tok, source_line=tok.line)
    if schema == "rri":
        if len(ops) != 3 or not isinstance(ops[0], RegOp) or not isinstance(ops[1], RegOp) \
                or not isinstance(ops[2], ImmOp):
            return bad(syntax)
        return BaseOp(name, ops[0].idx, ops[1].idx, imm=ops[2].value, token=tok, source_line=tok.line)
    if schema == "mem":
        # loads/jalr: rd, off(rs1); stores: rs2, off(rs1); flat 3-operand also accepted
        if len(ops) == 2 and isinstance(ops[0], RegOp) and isinstance(ops[1], MemOp):
            memop = ops[1]
            imm = memop.offset if isinstance(memop.offset, SymOp) else memop.offset.value
            if name in isa.STORES:
                return BaseOp(name, rs1=memop.base, rs2=ops[0].idx, imm=imm,
                              token=tok, source_line=tok.line)
            return BaseOp(name, rd=ops[0].idx, rs1=memop.base, imm=imm,
                          token=tok, source_line=tok.line)
        if len(ops) == 3 and all(isinstance(o, RegOp) for o in ops[:2]) \
                and isinstance(ops[2], ImmOp):
            if name in isa.STORES:
                return BaseOp(name, rs1=ops[1].idx, rs2=ops[0].idx, imm=ops[2].value,
                              token=tok, source_line=tok.line)
            return BaseOp(name, rd=ops[0].idx, rs1=ops[1].idx, imm=ops[2].value,
                          token=tok, source_line=tok.line)
        return bad(syntax)
    if schema == "branch":
        if len(ops) != 3 or not isinstance(ops[0], RegOp) or not isinstance(ops[1], RegOp) \
                or not isinstance(ops[2], (ImmOp, SymOp)):
            return bad(syntax)
        imm = ops[2] if isinstance(ops[2], SymOp) else ops[2].value
        return BaseOp(name, rs1=ops[0].idx, rs2=ops[1].idx, imm=imm, token=tok, source_line=tok.line)
    if schema == "ri":
        if len(ops) != 2 or not isinstance(ops[0], RegOp) or not isinstance(ops[1], ImmOp):
            return bad(syntax)
        value = ops[1].value
        if value >= (1 << 19):  # accept the unsigned 0..0xFFFFF spelling
            if value >= (1 << 20):
                parser.error(tok.line, tok.column, f"immediate {value} too wide for {name}", tok.text)
                return None
            value = sign_extend(value, 20)
        return BaseOp(name, ops[0].idx, imm=value, token=tok, source_line=tok.line)
    if schema == "rt":
        if len(ops) != 2 or not isinstance(ops[0], RegOp) or not isinstance(ops[1], (ImmOp, SymOp)):
            return bad(syntax)
        imm = ops[1] if isinstance(ops[1], SymOp) else ops[1].value
        return BaseOp(name, rd=ops[0].idx, imm=imm, token=tok, source_line=tok.line)
    raise AssertionError(schema)


def _resolve_imm(op: BaseOp, addr: int, symbols: dict, parser: _Parser, layout: SegmentLayout):
    imm = op.imm
    tok = op.token

    def resolve_sym(sym: SymOp) -> int | None:
        if sym.name not in symbols:
            parser.error(tok.line, tok.column, f"undefined label {sym.name!r}", tok.text)
            return None
        return symbols[sym.name] + sym.offset

    if isinstance(imm, HiOp) or isinstance(imm, LoOp):
        target = resolve_sym(imm.sym)
        if target is None:
            return _UNRESOLVED
        if not 0 <= target < (1 << 31):
            parser.error(tok.line, tok.column,
                         f"address {target:#x} not reachable by lui/addi", tok.text)
            return _UNRESOLVED
        hi = (target + 0x800) >> 12
        lo = target - (hi << 12)
        return sign_extend(hi, 20) if isinstance(imm, HiOp) else lo
    if isinstance(imm, SymOp):
        target = resolve_sym(imm)
        if target is None:
            return _UNRESOLVED
        if op.mnemonic in isa.BRANCHES or op.mnemonic == "jal":
            delta = target - addr
            if delta % 4:
                parser.error(tok.line, tok.column,
                             f"misaligned branch target {target:#x}", tok.text)
                return _UNRESOLVED
            if not layout.text_base <= target:
                parser.error(tok.line, tok.column,
                             f"branch target {target:#x} is not in the text segment", tok.text)
                return _UNRESOLVED
            return delta
        return target
    return imm


def assemble(source: str, layout: SegmentLayout | None = None) -> ProgramImage:
    """Assemble or raise AssemblyError carrying every diagnostic."""
    image, diagnostics = try_assemble(source, layout)
    if image is None:
        raise AssemblyError([d for d in diagnostics if d.severity == "error"] or diagnostics)
    return image


# ---------------------------------------------------------------------------
# Listings

def disassemble(image: ProgramImage, with_source: bool = False) -> str:
    """One line per text word: address, word, disassembly.

    Reassembling the disassembly column of a base-instruction program
    reproduces the same words.
    """
    lines = []
    source_lines = image.source.splitlines()
    for tw in image.text:
        text = isa.format_instruction(tw.instr)
        line = f"{tw.addr:#010x}  {tw.word:#010x}  {text}"
        if with_source and 1 <= tw.source_line <= len(source_lines):
            line += f"  # {tw.source_line}: {source_lines[tw.source_line - 1].strip()}"
        lines.append(line)
    return "\n".join(lines)
