"""Assembler: two-pass layout, pseudo expansion, diagnostics, listings."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from rvpipe import assemble, disassemble, try_assemble
from rvpipe.asm import AssemblyError, li_expansion
from rvpipe.history import Simulation
from rvpipe.isa import to_s64
from rvpipe.machine import SegmentLayout
from rvpipe.pipeline import SimOptions

from .reference_encoder import ref_encode

LAYOUT = SegmentLayout()


def words(source: str):
    return [tw.word for tw in assemble(source).text]


def test_single_addi_at_text_base():
    image = assemble("addi x1, x0, 5")
    assert len(image.text) == 1
    tw = image.text[0]
    assert (tw.addr, tw.word) == (LAYOUT.text_base, 0x00500093)


def test_la_and_ld_against_the_default_layout():
    image = assemble(".data\nv: .dword 7\n.text\nla a0, v\nld a1, 0(a0)")
    assert image.symbols["v"] == LAYOUT.static_base
    hi = (LAYOUT.static_base + 0x800) >> 12
    lo = LAYOUT.static_base - (hi << 12)
    assert image.text[0].word == ref_encode("lui", rd=10, imm=hi)
    assert image.text[1].word == ref_encode("addi", rd=10, rs1=10, imm=lo)
    assert image.text[2].word == ref_encode("ld", rd=11, rs1=10, imm=0)
    assert image.static_data[LAYOUT.static_base] == 7
    assert image.static_data[LAYOUT.static_base + 7] == 0


def test_undefined_label_diagnostic():
    image, diagnostics = try_assemble("beq x0, x0, missing")
    assert image is None
    assert any(d.severity == "error" and "missing" in d.message for d in diagnostics)
    d = next(d for d in diagnostics if "missing" in d.message)
    assert d.line == 1 and d.column >= 1


def test_all_diagnostics_are_collected_not_first_error_only():
    src = "bogus x1\nbeq x0, x0, nowhere\naddi x1, x0, 99999\n"
    image, diagnostics = try_assemble(src)
    assert image is None
    lines = {d.line for d in diagnostics if d.severity == "error"}
    assert {1, 2, 3} <= lines


def test_branch_and_jump_target_resolution():
    src = "start:\n    addi x1, x0, 1\n    beq x0, x0, start\n    jal x2, start\n"
    image = assemble(src)
    beq = image.text[1]
    assert beq.instr.imm == -4
    jal = image.text[2]
    assert jal.instr.imm == -8
    assert beq.word == ref_encode("beq", rs1=0, rs2=0, imm=-4)
    assert jal.word == ref_encode("jal", rd=2, imm=-8)


def test_pseudo_expansions_encode_as_documented():
    assert words("nop") == [ref_encode("addi", rd=0, rs1=0, imm=0)]
    assert words("li t0, 5") == [ref_encode("addi", rd=5, rs1=0, imm=5)]
    assert words("mv t0, t1") == [ref_encode("addi", rd=5, rs1=6, imm=0)]
    assert words("not t0, t1") == [ref_encode("xori", rd=5, rs1=6, imm=-1)]
    assert words("neg t0, t1") == [ref_encode("sub", rd=5, rs1=0, rs2=6)]
    assert words("seqz t0, t1") == [ref_encode("sltiu", rd=5, rs1=6, imm=1)]
    assert words("snez t0, t1") == [ref_encode("sltu", rd=5, rs1=0, rs2=6)]
    assert words("ret") == [ref_encode("jalr", rd=0, rs1=1, imm=0)]
    assert words("jr t0") == [ref_encode("jalr", rd=0, rs1=5, imm=0)]
    assert words("L: j L") == [ref_encode("jal", rd=0, imm=0)]
    assert words("L: call L") == [ref_encode("jal", rd=1, imm=0)]
    assert words("L: beqz t0, L") == [ref_encode("beq", rs1=5, rs2=0, imm=0)]
    assert words("L: bnez t0, L") == [ref_encode("bne", rs1=5, rs2=0, imm=0)]
    assert words("L: bgt t0, t1, L") == [ref_encode("blt", rs1=6, rs2=5, imm=0)]
    assert words("L: ble t0, t1, L") == [ref_encode("bge", rs1=6, rs2=5, imm=0)]
    assert words("L: bgtu t0, t1, L") == [ref_encode("bltu", rs1=6, rs2=5, imm=0)]
    assert words("L: bleu t0, t1, L") == [ref_encode("bgeu", rs1=6, rs2=5, imm=0)]


def _li_result(value: int) -> int:
    sim = Simulation(assemble(f"li t0, {value}"), SimOptions())
    sim.run()
    return sim.state.machine.read_reg(5)


def test_li_spec_examples():
    assert _li_result(5) == 5
    assert len(assemble("li t0, 5").text) == 1
    image = assemble("li t0, 0x123456789")
    mnemonics = [tw.instr.mnemonic for tw in image.text]
    assert mnemonics == ["lui", "addi", "slli", "addi"]
    assert _li_result(0x123456789) == 0x123456789


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=-(1 << 63), max_value=(1 << 64) - 1))
def test_li_ladder_is_correct_and_bounded(value):
    canonical = value - (1 << 64) if value >= (1 << 63) else value
    seq = li_expansion(5, canonical)
    assert 1 <= len(seq) <= 8
    # interpret the ladder directly: it only uses lui/addi/slli on one register
    reg = 0
    for mnemonic, _rd, rs1, imm in seq:
        if mnemonic == "lui":
            reg = imm << 12  # imm is the signed 20-bit field
        elif mnemonic == "addi":
            reg = to_s64((0 if rs1 == 0 else reg) + imm)
        elif mnemonic == "slli":
            reg = to_s64(reg << imm)
    assert reg == canonical


def test_li_execute_and_compare_over_random_constants():
    rng = random.Random(99)
    for _ in range(60):  # full pipeline runs; keep the count sane
        value = rng.getrandbits(64)
        expected = value if value < (1 << 63) else value  # unsigned view
        assert _li_result(value) == expected & ((1 << 64) - 1)


def test_disassemble_matches_spec_format_and_reassembles():
    image = assemble("addi x1, x0, 5")
    assert disassemble(image) == "0x00400000  0x00500093  addi x1, x0, 5"
    src = "\n".join([
        "main:",
        "    addi x1, x0, 1",
        "    lui  x5, 0x12345",
        "    ld   a1, -8(sp)",
        "    sd   a1, -16(sp)",
        "    beq  x0, x1, main",
        "    jal  x3, main",
        "    ecall",
    ])
    image = assemble(src)
    listing = disassemble(image)
    rebuilt = assemble("\n".join(line.split("  ", 2)[2] for line in listing.splitlines()))
    assert [tw.word for tw in rebuilt.text] == [tw.word for tw in image.text]


def test_reassembly_fixed_point_over_corpus():
    from .corpus import CORPUS

    for program in CORPUS:
        image = assemble(program.source)
        listing = disassemble(image)
        source2 = "\n".join(line.split("  ", 2)[2] for line in listing.splitlines())
        image2 = assemble(source2)
        assert [tw.word for tw in image2.text] == [tw.word for tw in image.text], program.name


def test_empty_text_listing_and_forged_word_escape():
    image, diagnostics = try_assemble("")
    assert image is None and diagnostics
    image = assemble(".data\nx: .word 0\n.text\n.word 0x0\n.word 0xffffffff\nnop")
    listing = disassemble(image).splitlines()
    assert listing[0].endswith(".word 0x0")
    assert listing[1].endswith(".word 0xffffffff")
    assert listing[2].endswith("addi x0, x0, 0")


def test_label_linearity_under_nop_insertion():
    base = "target:\n    addi x1, x0, 1\n"
    for k in (1, 3, 7):
        shifted = "nop\n" * k + base
        a0 = assemble(base).symbols["target"]
        ak = assemble(shifted).symbols["target"]
        assert ak - a0 == 4 * k


def test_duplicate_label_and_register_shadow():
    image, diagnostics = try_assemble("a:\na:\n nop")
    assert image is None
    assert any("duplicate" in d.message for d in diagnostics)
    image, diagnostics = try_assemble("sp:\n nop")
    assert image is None
    assert any("register" in d.message for d in diagnostics)


def test_directives_layout_alignment_and_strings():
    src = "\n".join([
        ".data",
        "b1:  .byte 1, 2, 3",
        "h1:  .half 0x1234",
        "w1:  .word -1, 7",
        "d1:  .dword 0x0102030405060708",
        "str1: .asciiz \"hi\\n\"",
        "spc1: .space 5",
        "     .align 3",
        "d2:  .dword 1",
        ".text",
        "     nop",
    ])
    image = assemble(src)
    base = LAYOUT.static_base
    sym = image.symbols
    assert sym["b1"] == base
    assert sym["h1"] == base + 4  # auto-aligned to 2 past the 3 bytes
    assert sym["w1"] == base + 8
    assert sym["d1"] == base + 16
    assert sym["str1"] == base + 24
    assert image.static_data[sym["str1"]] == ord("h")
    assert image.static_data[sym["str1"] + 2] == ord("\n")
    assert image.static_data[sym["str1"] + 3] == 0
    assert sym["spc1"] == base + 28
    assert sym["d2"] % 8 == 0
    assert image.static_data[sym["w1"]] == 0xFF  # little-endian -1


def test_globl_of_undefined_label_warns_but_assembles():
    image, diagnostics = try_assemble(".globl nothere\nnop")
    assert image is not None
    assert any(d.severity == "warning" and "nothere" in d.message for d in diagnostics)


def test_character_literals_and_comments():
    image = assemble("addi x1, x0, 'A'   # letter A\naddi x2, x0, '\\n'")
    assert image.text[0].instr.imm == 65
    assert image.text[1].instr.imm == 10


def test_configurable_layout_moves_everything():
    layout = SegmentLayout(text_base=0x1000, static_base=0x8000,
                           heap_base=0x9000, sp_init=0x20000)
    image = assemble(".data\nv: .word 1\n.text\nla a0, v", layout)
    assert image.entry == 0x1000
    assert image.symbols["v"] == 0x8000
    assert image.text[0].addr == 0x1000


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet=st.characters(min_codepoint=9, max_codepoint=126), max_size=120))
def test_fuzzed_sources_never_crash_the_assembler(source):
    image, diagnostics = try_assemble(source)
    assert image is not None or any(d.severity == "error" for d in diagnostics)
    for d in diagnostics:
        assert d.line >= 1 and d.column >= 1


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_token_mutations_of_a_valid_program_yield_image_or_diagnostics(data):
    base = ("main:\n    addi t0, x0, 5\nloop:\n    addi t0, t0, -1\n"
            "    bnez t0, loop\n    ld a0, -8(sp)\n")
    chars = list(base)
    for _ in range(data.draw(st.integers(0, 6))):
        pos = data.draw(st.integers(0, len(chars) - 1))
        chars[pos] = data.draw(st.sampled_from(list(" ,:()x0123456789abz#\"'")))
    image, diagnostics = try_assemble("".join(chars))
    assert image is not None or any(d.severity == "error" for d in diagnostics)


def test_assemble_raises_with_all_diagnostics():
    with pytest.raises(AssemblyError) as exc:
        assemble("frobnicate x1\nbeq x0, x0, gone")
    assert len(exc.value.diagnostics) >= 2


def test_li_rejects_constants_wider_than_64_bits():
    image, diagnostics = try_assemble(f"li t0, {1 << 64}")
    assert image is None
    assert any("wider than 64 bits" in d.message for d in diagnostics)
