"""CLI: subcommands, outputs, and the documented exit codes."""

from __future__ import annotations

import json

import pytest

from rvpipe.cli import main

RAW3 = "addi x1, x0, 1\naddi x2, x0, 2\nadd x3, x1, x2\n"
HAZARD = RAW3  # the distance-1 RAW pair: 0 extra stalls fwd, 2 stalls nofwd


@pytest.fixture()
def write(tmp_path):
    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)
    return _write


def test_asm_listing(write, capsys):
    path = write("p.s", "addi x1, x0, 5\n")
    assert main(["asm", path]) == 0
    out = capsys.readouterr().out
    assert "0x00400000  0x00500093  addi x1, x0, 5" in out


def test_asm_diagnostics_exit_1(write, capsys):
    path = write("bad.s", "bogus x1\n")
    assert main(["asm", path]) == 1
    err = capsys.readouterr().err
    assert "error" in err and "bogus" in err


def test_run_stats_and_diagram(write, capsys, tmp_path):
    path = write("p.s", RAW3)
    assert main(["run", path, "--stats"]) == 0
    out = capsys.readouterr().out
    assert "cycles" in out and "7" in out
    csv_path = tmp_path / "d.csv"
    assert main(["run", path, "--diagram", "full", "--csv", str(csv_path)]) == 0
    assert csv_path.read_text().startswith("instr,")
    assert main(["run", path, "--diagram", "full"]) == 0
    out = capsys.readouterr().out
    assert "WB" in out
    assert main(["run", path, "--stats", "--json"]) == 0
    stats = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert stats["cycles"] == 7


def test_run_trace_prints_occupancy(write, capsys):
    path = write("p.s", "addi x1, x0, 1\n")
    assert main(["run", path, "--trace"]) == 0
    out = capsys.readouterr().out
    assert "cycle    1" in out and "IF=addi x1, x0, 1" in out


def test_run_no_forwarding_is_slower(write, capsys):
    path = write("p.s", HAZARD)
    main(["run", path, "--stats", "--json"])
    fwd = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    main(["run", path, "--no-forwarding", "--stats", "--json"])
    nofwd = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert nofwd["cycles"] > fwd["cycles"]
    assert nofwd["cpi"] > fwd["cpi"]


def test_run_with_input_tape_and_transcript(write, capsys):
    src = "li a7, 5\necall\nmv a0, a0\nli a7, 1\necall\nli a7, 10\necall\n"
    path = write("echo.s", src)
    tape = write("tape.txt", "42\n")
    assert main(["run", path, "--input", tape]) == 0
    out = capsys.readouterr().out
    assert "42" in out


def test_run_fault_exit_2(write, capsys):
    path = write("f.s", "lw x1, -6(sp)\n")
    assert main(["run", path]) == 2
    assert "misaligned" in capsys.readouterr().err


def test_run_cycle_limit_exit_3(write, capsys):
    path = write("loop.s", "L: beq x0, x0, L\n")
    assert main(["run", path, "--max-cycles", "50"]) == 3
    assert "cycle limit" in capsys.readouterr().err


def test_compare_modes_shows_stall_delta(write, capsys):
    path = write("p.s", HAZARD)
    assert main(["compare", path, "--modes", "fwd,nofwd"]) == 0
    out = capsys.readouterr().out
    lines = {line.split()[0]: line.split() for line in out.splitlines()[1:]}
    assert lines["raw_stalls"][1:] == ["0", "2", "+2"]
    assert lines["cycles"][1:] == ["7", "9", "+2"]


def test_compare_two_files(write, capsys):
    a = write("a.s", RAW3)
    b = write("b.s", "nop\n" + RAW3)
    assert main(["compare", a, b]) == 0
    out = capsys.readouterr().out
    assert "delta" in out.splitlines()[0]


def test_compare_json(write, capsys):
    path = write("p.s", HAZARD)
    assert main(["compare", path, "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["delta"]["raw_stalls"] == 2
    assert payload["fwd"]["cycles"] == 7 and payload["nofwd"]["cycles"] == 9


def test_examples_listing_and_export(tmp_path, capsys):
    assert main(["examples"]) == 0
    out = capsys.readouterr().out
    assert "arith" in out and "loop_sum" in out
    assert main(["examples", "--write", str(tmp_path / "ex")]) == 0
    capsys.readouterr()
    files = sorted(p.name for p in (tmp_path / "ex").glob("*.s"))
    assert len(files) >= 5
    assert main(["examples", "--show", "arith"]) == 0
    assert "addi" in capsys.readouterr().out


def test_run_and_service_agree_on_stats(write, capsys):
    from rvpipe.service import SessionStore

    path = write("p.s", HAZARD)
    main(["run", path, "--stats", "--json"])
    cli_stats = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    store = SessionStore()
    sid = store.create({"source": HAZARD})["id"]
    payload = store.step(sid, 100)
    service_stats = payload["stats"]
    assert service_stats == cli_stats
