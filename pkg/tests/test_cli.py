import json
import random
import subprocess
import sys

import pytest

from revc import bench
from revc.circuit import NOR_EXAMPLE, CircuitFile, dumps, loads
from revc.cli import main


@pytest.fixture
def cli(capsys):
    def call(*argv):
        code = main([str(a) for a in argv])
        out, err = capsys.readouterr()
        return code, out, err

    return call


@pytest.fixture
def nor_circuit(tmp_path):
    p = tmp_path / "nor.qc"
    p.write_text(dumps(CircuitFile(NOR_EXAMPLE, 4, (0, 1), (3,))))
    return p


def test_compile_ma4_default(cli, tmp_path):
    out_file = tmp_path / "ma4.qc"
    code, out, _ = cli("compile", "ma4", "--mode", "default", "-o", out_file)
    assert code == 0 and "bits=17" in out
    cf = loads(out_file.read_text())
    assert cf.bits == 17 and len(cf.inputs) == 12 and len(cf.outputs) == 4


def test_compile_ma4_space_json(cli):
    code, out, _ = cli("compile", "ma4", "--mode", "space", "--json")
    assert code == 0 and json.loads(out) == {"bits": 16, "gates": 12, "toffolis": 12}


def test_compile_to_stdout_round_trips(cli):
    code, out, _ = cli("compile", "nor", "-o", "-")
    text = out[: out.rindex("bits=")]
    assert loads(text).gates


def test_compile_type_error(cli, tmp_path):
    bad = tmp_path / "bad.rvs"
    bad.write_text("fun a -> a.[0] <> ()\n")
    code, _, err = cli("compile", bad)
    assert code == 1 and f"{bad}:1:" in err


def test_compile_syntax_error(cli, tmp_path):
    bad = tmp_path / "bad.rvs"
    bad.write_text("fun a -> (a\n")
    code, _, err = cli("compile", bad)
    assert code == 1 and "revc: error:" in err


def test_missing_file(cli):
    code, _, err = cli("compile", "no/such/file.rvs")
    assert code == 1 and "no such file" in err


def test_dump_flags(cli):
    code, out, _ = cli("compile", "nor", "--dump-bexp", "--dump-types")
    assert code == 0
    assert "Bool -> Bool -> Bool" in out and "out0 = " in out


@pytest.mark.parametrize("bits, want", [("00", "1"), ("10", "0"), ("01", "0"), ("11", "0")])
def test_run_nor(cli, bits, want):
    code, out, _ = cli("run", "nor", "--input", bits)
    assert (code, out.strip()) == (0, want)


@pytest.mark.parametrize("a, b, want", [("10", "10", "01"), ("0x1", "0x1", "01"), ("11", "10", "00")])
def test_run_cucarro_per_parameter(cli, a, b, want):
    code, out, _ = cli("run", "cucarroAdder-2", "--input", a, "--input", b)
    assert (code, out.strip()) == (0, want)


def test_run_single_string(cli):
    # least significant bit first: 1 + 3 = 4
    code, out, _ = cli("run", "modAdd-4", "--input", "1000" + "1100")
    assert (code, out.strip()) == (0, "0010")


@pytest.mark.parametrize("value", ["101", "1x", "0x"])
def test_run_bad_input(cli, value):
    code, _, err = cli("run", "nor", "--input", value)
    assert code == 1 and "error" in err


def test_run_assert_failure(cli, tmp_path):
    p = tmp_path / "a.rvs"
    p.write_text("fun a -> assert a; a\n")
    code, _, err = cli("run", p, "--input", "0")
    assert code == 2 and "a.rvs:1:10" in err


@pytest.mark.parametrize("bits, want", [("00", "1"), ("10", "0"), ("01", "0"), ("11", "0")])
def test_simulate_reference_circuit(cli, nor_circuit, bits, want):
    code, out, _ = cli("simulate", nor_circuit, "--input", bits)
    assert (code, out.strip()) == (0, want)


def test_simulate_empty_circuit_echoes(cli, tmp_path):
    p = tmp_path / "id.qc"
    p.write_text("bits: 3\ninputs: 0 1 2\noutputs: 2 1 0\n")
    code, out, _ = cli("simulate", p, "--input", "110")
    assert out.strip() == "011"


def test_simulate_bad_file(cli, tmp_path):
    p = tmp_path / "bad.qc"
    p.write_text("bits: 2\ninputs: 0\noutputs: 1\nfoo 1\n")
    code, _, err = cli("simulate", p, "--input", "1")
    assert code == 1 and "line 4" in err


@pytest.mark.parametrize("label", ["cucarroAdder-2", "modAdd-2", "carryRippleAdder-2", "ma4", "nor"])
def test_simulate_matches_run(cli, tmp_path, label):
    qc = tmp_path / "c.qc"
    cli("compile", label, "-o", qc)
    n = len(loads(qc.read_text()).inputs)
    # exhaustive equivalence lives in the acceptance suite; this checks the plumbing
    for x in random.Random(n).sample(range(2 ** n), min(2 ** n, 64)):
        bits = "".join(str(x >> i & 1) for i in range(n))
        _, ran, _ = cli("run", label, "--input", bits)
        _, sim, _ = cli("simulate", qc, "--input", bits)
        assert ran == sim


def test_check_benchmark_passes(cli):
    code, out, _ = cli("check", "cucarroAdder-4")
    assert code == 0
    assert out.splitlines() and all(line.startswith("PASS") for line in out.splitlines())


def test_check_with_circuit(cli, tmp_path):
    qc = tmp_path / "m.qc"
    cli("compile", "modAdd-2", "-o", qc)
    assert cli("check", "modAdd-2", qc)[0] == 0
    lines = qc.read_text().splitlines()
    gate = max(i for i, l in enumerate(lines) if l.startswith("tof"))
    del lines[gate]
    qc.write_text("\n".join(lines) + "\n")
    code, out, _ = cli("check", "modAdd-2", qc)
    assert code == 2 and "FAIL" in out and "counterexample" in out


def test_check_reference_nor_circuit(cli, nor_circuit):
    code, out, _ = cli("check", "nor", nor_circuit)
    assert code == 0


def test_check_assert_false(cli, tmp_path):
    p = tmp_path / "assert_false.rvs"
    p.write_text("fun x -> assert (x <> x); x\n")
    code, out, _ = cli("check", p)
    assert code == 2
    assert out.startswith(f"FAIL assert {p}:1:10") and "counterexample: x0=0" in out


def test_bench_subset(cli):
    code, out, _ = cli("bench", "--only", "ma4", "nor", "modAdd 4", "--mode", "both")
    rows = out.splitlines()[1:]
    assert code == 0 and len(rows) == 6
    assert all(r.split()[-1] == "ok" for r in rows)


def test_bench_only_accepts_labels_and_families(cli):
    code, out, _ = cli("bench", "--only", "modAdd-32", "cucarroAdder", "carryRippleAdder 3")
    labels = [" ".join(r.split()[:2]) for r in out.splitlines()[1:]]
    assert code == 0
    assert labels == ["modAdd 32", "cucarroAdder 2", "cucarroAdder 4", "cucarroAdder 8", "cucarroAdder 32",
                      "carryRippleAdder 3"]
    assert out.splitlines()[-1].endswith("new")


def test_bench_unknown_name(cli):
    code, _, err = cli("bench", "--only", "nope")
    assert code == 1 and err.startswith("revc: error: unknown benchmark 'nope'")


def test_bench_json(cli):
    code, out, _ = cli("bench", "--only", "ma4", "--json")
    (row,) = json.loads(out)
    assert row["stats"] == {"bits": 17, "gates": 24, "toffolis": 8} and row["status"] == "ok"


def test_bench_regression_exit_code(cli, monkeypatch):
    monkeypatch.setitem(bench.RECORDED, ("ma4", "default"), (16, 24, 8))
    code, out, _ = cli("bench", "--only", "ma4")
    assert code == 2 and "REGRESSION" in out


def test_types_command(cli):
    code, out, _ = cli("types", "sha2")
    assert code == 0 and "Register 256" in out


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "revc.cli", "run", "nor", "--input", "00"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and r.stdout.strip() == "1"
