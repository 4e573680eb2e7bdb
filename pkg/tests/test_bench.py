import random

import pytest

from revc import bench
from revc.evaluator import run_program
from oracles import from_int, to_int


@pytest.mark.parametrize("label, mode", sorted(bench.RECORDED))
def test_recorded_stats(compiled, label, mode):
    u = compiled(label, mode)
    want = bench.RECORDED[(label, mode)]
    got = None if u is None else (u.stats.bits, u.stats.gates, u.stats.toffolis)
    assert got == want


@pytest.mark.parametrize("label, name, size", [
    ("modAdd 32", "modAdd", 32),
    ("modAdd-32", "modAdd", 32),
    ("cucarroAdder_8", "cucarroAdder", 8),
    ("ma4", "ma4", None),
    ("carryRippleAdder 16", "carryRippleAdder", 16),
])
def test_label_forms(label, name, size):
    b = bench.get(label)
    assert (b.name, b.size) == (name, size)


@pytest.mark.parametrize("label", ["modAdd", "nope 3", "ma4 3"])
def test_bad_labels(label):
    with pytest.raises(KeyError):
        bench.get(label)


def test_unlisted_width_instantiates_the_source():
    b = bench.get("cucarroAdder 3")
    assert "let n = 3 in" in b.source()
    t = b.term()
    for a in range(8):
        for c in range(8):
            assert to_int(run_program(t, from_int(a, 3) + from_int(c, 3))) == (a + c) % 8


def test_default_suite_is_complete():
    labels = {b.label for b in bench.BENCHMARKS}
    for want in ["carryRippleAdder 2", "carryRippleAdder 4", "carryRippleAdder 32", "cucarroAdder 2",
                 "cucarroAdder 4", "cucarroAdder 32", "modAdd 2", "modAdd 4", "modAdd 32", "ma4", "sha2 2"]:
        assert want in labels


@pytest.mark.parametrize("n", [2, 5, 32])
def test_add_oracle_matches_integer_addition(n):
    f = bench.get(f"modAdd {n}").oracle
    rng = random.Random(n)
    for _ in range(200):
        a, b = rng.randrange(1 << n), rng.randrange(1 << n)
        assert to_int(f(from_int(a, n) + from_int(b, n))) == (a + b) % (1 << n)


def test_majority_oracle():
    f = bench.get("ma4").oracle
    for x in range(1 << 12):
        bits = from_int(x, 12)
        want = [int(bits[i] + bits[4 + i] + bits[8 + i] >= 2) for i in range(4)]
        assert f(bits) == want
