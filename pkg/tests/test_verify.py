import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revc import bench
from revc import bexp as bx
from revc.bexp import TRUE, And, Var, Xor
from revc.circuit import NOR_EXAMPLE, CircuitFile, Cnot, Not, Toffoli
from revc.evaluator import AssertionFailed, CleanFailed, compile_program, run_program
from revc.frontend import parse
from revc.types import BOOL, Register, infer_signature
from revc.verify import (BddLimitExceeded, BddManager, bdd_of_bexp, check_program, interleaved_order, mutants,
                         simulate_symbolic, validate_translation)
from oracles import all_states, simulate, truth_table

a, b = Var(0), Var(1)

bexps = st.recursive(
    st.one_of(st.sampled_from([bx.TRUE, bx.FALSE]), st.integers(0, 5).map(Var)),
    lambda kids: st.one_of(st.builds(Xor, kids, kids), st.builds(And, kids, kids)),
    max_leaves=10,
)


def test_terminals():
    m = BddManager()
    assert bdd_of_bexp(m, Xor(a, a)) == m.const(0)
    assert bdd_of_bexp(m, TRUE) == m.const(1)


def test_equivalent_expressions_share_a_node():
    m = BddManager()
    assert bdd_of_bexp(m, Xor(And(a, b), a)) == bdd_of_bexp(m, And(a, Xor(TRUE, b)))


def test_apply_identities():
    m = BddManager()
    x = m.var(0)
    assert m.apply("and", x, m.const(1)) == x
    assert m.apply("xor", x, x) == m.const(0)
    assert m.apply("and", m.var(0), m.var(1)) == bdd_of_bexp(m, And(a, b))


def test_node_limit():
    m = BddManager(node_limit=20)
    # pairing the far ends is exponential under the ascending order
    e = bx.FALSE
    for i in range(8):
        e = Xor(e, And(Var(i), Var(15 - i)))
    with pytest.raises(BddLimitExceeded):
        bdd_of_bexp(m, e)


@settings(max_examples=300, deadline=None)
@given(bexps, bexps)
def test_canonical(x, y):
    m = BddManager()
    same = truth_table(x, range(6)) == truth_table(y, range(6))
    assert (bdd_of_bexp(m, x) == bdd_of_bexp(m, y)) is same
    m.check_invariants()


@settings(max_examples=200, deadline=None)
@given(bexps)
def test_canonical_under_rewrites(x):
    m = BddManager()
    n = bdd_of_bexp(m, x)
    assert n == bdd_of_bexp(m, bx.to_esop(x)) == bdd_of_bexp(m, bx.simplify(x))
    for s in all_states(range(6)):
        assert m.evaluate(n, s) == bx.eval_bexp(x, s)


def test_variable_order_is_respected():
    m = BddManager(order=[3, 0, 2, 1])
    n = bdd_of_bexp(m, And(Var(1), Var(3)))
    assert m.level[n] == m.level_of(3)
    m.check_invariants()
    assert interleaved_order([2, 2]) == [0, 2, 1, 3]
    assert interleaved_order([None, 2]) == [0, 1, 2]


def test_satisfying_assignment():
    m = BddManager()
    n = bdd_of_bexp(m, And(Var(0), Xor(Var(1), TRUE)))
    sat = m.satisfying(n, 1)
    assert m.evaluate(n, {**{0: 0, 1: 0}, **sat}) == 1
    assert m.satisfying(m.const(0), 1) is None


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from([Not(0), Not(3), Cnot(0, 2), Cnot(1, 3), Toffoli(0, 1, 2), Toffoli(2, 3, 1)]),
                max_size=12), st.integers(0, 15))
def test_symbolic_simulation_specializes(circ, x):
    m = BddManager()
    bits = simulate_symbolic(m, circ, {i: m.var(i) for i in range(4)})
    concrete = simulate(circ, [x >> i & 1 for i in range(4)])
    env = {i: x >> i & 1 for i in range(4)}
    assert [m.evaluate(bits.get(i, 0), env) for i in range(4)] == concrete[:4]


# --- program checking ----------------------------------------------------------


def test_assert_fails_with_counterexample():
    r = check_program(parse("fun x -> assert (x <> x); x"))
    assert not r.ok
    (c,) = r.checks
    assert c.kind == "assert" and c.counterexample == (0,)
    line = c.format("a.rvs")
    assert line.startswith("FAIL assert a.rvs:1:10") and "counterexample: x0=0" in line


def test_true_assert_passes():
    r = check_program(parse("let a = true in assert a"))
    assert r.ok and [c.kind for c in r.checks] == ["assert"]


def test_cucarro_cleans_pass():
    r = check_program(bench.get("cucarroAdder 4").term())
    assert r.ok and any(c.kind == "clean" for c in r.checks)
    assert all(c.format().startswith("PASS") for c in r.checks)


def test_modular_mode_is_sound_on_a_passing_program():
    src = """
    let f x y = assert ((x && y) <> (y && x) <> true); x <> y in
    fun a b -> [f a.[0] b.[0]; f a.[1] b.[1]]
    """
    r = check_program(parse(src), modular=True)
    assert r.ok and r.modular


def test_modular_failure_on_a_cut_is_inconclusive():
    # correct only because the caller passes a register holding 1
    src = "let g r = assert r.[0]; r in fun a -> let t = [a || true] in g t"
    t = parse(src)
    assert check_program(t).ok
    r = check_program(t, modular=True)
    assert not r.ok and all(c.inconclusive for c in r.checks if not c.passed)


def _checked_programs(rng, count):
    exprs = ["a.[0] <> a.[0]", "a.[0] || (not a.[0])", "a.[0] && b.[0]", "(a.[0] <> b.[1]) <> (b.[1] <> a.[0])",
             "a.[1] || b.[0] || true", "a.[1] && (not a.[1])", "(a.[0] && b.[0]) <> (b.[0] && a.[0])"]
    for _ in range(count):
        body = []
        for _ in range(rng.randint(1, 3)):
            e = rng.choice(exprs)
            if rng.random() < 0.5:
                body.append(f"assert ({e} <> {rng.choice(['true', 'false'])})")
            else:
                body.append(f"(let t = [{e}] in clean t.[0])")
            if rng.random() < 0.4:
                body.append(f"a.[{rng.randrange(2)}] <- b.[{rng.randrange(2)}]")
        yield "fun a b -> " + "; ".join(body) + "; a"


def test_check_matches_exhaustive_runs():
    rng = random.Random(5)
    outcomes = set()
    for src in _checked_programs(rng, 60):
        t = parse(src)
        sig = infer_signature(t, warn=False)
        n = sum(1 if p == BOOL else p.size.const for p in sig.params)
        fails = False
        for x in itertools.product((0, 1), repeat=n):
            try:
                run_program(t, list(x), sig)
            except (AssertionFailed, CleanFailed):
                fails = True
                break
        assert check_program(t, sig).ok is not fails, src
        outcomes.add(fails)
    assert outcomes == {True, False}


# --- translation validation -------------------------------------------------------


def test_identity_against_empty_circuit():
    t = parse("fun a -> a")
    ok, _ = validate_translation(t, CircuitFile((), 3, (0, 1, 2), (0, 1, 2)), [Register(3)])
    assert ok


def test_nor_against_the_reference_circuit():
    t = bench.get("nor").term()
    cf = CircuitFile(NOR_EXAMPLE, 4, (0, 1), (3,))
    ok, _ = validate_translation(t, cf, clean_bits=[2])
    assert ok
    dirty = CircuitFile(NOR_EXAMPLE[:-2] + NOR_EXAMPLE[-1:], 4, (0, 1), (3,))
    ok, report = validate_translation(t, dirty, clean_bits=[2])
    assert not ok and any("ancilla bit 2" in c.kind for c in report.checks)


@pytest.mark.parametrize("mode", ["default", "space"])
def test_compiled_units_validate(mode):
    t = bench.get("modAdd 4").term()
    ok, report = validate_translation(t, compile_program(t, mode=mode))
    assert ok, report.lines()


def test_input_width_mismatch_is_reported():
    t = bench.get("nor").term()
    ok, report = validate_translation(t, CircuitFile((), 3, (0, 1, 2), (2,)))
    assert not ok and report.notes


def test_corrupted_scratch_bit_is_caught():
    # outputs intact, but a live intermediate location is left wrong
    t = parse("fun a b -> let s = [a && b] in let u = [s.[0] <> a] in [u.[0] <> true]")
    u = compile_program(t)
    held = dict(u.held)
    extra = next(b for b in held.values() if b not in u.output_bits and b not in u.input_bits)
    assert validate_translation(t, u)[0]
    from dataclasses import replace

    bad = replace(u, circ=u.circ + (Not(extra),))
    assert not validate_translation(t, bad)[0]


def test_mutants_shape():
    circ = (Cnot(0, 1), Toffoli(0, 1, 2), Not(3))
    ms = mutants(circ, random.Random(0), 50)
    assert len(ms) == 50
    for mc in ms:
        assert len(mc) in (2, 3) and mc != circ
        assert sum(x != y for x, y in zip(mc, circ)) <= 1 or len(mc) == 2
