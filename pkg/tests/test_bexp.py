import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revc import bexp as bx
from revc.bexp import FALSE, TRUE, And, Var, Xor
from oracles import all_states, truth_table, walk_eval

a, b, c, d = Var(0), Var(1), Var(2), Var(3)

bexps = st.recursive(
    st.one_of(st.sampled_from([TRUE, FALSE]), st.integers(0, 5).map(Var)),
    lambda kids: st.one_of(st.builds(Xor, kids, kids), st.builds(And, kids, kids)),
    max_leaves=12,
)


def same_function(x, y) -> bool:
    vs = bx.variables(x) | bx.variables(y)
    return truth_table(x, vs) == truth_table(y, vs)


@pytest.mark.parametrize("expr, state, want", [
    (Var(3), {3: 1}, 1),
    (Xor(TRUE, TRUE), {}, 0),
    (And(a, Xor(a, b)), {0: 1, 1: 1}, 0),
    (And(a, Xor(a, b)), {0: 1, 1: 0}, 1),
    (Var(9), {}, 0),
])
def test_eval(expr, state, want):
    assert bx.eval_bexp(expr, state) == want


def test_eval_accepts_callable_state():
    assert bx.eval_bexp(Xor(a, b), lambda i: i) == 1


@pytest.mark.parametrize("expr, want", [
    (TRUE, set()),
    (Xor(b, And(c, b)), {1, 2}),
    (Var(7), {7}),
])
def test_variables(expr, want):
    assert bx.variables(expr) == want


@pytest.mark.parametrize("expr, want", [
    (Xor(FALSE, b), b),
    (And(TRUE, And(c, TRUE)), c),
    (Xor(b, b), FALSE),
    (And(a, FALSE), FALSE),
    (And(Xor(a, b), Xor(a, b)), Xor(a, b)),
    (Xor(Xor(a, b), FALSE), Xor(a, b)),
])
def test_simplify_examples(expr, want):
    assert bx.simplify(expr) == want


@pytest.mark.parametrize("expr, targ, want", [
    (Xor(b, And(c, d)), 1, And(c, d)),
    (And(b, c), 1, None),
    (b, 1, FALSE),
    (Xor(And(c, d), b), 1, And(c, d)),
    (Xor(b, b), 1, None),
    (c, 1, None),
])
def test_factor_as_examples(expr, targ, want):
    assert bx.factor_as(expr, targ) == want


def test_distribute_examples():
    assert bx.distribute_ands(And(Xor(a, b), c)) == Xor(And(a, c), And(b, c))
    assert bx.distribute_ands(d) == d
    got = bx.distribute_ands(And(Xor(a, b), Xor(c, d)))
    assert sorted(map(bx.pretty, bx.products(got))) == sorted(
        ["(x0 & x2)", "(x0 & x3)", "(x1 & x2)", "(x1 & x3)"])


@pytest.mark.parametrize("expr, degree", [
    (Xor(And(And(a, b), c), d), 3),
    (TRUE, 0),
    (Var(5), 1),
    (Xor(TRUE, And(a, b)), 2),
])
def test_max_product_degree(expr, degree):
    assert bx.max_product_degree(expr) == degree


def test_max_product_degree_rejects_non_esop():
    with pytest.raises(ValueError):
        bx.max_product_degree(And(Xor(a, b), c))


def test_pretty_format():
    assert bx.pretty(Xor(a, And(b, TRUE))) == "(x0 ^ (x1 & 1))"


def test_two_oracles_agree():
    rng = random.Random(7)
    from oracles import random_bexp, truth_fn

    for _ in range(200):
        e = random_bexp(rng)
        f = truth_fn(e)
        for s in all_states(bx.variables(e)):
            assert f(s) == walk_eval(e, s) == bx.eval_bexp(e, s)


@settings(max_examples=300, deadline=None)
@given(bexps)
def test_simplify_preserves_semantics_and_is_idempotent(e):
    s = bx.simplify(e)
    assert same_function(e, s)
    assert bx.simplify(s) == s


@settings(max_examples=300, deadline=None)
@given(bexps)
def test_distribute_preserves_semantics_and_yields_esop(e):
    out = bx.distribute_ands(e)
    assert same_function(e, out)
    assert bx.is_esop(out)

    def no_and_over_xor(n):
        if isinstance(n, And):
            return not isinstance(n.left, Xor) and not isinstance(n.right, Xor) \
                and no_and_over_xor(n.left) and no_and_over_xor(n.right)
        if isinstance(n, Xor):
            return no_and_over_xor(n.left) and no_and_over_xor(n.right)
        return True

    assert no_and_over_xor(out)


@settings(max_examples=300, deadline=None)
@given(bexps, st.integers(0, 5))
def test_factor_as_contract(e, targ):
    rest = bx.factor_as(e, targ)
    if rest is None:
        return
    assert targ not in bx.variables(rest)
    for s in all_states(bx.variables(e) | {targ}):
        assert walk_eval(e, s) == s[targ] ^ walk_eval(rest, s)


@settings(max_examples=200, deadline=None)
@given(bexps)
def test_to_esop_degree_bounded_by_literals(e):
    # degree counts literal occurrences, so x & (x & y) has degree 3
    out = bx.to_esop(e)
    assert bx.is_esop(out)
    leaves = bx._fold(e, lambda n: int(isinstance(n, Var)), lambda n, l, r: l + r)
    assert bx.max_product_degree(out) <= leaves


def test_structural_equality_and_hash():
    assert Xor(a, And(b, c)) == Xor(Var(0), And(Var(1), Var(2)))
    assert hash(Xor(a, b)) == hash(Xor(Var(0), Var(1)))
    assert Xor(a, b) != Xor(b, a)


def test_deep_chain_does_not_overflow_the_stack():
    e = a
    for i in range(1, 50000):
        e = Xor(e, Var(i % 7))
    assert bx.size(e) == 99999
    assert bx.variables(e) == set(range(7))
