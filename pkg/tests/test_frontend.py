import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revc import terms as T
from revc.frontend import FrontendError, MetaIntError, ParseError, is_core, parse
from revc.terms import (And, Append, Apply, Assert, Assign, BoolConst, Clean, Index, Lambda, Let, LocConst,
                        RegisterLit, Rotate, Seq, Slice, Var, Xor)

TRUE_ = BoolConst(True)


@pytest.mark.parametrize("src, want", [
    ("fun a -> a.[0] <> a.[1]", Lambda("a", Xor(Index(Var("a"), 0), Index(Var("a"), 1)))),
    ("let x = true in x", Let("x", BoolConst(True), Var("x"))),
    ("fun a -> rot 2 a", Lambda("a", Rotate(2, Var("a")))),
    ("fun x -> not x", Lambda("x", Xor(TRUE_, Var("x")))),
    ("fun a b -> a || b", Lambda("a", Lambda("b", Xor(And(Var("a"), Var("b")), Xor(Var("a"), Var("b")))))),
    ("fun x -> x.[1..3] @ x.[0..0]", Lambda("x", Append(Slice(Var("x"), 1, 3), Slice(Var("x"), 0, 0)))),
    ("fun x y -> x <- y; clean y; assert x",
     Lambda("x", Lambda("y", Seq(Assign(Var("x"), Var("y")), Seq(Clean(Var("y")), Assert(Var("x"))))))),
    ("let f x = x in f true", Let("f", Lambda("x", Var("x")), Apply(Var("f"), TRUE_))),
    ("Array.zeroCreate 2", RegisterLit((BoolConst(False), BoolConst(False)))),
])
def test_parse(src, want):
    assert parse(src) == want


def test_if_desugars():
    got = parse("fun c a b -> if c then a else b")
    c, a, b = Var("c"), Var("a"), Var("b")
    assert got.body.body.body == Xor(And(c, a), And(Xor(TRUE_, c), b))


def test_for_unrolls_left_to_right():
    got = parse("fun x -> for i in 0..1 do x.[i] <- true done")
    x = Var("x")
    assert got.body == Seq(Assign(Index(x, 0), TRUE_), Assign(Index(x, 1), TRUE_))


def test_empty_for_is_unit():
    assert parse("for i in 3..2 do assert true done") == T.Unit()


def test_meta_arithmetic_is_folded():
    got = parse("let n = 4 in fun x -> x.[2*n - 1] <> (rot (n+1) x).[n..n+2].[0]")
    assert got.body.left == Index(Var("x"), 7)
    assert got.body.right == Index(Slice(Rotate(5, Var("x")), 4, 6), 0)


def test_comments_and_whitespace():
    assert parse("# leading\nfun a -> # trailing\n  a.[0]\n") == Lambda("a", Index(Var("a"), 0))


@pytest.mark.parametrize("src, err", [
    ("fun a -> a.[", ParseError),
    ("let = 3", ParseError),
    ("fun a -> a.[b]", FrontendError),
    ("fun a -> for i in 0..a do a done", FrontendError),
    ("let n = 2 in fun a -> a.[n-3]", MetaIntError),
    ("fun a -> a $ a", ParseError),
])
def test_errors(src, err):
    with pytest.raises(err):
        parse(src)


def test_error_carries_position():
    with pytest.raises(FrontendError) as ei:
        parse("fun a ->\n  a.[0] <> )", "x.rvs")
    assert str(ei.value).startswith("x.rvs:2:")


def test_substitution_examples():
    assert T.substitute(Var("x"), "x", LocConst(5)) == LocConst(5)
    assert T.substitute(Lambda("x", Var("x")), "x", LocConst(5)) == Lambda("x", Var("x"))
    assert T.substitute(Xor(Var("x"), Var("y")), "x", LocConst(1)) == Xor(LocConst(1), Var("y"))


def test_substitution_avoids_capture():
    got = T.substitute(Lambda("y", Xor(Var("x"), Var("y"))), "x", Var("y"))
    assert isinstance(got, Lambda) and got.param != "y"
    assert got.body == Xor(Var("y"), Var(got.param))


# --- generated core terms ------------------------------------------------------

names = st.sampled_from(["a", "b", "c"])


def core_terms():
    leaves = st.one_of(names.map(Var), st.booleans().map(BoolConst))

    def grow(kids):
        nat = st.integers(0, 5)
        return st.one_of(
            st.builds(Xor, kids, kids), st.builds(And, kids, kids), st.builds(Seq, kids, kids),
            st.builds(Assign, kids, kids), st.builds(Append, kids, kids), st.builds(Apply, kids, kids),
            st.builds(Let, names, kids, kids), st.builds(Lambda, names, kids),
            st.builds(Clean, kids), st.builds(Assert, kids),
            st.builds(Index, kids, nat), st.builds(Rotate, nat, kids),
            st.builds(lambda t, i, k: Slice(t, i, i + k), kids, nat, nat),
            st.lists(kids, min_size=1, max_size=3).map(lambda xs: RegisterLit(tuple(xs))),
        )

    return st.recursive(leaves, grow, max_leaves=10)


@settings(max_examples=300, deadline=None)
@given(core_terms())
def test_pretty_round_trip(t):
    back = parse(T.pretty(t))
    assert back == t
    assert is_core(back)


@settings(max_examples=300, deadline=None)
@given(core_terms(), names, st.one_of(names.map(Var), st.integers(0, 9).map(LocConst)))
def test_substitution_free_names(t, x, v):
    got = T.substitute(t, x, v)
    assert T.free_names(got) <= (T.free_names(t) - {x}) | T.free_names(v)


@settings(max_examples=100, deadline=None)
@given(core_terms(), names)
def test_substituting_a_fresh_name_back_is_identity(t, x):
    assert T.substitute(t, x, Var(x)) == t


def test_sugar_is_gone_after_parse():
    src = "fun a b -> if a.[0] then not b.[0] else (a.[1] || b.[1]); for i in 0..2 do () done"
    assert is_core(parse(src))


@pytest.mark.parametrize("src, expect", [
    # x is toggled once, then read
    ("fun x y -> let r = ((x <- x <> true; x) || y) in [r; x]", lambda x, y: [(1 - x) | y, 1 - x]),
    ("fun x y -> let r = (y || (x <- x <> true; x)) in [r; x]", lambda x, y: [(1 - x) | y, 1 - x]),
    ("fun x y -> let r = (if (x <- x <> true; x) then y else not y) in [r; x]",
     lambda x, y: [y if 1 - x else 1 - y, 1 - x]),
])
def test_sugar_runs_effects_once(src, expect):
    from revc.evaluator import compile_program, run_program

    t = parse(src)
    u = compile_program(t)
    for x in (0, 1):
        for y in (0, 1):
            assert run_program(t, [x, y]) == u.run([x, y]) == expect(x, y)


def test_pure_sugar_operands_stay_inline():
    assert not any(isinstance(n, T.Let) for n in T.walk(parse("fun a b -> a.[0] || b.[0]")))
