"""XOR-AND Boolean expressions: the compiler's intermediate representation.

Nodes are immutable and hash-consed lazily (each node caches its hash), so
large shared expressions can be compared and used as dict keys cheaply.
Passes that walk expressions memoize on node identity, which keeps the cost
proportional to the DAG size rather than the tree size.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping


class BExp:
    __slots__ = ("_hash",)

    def __repr__(self) -> str:
        return f"BExp({pretty(self)})"

    def __str__(self) -> str:
        return pretty(self)


class _Const(BExp):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value
        self._hash = hash(("const", value))

    def __eq__(self, other):
        return isinstance(other, _Const) and other.value == self.value

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (_const, (self.value,))


FALSE: BExp = _Const(False)
TRUE: BExp = _Const(True)


def _const(value: bool) -> BExp:
    return TRUE if value else FALSE


def const(value: bool) -> BExp:
    return _const(bool(value))


class Var(BExp):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError(f"variable index must be non-negative, got {index}")
        self.index = index
        self._hash = hash(("var", index))

    def __eq__(self, other):
        return isinstance(other, Var) and other.index == self.index

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (Var, (self.index,))


class _Binary(BExp):
    __slots__ = ("left", "right")
    tag = ""

    def __init__(self, left: BExp, right: BExp):
        self.left = left
        self.right = right
        self._hash = hash((self.tag, left._hash, right._hash))

    def __eq__(self, other):
        if self is other:
            return True
        if type(other) is not type(self) or other._hash != self._hash:
            return False
        return _structurally_equal(self, other)

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (type(self), (self.left, self.right))


class Xor(_Binary):
    __slots__ = ()
    tag = "xor"


class And(_Binary):
    __slots__ = ()
    tag = "and"


def _structurally_equal(a: BExp, b: BExp) -> bool:
    # iterative so deep XOR chains do not exhaust the Python stack
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if type(x) is not type(y) or x._hash != y._hash:
            return False
        if isinstance(x, _Binary):
            stack.append((x.left, y.left))
            stack.append((x.right, y.right))
        elif x != y:
            return False
    return True


def is_const(b: BExp) -> bool:
    return isinstance(b, _Const)


def xor_all(terms: Iterable[BExp]) -> BExp:
    """Left-nested XOR of ``terms``; FALSE for an empty iterable."""
    out: BExp | None = None
    for t in terms:
        out = t if out is None else Xor(out, t)
    return FALSE if out is None else out


def and_all(terms: Iterable[BExp]) -> BExp:
    out: BExp | None = None
    for t in terms:
        out = t if out is None else And(out, t)
    return TRUE if out is None else out


def _postorder(root: BExp) -> list[BExp]:
    """Distinct nodes of ``root`` in post-order (children before parents)."""
    seen: set[int] = set()
    order: list[BExp] = []
    stack: list[tuple[BExp, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        if isinstance(node, _Binary):
            stack.append((node.right, False))
            stack.append((node.left, False))
    return order


def _fold(root: BExp, leaf: Callable[[BExp], object], node: Callable[[_Binary, object, object], object]):
    memo: dict[int, object] = {}
    for n in _postorder(root):
        if isinstance(n, _Binary):
            memo[id(n)] = node(n, memo[id(n.left)], memo[id(n.right)])
        else:
            memo[id(n)] = leaf(n)
    return memo[id(root)]


def eval_bexp(b: BExp, state: Mapping[int, int] | Callable[[int], int]) -> int:
    """Evaluate over a total state; missing indices read as 0."""
    if callable(state):
        look = state
    else:
        look = lambda i: state.get(i, 0)  # noqa: E731

    def leaf(n):
        if isinstance(n, Var):
            return look(n.index) & 1
        return 1 if n.value else 0

    def node(n, l, r):
        return (l ^ r) if isinstance(n, Xor) else (l & r)

    return _fold(b, leaf, node)


def eval_bexp_vec(b: BExp, columns: Mapping[int, int], mask: int) -> int:
    """Bit-parallel evaluation: each variable maps to an int holding one bit per state."""

    def leaf(n):
        if isinstance(n, Var):
            return columns.get(n.index, 0)
        return mask if n.value else 0

    def node(n, l, r):
        return (l ^ r) if isinstance(n, Xor) else (l & r)

    return _fold(b, leaf, node)


def variables(b: BExp) -> frozenset[int]:
    return frozenset(n.index for n in _postorder(b) if isinstance(n, Var))


def occurs(i: int, b: BExp) -> bool:
    return any(isinstance(n, Var) and n.index == i for n in _postorder(b))


def size(b: BExp) -> int:
    """Tree size (shared subterms counted once per occurrence)."""
    return _fold(b, lambda n: 1, lambda n, l, r: 1 + l + r)


def depth(b: BExp) -> int:
    return _fold(b, lambda n: 0, lambda n, l, r: 1 + max(l, r))


def substitute(b: BExp, mapping: Mapping[int, BExp] | Callable[[int], BExp]) -> BExp:
    """Replace every Var i by ``mapping[i]`` (variables missing from a dict stay put)."""
    if callable(mapping):
        get = mapping
    else:
        get = lambda i: mapping.get(i, None)  # noqa: E731

    def leaf(n):
        if isinstance(n, Var):
            r = get(n.index)
            return n if r is None else r
        return n

    def node(n, l, r):
        if l is n.left and r is n.right:
            return n
        return type(n)(l, r)

    return _fold(b, leaf, node)


def rename(b: BExp, mapping: Mapping[int, int]) -> BExp:
    return substitute(b, {k: Var(v) for k, v in mapping.items()})


def simplify(b: BExp) -> BExp:
    """Short-circuit constants and syntactic duplicates, bottom-up.

    One bottom-up pass reaches the fixpoint: each rewrite returns either an
    already-simplified child or a constant.
    """

    def node(n, l, r):
        if isinstance(n, Xor):
            if l == FALSE:
                return r
            if r == FALSE:
                return l
            if l == r:
                return FALSE
        else:
            if l == FALSE or r == FALSE:
                return FALSE
            if l == TRUE:
                return r
            if r == TRUE:
                return l
            if l == r:
                return l
        if l is n.left and r is n.right:
            return n
        return type(n)(l, r)

    return _fold(b, lambda n: n, node)


def _xor_drop_false(l: BExp, r: BExp) -> BExp:
    if l == FALSE:
        return r
    if r == FALSE:
        return l
    return Xor(l, r)


def factor_as(b: BExp, targ: int) -> BExp | None:
    """Try to write ``b`` as ``Var targ ^ b'`` with ``targ`` absent from ``b'``."""
    if isinstance(b, Var):
        return FALSE if b.index == targ else None
    if isinstance(b, Xor):
        fl = factor_as(b.left, targ)
        if fl is not None and not occurs(targ, b.right):
            return _xor_drop_false(fl, b.right)
        fr = factor_as(b.right, targ)
        if fr is not None and not occurs(targ, b.left):
            return _xor_drop_false(b.left, fr)
    return None


def distribute_ands(b: BExp) -> BExp:
    """Rewrite into a positive-polarity XOR of products."""

    def dist(x: BExp, y: BExp) -> BExp:
        # x and y are already distributed
        if isinstance(x, Xor) and isinstance(y, Xor):
            return Xor(Xor(dist(x.left, y.left), dist(x.right, y.left)),
                       Xor(dist(x.left, y.right), dist(x.right, y.right)))
        if isinstance(y, Xor):
            return Xor(dist(x, y.left), dist(x, y.right))
        if isinstance(x, Xor):
            return Xor(dist(x.left, y), dist(x.right, y))
        return And(x, y)

    def node(n, l, r):
        if isinstance(n, Xor):
            if l is n.left and r is n.right:
                return n
            return Xor(l, r)
        return dist(l, r)

    return _fold(b, lambda n: n, node)


def is_esop(b: BExp) -> bool:
    """True when no And node has an Xor beneath it."""

    def node(n, l, r):
        has_xor_l, ok_l = l
        has_xor_r, ok_r = r
        if isinstance(n, And):
            return (False, ok_l and ok_r and not has_xor_l and not has_xor_r)
        return (True, ok_l and ok_r)

    return _fold(b, lambda n: (False, True), node)[1]


def products(b: BExp) -> list[BExp]:
    """The XOR-summands of an expression (flattening nested Xor nodes)."""
    out: list[BExp] = []
    stack = [b]
    while stack:
        n = stack.pop()
        if isinstance(n, Xor):
            stack.append(n.right)
            stack.append(n.left)
        else:
            out.append(n)
    return out


def product_degree(p: BExp) -> int:
    """Number of variable literals in a product (constants have degree 0)."""
    return _fold(p, lambda n: 1 if isinstance(n, Var) else 0, lambda n, l, r: l + r)


def max_product_degree(b: BExp) -> int:
    if not is_esop(b):
        raise ValueError(f"expression is not in ESOP form: {pretty(b)}")
    return max((product_degree(p) for p in products(b)), default=0)


def to_esop(b: BExp) -> BExp:
    """simplify, distribute, simplify: the space-mode expression pipeline."""
    return simplify(distribute_ands(simplify(b)))


def pretty(b: BExp) -> str:
    def leaf(n):
        if isinstance(n, Var):
            return f"x{n.index}"
        return "1" if n.value else "0"

    def node(n, l, r):
        op = "^" if isinstance(n, Xor) else "&"
        return f"({l} {op} {r})"

    return _fold(b, leaf, node)
