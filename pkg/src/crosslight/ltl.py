"""LTL formulas: syntax, parser, lasso semantics and translation to Büchi automata.

Concrete syntax follows the Maude LTL module: ``True``, ``False``, ``~``,
``/\\``, ``\\/``, ``->``, ``=>`` (``p => q`` abbreviates ``[](p -> q)``),
``[]``, ``<>``, ``U``, ``W`` and ``R``.  Unary operators bind tightest, then
``/\\``, ``\\/``, the binary temporal operators, and finally ``->``/``=>``
(right associative).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import count
from typing import Callable, Iterable, Sequence


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True)
class TrueF(Formula):
    def __str__(self):
        return "True"


@dataclass(frozen=True)
class FalseF(Formula):
    def __str__(self):
        return "False"


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True)
class Prop(Formula):
    name: str
    args: tuple = ()

    def __str__(self):
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(self.args)})"


@dataclass(frozen=True)
class Not(Formula):
    f: Formula

    def __str__(self):
        return f"~ {_paren(self.f)}"


@dataclass(frozen=True)
class Always(Formula):
    f: Formula

    def __str__(self):
        return f"[] {_paren(self.f)}"


@dataclass(frozen=True)
class Eventually(Formula):
    f: Formula

    def __str__(self):
        return f"<> {_paren(self.f)}"


@dataclass(frozen=True)
class Next(Formula):
    f: Formula

    def __str__(self):
        return f"O {_paren(self.f)}"


@dataclass(frozen=True)
class _Binary(Formula):
    left: Formula
    right: Formula
    op = "?"

    def __str__(self):
        return f"{_paren(self.left)} {self.op} {_paren(self.right)}"


class And(_Binary):
    op = "/\\"


class Or(_Binary):
    op = "\\/"


class Implies(_Binary):
    op = "->"


class Until(_Binary):
    op = "U"


class WeakUntil(_Binary):
    op = "W"


class Release(_Binary):
    op = "R"


class Leadsto(_Binary):
    """``p => q``, an abbreviation for ``[](p -> q)``."""

    op = "=>"


def _paren(f: Formula) -> str:
    if isinstance(f, (Prop, TrueF, FalseF)):
        return str(f)
    return f"({f})"


def props(f: Formula) -> set[Prop]:
    if isinstance(f, Prop):
        return {f}
    if isinstance(f, (TrueF, FalseF)):
        return set()
    if isinstance(f, (Not, Always, Eventually, Next)):
        return props(f.f)
    return props(f.left) | props(f.right)


# --------------------------------------------------------------------------
# parsing


class FormulaSyntaxError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"""
      (?P<op>\[\]|<>|/\\|\\/|->|=>|~|\(|\)|,)
    | (?P<str>"[^"]*")
    | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
    """, re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        toks.append((m.lastgroup, m.group(m.lastgroup), pos))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


_BINARY_LEVELS = [
    ({"->": Implies, "=>": Leadsto}, True),
    ({"U": Until, "W": WeakUntil, "R": Release}, True),
    ({"\\/": Or}, False),
    ({"/\\": And}, False),
]


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, pos = self.take()
        if v != value:
            raise FormulaSyntaxError(f"expected {value!r} but found {v or 'end of input'!r}", pos)

    def parse(self) -> Formula:
        f = self.level(0)
        kind, v, pos = self.peek()
        if kind != "end":
            raise FormulaSyntaxError(f"unexpected {v!r}", pos)
        return f

    def level(self, k: int) -> Formula:
        if k == len(_BINARY_LEVELS):
            return self.unary()
        ops, right_assoc = _BINARY_LEVELS[k]
        left = self.level(k + 1)
        while self.peek()[1] in ops and self.peek()[0] in ("op", "ident"):
            cls = ops[self.take()[1]]
            if right_assoc:
                return cls(left, self.level(k))
            left = cls(left, self.level(k + 1))
        return left

    def unary(self) -> Formula:
        kind, v, pos = self.take()
        if v == "~":
            return Not(self.unary())
        if v == "[]":
            return Always(self.unary())
        if v == "<>":
            return Eventually(self.unary())
        if kind == "ident" and v == "O":
            return Next(self.unary())
        if v == "(":
            f = self.level(0)
            self.expect(")")
            return f
        if kind == "ident":
            if v == "True":
                return TRUE
            if v == "False":
                return FALSE
            if v in ("U", "W", "R"):
                raise FormulaSyntaxError(f"operator {v!r} needs a left operand", pos)
            args = []
            if self.peek()[1] == "(":
                self.take()
                while True:
                    k2, a, p2 = self.take()
                    if k2 == "str":
                        args.append(a)
                    elif k2 == "ident":
                        args.append(a)
                    else:
                        raise FormulaSyntaxError("expected proposition argument", p2)
                    if self.peek()[1] == ",":
                        self.take()
                        continue
                    self.expect(")")
                    break
            return Prop(v, tuple(args))
        raise FormulaSyntaxError(f"unexpected {v or 'end of input'!r}", pos)


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# semantics on ultimately periodic words


def eval_lasso(f: Formula, prefix: Sequence, cycle: Sequence,
               holds: Callable[[Prop, object], bool]) -> bool:
    """Truth of ``f`` at position 0 of the word ``prefix cycle cycle ...``.

    ``holds(prop, letter)`` decides atomic propositions.  Temporal operators
    are evaluated as least/greatest fixpoints over the lasso positions.
    """
    if not cycle:
        raise ValueError("lasso needs a nonempty cycle")
    word = list(prefix) + list(cycle)
    n = len(word)
    nxt = list(range(1, n)) + [len(prefix)]
    memo: dict = {}

    def fix(step, init: bool):
        vals = [init] * n
        changed = True
        while changed:
            changed = False
            for i in reversed(range(n)):
                v = step(i, vals)
                if v != vals[i]:
                    vals[i] = v
                    changed = True
        return vals

    def ev(g: Formula) -> list[bool]:
        if g in memo:
            return memo[g]
        if isinstance(g, TrueF):
            r = [True] * n
        elif isinstance(g, FalseF):
            r = [False] * n
        elif isinstance(g, Prop):
            r = [bool(holds(g, w)) for w in word]
        elif isinstance(g, Not):
            r = [not v for v in ev(g.f)]
        elif isinstance(g, And):
            a, b = ev(g.left), ev(g.right)
            r = [x and y for x, y in zip(a, b)]
        elif isinstance(g, Or):
            a, b = ev(g.left), ev(g.right)
            r = [x or y for x, y in zip(a, b)]
        elif isinstance(g, Implies):
            a, b = ev(g.left), ev(g.right)
            r = [(not x) or y for x, y in zip(a, b)]
        elif isinstance(g, Next):
            a = ev(g.f)
            r = [a[nxt[i]] for i in range(n)]
        elif isinstance(g, Always):
            a = ev(g.f)
            r = fix(lambda i, v: a[i] and v[nxt[i]], True)
        elif isinstance(g, Eventually):
            a = ev(g.f)
            r = fix(lambda i, v: a[i] or v[nxt[i]], False)
        elif isinstance(g, Until):
            a, b = ev(g.left), ev(g.right)
            r = fix(lambda i, v: b[i] or (a[i] and v[nxt[i]]), False)
        elif isinstance(g, WeakUntil):
            a, b = ev(g.left), ev(g.right)
            r = fix(lambda i, v: b[i] or (a[i] and v[nxt[i]]), True)
        elif isinstance(g, Release):
            a, b = ev(g.left), ev(g.right)
            r = fix(lambda i, v: b[i] and (a[i] or v[nxt[i]]), True)
        elif isinstance(g, Leadsto):
            a, b = ev(g.left), ev(g.right)
            imp = [(not x) or y for x, y in zip(a, b)]
            r = fix(lambda i, v: imp[i] and v[nxt[i]], True)
        else:
            raise TypeError(f"unknown formula {g!r}")
        memo[g] = r
        return r

    return ev(f)[0]


# --------------------------------------------------------------------------
# negation normal form


def nnf(f: Formula, negate: bool = False) -> Formula:
    """Negation normal form over True, False, literals, /\\, \\/, O, U and R."""
    if isinstance(f, TrueF):
        return FALSE if negate else TRUE
    if isinstance(f, FalseF):
        return TRUE if negate else FALSE
    if isinstance(f, Prop):
        return Not(f) if negate else f
    if isinstance(f, Not):
        return nnf(f.f, not negate)
    if isinstance(f, And):
        l, r = nnf(f.left, negate), nnf(f.right, negate)
        return Or(l, r) if negate else And(l, r)
    if isinstance(f, Or):
        l, r = nnf(f.left, negate), nnf(f.right, negate)
        return And(l, r) if negate else Or(l, r)
    if isinstance(f, Implies):
        return nnf(Or(Not(f.left), f.right), negate)
    if isinstance(f, Leadsto):
        return nnf(Always(Implies(f.left, f.right)), negate)
    if isinstance(f, Next):
        return Next(nnf(f.f, negate))
    if isinstance(f, Always):
        return nnf(Release(FALSE, f.f), negate)
    if isinstance(f, Eventually):
        return nnf(Until(TRUE, f.f), negate)
    if isinstance(f, WeakUntil):
        # a W b == b R (a \/ b)
        return nnf(Release(f.right, Or(f.left, f.right)), negate)
    if isinstance(f, Until):
        if negate:
            return Release(nnf(f.left, True), nnf(f.right, True))
        return Until(nnf(f.left), nnf(f.right))
    if isinstance(f, Release):
        if negate:
            return Until(nnf(f.left, True), nnf(f.right, True))
        return Release(nnf(f.left), nnf(f.right))
    raise TypeError(f"unknown formula {f!r}")


# --------------------------------------------------------------------------
# Büchi automata


@dataclass
class BuchiAutomaton:
    """State-labelled Büchi automaton.

    A run ``q0 q1 ...`` reads the word ``w0 w1 ...`` when ``q0`` is initial,
    each ``q(i+1)`` is a successor of ``qi`` and every letter ``wi`` satisfies
    the guard of ``qi``: all propositions in ``pos[qi]`` true, all in
    ``neg[qi]`` false.
    """

    states: list[int]
    initial: list[int]
    succ: dict[int, list[int]]
    pos: dict[int, frozenset]
    neg: dict[int, frozenset]
    accepting: set[int]
    props: list[Prop] = field(default_factory=list)

    def guard_ok(self, q: int, holds: Callable[[Prop], bool]) -> bool:
        return all(holds(a) for a in self.pos[q]) and not any(holds(a) for a in self.neg[q])

    def accepts_lasso(self, prefix: Sequence, cycle: Sequence,
                      holds: Callable[[Prop, object], bool]) -> bool:
        """Decide acceptance of an ultimately periodic word by graph search."""
        word = list(prefix) + list(cycle)
        n = len(word)
        loop = len(prefix)
        ok = {(q, i): self.guard_ok(q, lambda a, w=word[i]: holds(a, w))
              for q in self.states for i in range(n)}
        start = [(q, 0) for q in self.initial if ok[(q, 0)]]

        def nexts(node):
            q, i = node
            j = i + 1 if i + 1 < n else loop
            return [(q2, j) for q2 in self.succ[q] if ok[(q2, j)]]

        seen = set(start)
        stack = list(start)
        while stack:
            node = stack.pop()
            for m in nexts(node):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        # an accepting node on a cycle of the (finite) run graph
        for node in seen:
            if node[0] not in self.accepting:
                continue
            frontier = nexts(node)
            reach = set(frontier)
            while frontier:
                x = frontier.pop()
                if x == node:
                    return True
                for y in nexts(x):
                    if y not in reach:
                        reach.add(y)
                        frontier.append(y)
            if node in reach:
                return True
        return False


@dataclass
class _Node:
    name: int
    incoming: set
    new: set
    old: set
    nxt: set


def _expand_graph(f: Formula) -> list[_Node]:
    """Tableau expansion of an NNF formula into a generalized Büchi graph."""
    ids = count(1)
    nodes: list[_Node] = []

    def expand(node: _Node):
        while node.new:
            g = node.new.pop()
            if g in node.old:
                continue
            if isinstance(g, FalseF):
                return
            if isinstance(g, Not) and g.f in node.old or isinstance(g, Prop) and Not(g) in node.old:
                return
            if isinstance(g, (TrueF, Prop, Not)):
                node.old.add(g)
                continue
            if isinstance(g, And):
                node.old.add(g)
                node.new |= {g.left, g.right} - node.old
                continue
            if isinstance(g, Next):
                node.old.add(g)
                node.nxt.add(g.f)
                continue
            if isinstance(g, Or):
                new1, nxt1, new2, nxt2 = {g.left}, set(), {g.right}, set()
            elif isinstance(g, Until):
                new1, nxt1, new2, nxt2 = {g.left}, {g}, {g.right}, set()
            elif isinstance(g, Release):
                new1, nxt1, new2, nxt2 = {g.right}, {g}, {g.left, g.right}, set()
            else:
                raise TypeError(f"formula not in NNF: {g}")
            old = node.old | {g}
            n1 = _Node(next(ids), set(node.incoming), node.new | (new1 - old), set(old),
                       node.nxt | nxt1)
            n2 = _Node(next(ids), set(node.incoming), node.new | (new2 - old), set(old),
                       node.nxt | nxt2)
            expand(n1)
            expand(n2)
            return
        for other in nodes:
            if other.old == node.old and other.nxt == node.nxt:
                other.incoming |= node.incoming
                return
        nodes.append(node)
        expand(_Node(next(ids), {node.name}, set(node.nxt), set(), set()))

    expand(_Node(next(ids), {0}, {f}, set(), set()))
    return nodes


def _subformulas(f: Formula) -> Iterable[Formula]:
    yield f
    if isinstance(f, (Not, Next, Always, Eventually)):
        yield from _subformulas(f.f)
    elif isinstance(f, _Binary):
        yield from _subformulas(f.left)
        yield from _subformulas(f.right)


def ltl_to_buchi(f: Formula) -> BuchiAutomaton:
    """Büchi automaton accepting exactly the words that satisfy ``f``."""
    g = nnf(f)
    nodes = _expand_graph(g)
    untils = sorted({h for h in _subformulas(g) if isinstance(h, Until)}, key=str)
    acc_sets = [{n.name for n in nodes if u not in n.old or u.right in n.old} for u in untils]
    if not acc_sets:
        acc_sets = [{n.name for n in nodes}]
    k = len(acc_sets)
    succ_gen: dict[int, list[int]] = {n.name: [] for n in nodes}
    initial_gen = []
    for m in nodes:
        for src in m.incoming:
            if src == 0:
                initial_gen.append(m.name)
            elif src in succ_gen:
                succ_gen[src].append(m.name)
    # degeneralize: state (node, i) waits for acceptance set i
    index = {}
    for n in nodes:
        for i in range(k):
            index[(n.name, i)] = len(index)
    by_name = {n.name: n for n in nodes}
    states = list(range(len(index)))
    succ: dict[int, list[int]] = {}
    pos: dict[int, frozenset] = {}
    neg: dict[int, frozenset] = {}
    accepting = set()
    for (name, i), q in index.items():
        node = by_name[name]
        pos[q] = frozenset(h for h in node.old if isinstance(h, Prop))
        neg[q] = frozenset(h.f for h in node.old if isinstance(h, Not))
        j = (i + 1) % k if name in acc_sets[i] else i
        succ[q] = [index[(m, j)] for m in succ_gen[name]]
        if i == 0 and name in acc_sets[0]:
            accepting.add(q)
    initial = [index[(m, 0)] for m in initial_gen]
    ba = BuchiAutomaton(states, initial, succ, pos, neg, accepting, sorted(props(f), key=str))
    return _prune(ba)


def _prune(ba: BuchiAutomaton) -> BuchiAutomaton:
    """Drop states unreachable from the initial ones and renumber."""
    seen = []
    mark = set()
    stack = list(ba.initial)
    while stack:
        q = stack.pop()
        if q in mark:
            continue
        mark.add(q)
        seen.append(q)
        stack.extend(ba.succ[q])
    seen.sort()
    ren = {q: i for i, q in enumerate(seen)}
    return BuchiAutomaton(
        list(range(len(seen))),
        sorted({ren[q] for q in ba.initial}),
        {ren[q]: sorted({ren[t] for t in ba.succ[q]}) for q in seen},
        {ren[q]: ba.pos[q] for q in seen},
        {ren[q]: ba.neg[q] for q in seen},
        {ren[q] for q in seen if q in ba.accepting},
        ba.props,
    )
