"""Brute-force reference semantics used to cross-check the model checker.

The evaluator walks lasso positions directly and shares no code with the
package's fixpoint evaluator or automaton construction.
"""

from __future__ import annotations

import random

from crosslight.ltl import (FALSE, TRUE, Always, And, Eventually, FalseF, Formula, Implies,
                            Leadsto, Next, Not, Or, Prop, Release, TrueF, Until, WeakUntil)


def holds_at(f: Formula, word: list, loop: int, i: int = 0) -> bool:
    """Truth of ``f`` at position ``i`` of ``word[:loop] (word[loop:])^omega``.

    ``word[k]`` is the set of propositions true at position ``k``.
    """
    n = len(word)

    def nxt(k):
        return k + 1 if k + 1 < n else loop

    def walk(k):
        # every distinct position reachable from k, in visiting order
        out = []
        while k not in out:
            out.append(k)
            k = nxt(k)
        return out

    futures = [walk(k) for k in range(n)]
    memo = {}

    def future(k):
        return futures[k]

    def ev(g, k):
        key = (id(g), k)
        if key not in memo:
            memo[key] = ev_raw(g, k)
        return memo[key]

    def ev_raw(g, k):
        if isinstance(g, TrueF):
            return True
        if isinstance(g, FalseF):
            return False
        if isinstance(g, Prop):
            return g in word[k]
        if isinstance(g, Not):
            return not ev(g.f, k)
        if isinstance(g, And):
            return ev(g.left, k) and ev(g.right, k)
        if isinstance(g, Or):
            return ev(g.left, k) or ev(g.right, k)
        if isinstance(g, Implies):
            return not ev(g.left, k) or ev(g.right, k)
        if isinstance(g, Next):
            return ev(g.f, nxt(k))
        if isinstance(g, Always):
            return all(ev(g.f, j) for j in future(k))
        if isinstance(g, Eventually):
            return any(ev(g.f, j) for j in future(k))
        if isinstance(g, Leadsto):
            return all(not ev(g.left, j) or ev(g.right, j) for j in future(k))
        if isinstance(g, (Until, WeakUntil)):
            for j in future(k):
                if ev(g.right, j):
                    return True
                if not ev(g.left, j):
                    return False
            return isinstance(g, WeakUntil)
        if isinstance(g, Release):
            for j in future(k):
                if not ev(g.right, j):
                    return False
                if ev(g.left, j):
                    return True
            return True
        raise TypeError(g)

    return ev(f, i)


def lassos(succ: list, max_prefix: int, max_cycle: int, start: int = 0):
    """Every lasso path ``(prefix, cycle)`` from ``start`` within the bounds."""
    path = [start]

    def grow():
        last = path[-1]
        for s in succ[last]:
            # close a cycle back onto an earlier position
            for k, t in enumerate(path):
                if t == s and len(path) - k <= max_cycle and k <= max_prefix:
                    yield list(path[:k]), list(path[k:])
            if len(path) < max_prefix + max_cycle:
                path.append(s)
                yield from grow()
                path.pop()

    yield from grow()


def lasso_words(succ: list, valuation: list, max_prefix: int = 6,
                max_cycle: int = 6) -> set:
    """Distinct ``(word, loop)`` pairs of all lassos within the bounds."""
    return {canonical_word([valuation[s] for s in prefix], [valuation[s] for s in cycle])
            for prefix, cycle in lassos(succ, max_prefix, max_cycle)}


def canonical_word(prefix: list, cycle: list) -> tuple[tuple, int]:
    """Shortest ``(word, loop)`` describing the same infinite word."""
    n = len(cycle)
    for d in range(1, n + 1):
        if n % d == 0 and cycle == cycle[:d] * (n // d):
            cycle = cycle[:d]
            break
    prefix = list(prefix)
    while prefix and prefix[-1] == cycle[-1]:
        prefix.pop()
        cycle = cycle[-1:] + cycle[:-1]
    return tuple(prefix + cycle), len(prefix)


def brute_force_holds(succ: list, valuation: list, f: Formula, max_prefix: int = 6,
                      max_cycle: int = 6, words: set | None = None) -> bool:
    if words is None:
        words = lasso_words(succ, valuation, max_prefix, max_cycle)
    return all(holds_at(f, list(word), loop) for word, loop in words)


PROPS = (Prop("p"), Prop("q"), Prop("r"))


def random_structure(rng: random.Random, max_states: int = 6, n_props: int = 3):
    n = rng.randint(1, max_states)
    succ = [tuple(sorted(set(rng.randrange(n) for _ in range(rng.randint(1, 2)))))
            for _ in range(n)]
    props = PROPS[:n_props]
    valuation = [frozenset(a for a in props if rng.random() < 0.5) for _ in range(n)]
    return succ, valuation


def pattern_formulas(rng: random.Random) -> list[Formula]:
    """The five pattern shapes with propositions drawn from p, q, r."""
    a, b, c, d = (rng.choice(PROPS) for _ in range(4))
    return [
        Always(a),
        Eventually(a),
        WeakUntil(a, b),
        Always(Implies(a, Eventually(b))),
        Implies(Always(Implies(a, Eventually(b))),
                Implies(Always(Eventually(c)), Always(Eventually(d)))),
    ]


__all__ = ["holds_at", "lassos", "brute_force_holds", "lasso_words", "canonical_word", "random_structure", "pattern_formulas",
           "PROPS", "TRUE", "FALSE"]
