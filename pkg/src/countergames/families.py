"""Generators for the trade-off games, the lower-bound games, and their strategies.

Vertex ids: ``v{n}`` for Adam's column vertices,
``u{n}`` (single level) or ``u{p}_{n}`` (level ``p``) for Eve's vertices,
and ``F`` for the target.  Column indices decrease towards ``F``.
"""
from __future__ import annotations

import itertools
import math
import re

from .arena import ADAM, EPS, EVE, INC, RESET, Arena, Edge
from .machines import StrategyMachine, build_machine, evaluate_strategy_reachability

TARGET = "F"
#: Refuse to build G_{K,N} instances with more columns than this.
MAX_COLUMNS = 200_000


# -- arithmetic -------------------------------------------------------------


def fn_d(K: int, N: int) -> int:
    """Reset stride unit of level K: (N+1)^(K-1)."""
    if K < 1 or N < 1:
        raise ValueError("need K >= 1 and N >= 1")
    return (N + 1) ** (K - 1)


def fn_n(K: int, N: int) -> int:
    """Number of columns (minus one) kept in G_{K,N}."""
    if K < 1 or N < 1:
        raise ValueError("need K >= 1 and N >= 1")
    n = 2 * N
    for j in range(1, K):
        n = (N + 1) ** (j + 1) + (N + 1) * n
    return n


def fn_alpha(d: int, k: int, W: int, N: int, multiplier: int | None = None) -> int:
    """Trade-off bound recursion; 2N once a single colour pair remains.

    The factor in front of ``(N+1)^k`` in the recursive call defaults to the
    current width ``W``; pass ``multiplier`` to use a fixed value instead.
    """
    if d < 1 or d % 2 == 0:
        raise ValueError("d must be odd and at least 1")
    while d > 1:
        factor = W if multiplier is None else multiplier
        d, k, W, N = d - 2, k + 1, 6 * W, factor * (N + 1) ** k
    return 2 * N


def fn_mem(d: int, k: int) -> int:
    """Memory size recursion: 2*k! at d = 1, times 4 per removed colour pair."""
    if d < 1 or d % 2 == 0:
        raise ValueError("d must be odd and at least 1")
    factor = 1
    while d > 1:
        d, k, factor = d - 2, k + 1, factor * 4
    return factor * 2 * math.factorial(k)


# -- trade-off and cyclic games ---------------------------------------------


def gen_tradeoff_game(N: int) -> Arena:
    """One-counter Eve-only game where bound N needs N+1 memory states.

    From ``v0`` a chain of N increments leads to the hub ``v``.  The exit to
    ``F`` costs N increments.  Option ``l`` loops back to ``v`` through
    ``u{l}`` with N-l increments, a reset, then l-1 increments, one action
    per edge.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    owner, color, edges = {}, {}, []

    def vertex(name):
        owner[name] = EVE
        color[name] = 2

    def chain(start, names, end, actions):
        path = [start] + names + [end]
        for a, b, act in zip(path, path[1:], actions):
            edges.append(Edge(a, b, (act,)))

    vertex("v0")
    vertex("v")
    lead = [f"c{j}" for j in range(1, N)]
    for name in lead:
        vertex(name)
    chain("v0", lead, "v", [INC] * N)
    for ell in range(N, 0, -1):
        aux = [f"u{ell}"] + [f"u{ell}_{j}" for j in range(2, N)] if N > 1 else []
        for name in aux:
            vertex(name)
        chain("v", aux, "v", [INC] * (N - ell) + [RESET] + [INC] * (ell - 1))
    exit_ = [f"x{j}" for j in range(1, N)]
    for name in exit_:
        vertex(name)
    vertex(TARGET)
    chain("v", exit_, TARGET, [INC] * N)
    edges.append(Edge(TARGET, TARGET, (EPS,)))
    return Arena(k=1, owner=owner, color=color, edges=edges, initial="v0", target=frozenset({TARGET}))


def tradeoff_exit_machine(arena: Arena) -> StrategyMachine:
    """Positional machine that leaves the hub straight towards F."""
    exit_edge = next(i for i, e in enumerate(arena.edges) if e.src == "v" and e.dst in ("x1", TARGET))
    return build_machine(arena, (0,), 0, lambda m, i, e: 0,
                         lambda v, m: exit_edge if v == "v" else arena.out_edges[v][0])


def gen_cyclic_counter_game(k: int) -> Arena:
    """One Eve vertex with k self-loops; loop j increments j and resets j-1."""
    if k < 2:
        raise ValueError("k must be at least 2")
    edges = []
    for j in range(k):
        act = [EPS] * k
        act[j] = INC
        act[(j - 1) % k] = RESET
        edges.append(Edge("v", "v", tuple(act)))
    return Arena(k=k, owner={"v": EVE}, color={"v": 2}, edges=edges, initial="v")


def round_robin_machine(arena: Arena) -> StrategyMachine:
    """k-state machine cycling through the k loops of the cyclic game."""
    k = len(arena.edges)
    return build_machine(arena, range(k), 0, lambda m, i, e: (m + 1) % k if i == m else m,
                         lambda v, m: m)


# -- lower-bound games ------------------------------------------------------


def _column_game(K: int, N: int, names, overshoot: bool = True) -> Arena:
    top = fn_n(K, N)
    if top + 1 > MAX_COLUMNS:
        raise ValueError(f"G_{{{K},{N}}} would have {top + 1} columns (limit {MAX_COLUMNS})")
    owner, color, edges = {}, {}, []
    for n in range(top, -1, -1):
        owner[f"v{n}"] = ADAM
        color[f"v{n}"] = 2
        for p in range(1, K + 1):
            owner[names(p, n)] = EVE
            color[names(p, n)] = 2
    owner[TARGET] = ADAM
    color[TARGET] = 2
    for n in range(top, -1, -1):
        if n >= 1:
            edges.append(Edge(f"v{n}", f"v{n - 1}", (EPS,)))
        for p in range(1, K + 1):
            edges.append(Edge(f"v{n}", names(p, n), (EPS,)))
        for p in range(1, K + 1):
            d = fn_d(p, N)
            u = names(p, n)
            if n >= d:
                edges.append(Edge(u, f"v{n - d}", (INC,)))
            if n == 0 or (overshoot and n < d):
                edges.append(Edge(u, TARGET, (INC,)))
            back = n + (p + 1) * d
            if back <= top:
                edges.append(Edge(u, f"v{back}", (RESET,)))
    edges.append(Edge(TARGET, TARGET, (EPS,)))
    return Arena(k=1, owner=owner, color=color, edges=edges, initial=f"v{top}",
                 target=frozenset({TARGET}))


def gen_g1(N: int) -> Arena:
    """The 2N+1 rightmost columns of G_1, starting at ``v{2N}``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return _column_game(1, N, lambda p, n: f"u{n}")


def gen_gkn(K: int, N: int, overshoot: bool = True) -> Arena:
    """G_{K,N}: K nested copies of G_1 with strides d(p,N), columns 0..n(K,N).

    With ``overshoot`` (the default) an increment from ``u{p}_{n}`` with
    n < d(p,N), which would land left of column 0, goes to F.  Without it
    those vertices can only reset, and Adam loops through them forever.
    """
    if K < 1 or N < 1:
        raise ValueError("need K >= 1 and N >= 1")
    return _column_game(K, N, lambda p, n: f"u{p}_{n}", overshoot)


_U1 = re.compile(r"u(\d+)$")
_UP = re.compile(r"u(\d+)_(\d+)$")
_V = re.compile(r"v(\d+)$")


def column(vertex: str) -> int | None:
    """Column index of a G_1 / G_{K,N} vertex, None for F."""
    for pat in (_V, _U1):
        m = pat.match(vertex)
        if m:
            return int(m.group(1))
    m = _UP.match(vertex)
    return int(m.group(2)) if m else None


def level(vertex: str) -> int | None:
    m = _UP.match(vertex)
    if m:
        return int(m.group(1))
    return 1 if _U1.match(vertex) else None


def _eve_edges(arena: Arena, v):
    inc = reset = None
    for idx in arena.out_edges[v]:
        a = arena.edges[idx].act[0]
        if a == INC:
            inc = idx
        elif a == RESET:
            reset = idx
    return inc, reset


def _choose(arena: Arena, v, want_reset: bool):
    inc, reset = _eve_edges(arena, v)
    if want_reset:
        return reset if reset is not None else inc
    return inc if inc is not None else reset


def strategy_g1_4state(N: int, arena: Arena | None = None) -> StrategyMachine:
    """Increment three times (states i1, i2, i3), then reset (state r)."""
    arena = arena or gen_g1(N)
    order = {"i1": "i2", "i2": "i3", "i3": "r", "r": "r"}

    def update(m, idx, e):
        if arena.owner[e.src] != EVE:
            return m
        return order[m] if e.act[0] == INC else "i1"

    return build_machine(arena, ("i1", "i2", "i3", "r"), "i1", update,
                         lambda v, m: _choose(arena, v, m == "r"))


def strategy_g1_3state(N: int, arena: Arena | None = None) -> StrategyMachine:
    """Advance i -> j -> r on entering an even column; reset in r."""
    arena = arena or gen_g1(N)
    order = {"i": "j", "j": "r", "r": "r"}

    def update(m, idx, e):
        if e.act[0] == RESET:
            return "i"
        col = column(e.dst)
        if col is None or arena.owner[e.dst] != ADAM or col % 2:
            return m
        return order[m]

    return build_machine(arena, ("i", "j", "r"), "i", update,
                         lambda v, m: _choose(arena, v, m == "r"))


def strategy_gkn(
    K: int,
    N: int,
    phases=None,
    arena: Arena | None = None,
    mode: str = "cross",
) -> StrategyMachine:
    """Product of K three-state components, one per level.

    Component ``p`` advances when a move passes a column congruent to
    ``phases[p-1]`` modulo (p+1)*d(p,N).  With ``mode="cross"`` every column
    strictly left of the destination up to the destination counts;
    ``mode="land"`` only looks at the destination column.  Any reset puts
    every component back to ``i``.
    """
    arena = arena or gen_gkn(K, N)
    phases = tuple(phases) if phases is not None else (0,) * K
    periods = [(p + 1) * fn_d(p, N) for p in range(1, K + 1)]
    order = {"i": "j", "j": "r", "r": "r"}
    states = tuple(itertools.product("ijr", repeat=K))
    start = ("i",) * K

    def gray(p, c):
        return (c - phases[p]) % periods[p] == 0

    def update(m, idx, e):
        if e.act[0] == RESET:
            return start
        a, b = column(e.src), column(e.dst)
        if b is None or a is None or b >= a:
            return m
        passed = range(b, a) if mode == "cross" else (b,)
        out = list(m)
        for p in range(K):
            if any(gray(p, c) for c in passed):
                out[p] = order[out[p]]
        return tuple(out)

    def move(v, m):
        p = level(v)
        return _choose(arena, v, m[p - 1] == "r")

    return build_machine(arena, states, start, update, move)


def calibrate_gkn_phases(K: int, N: int, target: int | None = None, arena: Arena | None = None):
    """First phase vector (lexicographic) whose machine meets ``target``.

    ``target`` defaults to K(K+3).  Returns ``(phases, value)`` or None.
    """
    arena = arena or gen_gkn(K, N)
    target = K * (K + 3) if target is None else target
    periods = [(p + 1) * fn_d(p, N) for p in range(1, K + 1)]
    for phases in itertools.product(*(range(t) for t in periods)):
        machine = strategy_gkn(K, N, phases, arena=arena)
        value = evaluate_strategy_reachability(arena, machine, target)
        if value <= target:
            return phases, value
    return None
