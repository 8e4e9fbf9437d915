"""Seeded random instances for the property checks and the acceptance suite."""
from __future__ import annotations

import random

import networkx as nx

from .arena import ADAM, EPS, EVE, SYMBOLS, Arena, Edge
from .transforms import close_horizon


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_action(rng: random.Random, k: int, weights=(3, 2, 2)) -> tuple:
    return tuple(rng.choices(SYMBOLS, weights=weights, k=k))


def random_arena(
    seed,
    n: int,
    k: int,
    colors: int = 3,
    max_out: int = 2,
    min_color: int = 0,
    target: bool = False,
) -> Arena:
    """Arena on vertices 0..n-1, every vertex with 1..max_out successors.

    Colours are drawn from ``min_color .. min_color+colors-1``.  With
    ``target`` the last vertex becomes an absorbing target.
    """
    rng = _rng(seed)
    owner = {v: rng.choice((EVE, ADAM)) for v in range(n)}
    color = {v: rng.randrange(min_color, min_color + colors) for v in range(n)}
    edges = []
    for v in range(n):
        if target and v == n - 1:
            edges.append(Edge(v, v, (EPS,) * k))
            continue
        for w in rng.sample(range(n), rng.randint(1, min(max_out, n))):
            edges.append(Edge(v, w, random_action(rng, k)))
    return Arena(k=k, owner=owner, color=color, edges=edges, initial=0,
                 target=frozenset({n - 1}) if target else None)


def random_parity_arena(seed, n: int, colors: int = 3, max_out: int = 2) -> Arena:
    """Counter-free arena (k = 0) for cross-checking the parity solver."""
    return random_arena(seed, n, 0, colors=colors, max_out=max_out)


def random_dag(seed, n: int, k: int, max_out: int = 2) -> Arena:
    """Acyclic arena on 0..n-1 with edges from lower to higher vertices."""
    rng = _rng(seed)
    owner = {v: rng.choice((EVE, ADAM)) for v in range(n)}
    edges = []
    for v in range(n - 1):
        if rng.random() < 0.15 and v > 0:
            continue  # leave an early leaf now and then
        for w in rng.sample(range(v + 1, n), rng.randint(1, min(max_out, n - 1 - v))):
            edges.append(Edge(v, w, random_action(rng, k)))
    return Arena(k=k, owner=owner, color={v: 2 for v in range(n)}, edges=edges, initial=0)


def random_word_graph(seed, W: int, prefix: int = 3, period: int = 3, p_edge: float = 0.5, p_f: float = 0.3):
    """Finite presentation of a width-``W`` word graph with F off every cycle.

    Columns ``0..prefix+period-1`` hold up to ``W`` vertices each; the last
    column links back to column ``prefix``.  Some vertices have no
    successor.  Returns ``(successor map, F)``.
    """
    rng = _rng(seed)
    cols = prefix + period
    layers = [[(c, j) for j in range(rng.randint(1, W))] for c in range(cols)]
    succ = {v: [] for layer in layers for v in layer}
    for c in range(cols):
        nxt = layers[c + 1] if c + 1 < cols else layers[prefix]
        for v in layers[c]:
            if rng.random() < 0.1:
                continue
            succ[v] = [w for w in nxt if rng.random() < p_edge]
    g = nx.DiGraph()
    g.add_nodes_from(succ)
    g.add_edges_from((v, w) for v, ws in succ.items() for w in ws)
    on_cycle = set()
    for comp in nx.strongly_connected_components(g):
        v = next(iter(comp))
        if len(comp) > 1 or g.has_edge(v, v):
            on_cycle |= comp
    F = {v for v in succ if v not in on_cycle and rng.random() < p_f}
    return succ, frozenset(F)


def random_chronological_arena(
    seed,
    W: int,
    depth: int,
    k: int = 1,
    colors=(1, 2, 3),
    max_out: int = 2,
) -> Arena:
    """Layered arena with columns 0..depth, closed by colour-2 self-loops.

    Column 0 is the single initial vertex; each other column has 1..W
    vertices and every vertex before the last column has 1..max_out
    successors in the next column.
    """
    rng = _rng(seed)
    layers = [[(0, 0)]] + [[(c, j) for j in range(rng.randint(1, W))] for c in range(1, depth + 1)]
    owner, color, rank, edges = {}, {}, {}, []
    for c, layer in enumerate(layers):
        for v in layer:
            owner[v] = rng.choice((EVE, ADAM))
            color[v] = rng.choice(colors)
            rank[v] = c
    for c in range(depth):
        nxt = layers[c + 1]
        for v in layers[c]:
            for w in rng.sample(nxt, rng.randint(1, min(max_out, len(nxt)))):
                edges.append(Edge(v, w, random_action(rng, k)))
        for w in nxt:
            if not any(e.dst == w for e in edges):
                edges.append(Edge(rng.choice(layers[c]), w, random_action(rng, k)))
    color[(0, 0)] = min(colors)
    arena = Arena(k=k, owner=owner, color=color, edges=edges, initial=(0, 0), rank=rank)
    return close_horizon(arena)


def random_blocks(seed, k: int, blocks: int = 4, max_len: int = 4) -> list:
    """A word over {e,i,r}^k cut into ``blocks`` non-empty blocks."""
    rng = _rng(seed)
    return [[random_action(rng, k) for _ in range(rng.randint(1, max_len))] for _ in range(blocks)]
