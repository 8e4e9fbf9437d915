"""Colour-removal transformations and the rank fixpoint over word arenas."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Mapping

import networkx as nx

from .arena import EPS, EVE, INC, RESET, Arena, Edge, vertex_name
from .machines import ConfigGraph, MemoryStructure, StrategyMachine

ATTRACTOR = "A"
SAFE = "S"
CHOICE = "choice"
SEEN = "seen"
UNSEEN = "unseen"


class PreconditionError(ValueError):
    """Input does not satisfy the transformation's precondition."""


# -- rank fixpoint ----------------------------------------------------------


@dataclass(frozen=True)
class RankAssignment:
    rank: dict
    chain: list
    stabilized: int  # least j with chain[j] covering every vertex

    def to_json(self) -> dict:
        return {
            "rank": {vertex_name(v): r for v, r in self.rank.items()},
            "chain": [sorted(vertex_name(v) for v in x) for x in self.chain],
            "stabilized": self.stabilized,
        }


def _successors(graph) -> dict:
    if isinstance(graph, Arena):
        return {v: list(dict.fromkeys(graph.successors(v))) for v in graph.owner}
    succ = {v: list(ws) for v, ws in graph.items()}
    for ws in list(succ.values()):
        for w in ws:
            succ.setdefault(w, [])
    return succ


def _predecessors(succ: dict) -> dict:
    pred = {v: [] for v in succ}
    for v, ws in succ.items():
        for w in ws:
            pred[w].append(v)
    return pred


def _avoid_until(succ, pred, bad, stop) -> frozenset:
    """Vertices all of whose paths avoid ``bad`` until they first enter ``stop``."""
    hit = {v for v in bad if v not in stop}
    queue = deque(hit)
    while queue:
        w = queue.popleft()
        for u in pred[w]:
            if u not in stop and u not in hit:
                hit.add(u)
                queue.append(u)
    return frozenset(v for v in succ if v not in hit)


def _finite_or_reach(succ, pred, goal) -> frozenset:
    """Vertices all of whose paths are finite or visit ``goal``."""
    rest = [v for v in succ if v not in goal]
    g = nx.DiGraph()
    g.add_nodes_from(rest)
    g.add_edges_from((v, w) for v in rest for w in succ[v] if w not in goal)
    looping = set()
    for comp in nx.strongly_connected_components(g):
        v = next(iter(comp))
        if len(comp) > 1 or g.has_edge(v, v):
            looping |= comp
    queue = deque(looping)
    while queue:
        w = queue.popleft()
        for u in pred[w]:
            if u not in goal and u not in looping:
                looping.add(u)
                queue.append(u)
    return frozenset(v for v in succ if v not in looping)


def word_width(arena: Arena) -> int:
    """Largest number of vertices sharing a chronological rank."""
    if arena.rank is None:
        raise PreconditionError("arena has no rank function")
    counts = {}
    for r in arena.rank.values():
        counts[r] = counts.get(r, 0) + 1
    return max(counts.values(), default=0)


def compute_ranks(graph, F, width: int | None = None) -> RankAssignment:
    """Alternate the avoid-F and must-reach fixpoints until every vertex is ranked.

    ``graph`` is an :class:`Arena` or a successor map.  No cycle may pass
    through ``F``.  With ``width`` given, the chain must cover the graph
    within ``2 * width`` steps.
    """
    succ = _successors(graph)
    pred = _predecessors(succ)
    F = frozenset(F)
    g = nx.DiGraph()
    g.add_nodes_from(succ)
    g.add_edges_from((v, w) for v, ws in succ.items() for w in ws)
    for comp in nx.strongly_connected_components(g):
        v = next(iter(comp))
        if (len(comp) > 1 or g.has_edge(v, v)) and comp & F:
            raise PreconditionError(f"a cycle passes through F vertex {sorted(map(str, comp & F))[0]}")
    everything = frozenset(succ)
    chain = [frozenset()]
    while chain[-1] != everything:
        odd = _avoid_until(succ, pred, F, chain[-1])
        even = _finite_or_reach(succ, pred, odd)
        if even == chain[-1]:
            raise PreconditionError("rank chain stabilised without covering the graph")
        chain += [odd, even]
    stabilized = next(j for j, x in enumerate(chain) if x == everything)
    chain = chain[: stabilized + 1]
    rank = {}
    for j, x in enumerate(chain):
        for v in x:
            rank.setdefault(v, j)
    if width is not None and stabilized > 2 * width:
        raise AssertionError(f"chain needed {stabilized} steps, more than 2*{width}")
    return RankAssignment(rank, chain, stabilized)


# -- even case --------------------------------------------------------------


def remove_even_min_color(arena: Arena) -> Arena:
    """Replace colour 0 by a Safe/Attractor mode flag and one more counter.

    Vertices are ``(v, "A")``, ``(v, "S")`` and Eve's choice vertices
    ``(v, "choice")``.  The new counter (last position) is incremented when
    Safe mode meets colour 1 and reset when it meets a colour above 1.
    """
    colors = set(arena.color.values())
    if min(colors) != 0:
        raise PreconditionError("least colour is not 0")
    owner, color, edges = {}, {}, []
    for v in arena.owner:
        for mode in (ATTRACTOR, SAFE):
            owner[v, mode] = arena.owner[v]
        color[v, ATTRACTOR] = 1
        color[v, SAFE] = 2 if arena.color[v] == 0 else arena.color[v]
        owner[v, CHOICE] = EVE
        color[v, CHOICE] = 1
    for e in arena.edges:
        edges.append(Edge((e.src, ATTRACTOR), (e.dst, CHOICE), e.act + (EPS,)))
        c = arena.color[e.dst]
        if c == 0:
            edges.append(Edge((e.src, SAFE), (e.dst, SAFE), e.act + (EPS,)))
        elif c == 1:
            edges.append(Edge((e.src, SAFE), (e.dst, ATTRACTOR), e.act + (INC,)))
        else:
            edges.append(Edge((e.src, SAFE), (e.dst, SAFE), e.act + (RESET,)))
    eps = (EPS,) * (arena.k + 1)
    for v in arena.owner:
        edges.append(Edge((v, CHOICE), (v, ATTRACTOR), eps))
        edges.append(Edge((v, CHOICE), (v, SAFE), eps))
    target = None
    if arena.target is not None:
        target = frozenset((v, m) for v in arena.target for m in (ATTRACTOR, SAFE))
    return Arena(k=arena.k + 1, owner=owner, color=color, edges=edges,
                 initial=(arena.initial, CHOICE), target=target)


# -- odd case ---------------------------------------------------------------


@dataclass(frozen=True)
class SliceAssignment:
    slices: tuple
    depth: dict  # configuration -> steps to the first colour > 1

    def to_json(self) -> dict:
        return {
            "slices": list(self.slices),
            "depth": {vertex_name((v, str(m), ",".join(map(str, vals)))): d
                      for (v, m, vals), d in self.depth.items()},
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")


def compute_slices(restricted: ConfigGraph, rank: Mapping) -> SliceAssignment:
    """Slices from a strategy-restricted configuration graph with chronological ranks.

    ``depth`` counts the steps from a configuration to the first colour
    above 1 along its longest such path.  Slice ``k+1`` is the furthest
    column reached that way from the configurations sitting at slice ``k``,
    and at least one column further on.
    """
    n = len(restricted.nodes)
    low = [i for i in range(n) if restricted.color[i] <= 1]
    g = nx.DiGraph()
    g.add_nodes_from(low)
    lowset = set(low)
    for i in low:
        for _, j in restricted.succ[i]:
            if j in lowset:
                g.add_edge(i, j)
    if not nx.is_directed_acyclic_graph(g):
        cycle = nx.find_cycle(g)
        raise PreconditionError(f"colours <= 1 admit a cycle through configuration {restricted.nodes[cycle[0][0]]}")
    depth = [0] * n
    for i in reversed(list(nx.topological_sort(g))):
        outs = [j for _, j in restricted.succ[i]]
        depth[i] = 1 + max((depth[j] for j in outs), default=-1) if outs else 0
    col = [rank[v] for v, _, _ in restricted.nodes]
    by_col = {}
    for i, c in enumerate(col):
        by_col.setdefault(c, []).append(i)
    slices = [col[0] + depth[0]]
    while slices[-1] in by_col:
        s = slices[-1]
        slices.append(max(s + 1, max(s + depth[i] for i in by_col[s])))
    if slices[-1] not in by_col:
        slices.pop()
    return SliceAssignment(tuple(slices), {restricted.nodes[i]: depth[i] for i in range(n)})


def check_slices(restricted: ConfigGraph, rank: Mapping, slices) -> list:
    """Configurations at a slice from which a path stays at colours <= 1 past the next slice."""
    slices = list(slices)
    nxt = dict(zip(slices, slices[1:]))
    col = [rank[v] for v, _, _ in restricted.nodes]
    bad = []
    for i, c in enumerate(col):
        if c not in nxt:
            continue
        limit = nxt[c]
        stack = [i]
        seen = {i}
        while stack:
            j = stack.pop()
            if restricted.color[j] > 1:
                continue
            if col[j] >= limit:
                bad.append(restricted.nodes[i])
                break
            for _, w in restricted.succ[j]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    return bad


def _flag_after(arena: Arena, slices, v, flag, w) -> str:
    base = arena.color[v] > 1 if arena.rank[v] in slices else flag == SEEN
    return SEEN if base or arena.color[w] > 1 else UNSEEN


def horizon(arena: Arena) -> int:
    return max(arena.rank.values())


def _horizon_loop(arena: Arena, e: Edge, last: int) -> bool:
    # finite presentations end in loops on the last column
    return arena.rank[e.src] == arena.rank[e.dst] == last


def close_horizon(arena: Arena, color: int = 2) -> Arena:
    """Give each last-column vertex an epsilon self-loop and colour ``color``."""
    last = horizon(arena)
    cols = dict(arena.color)
    edges = list(arena.edges)
    for v in arena.owner:
        if arena.rank[v] == last:
            cols[v] = color
            edges.append(Edge(v, v, (EPS,) * arena.k))
    return arena.replace(color=cols, edges=edges)


def remove_odd_min_color(arena: Arena, slices: SliceAssignment | tuple):
    """Product with a seen/unseen flag; colour 1 becomes 2.

    ``arena`` must be chronological, except for edges that stay on its
    last column (see :func:`close_horizon`).

    The flag records whether a colour above 1 was met since the last slice
    (the slice vertex itself counts for the next window).  Returns the new
    arena and the forbidden set: flag ``unseen`` at a slice column.
    """
    if arena.rank is None:
        raise PreconditionError("odd-colour removal needs a chronological rank function")
    if min(arena.color.values()) != 1:
        raise PreconditionError("least colour is not 1")
    last = horizon(arena)
    bad = [e for e in arena.edges
           if arena.rank[e.dst] != arena.rank[e.src] + 1 and not _horizon_loop(arena, e, last)]
    if bad:
        raise PreconditionError(f"arena is not chronological at edge {bad[0].src!r}->{bad[0].dst!r}")
    cuts = frozenset(slices.slices if isinstance(slices, SliceAssignment) else slices)
    owner, color, rank = {}, {}, {}
    for v in arena.owner:
        for flag in (UNSEEN, SEEN):
            owner[v, flag] = arena.owner[v]
            color[v, flag] = 2 if arena.color[v] == 1 else arena.color[v]
            rank[v, flag] = arena.rank[v]
    edges = []
    for e in arena.edges:
        for flag in (UNSEEN, SEEN):
            edges.append(Edge((e.src, flag), (e.dst, _flag_after(arena, cuts, e.src, flag, e.dst)), e.act))
    init_flag = SEEN if arena.color[arena.initial] > 1 else UNSEEN
    forbidden = frozenset((v, UNSEEN) for v in arena.owner if arena.rank[v] in cuts)
    target = None
    if arena.target is not None:
        target = frozenset((v, f) for v in arena.target for f in (UNSEEN, SEEN))
    out = Arena(k=arena.k, owner=owner, color=color, edges=edges,
                initial=(arena.initial, init_flag), target=target, rank=rank)
    return out, forbidden


def mimic_on_flag_product(product: Arena, machine: StrategyMachine) -> StrategyMachine:
    """Play ``machine`` (a strategy on the original arena) inside the flag product."""
    mem = machine.memory
    update = {}
    for pidx, _ in enumerate(product.edges):
        for m in mem.states:
            update[m, pidx] = mem.update[m, pidx // 2]
    moves = {}
    for (v, m), idx in machine.moves.items():
        for j, flag in enumerate((UNSEEN, SEEN)):
            moves[(v, flag), m] = 2 * idx + j
    return StrategyMachine(MemoryStructure(mem.states, mem.initial, update), moves)


def lift_odd_strategy(arena: Arena, slices, product_machine: StrategyMachine) -> StrategyMachine:
    """Strategy on ``arena`` remembering the flag next to the product machine's state."""
    cuts = frozenset(slices.slices if isinstance(slices, SliceAssignment) else slices)
    pm = product_machine.memory
    init_flag = SEEN if arena.color[arena.initial] > 1 else UNSEEN
    states = tuple((f, m) for f in (UNSEEN, SEEN) for m in pm.states)
    update = {}
    for idx, e in enumerate(arena.edges):
        for f, m in states:
            j = 0 if f == UNSEEN else 1
            update[(f, m), idx] = (_flag_after(arena, cuts, e.src, f, e.dst), pm.update[m, 2 * idx + j])
    moves = {}
    for ((v, f), m), pidx in product_machine.moves.items():
        moves[v, (f, m)] = pidx // 2
    return StrategyMachine(MemoryStructure(states, (init_flag, pm.initial), update), moves)
