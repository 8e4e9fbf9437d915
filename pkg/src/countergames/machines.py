"""Finite-memory strategies for Eve and their worst-case evaluation.

A strategy machine is a memory structure (states, initial state, and an
update driven by the edges taken) together with a next-move table.  Fixing
a machine turns the arena into a one-player graph for Adam; with counter
values tracked up to a cap this becomes the configuration graph on which
every evaluation below runs.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Mapping

import networkx as nx

from .arena import (
    EVE,
    EXCEEDED,
    Arena,
    Edge,
    Play,
    step_values,
    vertex_name,
)


class MachineError(ValueError):
    """A memory structure or machine does not fit the arena."""


@dataclass(frozen=True, eq=False)
class MemoryStructure:
    states: tuple
    initial: Hashable
    update: Mapping  # (state, edge index) -> state

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self):
        return len(self.states)

    def next(self, state, edge: int):
        return self.update[state, edge]

    def missing(self, arena: Arena) -> list:
        return [
            (m, idx)
            for m in self.states
            for idx in range(len(arena.edges))
            if (m, idx) not in self.update
        ]


@dataclass(frozen=True, eq=False)
class StrategyMachine:
    """Memory structure plus next-move table ``moves[(vertex, state)] -> edge``.

    Entries for (vertex, state) pairs that no consistent play reaches may be
    absent; evaluation treats reaching one as a defect of the machine.
    """

    memory: MemoryStructure
    moves: Mapping  # (eve vertex, state) -> edge index

    @property
    def states(self) -> tuple:
        return self.memory.states

    @property
    def size(self) -> int:
        return len(self.memory.states)

    def move(self, v, m):
        return self.moves.get((v, m))

    # -- JSON ---------------------------------------------------------------

    def to_json(self, arena: Arena) -> dict:
        parallel = _parallel_edges(arena)
        update = []
        for (m, idx), nxt in sorted(self.memory.update.items(), key=lambda kv: (_key(kv[0][0]), kv[0][1])):
            e = arena.edges[idx]
            item = {"state": str(m), "from": vertex_name(e.src), "to": vertex_name(e.dst), "next": str(nxt)}
            if idx in parallel:
                item["edge"] = idx
            update.append(item)
        moves = []
        for (v, m), idx in sorted(self.moves.items(), key=lambda kv: (vertex_name(kv[0][0]), _key(kv[0][1]))):
            e = arena.edges[idx]
            item = {"vertex": vertex_name(v), "state": str(m), "to": vertex_name(e.dst)}
            if idx in parallel:
                item["edge"] = idx
            moves.append(item)
        return {
            "states": [str(m) for m in self.memory.states],
            "initial": str(self.memory.initial),
            "update": update,
            "moves": moves,
        }

    @classmethod
    def from_json(cls, data: Mapping, arena: Arena) -> "StrategyMachine":
        """Read the machine file format.

        Entries are keyed by edge endpoints; an optional ``"edge"`` index
        disambiguates parallel edges.  Missing update entries keep the state.
        """
        names = {vertex_name(v): v for v in arena.owner}
        by_ends = {}
        for idx, e in enumerate(arena.edges):
            by_ends.setdefault((vertex_name(e.src), vertex_name(e.dst)), idx)
        states = tuple(data["states"])

        def edge_of(item, src_key):
            if "edge" in item:
                return int(item["edge"])
            try:
                return by_ends[item[src_key], item["to"]]
            except KeyError:
                raise MachineError(f"no edge {item[src_key]!r} -> {item['to']!r}") from None

        update = {(m, idx): m for m in states for idx in range(len(arena.edges))}
        for item in data.get("update", []):
            update[item["state"], edge_of(item, "from")] = item["next"]
        moves = {}
        for item in data.get("moves", []):
            v = names[item["vertex"]]
            moves[v, item["state"]] = edge_of(item, "vertex")
        return cls(MemoryStructure(states, data["initial"], update), moves)

    def save(self, path, arena: Arena) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(arena), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path, arena: Arena) -> "StrategyMachine":
        with open(path) as fh:
            return cls.from_json(json.load(fh), arena)


def _key(x):
    return (0, x) if isinstance(x, int) else (1, str(x))


def _parallel_edges(arena: Arena) -> set:
    seen = {}
    for idx, e in enumerate(arena.edges):
        seen.setdefault((e.src, e.dst), []).append(idx)
    return {i for idxs in seen.values() if len(idxs) > 1 for i in idxs}


def build_machine(
    arena: Arena,
    states,
    initial,
    update: Callable[[Hashable, int, Edge], Hashable],
    move: Callable[[Hashable, Hashable], int | None],
) -> StrategyMachine:
    """Tabulate a machine from an update rule and a move rule."""
    states = tuple(states)
    table = {(m, idx): update(m, idx, e) for m in states for idx, e in enumerate(arena.edges)}
    moves = {}
    for v in arena.eve_vertices():
        if not arena.out_edges[v]:
            continue
        for m in states:
            idx = move(v, m)
            if idx is not None:
                moves[v, m] = idx
    return StrategyMachine(MemoryStructure(states, initial, table), moves)


def positional(arena: Arena, choice: Mapping) -> StrategyMachine:
    """One-state machine from a map ``eve vertex -> edge index``."""
    return build_machine(arena, (0,), 0, lambda m, idx, e: 0, lambda v, m: choice.get(v))


def validate_machine(arena: Arena, machine: StrategyMachine) -> list[str]:
    problems = []
    mem = machine.memory
    if mem.initial not in mem.states:
        problems.append(f"initial state {mem.initial!r} not among states")
    states = set(mem.states)
    for m, idx in mem.missing(arena):
        problems.append(f"update undefined for state {m!r} on edge {idx}")
    for (m, idx), nxt in mem.update.items():
        if nxt not in states:
            problems.append(f"update ({m!r}, {idx}) targets unknown state {nxt!r}")
    for (v, m), idx in machine.moves.items():
        if v not in arena.owner or arena.owner[v] != EVE:
            problems.append(f"move defined at non-Eve vertex {v!r}")
        elif idx not in arena.out_edges[v]:
            problems.append(f"move ({v!r}, {m!r}) -> edge {idx} is not an out-edge of {v!r}")
    return problems


# -- product arena ----------------------------------------------------------


def product_with_memory(arena: Arena, mem: MemoryStructure) -> Arena:
    """The expanded arena over vertex/state pairs.

    Edge ``idx * len(mem) + j`` of the product is the copy of arena edge
    ``idx`` leaving memory state ``mem.states[j]``.
    """
    missing = mem.missing(arena)
    if missing:
        raise MachineError(f"update function is partial, e.g. {missing[0]}")
    owner, color = {}, {}
    for v in arena.owner:
        for m in mem.states:
            owner[v, m] = arena.owner[v]
            color[v, m] = arena.color[v]
    edges = []
    for idx, e in enumerate(arena.edges):
        for m in mem.states:
            edges.append(Edge((e.src, m), (e.dst, mem.update[m, idx]), e.act))
    return Arena(
        k=arena.k,
        owner=owner,
        color=color,
        edges=edges,
        initial=(arena.initial, mem.initial),
        target=None if arena.target is None else frozenset((v, m) for v in arena.target for m in mem.states),
        rank=None if arena.rank is None else {(v, m): arena.rank[v] for v in arena.owner for m in mem.states},
    )


def lift_positional(arena: Arena, mem: MemoryStructure, choice: Mapping) -> StrategyMachine:
    """Machine on ``arena`` from a positional strategy on its product with ``mem``."""
    width = len(mem.states)
    moves = {(v, m): pidx // width for (v, m), pidx in choice.items()}
    return StrategyMachine(mem, moves)


def project_positional(arena: Arena, machine: StrategyMachine) -> dict:
    """Positional strategy on the product matching ``machine`` (inverse of lifting)."""
    pos = {m: j for j, m in enumerate(machine.states)}
    width = len(pos)
    return {(v, m): idx * width + pos[m] for (v, m), idx in machine.moves.items()}


# -- configuration graph ----------------------------------------------------


@dataclass(eq=False)
class ConfigGraph:
    """Reachable configurations ``(vertex, state, counter values)``.

    ``succ[i]`` lists ``(edge index, node index)`` pairs.  Nodes whose
    values went past ``cap`` hold ``EXCEEDED`` and are not expanded; neither
    are nodes in ``stopped`` (target vertices of a stopped game) nor Eve
    nodes with an undefined move (listed in ``undefined``).
    """

    nodes: list
    index: dict
    succ: list
    cap: int
    color: list
    stopped: set
    undefined: set

    @property
    def initial(self) -> int:
        return 0

    def __len__(self):
        return len(self.nodes)

    def exceeded_nodes(self) -> list:
        return [i for i, (_, _, vals) in enumerate(self.nodes) if any(x == EXCEEDED for x in vals)]

    def max_value(self) -> int:
        best = 0
        for _, _, vals in self.nodes:
            if vals:
                best = max(best, max(vals))
        return best

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.nodes)))
        for i, out in enumerate(self.succ):
            for idx, j in out:
                g.add_edge(i, j, edge=idx)
        return g

    def path_to(self, target: int) -> list:
        """Edge indices of a shortest path from the initial node."""
        parent = {0: None}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            if i == target:
                break
            for idx, j in self.succ[i]:
                if j not in parent:
                    parent[j] = (i, idx)
                    queue.append(j)
        path = []
        node = target
        while parent[node] is not None:
            node, idx = parent[node]
            path.append(idx)
        return path[::-1]

    def cycle_from(self, start: int, allowed=None) -> list:
        """Edge indices of a cycle through ``start`` staying in ``allowed``."""
        parent = {}
        queue = deque([start])
        seen = {start}
        while queue:
            i = queue.popleft()
            for idx, j in self.succ[i]:
                if allowed is not None and j not in allowed:
                    continue
                if j == start:
                    path = [idx]
                    node = i
                    while node != start:
                        node, e = parent[node]
                        path.append(e)
                    return path[::-1]
                if j not in seen:
                    seen.add(j)
                    parent[j] = (i, idx)
                    queue.append(j)
        raise ValueError("no cycle through node")


def restrict_by_strategy(
    arena: Arena,
    machine: StrategyMachine,
    cap: int,
    stop_at=None,
) -> ConfigGraph:
    """Configurations reachable when Eve follows ``machine`` and Adam is free."""
    mem = machine.memory
    stop_at = frozenset(stop_at or ())
    start = (arena.initial, mem.initial, (0,) * arena.k)
    nodes = [start]
    index = {start: 0}
    succ = []
    stopped, undefined = set(), set()
    i = 0
    while i < len(nodes):
        v, m, vals = nodes[i]
        out = []
        if any(x == EXCEEDED for x in vals):
            pass
        elif v in stop_at:
            stopped.add(i)
        else:
            if arena.owner[v] == EVE:
                idx = machine.moves.get((v, m))
                if idx is None:
                    undefined.add(i)
                    choices = ()
                else:
                    choices = (idx,)
            else:
                choices = arena.out_edges[v]
            for idx in choices:
                e = arena.edges[idx]
                node = (e.dst, mem.update[m, idx], step_values(vals, e.act, cap))
                j = index.get(node)
                if j is None:
                    j = index[node] = len(nodes)
                    nodes.append(node)
                out.append((idx, j))
        succ.append(out)
        i += 1
    color = [arena.color[v] for v, _, _ in nodes]
    return ConfigGraph(nodes, index, succ, cap, color, stopped, undefined)


@dataclass(frozen=True)
class Witness:
    """Why a strategy gets value infinity: a play and a short reason."""

    reason: str
    play: Play


def evaluate_strategy_reachability(
    arena: Arena,
    machine: StrategyMachine,
    n_max: int,
    return_witness: bool = False,
):
    """Worst-case value of ``machine`` for B Until F; the game stops at F.

    Returns the least N <= ``n_max`` such that every consistent play reaches
    F with all counters at most N, or ``math.inf``.
    """
    if not arena.target:
        raise ValueError("arena has no target set")
    cg = restrict_by_strategy(arena, machine, n_max, stop_at=arena.target)
    value, witness = _reachability_verdict(cg)
    return (value, witness) if return_witness else value


def _reachability_verdict(cg: ConfigGraph):
    over = cg.exceeded_nodes()
    if over:
        return math.inf, Witness("counter exceeds cap", Play(cg.path_to(over[0])))
    for i, out in enumerate(cg.succ):
        if not out and i not in cg.stopped:
            return math.inf, Witness("play blocked before F", Play(cg.path_to(i)))
    g = cg.to_networkx()
    try:
        cycle = nx.find_cycle(g, source=0)
    except nx.NetworkXNoCycle:
        return cg.max_value(), None
    head = cycle[0][0]
    return math.inf, Witness("play avoids F forever", Play(cg.path_to(head), cg.cycle_from(head)))


def evaluate_strategy_parity(
    arena: Arena,
    machine: StrategyMachine,
    n_max: int,
    return_witness: bool = False,
):
    """Worst-case value of ``machine`` for B intersected with parity.

    Infinity when some consistent play exceeds ``n_max`` or has an odd
    maximal colour on its cycle.
    """
    cg = restrict_by_strategy(arena, machine, n_max)
    value, witness = _parity_verdict(cg)
    return (value, witness) if return_witness else value


def odd_cycle_node(cg: ConfigGraph):
    """A node lying on a reachable cycle whose maximal colour is odd, or None."""
    g = cg.to_networkx()
    for c in sorted({col for col in cg.color if col % 2 == 1}):
        keep = [i for i in g if cg.color[i] <= c]
        sub = g.subgraph(keep)
        for comp in nx.strongly_connected_components(sub):
            hits = [i for i in comp if cg.color[i] == c]
            if not hits:
                continue
            if len(comp) > 1 or sub.has_edge(hits[0], hits[0]):
                return hits[0], comp
    return None


def _parity_verdict(cg: ConfigGraph):
    over = cg.exceeded_nodes()
    if over:
        return math.inf, Witness("counter exceeds cap", Play(cg.path_to(over[0])))
    for i, out in enumerate(cg.succ):
        if not out:
            return math.inf, Witness("play blocked", Play(cg.path_to(i)))
    found = odd_cycle_node(cg)
    if found is not None:
        node, comp = found
        return math.inf, Witness("odd maximal colour on a cycle",
                                 Play(cg.path_to(node), cg.cycle_from(node, comp)))
    return cg.max_value(), None
