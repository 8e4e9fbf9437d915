"""Arenas with counters, plays, and their values.

An arena is a finite directed graph whose vertices belong either to Eve
(``"E"``) or Adam (``"A"``) and carry a colour.  Every edge carries one
counter action per counter: ``"e"`` (leave unchanged), ``"i"``
(increment) or ``"r"`` (reset).  Edges are identified by their index in
``Arena.edges``; parallel edges are allowed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable, Mapping, Sequence

EVE = "E"
ADAM = "A"

EPS = "e"
INC = "i"
RESET = "r"
SYMBOLS = (EPS, INC, RESET)

#: Value of a counter that went past the saturation cap.
EXCEEDED = math.inf

B_UNTIL_F = "B_until_F"
B_AND_PARITY = "B_and_parity"
PARITY_ONLY = "parity_only"
CONDITION_KINDS = (B_UNTIL_F, B_AND_PARITY, PARITY_ONLY)

Vertex = Hashable
CounterAction = tuple  # tuple of symbols, one per counter


class ArityError(ValueError):
    """Counter vectors of different lengths were combined."""


class PlayError(ValueError):
    """A play is not a path of the arena, or has the wrong shape."""


@dataclass(frozen=True)
class Edge:
    src: Vertex
    dst: Vertex
    act: CounterAction


@dataclass(frozen=True, eq=False)
class Arena:
    """A finite arena.

    ``owner`` and ``color`` are keyed by vertex and define the vertex set
    (in insertion order).  ``target`` is the optional set F and ``rank`` the
    optional chronological level function.
    """

    k: int
    owner: Mapping[Vertex, str]
    color: Mapping[Vertex, int]
    edges: tuple
    initial: Vertex
    target: frozenset | None = None
    rank: Mapping[Vertex, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.target is not None:
            object.__setattr__(self, "target", frozenset(self.target))

    @property
    def vertices(self) -> list:
        return list(self.owner)

    def __len__(self):
        return len(self.owner)

    @cached_property
    def out_edges(self) -> dict:
        out = {v: [] for v in self.owner}
        for idx, e in enumerate(self.edges):
            if e.src in out:
                out[e.src].append(idx)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def in_edges(self) -> dict:
        inc = {v: [] for v in self.owner}
        for idx, e in enumerate(self.edges):
            if e.dst in inc:
                inc[e.dst].append(idx)
        return {v: tuple(es) for v, es in inc.items()}

    def successors(self, v) -> list:
        return [self.edges[i].dst for i in self.out_edges[v]]

    def eve_vertices(self) -> list:
        return [v for v, o in self.owner.items() if o == EVE]

    def is_acyclic(self) -> bool:
        import networkx as nx

        return nx.is_directed_acyclic_graph(self.to_networkx())

    def to_networkx(self):
        import networkx as nx

        g = nx.MultiDiGraph()
        for v in self.owner:
            g.add_node(v, owner=self.owner[v], color=self.color[v])
        for idx, e in enumerate(self.edges):
            g.add_edge(e.src, e.dst, key=idx, act="".join(e.act))
        return g

    def replace(self, **changes) -> "Arena":
        fields = dict(k=self.k, owner=self.owner, color=self.color,
                      edges=self.edges, initial=self.initial,
                      target=self.target, rank=self.rank)
        fields.update(changes)
        return Arena(**fields)

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        data = {
            "k": self.k,
            "initial": vertex_name(self.initial),
            "vertices": [
                {"id": vertex_name(v), "owner": self.owner[v], "color": self.color[v]}
                for v in self.owner
            ],
            "edges": [
                {"from": vertex_name(e.src), "to": vertex_name(e.dst), "act": list(e.act)}
                for e in self.edges
            ],
        }
        if self.target is not None:
            data["target"] = sorted(vertex_name(v) for v in self.target)
        if self.rank is not None:
            data["rank"] = {vertex_name(v): r for v, r in self.rank.items()}
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "Arena":
        owner = {}
        color = {}
        for item in data["vertices"]:
            owner[item["id"]] = item["owner"]
            color[item["id"]] = int(item["color"])
        edges = [Edge(e["from"], e["to"], tuple(e["act"])) for e in data["edges"]]
        target = data.get("target")
        rank = data.get("rank")
        return cls(
            k=int(data["k"]),
            owner=owner,
            color=color,
            edges=edges,
            initial=data["initial"],
            target=None if target is None else frozenset(target),
            rank=None if rank is None else {v: int(r) for v, r in rank.items()},
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=False) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "Arena":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def vertex_name(v) -> str:
    """String id for JSON; product vertices are flattened with ``|``."""
    if isinstance(v, str):
        return v
    if isinstance(v, tuple):
        return "|".join(vertex_name(x) for x in v)
    return str(v)


def relabel(arena: Arena) -> Arena:
    """Copy of ``arena`` whose vertex ids are all strings."""
    names = {v: vertex_name(v) for v in arena.owner}
    if len(set(names.values())) != len(names):
        raise ValueError("vertex names collide after flattening")
    return Arena(
        k=arena.k,
        owner={names[v]: o for v, o in arena.owner.items()},
        color={names[v]: c for v, c in arena.color.items()},
        edges=[Edge(names[e.src], names[e.dst], e.act) for e in arena.edges],
        initial=names[arena.initial],
        target=None if arena.target is None else frozenset(names[v] for v in arena.target),
        rank=None if arena.rank is None else {names[v]: r for v, r in arena.rank.items()},
    )


def validate_arena(arena: Arena) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    if len(arena.owner) != len(set(arena.owner)):
        problems.append("duplicate vertex ids")
    if arena.initial not in arena.owner:
        problems.append(f"initial vertex {arena.initial!r} is not declared")
    for v, o in arena.owner.items():
        if o not in (EVE, ADAM):
            problems.append(f"vertex {v!r}: owner {o!r} is neither E nor A")
        if v not in arena.color:
            problems.append(f"vertex {v!r}: missing color")
        elif not isinstance(arena.color[v], int) or arena.color[v] < 0:
            problems.append(f"vertex {v!r}: color must be a non-negative integer")
    for idx, e in enumerate(arena.edges):
        for end in (e.src, e.dst):
            if end not in arena.owner:
                problems.append(f"edge {idx} ({e.src!r}->{e.dst!r}): endpoint {end!r} undeclared")
        if len(e.act) != arena.k:
            problems.append(
                f"edge {idx} ({e.src!r}->{e.dst!r}): arity {len(e.act)} differs from k={arena.k}"
            )
        bad = [s for s in e.act if s not in SYMBOLS]
        if bad:
            problems.append(f"edge {idx} ({e.src!r}->{e.dst!r}): unknown actions {bad}")
    if arena.target is not None:
        for v in arena.target:
            if v not in arena.owner:
                problems.append(f"target vertex {v!r} undeclared")
    terminal = [v for v, es in arena.out_edges.items() if not es]
    if terminal:
        well_founded = _acyclic_quiet(arena)
        for v in terminal:
            if not well_founded and not (arena.target and v in arena.target):
                problems.append(f"vertex {v!r}: out-degree 0 outside target in a cyclic arena")
    if arena.rank is not None:
        for v in arena.owner:
            if v not in arena.rank:
                problems.append(f"vertex {v!r}: missing rank")
        last = max(arena.rank.values(), default=0)
        for idx, e in enumerate(arena.edges):
            if e.src in arena.rank and e.dst in arena.rank:
                # edges staying on the last rank close a finite horizon
                horizon_loop = arena.rank[e.src] == arena.rank[e.dst] == last
                if arena.rank[e.dst] != arena.rank[e.src] + 1 and not horizon_loop:
                    problems.append(
                        f"edge {idx} ({e.src!r}->{e.dst!r}): chronology broken, "
                        f"rank {arena.rank[e.src]} -> {arena.rank[e.dst]}"
                    )
    return problems


def _acyclic_quiet(arena: Arena) -> bool:
    try:
        return arena.is_acyclic()
    except Exception:
        return False


# -- counters ---------------------------------------------------------------


@dataclass(frozen=True)
class CounterValuation:
    """Counter values saturating at ``cap``; ``EXCEEDED`` marks overflow."""

    values: tuple
    cap: int

    @classmethod
    def zero(cls, k: int, cap: int) -> "CounterValuation":
        return cls((0,) * k, cap)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        for x in self.values:
            if x != EXCEEDED and not 0 <= x <= self.cap:
                raise ValueError(f"counter value {x} outside 0..{self.cap}")

    @property
    def exceeded(self) -> bool:
        return any(x == EXCEEDED for x in self.values)


def step_values(values: tuple, act: Sequence[str], cap: float = EXCEEDED) -> tuple:
    """Apply one action vector to raw counter values (no arity check)."""
    out = []
    for x, a in zip(values, act):
        if a == RESET:
            out.append(0)
        elif a == INC:
            x = x + 1
            out.append(EXCEEDED if x > cap else x)
        else:
            out.append(x)
    return tuple(out)


def apply_action(valuation: CounterValuation, action: Sequence[str]) -> CounterValuation:
    if len(action) != len(valuation.values):
        raise ArityError(f"action of arity {len(action)} on {len(valuation.values)} counters")
    return CounterValuation(step_values(valuation.values, action, valuation.cap), valuation.cap)


# -- plays ------------------------------------------------------------------


@dataclass(frozen=True)
class Play:
    """A finite play (``cycle`` empty) or a lasso ``prefix . cycle^omega``.

    Both parts are sequences of edge indices.
    """

    prefix: tuple = ()
    cycle: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))

    @property
    def is_lasso(self) -> bool:
        return bool(self.cycle)


def _check_path(arena: Arena, edges: Sequence[int]) -> None:
    for a, b in zip(edges, edges[1:]):
        if arena.edges[a].dst != arena.edges[b].src:
            raise PlayError(f"edges {a} and {b} are not adjacent")


def check_play(arena: Arena, play: Play) -> None:
    _check_path(arena, play.prefix + play.cycle)
    if play.cycle:
        if arena.edges[play.cycle[-1]].dst != arena.edges[play.cycle[0]].src:
            raise PlayError("lasso cycle is not closed")


def word_value(word: Iterable[Sequence[str]], k: int | None = None) -> int:
    """Largest counter value reached along a finite action word from zero."""
    values = None
    best = 0
    for act in word:
        if values is None:
            values = (0,) * len(act)
        elif len(act) != len(values):
            raise ArityError("action word has mixed arities")
        values = step_values(values, act)
        if values:
            best = max(best, max(values))
    return best


def play_value(arena: Arena, play: Play):
    """Supremum of the counter values along ``play`` (``math.inf`` if unbounded)."""
    check_play(arena, play)
    acts = [arena.edges[i].act for i in play.prefix]
    if not play.cycle:
        return word_value(acts)
    cyc = [arena.edges[i].act for i in play.cycle]
    for c in range(arena.k):
        col = [a[c] for a in cyc]
        if INC in col and RESET not in col:
            return math.inf
    # after one pass the valuation at the cycle entry is periodic
    return word_value(acts + cyc + cyc)


def parity_of_lasso(arena: Arena, play: Play) -> str:
    """Winner (``EVE`` or ``ADAM``) of the parity condition on a lasso play."""
    if not play.cycle:
        raise PlayError("parity is only defined on lasso plays")
    check_play(arena, play)
    top = max(arena.color[arena.edges[i].src] for i in play.cycle)
    return EVE if top % 2 == 0 else ADAM


def summarize(word: Sequence[Sequence[str]], k: int | None = None) -> tuple:
    """Per counter: ``r`` if reset somewhere, else ``i`` if incremented, else ``e``."""
    if not word:
        if k is None:
            raise ArityError("cannot infer arity of an empty word; pass k")
        return (EPS,) * k
    n = len(word[0]) if k is None else k
    out = []
    for c in range(n):
        col = set()
        for act in word:
            if len(act) != n:
                raise ArityError("action word has mixed arities")
            col.add(act[c])
        out.append(RESET if RESET in col else INC if INC in col else EPS)
    return tuple(out)


# -- conditions -------------------------------------------------------------


@dataclass(frozen=True)
class ConditionSpec:
    """Objective in force: ``kind`` with bound ``bound`` and forbidden set."""

    kind: str
    bound: int | None = None
    forbidden: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kind not in CONDITION_KINDS:
            raise ValueError(f"unknown condition kind {self.kind!r}")
        object.__setattr__(self, "forbidden", frozenset(self.forbidden))

    def with_bound(self, n: int) -> "ConditionSpec":
        return ConditionSpec(self.kind, n, self.forbidden)

    def check(self, arena: Arena) -> None:
        if self.kind == B_UNTIL_F and not arena.target:
            raise ValueError("B_until_F needs a target set F")
        missing = [v for v in self.forbidden if v not in arena.owner]
        if missing:
            raise ValueError(f"forbidden vertices not in arena: {missing}")
