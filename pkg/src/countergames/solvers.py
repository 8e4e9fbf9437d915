"""Exact solvers for games with counters on finite arenas."""
from __future__ import annotations

import itertools
import sys
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from .arena import (
    ADAM,
    B_UNTIL_F,
    EPS,
    EVE,
    EXCEEDED,
    PARITY_ONLY,
    Arena,
    ConditionSpec,
    Edge,
    step_values,
)
from .machines import (
    MemoryStructure,
    StrategyMachine,
    evaluate_strategy_parity,
    evaluate_strategy_reachability,
    odd_cycle_node,
    restrict_by_strategy,
)

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

#: Sink of the capped configuration arena, reached when a counter overflows.
BOTTOM = "⊥"


def opponent(player: str) -> str:
    return ADAM if player == EVE else EVE


class NoStrategyError(ValueError):
    """Eve does not win within the requested bound."""


class SearchBudgetExceeded(RuntimeError):
    """The synthesis search gave up before deciding existence."""


@dataclass
class SolveResult:
    """Winner from the initial vertex plus regions and positional witnesses.

    Strategies map a vertex of ``arena`` (the solved arena, e.g. the capped
    configuration arena) to an edge index of that arena.
    """

    winner: str
    win_eve: frozenset
    win_adam: frozenset
    strategy_eve: dict
    strategy_adam: dict
    arena: Arena
    value: int | None = None
    bound: int | None = None
    origin: list | None = field(default=None, repr=False)

    def check_determinacy(self) -> None:
        assert not (self.win_eve & self.win_adam), "winning regions overlap"
        assert self.win_eve | self.win_adam == frozenset(self.arena.owner), "regions do not cover V"


# -- attractors -------------------------------------------------------------


def attractor(arena: Arena, target, player: str, within=None):
    """Vertices from which ``player`` forces a visit to ``target``.

    Restricted to the subgame ``within`` (all vertices by default).  Returns
    the attractor and an attractor strategy for ``player``'s vertices.
    """
    within = set(arena.owner) if within is None else within
    attr = {t for t in target if t in within}
    strategy = {}
    count = {}
    for v in within:
        count[v] = sum(1 for idx in arena.out_edges[v] if arena.edges[idx].dst in within)
    queue = deque(attr)
    while queue:
        w = queue.popleft()
        for idx in arena.in_edges[w]:
            u = arena.edges[idx].src
            if u not in within or u in attr:
                continue
            if arena.owner[u] == player:
                attr.add(u)
                strategy[u] = idx
                queue.append(u)
            else:
                count[u] -= 1
                if count[u] == 0:
                    attr.add(u)
                    queue.append(u)
    return attr, strategy


def _stay_inside(arena: Arena, v, region):
    for idx in arena.out_edges[v]:
        if arena.edges[idx].dst in region:
            return idx
    return None


def _fill(arena: Arena, player: str, region, strategy: dict) -> dict:
    """Complete ``strategy`` on ``player``'s vertices of ``region`` with edges staying inside."""
    out = dict(strategy)
    for v in region:
        if arena.owner[v] == player and v not in out:
            idx = _stay_inside(arena, v, region)
            if idx is None and arena.out_edges[v]:
                idx = arena.out_edges[v][0]
            if idx is not None:
                out[v] = idx
    return out


def solve_reachability_game(arena: Arena, target) -> SolveResult:
    """Eve wins iff she can force a visit to ``target``."""
    win, strat = attractor(arena, target, EVE)
    rest = set(arena.owner) - win
    res = SolveResult(
        winner=EVE if arena.initial in win else ADAM,
        win_eve=frozenset(win),
        win_adam=frozenset(rest),
        strategy_eve=_fill(arena, EVE, win, strat),
        strategy_adam=_fill(arena, ADAM, rest, {}),
        arena=arena,
    )
    res.check_determinacy()
    return res


def solve_safety_game(arena: Arena, forbidden) -> SolveResult:
    """Eve wins iff she can avoid ``forbidden`` forever."""
    lose, strat = attractor(arena, forbidden, ADAM)
    win = set(arena.owner) - lose
    res = SolveResult(
        winner=EVE if arena.initial in win else ADAM,
        win_eve=frozenset(win),
        win_adam=frozenset(lose),
        strategy_eve=_fill(arena, EVE, win, {}),
        strategy_adam=_fill(arena, ADAM, lose, strat),
        arena=arena,
    )
    res.check_determinacy()
    return res


# -- parity -----------------------------------------------------------------


def _zielonka(arena: Arena, region: set):
    if not region:
        return {EVE: set(), ADAM: set()}, {EVE: {}, ADAM: {}}
    top = max(arena.color[v] for v in region)
    p = EVE if top % 2 == 0 else ADAM
    q = opponent(p)
    heads = {v for v in region if arena.color[v] == top}
    attr_p, tau = attractor(arena, heads, p, region)
    win1, strat1 = _zielonka(arena, region - attr_p)
    if not win1[q]:
        strat = dict(strat1[p])
        strat.update(tau)
        for v in heads:
            if arena.owner[v] == p:
                strat[v] = _stay_inside(arena, v, region)
        return {p: set(region), q: set()}, {p: strat, q: {}}
    attr_q, tau_q = attractor(arena, win1[q], q, region)
    win2, strat2 = _zielonka(arena, region - attr_q)
    strat_q = dict(tau_q)
    strat_q.update(strat1[q])
    strat_q.update(strat2[q])
    return (
        {p: win2[p], q: win2[q] | attr_q},
        {p: strat2[p], q: strat_q},
    )


def solve_parity_game(arena: Arena) -> SolveResult:
    """Zielonka's recursive algorithm; max-parity, even colours favour Eve."""
    dead = [v for v, es in arena.out_edges.items() if not es]
    if dead:
        raise ValueError(f"parity arena has dead ends: {dead[:3]}")
    win, strat = _zielonka(arena, set(arena.owner))
    res = SolveResult(
        winner=EVE if arena.initial in win[EVE] else ADAM,
        win_eve=frozenset(win[EVE]),
        win_adam=frozenset(win[ADAM]),
        strategy_eve={v: i for v, i in strat[EVE].items() if arena.owner[v] == EVE},
        strategy_adam={v: i for v, i in strat[ADAM].items() if arena.owner[v] == ADAM},
        arena=arena,
    )
    res.check_determinacy()
    return res


# -- counters made explicit -------------------------------------------------


def _sink_color(arena: Arena) -> int:
    top = max(arena.color.values(), default=1)
    return top if top % 2 == 1 else top + 1


def _capped(arena: Arena, n: int, stop_at=frozenset(), forbidden=frozenset()):
    """Capped configuration arena and, per edge, the arena edge it copies."""
    k = arena.k
    eps = (EPS,) * k
    start = (arena.initial, (0,) * k)
    owner, color, edges, origin = {}, {}, [], []
    target = set()
    sink = _sink_color(arena)

    def add(node):
        if node not in owner:
            if node == BOTTOM:
                owner[node], color[node] = ADAM, sink
            else:
                owner[node] = arena.owner[node[0]]
                color[node] = arena.color[node[0]]
            queue.append(node)

    queue = deque()
    init = BOTTOM if arena.initial in forbidden else start
    add(init)
    while queue:
        node = queue.popleft()
        if node == BOTTOM:
            edges.append(Edge(BOTTOM, BOTTOM, eps))
            origin.append(None)
            continue
        v, vals = node
        if v in stop_at:
            target.add(node)
            color[node] = 2
            edges.append(Edge(node, node, eps))
            origin.append(None)
            continue
        for idx in arena.out_edges[v]:
            e = arena.edges[idx]
            nvals = step_values(vals, e.act, n)
            if e.dst in forbidden or any(x == EXCEEDED for x in nvals):
                nxt = BOTTOM
            else:
                nxt = (e.dst, nvals)
            add(nxt)
            edges.append(Edge(node, nxt, eps))
            origin.append(idx)
    cfg = Arena(k=k, owner=owner, color=color, edges=edges, initial=init,
                target=frozenset(target) if stop_at else None)
    return cfg, origin


def capped_configuration_arena(arena: Arena, n: int, stop_at_target: bool = False) -> Arena:
    """Arena over (vertex, counter values <= n) plus the overflow sink.

    Counter actions are erased; the sink carries an odd colour above all
    others and an epsilon self-loop.  With ``stop_at_target`` the target
    vertices become absorbing with colour 2.
    """
    if n < 0:
        raise ValueError("bound must be non-negative")
    stop = arena.target if (stop_at_target and arena.target) else frozenset()
    return _capped(arena, n, stop_at=stop)[0]


def decide_bparity(arena: Arena, spec: ConditionSpec) -> SolveResult:
    """Solve B(N) intersected with parity, or B(N) Until F, exactly."""
    spec.check(arena)
    if spec.kind == PARITY_ONLY:
        plain = arena.replace(k=0, edges=[Edge(e.src, e.dst, ()) for e in arena.edges])
        cfg, origin = _capped(plain, 0, forbidden=spec.forbidden)
        res = solve_parity_game(cfg)
    else:
        if spec.bound is None or spec.bound < 0:
            raise ValueError("condition needs a non-negative bound N")
        if spec.kind == B_UNTIL_F:
            cfg, origin = _capped(arena, spec.bound, stop_at=arena.target, forbidden=spec.forbidden)
            res = solve_reachability_game(cfg, cfg.target or ())
        else:
            cfg, origin = _capped(arena, spec.bound, forbidden=spec.forbidden)
            res = solve_parity_game(cfg)
    res.origin = origin
    res.bound = spec.bound
    return res


def value_search(arena: Arena, spec: ConditionSpec, n_max: int) -> SolveResult:
    """Least N <= ``n_max`` at which Eve wins; ``value`` is None past ``n_max``."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    res = None
    for n in range(n_max + 1):
        res = decide_bparity(arena, spec.with_bound(n))
        if res.winner == EVE:
            res.value = n
            return res
    res.value = None
    return res


def _evaluate(arena: Arena, machine: StrategyMachine, spec: ConditionSpec, n_max: int):
    if spec.kind == B_UNTIL_F:
        return evaluate_strategy_reachability(arena, machine, n_max)
    return evaluate_strategy_parity(arena, machine, n_max)


def strategy_from_solution(arena: Arena, spec: ConditionSpec, res: SolveResult) -> StrategyMachine:
    """Machine for ``arena`` from a solved capped configuration arena.

    Memory holds the counter values (capped at the solved bound); the next
    move is the configuration arena's positional winning move.  Only the
    valuations reached under that strategy are kept.
    """
    if res.origin is None or res.bound is None:
        raise ValueError("need a result of decide_bparity with a bound")
    if res.winner != EVE:
        raise NoStrategyError(f"Eve does not win at bound {res.bound}")
    n = res.bound
    k = arena.k
    full_states = list(itertools.product(range(n + 1), repeat=k))
    update = {}
    for m in full_states:
        for idx, e in enumerate(arena.edges):
            nxt = step_values(m, e.act, n)
            update[m, idx] = m if any(x == EXCEEDED for x in nxt) else nxt
    moves = {}
    for node, pidx in res.strategy_eve.items():
        if node == BOTTOM or node not in res.win_eve:
            continue
        orig = res.origin[pidx]
        if orig is not None:
            moves[node[0], node[1]] = orig
    full = StrategyMachine(MemoryStructure(full_states, (0,) * k, update), moves)
    stop = arena.target if spec.kind == B_UNTIL_F else None
    reach = restrict_by_strategy(arena, full, n, stop_at=stop)
    initial = (0,) * k
    kept = [initial] + sorted({m for _, m, _ in reach.nodes} - {initial})
    keep = set(kept)
    small_update = {
        (m, idx): (nxt if nxt in keep else initial)
        for (m, idx), nxt in update.items()
        if m in keep
    }
    small_moves = {(v, m): idx for (v, m), idx in moves.items() if m in keep}
    machine = StrategyMachine(MemoryStructure(kept, initial, small_update), small_moves)
    got = _evaluate(arena, machine, spec, n)
    if not got <= n:
        raise AssertionError(f"lifted witness evaluates to {got}, expected <= {n}")
    return machine


def lemma1_strategy(arena: Arena, spec: ConditionSpec, n_max: int = 20) -> StrategyMachine:
    """Machine whose memory tracks counter values up to the value N.

    N is the least bound at which Eve wins (searched up to ``n_max``); the
    machine has at most (N+1)^k states.
    """
    if spec.kind == PARITY_ONLY:
        raise ValueError("lemma1_strategy needs a bounding condition")
    res = value_search(arena, spec, n_max)
    if res.value is None:
        raise NoStrategyError(f"Eve does not win within N <= {n_max}")
    return strategy_from_solution(arena, spec, res)


# -- well-founded games -----------------------------------------------------


def solve_dag_bgame(arena: Arena) -> dict:
    """Minimax value of every vertex of an acyclic B-game, from zero counters.

    A play ends at a vertex without successors; its value is the largest
    counter value seen.
    """
    if not arena.is_acyclic():
        raise ValueError("solve_dag_bgame needs an acyclic arena")

    @lru_cache(maxsize=None)
    def value(v, vals):
        here = max(vals, default=0)
        outs = arena.out_edges[v]
        if not outs:
            return here
        options = [value(arena.edges[i].dst, step_values(vals, arena.edges[i].act)) for i in outs]
        best = min(options) if arena.owner[v] == EVE else max(options)
        return max(here, best)

    zero = (0,) * arena.k
    return {v: value(v, zero) for v in arena.owner}


# -- bounded-memory synthesis -----------------------------------------------


@dataclass(frozen=True)
class SynthesisQuery:
    arena: Arena
    spec: ConditionSpec
    mem_size: int
    bound: int

    def __post_init__(self):
        if self.mem_size < 1:
            raise ValueError("memory budget must be at least 1")
        if self.bound < 0:
            raise ValueError("bound must be non-negative")


def _identity_edges(arena: Arena, keep_free=frozenset()) -> set:
    """Edges whose memory update can be fixed to the identity without loss.

    An edge into a vertex with in-degree 1 and out-degree 1 carries no
    information the next edge could not carry instead.
    """
    fixed = set()
    for idx, e in enumerate(arena.edges):
        y = e.dst
        if y == arena.initial or y in keep_free:
            continue
        if arena.target and y in arena.target:
            continue
        if arena.in_edges[y] == (idx,) and len(arena.out_edges[y]) == 1:
            fixed.add(idx)
    return fixed


class _Search:
    """Backtracking over next-move and update entries in exploration order."""

    def __init__(self, query: SynthesisQuery, max_steps: int, contract: bool):
        self.q = query
        a = query.arena
        self.arena = a
        self.reach = query.spec.kind == B_UNTIL_F
        self.target = a.target if self.reach else frozenset()
        self.forbidden = query.spec.forbidden
        self.bound = query.bound
        self.m = query.mem_size
        self.max_steps = max_steps
        self.steps = 0
        self.fixed = _identity_edges(a, self.forbidden) if contract else set()

    # state is kept in plain containers and undone through a trail
    def _reset(self):
        self.sigma = {}
        self.mu = {}
        self.used = 1
        self.nodes = []
        self.index = {}
        self.succ = []
        self.tasks = []
        self.trail = []

    def _new_node(self, cfg):
        i = len(self.nodes)
        self.nodes.append(cfg)
        self.index[cfg] = i
        self.succ.append([])
        self.trail.append(("node", cfg))
        return i

    def _push(self, task):
        self.tasks.append(task)
        self.trail.append(("push",))

    def _pop(self):
        task = self.tasks.pop()
        self.trail.append(("pop", task))
        return task

    def _undo(self, mark):
        while len(self.trail) > mark:
            rec = self.trail.pop()
            kind = rec[0]
            if kind == "push":
                self.tasks.pop()
            elif kind == "pop":
                self.tasks.append(rec[1])
            elif kind == "node":
                del self.index[rec[1]]
                self.nodes.pop()
                self.succ.pop()
            elif kind == "edge":
                self.succ[rec[1]].pop()
            elif kind == "sigma":
                del self.sigma[rec[1]]
            elif kind == "mu":
                del self.mu[rec[1]]
            elif kind == "used":
                self.used = rec[1]

    def _assign(self, key, value):
        if key[0] == "sigma":
            self.sigma[key[1]] = value
            self.trail.append(("sigma", key[1]))
        else:
            if value == self.used:
                self.trail.append(("used", self.used))
                self.used += 1
            self.mu[key[1]] = value
            self.trail.append(("mu", key[1]))

    def _reaches(self, src, dst) -> bool:
        seen = {src}
        stack = [src]
        while stack:
            i = stack.pop()
            if i == dst:
                return True
            for j in self.succ[i]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return False

    def _start(self):
        a = self.arena
        cfg = (a.initial, 0, (0,) * a.k)
        if a.initial in self.forbidden:
            return "conflict"
        i = self._new_node(cfg)
        if a.initial not in self.target:
            self._push(("expand", i))
        return None

    def _propagate(self):
        """Run tasks until done, a conflict, or an undecided entry."""
        a = self.arena
        while self.tasks:
            task = self.tasks[-1]
            kind = task[0]
            if kind == "expand":
                self._pop()
                i = task[1]
                v, m, _ = self.nodes[i]
                outs = a.out_edges[v]
                if not outs:
                    return "conflict", None
                if a.owner[v] == EVE:
                    self._push(("choose", i))
                else:
                    for idx in reversed(outs):
                        self._push(("edge", i, idx))
            elif kind == "choose":
                i = task[1]
                v, m, _ = self.nodes[i]
                idx = self.sigma.get((v, m))
                if idx is None:
                    return None, (("sigma", (v, m)), list(a.out_edges[v]))
                self._pop()
                self._push(("edge", i, idx))
            else:
                _, i, idx = task
                v, m, vals = self.nodes[i]
                if idx in self.fixed:
                    nm = m
                else:
                    nm = self.mu.get((m, idx))
                    if nm is None:
                        return None, (("mu", (m, idx)), list(range(min(self.used + 1, self.m))))
                self._pop()
                e = a.edges[idx]
                nvals = step_values(vals, e.act, self.bound)
                if any(x == EXCEEDED for x in nvals) or e.dst in self.forbidden:
                    return "conflict", None
                cfg = (e.dst, nm, nvals)
                j = self.index.get(cfg)
                if j is None:
                    j = self._new_node(cfg)
                    if e.dst not in self.target:
                        self._push(("expand", j))
                elif self.reach and self._reaches(j, i):
                    return "conflict", None
                self.succ[i].append(j)
                self.trail.append(("edge", i))
        return None, None

    def _final_ok(self) -> bool:
        if self.reach:
            return True
        from .machines import ConfigGraph

        cg = ConfigGraph(
            nodes=self.nodes,
            index=self.index,
            succ=[[(None, j) for j in out] for out in self.succ],
            cap=self.bound,
            color=[self.arena.color[v] for v, _, _ in self.nodes],
            stopped=set(),
            undefined=set(),
        )
        return odd_cycle_node(cg) is None

    def run(self, first_choice: int | None = None):
        """First machine in search order, or None; restrict the first decision if asked."""
        self._reset()
        if self._start() == "conflict":
            return None
        stack = []
        while True:
            self.steps += 1
            if self.steps > self.max_steps:
                raise SearchBudgetExceeded(f"gave up after {self.max_steps} steps")
            status, need = self._propagate()
            if status is None and need is None and not self._final_ok():
                status = "conflict"
            if status == "conflict":
                while stack:
                    mark, key, alts, pos = stack[-1]
                    self._undo(mark)
                    if pos + 1 < len(alts) and not (len(stack) == 1 and first_choice is not None):
                        stack[-1] = (mark, key, alts, pos + 1)
                        self._assign(key, alts[pos + 1])
                        break
                    stack.pop()
                else:
                    return None
                continue
            if need is None:
                return self._machine()
            key, alts = need
            if not stack and first_choice is not None:
                if first_choice >= len(alts):
                    return None
                stack.append((len(self.trail), key, alts, first_choice))
                self._assign(key, alts[first_choice])
                continue
            stack.append((len(self.trail), key, alts, 0))
            self._assign(key, alts[0])

    def first_width(self) -> int:
        """Number of alternatives at the first decision (1 if none)."""
        self._reset()
        if self._start() == "conflict":
            return 1
        status, need = self._propagate()
        return 1 if need is None else len(need[1])

    def _machine(self) -> StrategyMachine:
        a = self.arena
        states = tuple(range(self.used))
        update = {}
        for m in states:
            for idx in range(len(a.edges)):
                update[m, idx] = self.mu.get((m, idx), m)
        moves = dict(self.sigma)
        for v in a.eve_vertices():
            if a.out_edges[v]:
                for m in states:
                    moves.setdefault((v, m), a.out_edges[v][0])
        return StrategyMachine(MemoryStructure(states, 0, update), moves)


def _run_branch(args):
    query, max_steps, contract, choice = args
    s = _Search(query, max_steps, contract)
    try:
        return s.run(first_choice=choice), s.steps, None
    except SearchBudgetExceeded as exc:
        return None, s.steps, str(exc)


def search_memory_strategy(
    query: SynthesisQuery,
    max_steps: int = 5_000_000,
    contract_chains: bool = True,
    workers: int = 1,
):
    """Some machine with at most ``mem_size`` states meeting ``bound``, or None.

    Raises :class:`SearchBudgetExceeded` when the step budget runs out, so
    "none exists" is only ever returned after an exhaustive search.  With
    several workers the first decision is split across processes and the
    branch earliest in search order wins, so the answer does not depend on
    scheduling.
    """
    query.spec.check(query.arena)
    if workers <= 1:
        machine = _Search(query, max_steps, contract_chains).run()
    else:
        width = _Search(query, max_steps, contract_chains).first_width()
        jobs = [(query, max_steps, contract_chains, c) for c in range(width)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_branch, jobs))
        machine = None
        for found, _, err in results:
            if found is not None:
                machine = found
                break
            if err is not None:
                raise SearchBudgetExceeded(err)
    if machine is not None:
        got = _evaluate(query.arena, machine, query.spec, query.bound)
        if not got <= query.bound:
            raise AssertionError(f"synthesised machine evaluates to {got} > {query.bound}")
    return machine
