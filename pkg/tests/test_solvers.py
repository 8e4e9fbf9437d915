import itertools
import math
import random

import pytest

from countergames.arena import (
    ADAM,
    B_AND_PARITY,
    B_UNTIL_F,
    EPS,
    EVE,
    INC,
    RESET,
    Arena,
    ConditionSpec,
    Edge,
)
from countergames.families import gen_cyclic_counter_game, gen_g1, gen_tradeoff_game
from countergames.machines import evaluate_strategy_parity, evaluate_strategy_reachability
from countergames.random_instances import random_arena, random_dag, random_parity_arena
from countergames.solvers import (
    BOTTOM,
    NoStrategyError,
    SearchBudgetExceeded,
    SynthesisQuery,
    attractor,
    capped_configuration_arena,
    decide_bparity,
    lemma1_strategy,
    search_memory_strategy,
    solve_dag_bgame,
    solve_parity_game,
    solve_reachability_game,
    solve_safety_game,
    value_search,
)
from countergames.verification import minimax_oracle, positional_parity_oracle, positional_reach_oracle


def loop(act, color=2, target=False):
    return Arena(k=len(act), owner={"v": EVE}, color={"v": color}, edges=[Edge("v", "v", act)], initial="v",
                 target=frozenset({"v"}) if target else None)


def to_target(act=(EPS,)):
    return Arena(k=len(act), owner={"s": EVE, "F": EVE}, color={"s": 2, "F": 2},
                 edges=[Edge("s", "F", act), Edge("F", "F", (EPS,) * len(act))], initial="s",
                 target=frozenset({"F"}))


# -- reachability / safety / parity -----------------------------------------


def test_reachability_trivial_cases():
    a = to_target()
    assert solve_reachability_game(a, {"s"}).winner == EVE
    escape = Arena(k=0, owner={"a": ADAM, "b": ADAM, "t": ADAM}, color={"a": 0, "b": 0, "t": 0},
                   edges=[Edge("a", "t", ()), Edge("a", "b", ()), Edge("b", "b", ()), Edge("t", "t", ())],
                   initial="a")
    assert solve_reachability_game(escape, {"t"}).winner == ADAM


def test_attractor_strategy_points_inward():
    rng = random.Random(1)
    for _ in range(100):
        a = random_parity_arena(rng, rng.randint(2, 6))
        target = {v for v in a.owner if rng.random() < 0.3}
        attr, strat = attractor(a, target, EVE)
        for v, idx in strat.items():
            assert a.edges[idx].src == v and v in attr


def test_reachability_matches_positional_oracle():
    rng = random.Random(2)
    for _ in range(150):
        a = random_parity_arena(rng, rng.randint(1, 8))
        target = frozenset(v for v in a.owner if rng.random() < 0.25)
        res = solve_reachability_game(a, target)
        assert res.win_eve == positional_reach_oracle(a, target)


def test_safety_is_dual_of_reachability():
    rng = random.Random(3)
    for _ in range(150):
        a = random_parity_arena(rng, rng.randint(1, 7))
        bad = frozenset(v for v in a.owner if rng.random() < 0.3)
        safe = solve_safety_game(a, bad)
        swapped = a.replace(owner={v: ADAM if o == EVE else EVE for v, o in a.owner.items()})
        reach = solve_reachability_game(swapped, bad)
        assert safe.win_eve == reach.win_adam
        safe.check_determinacy()


def test_safety_matches_positional_oracle():
    rng = random.Random(4)
    for _ in range(150):
        a = random_parity_arena(rng, rng.randint(1, 7))
        bad = frozenset(v for v in a.owner if rng.random() < 0.3)
        # Safe(bad) is the parity game where bad vertices become absorbing and odd
        colored = a.replace(color={v: 1 if v in bad else 0 for v in a.owner},
                            edges=[e for e in a.edges if e.src not in bad] + [Edge(v, v, ()) for v in bad])
        assert solve_safety_game(a, bad).win_eve == positional_parity_oracle(colored)


def test_parity_trivial_cases():
    assert solve_parity_game(loop((), 2)).winner == EVE
    assert solve_parity_game(loop((), 1)).winner == ADAM


def test_zielonka_matches_positional_oracle_and_strategies_win():
    rng = random.Random(5)
    for _ in range(200):
        a = random_parity_arena(rng, rng.randint(1, 8), colors=rng.randint(1, 4))
        res = solve_parity_game(a)
        res.check_determinacy()
        assert res.win_eve == positional_parity_oracle(a)
        assert res.win_eve <= positional_parity_oracle(a, res.strategy_eve)
        # Adam's strategy keeps his region: play it as the fixed player of the swapped game
        swapped = a.replace(owner={v: ADAM if o == EVE else EVE for v, o in a.owner.items()},
                            color={v: c + 1 for v, c in a.color.items()})
        assert res.win_adam <= positional_parity_oracle(swapped, res.strategy_adam)


# -- capped configuration arena ---------------------------------------------


def test_capped_arena_single_increment_loop():
    cfg = capped_configuration_arena(loop((INC,)), 1)
    assert set(cfg.owner) == {("v", (0,)), ("v", (1,)), BOTTOM}
    succ = {e.src: e.dst for e in cfg.edges}
    assert succ[("v", (0,))] == ("v", (1,))
    assert succ[("v", (1,))] == BOTTOM
    assert cfg.color[BOTTOM] % 2 == 1


def test_capped_arena_size_and_reset():
    rng = random.Random(6)
    for _ in range(30):
        a = random_arena(rng, rng.randint(2, 5), rng.randint(1, 2))
        n = rng.randint(0, 3)
        cfg = capped_configuration_arena(a, n)
        assert len(cfg.owner) <= len(a.owner) * (n + 1) ** a.k + 1
    r = Arena(k=1, owner={"a": EVE, "b": EVE}, color={"a": 2, "b": 2},
              edges=[Edge("a", "b", (INC,)), Edge("b", "a", (RESET,))], initial="a")
    cfg = capped_configuration_arena(r, 1)
    assert Edge(("b", (1,)), ("a", (0,)), (EPS,)) in cfg.edges


# -- B-conditions -----------------------------------------------------------


def test_decide_examples():
    assert decide_bparity(loop((EPS,)), ConditionSpec(B_AND_PARITY, 0)).winner == EVE
    cyc = gen_cyclic_counter_game(2)
    assert decide_bparity(cyc, ConditionSpec(B_AND_PARITY, 1)).winner == EVE
    assert decide_bparity(cyc, ConditionSpec(B_AND_PARITY, 0)).winner == ADAM
    g1 = gen_g1(2)
    assert decide_bparity(g1, ConditionSpec(B_UNTIL_F, 4)).winner == EVE


def test_decide_requires_bound_and_target():
    with pytest.raises(ValueError):
        decide_bparity(loop((EPS,)), ConditionSpec(B_AND_PARITY))
    with pytest.raises(ValueError):
        decide_bparity(loop((EPS,)), ConditionSpec(B_UNTIL_F, 1))


def test_forbidden_set_is_avoided():
    a = Arena(k=1, owner={"s": EVE, "x": EVE, "y": EVE}, color={"s": 2, "x": 2, "y": 2},
              edges=[Edge("s", "x", (EPS,)), Edge("s", "y", (INC,)), Edge("x", "x", (EPS,)), Edge("y", "y", (EPS,))],
              initial="s")
    assert value_search(a, ConditionSpec(B_AND_PARITY), 3).value == 0
    assert value_search(a, ConditionSpec(B_AND_PARITY, forbidden={"x"}), 3).value == 1
    assert decide_bparity(a, ConditionSpec(B_AND_PARITY, 5, forbidden={"s"})).winner == ADAM


def test_value_search_examples():
    assert value_search(to_target(), ConditionSpec(B_UNTIL_F), 5).value == 0
    assert value_search(loop((INC,)), ConditionSpec(B_AND_PARITY), 6).value is None
    for n in (1, 2, 3):
        assert value_search(gen_tradeoff_game(n), ConditionSpec(B_UNTIL_F), 2 * n).value == n


def test_decide_monotone_in_bound():
    rng = random.Random(7)
    for _ in range(60):
        a = random_arena(rng, rng.randint(2, 5), rng.randint(1, 2))
        wins = [decide_bparity(a, ConditionSpec(B_AND_PARITY, n)).winner == EVE for n in range(5)]
        assert wins == sorted(wins)


def _brute_force_value(arena, spec, n_max, states=1):
    """Least bound met by some machine with ``states`` states, over all tables."""
    best = math.inf
    eve = arena.eve_vertices()
    keys = [(v, m) for v in eve for m in range(states)]
    upd_keys = [(m, i) for m in range(states) for i in range(len(arena.edges))]
    for moves in itertools.product(*(arena.out_edges[v] for v, _ in keys)):
        for upd in itertools.product(range(states), repeat=len(upd_keys) if states > 1 else 0):
            from countergames.machines import MemoryStructure, StrategyMachine
            update = dict(zip(upd_keys, upd)) if states > 1 else {k: 0 for k in upd_keys}
            m = StrategyMachine(MemoryStructure(range(states), 0, update), dict(zip(keys, moves)))
            if spec.kind == B_UNTIL_F:
                best = min(best, evaluate_strategy_reachability(arena, m, n_max))
            else:
                best = min(best, evaluate_strategy_parity(arena, m, n_max))
    return best


def test_value_at_most_positional_brute_force():
    rng = random.Random(9)
    for _ in range(60):
        a = random_arena(rng, rng.randint(2, 4), 1, colors=3)
        spec = ConditionSpec(B_AND_PARITY)
        val = value_search(a, spec, 4).value
        brute = _brute_force_value(a, spec, 4)
        if brute < math.inf:
            assert val is not None and val <= brute
        if val is not None:
            m = lemma1_strategy(a, spec, 4)
            assert evaluate_strategy_parity(a, m, 4) == val


# -- valuation-memory machines ----------------------------------------------


def test_lemma1_cyclic_game():
    cyc = gen_cyclic_counter_game(2)
    m = lemma1_strategy(cyc, ConditionSpec(B_AND_PARITY), 5)
    assert m.size <= 4
    assert all(len(s) == 2 and max(s) <= 1 for s in m.states)
    assert evaluate_strategy_parity(cyc, m, 5) == 1


def test_lemma1_tradeoff():
    a = gen_tradeoff_game(2)
    m = lemma1_strategy(a, ConditionSpec(B_UNTIL_F), 6)
    assert m.size <= 9
    assert evaluate_strategy_reachability(a, m, 6) == 2


def test_lemma1_keeps_only_reachable_valuations():
    # one increment is ever seen, so valuations 2 and 3 never appear
    m = lemma1_strategy(to_target((INC,)), ConditionSpec(B_UNTIL_F), 3)
    assert sorted(m.states) == [(0,), (1,)]


def test_lemma1_raises_when_unwinnable():
    with pytest.raises(NoStrategyError):
        lemma1_strategy(loop((INC,)), ConditionSpec(B_AND_PARITY), 3)


# -- well-founded games -----------------------------------------------------


def test_dag_examples():
    single = Arena(k=1, owner={"a": EVE, "b": EVE}, color={"a": 2, "b": 2},
                   edges=[Edge("a", "b", (INC,))], initial="a")
    assert solve_dag_bgame(single)["a"] == 1
    diamond = Arena(k=1, owner={"t": ADAM, "l": EVE, "r": EVE, "x": EVE, "y": EVE},
                    color=dict.fromkeys("tlrxy", 2),
                    edges=[Edge("t", "l", (INC,)), Edge("t", "r", (EPS,)),
                           Edge("l", "x", (INC,)), Edge("l", "y", (RESET,)),
                           Edge("r", "x", (INC,)), Edge("r", "y", (INC,))], initial="t")
    assert solve_dag_bgame(diamond)["t"] == minimax_oracle(diamond) == 1
    with pytest.raises(ValueError):
        solve_dag_bgame(loop((EPS,)))


def test_dag_matches_minimax():
    rng = random.Random(10)
    for _ in range(150):
        k = rng.randint(1, 2)
        a = random_dag(rng, rng.randint(2, 10), k)
        vals = solve_dag_bgame(a)
        for v in a.owner:
            assert vals[v] == minimax_oracle(a, v, (0,) * k)


# -- synthesis --------------------------------------------------------------


def q(arena, mem, bound, kind=B_UNTIL_F):
    return SynthesisQuery(arena, ConditionSpec(kind), mem, bound)


def test_search_examples():
    cyc = gen_cyclic_counter_game(2)
    assert search_memory_strategy(q(cyc, 2, 1, B_AND_PARITY)) is not None
    for n in (1, 3, 6):
        assert search_memory_strategy(q(cyc, 1, n, B_AND_PARITY)) is None
    assert search_memory_strategy(q(gen_tradeoff_game(2), 1, 4)) is not None
    assert search_memory_strategy(q(gen_g1(2), 2, 2)) is None


def test_search_cyclic_three_counters():
    cyc = gen_cyclic_counter_game(3)
    assert search_memory_strategy(q(cyc, 3, 1, B_AND_PARITY)) is not None
    assert search_memory_strategy(q(cyc, 2, 3, B_AND_PARITY)) is None


def test_search_budget_is_reported():
    with pytest.raises(SearchBudgetExceeded):
        search_memory_strategy(q(gen_g1(2), 2, 2), max_steps=50)


def test_query_validation():
    with pytest.raises(ValueError):
        SynthesisQuery(to_target(), ConditionSpec(B_UNTIL_F), 0, 1)
    with pytest.raises(ValueError):
        SynthesisQuery(to_target(), ConditionSpec(B_UNTIL_F), 1, -1)


def test_search_agrees_with_brute_force_positional():
    rng = random.Random(12)
    for _ in range(80):
        a = random_arena(rng, rng.randint(2, 4), 1, colors=3)
        brute = _brute_force_value(a, ConditionSpec(B_AND_PARITY), 3)
        for n in range(4):
            found = search_memory_strategy(q(a, 1, n, B_AND_PARITY))
            assert (found is not None) == (brute <= n)


def test_search_agrees_with_brute_force_two_states():
    rng = random.Random(13)
    for _ in range(25):
        a = random_arena(rng, rng.randint(2, 3), 1, colors=2, max_out=2, target=True)
        brute = _brute_force_value(a, ConditionSpec(B_UNTIL_F), 3, states=2)
        for n in range(3):
            found = search_memory_strategy(q(a, 2, n))
            assert (found is not None) == (brute <= n)


def test_search_never_fails_at_lemma1_size():
    rng = random.Random(14)
    tried = 0
    while tried < 25:
        a = random_arena(rng, rng.randint(2, 5), 1, colors=3)
        val = value_search(a, ConditionSpec(B_AND_PARITY), 2).value
        if val is None:
            continue
        tried += 1
        assert search_memory_strategy(q(a, val + 1, val, B_AND_PARITY)) is not None


def test_parallel_search_is_deterministic():
    a = gen_tradeoff_game(3)
    one = search_memory_strategy(q(a, 4, 3))
    two = search_memory_strategy(q(a, 4, 3), workers=2)
    assert one.moves == two.moves and one.memory.update == two.memory.update
    assert search_memory_strategy(q(gen_g1(2), 2, 2), workers=2) is None


def test_search_without_chain_contraction_agrees():
    for n in (1, 2):
        a = gen_tradeoff_game(n)
        for mem in (n, n + 1):
            fast = search_memory_strategy(q(a, mem, n))
            slow = search_memory_strategy(q(a, mem, n), contract_chains=False)
            assert (fast is None) == (slow is None)
