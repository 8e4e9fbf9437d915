import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from countergames.arena import B_AND_PARITY, EPS, EVE, INC, RESET, Arena, ConditionSpec, Edge, validate_arena
from countergames.machines import evaluate_strategy_parity, positional, restrict_by_strategy
from countergames.random_instances import random_arena, random_chronological_arena, random_word_graph
from countergames.solvers import decide_bparity, lemma1_strategy, value_search
from countergames.transforms import (
    ATTRACTOR,
    CHOICE,
    SAFE,
    SEEN,
    UNSEEN,
    PreconditionError,
    check_slices,
    close_horizon,
    compute_ranks,
    compute_slices,
    lift_odd_strategy,
    mimic_on_flag_product,
    remove_even_min_color,
    remove_odd_min_color,
    word_width,
)

# -- ranks ------------------------------------------------------------------


def test_ranks_without_f_are_all_one():
    ra = compute_ranks({"a": ["b"], "b": ["b"]}, set())
    assert ra.rank == {"a": 1, "b": 1} and ra.stabilized == 1


def test_ranks_small_example():
    ra = compute_ranks({"u": ["f"], "f": ["w"], "w": ["w"]}, {"f"})
    assert ra.rank == {"w": 1, "f": 2, "u": 2}


def test_ranks_reject_cycle_through_f():
    with pytest.raises(PreconditionError):
        compute_ranks({"a": ["f"], "f": ["a"]}, {"f"})
    with pytest.raises(PreconditionError):
        compute_ranks({"f": ["f"]}, {"f"})


def test_ranks_accept_arenas():
    a = Arena(k=0, owner={"a": EVE, "f": EVE, "z": EVE}, color={"a": 0, "f": 0, "z": 0},
              edges=[Edge("a", "f", ()), Edge("f", "z", ()), Edge("z", "z", ())], initial="a",
              rank={"a": 0, "f": 1, "z": 2})
    assert compute_ranks(a, {"f"}).rank["a"] == 2
    assert word_width(a) == 1


@settings(max_examples=150)
@given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_rank_chain_properties(seed, W, prefix, period):
    succ, F = random_word_graph(seed, W, prefix=prefix, period=period)
    ra = compute_ranks(succ, F, width=W)
    assert all(x <= y for x, y in zip(ra.chain, ra.chain[1:]))
    assert ra.chain[-1] == frozenset(succ)
    assert ra.stabilized <= 2 * W
    for v, ws in succ.items():
        for w in ws:
            assert ra.rank[w] <= ra.rank[v]
    assert all(ra.rank[f] % 2 == 0 for f in F)


# -- even colour removal ----------------------------------------------------


def test_even_removal_structure():
    rng = random.Random(1)
    for _ in range(40):
        a = random_arena(rng, rng.randint(2, 5), rng.randint(1, 2), colors=3, min_color=0)
        if min(a.color.values()) != 0:
            continue
        out = remove_even_min_color(a)
        assert validate_arena(out) == []
        assert out.k == a.k + 1
        assert len(out.owner) == 3 * len(a.owner)
        assert len(out.edges) == 2 * len(a.edges) + 2 * len(a.owner)
        assert min(out.color.values()) >= 1
        assert out.initial == (a.initial, CHOICE)
        assert all(out.owner[v, CHOICE] == EVE for v in a.owner)


def test_even_removal_counter_actions():
    a = Arena(k=1, owner={"z": EVE, "o": EVE, "t": EVE}, color={"z": 0, "o": 1, "t": 2},
              edges=[Edge("z", "o", (INC,)), Edge("o", "t", (EPS,)), Edge("t", "z", (RESET,))], initial="z")
    out = remove_even_min_color(a)
    acts = {(e.src, e.dst): e.act for e in out.edges}
    assert acts[("z", SAFE), ("o", ATTRACTOR)] == (INC, INC)
    assert acts[("o", SAFE), ("t", SAFE)] == (EPS, RESET)
    assert acts[("t", SAFE), ("z", SAFE)] == (RESET, EPS)
    assert acts[("z", ATTRACTOR), ("o", CHOICE)] == (INC, EPS)


def test_even_removal_needs_colour_zero():
    a = Arena(k=1, owner={"v": EVE}, color={"v": 1}, edges=[Edge("v", "v", (EPS,))], initial="v")
    with pytest.raises(PreconditionError):
        remove_even_min_color(a)


def test_even_removal_keeps_the_winner():
    # a colour-0 loop is won with bound 0; after removal Eve stays Safe forever
    a = Arena(k=1, owner={"v": EVE}, color={"v": 0}, edges=[Edge("v", "v", (EPS,))], initial="v")
    out = remove_even_min_color(a)
    assert decide_bparity(out, ConditionSpec(B_AND_PARITY, 0)).winner == EVE


# -- slices -----------------------------------------------------------------


def chrono(colors, acts=None):
    n = len(colors)
    owner = {f"c{j}": EVE for j in range(n)}
    acts = acts or [EPS] * (n - 1)
    edges = [Edge(f"c{j}", f"c{j + 1}", (acts[j],)) for j in range(n - 1)]
    a = Arena(k=1, owner=owner, color={f"c{j}": c for j, c in enumerate(colors)}, edges=edges,
              initial="c0", rank={f"c{j}": j for j in range(n)})
    return close_horizon(a)


def restrict(a, cap=5):
    return restrict_by_strategy(a, positional(a, {v: a.out_edges[v][0] for v in a.owner}), cap)


def test_slices_all_high_colours():
    a = chrono([2, 2, 2, 2])
    sl = compute_slices(restrict(a), a.rank)
    assert sl.slices == (0, 1, 2, 3)
    assert set(sl.depth.values()) == {0}


def test_slices_path_depth():
    a = chrono([1, 1, 1, 2, 2])
    cg = restrict(a)
    sl = compute_slices(cg, a.rank)
    assert sl.depth[cg.nodes[0]] == 3
    assert sl.slices[0] == 3
    assert check_slices(cg, a.rank, sl.slices) == []


def test_bad_slices_are_reported():
    a = chrono([1, 1, 1, 1, 2])
    cg = restrict(a)
    assert check_slices(cg, a.rank, (0, 3)) == [cg.nodes[0]]
    assert check_slices(cg, a.rank, compute_slices(cg, a.rank).slices) == []


def test_low_cycle_rejected():
    a = Arena(k=1, owner={"v": EVE}, color={"v": 1}, edges=[Edge("v", "v", (EPS,))], initial="v", rank={"v": 0})
    with pytest.raises(PreconditionError):
        compute_slices(restrict(a), a.rank)


# -- odd colour removal -----------------------------------------------------


def test_odd_removal_structure():
    a = chrono([1, 1, 2, 1, 3])
    cg = restrict(a)
    sl = compute_slices(cg, a.rank)
    out, forbidden = remove_odd_min_color(a, sl)
    assert validate_arena(out) == []
    assert len(out.owner) == 2 * len(a.owner) and len(out.edges) == 2 * len(a.edges)
    assert 1 not in out.color.values()
    assert out.initial == ("c0", UNSEEN)
    assert forbidden == {(v, UNSEEN) for v in a.owner if a.rank[v] in sl.slices}
    for e in out.edges:
        if a.color[e.dst[0]] > 1:
            assert e.dst[1] == SEEN


def test_odd_removal_preconditions():
    with pytest.raises(PreconditionError):
        remove_odd_min_color(chrono([2, 2, 2]), (0,))
    no_rank = Arena(k=1, owner={"v": EVE}, color={"v": 1}, edges=[Edge("v", "v", (EPS,))], initial="v")
    with pytest.raises(PreconditionError):
        remove_odd_min_color(no_rank, (0,))
    skip = Arena(k=1, owner={"a": EVE, "b": EVE, "c": EVE}, color={"a": 1, "b": 2, "c": 2},
                 edges=[Edge("a", "c", (EPS,)), Edge("b", "c", (EPS,)), Edge("c", "c", (EPS,))], initial="a",
                 rank={"a": 0, "b": 1, "c": 2})
    with pytest.raises(PreconditionError):
        remove_odd_min_color(skip, (0,))


def test_mimic_avoids_forbidden_and_lift_doubles_memory():
    rng = random.Random(8)
    spec = ConditionSpec(B_AND_PARITY)
    done = 0
    while done < 8:
        a = random_chronological_arena(rng, 2, rng.randint(3, 6))
        if min(a.color.values()) != 1:
            continue
        n = value_search(a, spec, 3).value
        if n is None:
            continue
        done += 1
        sigma = lemma1_strategy(a, spec, 3)
        cg = restrict_by_strategy(a, sigma, n)
        sl = compute_slices(cg, a.rank)
        product, forbidden = remove_odd_min_color(a, sl)
        mimic = mimic_on_flag_product(product, sigma)
        assert evaluate_strategy_parity(product, mimic, n) <= n
        assert not any(v in forbidden for v, _, _ in restrict_by_strategy(product, mimic, n).nodes)
        pspec = ConditionSpec(B_AND_PARITY, forbidden=forbidden)
        n_prime = value_search(product, pspec, n).value
        pm = lemma1_strategy(product, pspec, n)
        lifted = lift_odd_strategy(a, sl, pm)
        assert lifted.size == 2 * pm.size
        assert evaluate_strategy_parity(a, lifted, n_prime) <= n_prime


def test_close_horizon_adds_loops():
    a = chrono([1, 2])
    last = [v for v in a.owner if a.rank[v] == 1]
    assert last == ["c1"]
    assert any(e.src == e.dst == "c1" and e.act == (EPS,) for e in a.edges)
    assert a.color["c1"] == 2
    assert RESET not in {x for e in a.edges for x in e.act}
