"""Hand-written strategies on the single-level lower-bound game.

Shows the 4-state and 3-state machines, their guaranteed bounds, and a
synthesis run confirming that two states do not reach bound N.
"""
import sys

from countergames import ConditionSpec, SynthesisQuery, search_memory_strategy
from countergames.arena import B_UNTIL_F
from countergames.families import gen_g1, strategy_g1_3state, strategy_g1_4state
from countergames.machines import evaluate_strategy_reachability, restrict_by_strategy


def main(n=2):
    arena = gen_g1(n)
    print(f"G1 with N={n}: {len(arena.owner)} vertices, start {arena.initial}")
    for make in (strategy_g1_4state, strategy_g1_3state):
        m = make(n, arena)
        cg = restrict_by_strategy(arena, m, 10, stop_at=arena.target)
        value = evaluate_strategy_reachability(arena, m, 10)
        print(f"  {m.size}-state machine: value {value}, {len(cg)} reachable configurations")
    found = search_memory_strategy(SynthesisQuery(arena, ConditionSpec(B_UNTIL_F), 2, n))
    print(f"  2-state machine at bound {n}: {'found' if found else 'none exists'}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 2)
