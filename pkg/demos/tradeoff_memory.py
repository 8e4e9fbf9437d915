"""Memory versus bound on the one-counter trade-off game.

For each N, prints the game value, the smallest memory that meets bound N,
and what a memoryless strategy can still guarantee.

    python3 demos/tradeoff_memory.py [N_MAX]
"""
import sys

from countergames import ConditionSpec, SynthesisQuery, search_memory_strategy, value_search
from countergames.arena import B_UNTIL_F
from countergames.families import gen_tradeoff_game, tradeoff_exit_machine
from countergames.machines import evaluate_strategy_reachability


def least_memory(arena, bound, limit):
    spec = ConditionSpec(B_UNTIL_F)
    for mem in range(1, limit + 1):
        if search_memory_strategy(SynthesisQuery(arena, spec, mem, bound)) is not None:
            return mem
    return None


def main(n_max=4):
    print(f"{'N':>3} {'value':>6} {'states@N':>9} {'states@2N':>10} {'exit':>5}")
    for n in range(1, n_max + 1):
        arena = gen_tradeoff_game(n)
        value = value_search(arena, ConditionSpec(B_UNTIL_F), 2 * n).value
        exit_value = evaluate_strategy_reachability(arena, tradeoff_exit_machine(arena), 4 * n)
        print(f"{n:>3} {value:>6} {least_memory(arena, n, n + 1):>9} "
              f"{least_memory(arena, 2 * n, 1):>10} {exit_value:>5}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 4)
