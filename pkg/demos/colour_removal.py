"""Remove the least colour of a small arena, both parities.

Even case: colour 0 becomes a Safe/Attractor mode and a new counter.
Odd case: slices from a winning strategy, then a seen/unseen flag product.
"""
from countergames import ConditionSpec, lemma1_strategy, value_search
from countergames.arena import B_AND_PARITY, EVE, INC, RESET, Arena, Edge
from countergames.machines import evaluate_strategy_parity, restrict_by_strategy
from countergames.random_instances import random_chronological_arena
from countergames.transforms import (
    compute_slices,
    lift_odd_strategy,
    remove_even_min_color,
    remove_odd_min_color,
)

spec = ConditionSpec(B_AND_PARITY)

# even
arena = Arena(k=1, owner={"a": EVE, "b": EVE}, color={"a": 0, "b": 2},
              edges=[Edge("a", "b", (INC,)), Edge("b", "a", (RESET,))], initial="a")
n = value_search(arena, spec, 4).value
out = remove_even_min_color(arena)
print(f"even: value {n} on {len(arena.owner)} vertices -> "
      f"value {value_search(out, spec, 8).value} on {len(out.owner)} vertices, {out.k} counters")

# odd
seed = 0
while True:
    arena = random_chronological_arena(seed, 2, 6)
    n = value_search(arena, spec, 3).value
    if min(arena.color.values()) == 1 and n is not None:
        break
    seed += 1
sigma = lemma1_strategy(arena, spec, 3)
slices = compute_slices(restrict_by_strategy(arena, sigma, n), arena.rank)
product, forbidden = remove_odd_min_color(arena, slices)
pspec = ConditionSpec(B_AND_PARITY, forbidden=forbidden)
n_prime = value_search(product, pspec, n).value
lifted = lift_odd_strategy(arena, slices, lemma1_strategy(product, pspec, n))
print(f"odd (seed {seed}): value {n}, slices {list(slices.slices)}, {len(forbidden)} forbidden vertices")
print(f"  product value {n_prime}; lifted machine {lifted.size} states, "
      f"value {evaluate_strategy_parity(arena, lifted, n_prime)} on the original arena")
