"""The two-level game G_{2,2}: product machine against the game value."""
from countergames import ConditionSpec, value_search
from countergames.arena import B_UNTIL_F
from countergames.families import fn_d, fn_n, gen_gkn, strategy_gkn
from countergames.machines import evaluate_strategy_reachability

K, N = 2, 2

arena = gen_gkn(K, N)
print(f"G_{{{K},{N}}}: columns 0..{fn_n(K, N)}, strides {[fn_d(p, N) for p in range(1, K + 1)]}")
machine = strategy_gkn(K, N, arena=arena)
bound = K * (K + 3)
print(f"product machine: {machine.size} states, value {evaluate_strategy_reachability(arena, machine, bound)}"
      f" (target {bound})")
print(f"game value with unbounded memory: {value_search(arena, ConditionSpec(B_UNTIL_F), bound).value}")
