"""How far can a word's value exceed what its block summaries suggest?

Samples random block decompositions and reports the largest
val(w) / ((N+1) * N') ratio seen, with one example exceeding it.
"""
import random

from countergames.arena import summarize, word_value
from countergames.random_instances import random_blocks

rng = random.Random(0)
worst, example = 0.0, None
for _ in range(20_000):
    k = rng.randint(1, 3)
    blocks = random_blocks(rng, k, blocks=rng.randint(1, 6), max_len=5)
    word = [a for b in blocks for a in b]
    n = word_value([summarize(b, k) for b in blocks], k)
    n_prime = max(word_value(b, k) for b in blocks)
    if n_prime == 0:
        continue
    ratio = word_value(word, k) / ((n + 1) * n_prime)
    if ratio > worst:
        worst, example = ratio, (blocks, n, n_prime, word_value(word, k))

print(f"largest val(w) / ((N+1) N'): {worst:.3f}")
blocks, n, n_prime, val = example
print("example:", " | ".join(" ".join("".join(a) for a in b) for b in blocks))
print(f"  N={n}  N'={n_prime}  val(w)={val}  (N+2) N'={(n + 2) * n_prime}")
