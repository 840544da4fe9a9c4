from freecurrents import walks as K
from freecurrents import words as W

# a seeded non-backtracking walk
xi = K.sample_trajectory(seed=7, rank=2, length=100_000)
print(W.format_word(xi.prefix(40)), "...")

# subword frequencies approach 1/12 at level 2
for n in (1_000, 10_000, 100_000):
    rep = K.frequency_report(xi, n, 2)
    print(f"n={n:>6}  max deviation {float(rep.max_deviation):.4f}")

# almost no cyclic cancellation
print("cyclic length / n:", W.cyclic_length(xi.letters) / 100_000)

# the universal ray contains every reduced word
u = K.universal_trajectory(2, 300)
print("universal:", W.format_word(u.prefix(60)), "...")
