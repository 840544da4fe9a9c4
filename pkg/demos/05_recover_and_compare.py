from fractions import Fraction

from freecurrents import outer_space as O
from freecurrents import rigidity as R
from freecurrents import walks as K
from freecurrents import words as W

# a hidden rose metric, observed only through lengths of walk prefixes
hidden = O.rose(3, [Fraction(7, 3), 1, Fraction(5, 2)])
data = R.prefix_length_data(hidden, K.sample_trajectory(0, 3, 10), n0=100, count=50)
rec = R.recover_metric(O.rose(3, [1, 1, 1]), data)
print("recovered:", {e: str(x) for e, x in rec.lengths.items()}, "unique:", rec.unique)

# two nearly equal metrics separate on an early prefix
t1 = O.rose(2, [1, 1])
t2 = O.rose(2, [1, 1 + Fraction(1, 10**6)])
cmp = R.distinguish_trees(t1, t2, K.sample_trajectory(1, 2, 10), budget=20)
print("separating n:", cmp.separating_n, "lengths:", [str(x) for x in cmp.lengths])

# approximating a counting current by a difference of two prefixes
cert = R.approximate_target(K.universal_trajectory(2, 10), W.parse_cyclic("ab"), level=2, n0=10, eps=Fraction(1, 4))
for step in cert.table:
    print(f"  n={step.n} error={step.error}")
print(f"certificate: (1/{cert.n})(P{cert.long_prefix} - P{cert.short_prefix}), error {cert.error}")
