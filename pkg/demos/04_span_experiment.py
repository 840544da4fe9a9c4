from freecurrents import rigidity as R
from freecurrents import walks as K

# how many prefixes until their counting vectors span the level space
for level in (1, 2, 3):
    xi = K.sample_trajectory(3, 2, 10)
    rep = R.prefix_span_experiment(xi, n0=1, level=level, budget=5000)
    print(f"M={level}: rank {rep.rank}/{rep.target_dim} after {rep.rows_consumed} prefixes, basis n={rep.basis}")

# starting later along the walk makes no difference
rep = R.prefix_span_experiment(K.sample_trajectory(3, 2, 10), n0=500, level=2, budget=5000)
print("n0=500:", rep.verdict, rep.basis)

# short cyclic words span too
rep = R.cone_span_check(2, 2, R.cyclic_words_up_to(2, 4))
print("cyclic words up to length 4:", rep.verdict)
