from freecurrents import currents as C
from freecurrents import words as W

# the commutator, read around its circle
w = W.parse_cyclic("abAB")
print("cyclic word:", w)

# level-2 weights: each entry counts v and v^-1
p = C.counting_weights(w, 2)
for v, x in p.as_dict().items():
    if x:
        print(f"  {v}: {x}")

# switch conditions hold, and summing over last letters gives level 1
print("in the cone:", bool(C.check_membership(p)))
print("level 1:", {v: str(x) for v, x in C.project(p).as_dict().items()})

# dimensions of the signed level spaces for rank 2
for m in (1, 2, 3):
    print(f"M={m}: d(M)={W.sphere_size(2, m)}, dim={C.level_space(2, m).dimension}")
