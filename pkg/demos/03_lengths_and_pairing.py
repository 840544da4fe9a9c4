from freecurrents import currents as C
from freecurrents import outer_space as O
from freecurrents import words as W

rose = O.rose(2, [2, 3])
theta = O.load_graph(O.bundled_graph("theta.json"))

# translation lengths of a few conjugacy classes
for text in ("a", "ab", "aB", "abab", "aabAB"):
    g = W.parse_word(text)
    print(f"{text:>6}  rose {O.translation_length(rose, g)}  theta {O.translation_length(theta, g)}")

# on the rose, pairing with the counting current gives the same number
g = W.parse_word("aabAB")
mu = C.counting_weights(W.CyclicWord.of(g), 3)
print("pairing:", O.intersection_form_rose([2, 3], mu))

# a marking that misses half the group is rejected
bad = O.MarkedMetricGraph(2, ("v",), {1: ("v", "v"), 2: ("v", "v")}, "v", ((1, 1), (2,)), {1: 1, 2: 1})
print(O.validate_graph(bad).issues)
