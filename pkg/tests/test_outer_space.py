import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from freecurrents import currents as C
from freecurrents import outer_space as O
from freecurrents import words as W
from freecurrents.words import CyclicWord, parse_word as P


def random_reduced(rng, rank, length):
    out = []
    alphabet = W.letters(rank)
    while len(out) < length:
        x = rng.choice(alphabet)
        if not out or x != -out[-1]:
            out.append(x)
    return tuple(out)


def loop_length_oracle(lengths, g):
    # rose: cyclically reduce, then add petal lengths letter by letter
    core, _ = W.cyclic_reduce(W.free_reduce(g))
    return sum((Fraction(lengths[abs(x) - 1]) for x in core), Fraction(0))


positive_rationals = st.fractions(min_value=Fraction(1, 30), max_value=20, max_denominator=30)
words2 = st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=50).map(W.free_reduce).filter(bool)


class TestBuilders:
    def test_rose_valid(self):
        assert O.validate_graph(O.rose(2, [1, 1]))
        assert O.rose(3, [1, 1, 1]).betti == 3

    def test_theta_valid(self):
        diag = O.validate_graph(O.theta())
        assert diag.ok, diag.issues
        assert "isomorphically" in diag.witness

    def test_rose_bad_lengths(self):
        with pytest.raises(O.GraphError):
            O.rose(2, [1, 0])
        with pytest.raises(O.GraphError):
            O.rose(2, [1])

    def test_scaling_and_volume(self):
        G = O.rose(2, [2, 3])
        assert G.volume() == 5
        assert G.normalized().volume() == 1
        assert G.scaled(Fraction(1, 2)).lengths == {1: 1, 2: Fraction(3, 2)}


class TestValidation:
    def test_marking_not_surjective_rose(self):
        G = O.MarkedMetricGraph(2, ("v",), {1: ("v", "v"), 2: ("v", "v")}, "v", ((1,), (1,)), {1: 1, 2: 1})
        diag = O.validate_graph(G)
        assert not diag
        assert any("not surjective" in s for s in diag.issues)
        assert "Betti 1" in diag.witness

    def test_marking_not_surjective_theta(self):
        # a and b both read e1 e2^-1: folds to a single circle
        G = O.MarkedMetricGraph(2, ("u", "v"), {1: ("u", "v"), 2: ("u", "v"), 3: ("u", "v")}, "u",
                                ((1, -2), (1, -2)), {1: 1, 2: 1, 3: 1})
        assert not O.validate_graph(G)

    def test_proper_subgroup_of_full_rank_rejected(self):
        # <a^2, b> has rank 2 but is not all of F_2
        G = O.MarkedMetricGraph(2, ("v",), {1: ("v", "v"), 2: ("v", "v")}, "v", ((1, 1), (2,)), {1: 1, 2: 1})
        diag = O.validate_graph(G)
        assert not diag
        assert "Betti 2" in diag.witness and "2 vertices" in diag.witness

    def test_other_basis_accepted(self):
        # a -> ab, b -> b is a change of basis
        G = O.MarkedMetricGraph(2, ("v",), {1: ("v", "v"), 2: ("v", "v")}, "v", ((1, 2), (2,)), {1: 1, 2: 1})
        assert O.validate_graph(G)

    def test_degree_two_vertex_named(self):
        G = O.MarkedMetricGraph(2, ("v", "w"), {1: ("v", "w"), 2: ("w", "v"), 3: ("v", "v")}, "v",
                                ((1, 2), (3,)), {1: 1, 2: 1, 3: 1})
        diag = O.validate_graph(G)
        assert any("'w' has degree 2" in s for s in diag.issues)
        with pytest.raises(O.GraphError, match="'w'"):
            O.check_graph(G)

    def test_betti_mismatch(self):
        G = O.MarkedMetricGraph(3, ("v",), {1: ("v", "v"), 2: ("v", "v")}, "v", ((1,), (2,), (1,)), {1: 1, 2: 1})
        assert any("Betti" in s for s in O.validate_graph(G).issues)

    def test_backtracking_loop(self):
        G = O.MarkedMetricGraph(2, ("v",), {1: ("v", "v"), 2: ("v", "v")}, "v", ((1, -1, 1), (2,)), {1: 1, 2: 1})
        assert any("backtracks" in s for s in O.validate_graph(G).issues)

    def test_missing_lengths(self):
        G = O.rose(2, [1, 1])
        bare = O.MarkedMetricGraph(2, G.vertices, G.edges, G.base, G.marking)
        assert not O.validate_graph(bare)
        assert O.validate_graph(bare, require_lengths=False)


class TestLoops:
    def test_conjugate_on_rose(self):
        G = O.rose(2, [1, 1])
        assert O.loop_of(G, P("abA")).edges == (2,)
        assert O.loop_of(G, ()) is None

    def test_theta_loop(self):
        loop = O.loop_of(O.theta(), P("aB"))
        assert len(loop) == 2
        assert set(loop.edges) == {-2, 3}

    def test_occurrence_vectors(self):
        assert O.edge_occurrence_vector(O.rose(2, [1, 1]), P("abab")) == {1: 2, 2: 2}
        assert O.edge_occurrence_vector(O.theta(), P("a")) == {1: 1, 2: 1, 3: 0}
        g = P("abAAb")
        assert O.edge_occurrence_vector(O.theta(), g) == O.edge_occurrence_vector(O.theta(), W.invert(g))


class TestTranslationLength:
    def test_examples(self):
        G = O.rose(2, [2, 3])
        assert O.translation_length(G, P("ab")) == 5
        assert O.translation_length(G, P("abab")) == 10
        assert O.translation_length(O.theta(), P("a")) == 2
        assert O.translation_length(G, ()) == 0

    def test_unit_rose_is_cyclic_length(self):
        rng = random.Random(1)
        G = O.rose(2, [1, 1])
        for _ in range(100):
            g = random_reduced(rng, 2, rng.randint(1, 30))
            assert O.translation_length(G, g) == W.cyclic_length(g)

    def test_conjugation_invariance(self):
        rng = random.Random(2)
        for G in (O.rose(2, [2, 3]), O.theta([1, 2, 5])):
            for _ in range(50):
                x = random_reduced(rng, 2, rng.randint(0, 6))
                y = random_reduced(rng, 2, rng.randint(1, 10))
                conj = W.free_reduce(x + y + W.invert(x))
                assert O.translation_length(G, conj) == O.translation_length(G, y)

    @given(words2, st.integers(1, 5), st.lists(positive_rationals, min_size=3, max_size=3))
    def test_powers(self, g, n, lengths):
        for G in (O.rose(2, lengths[:2]), O.theta(lengths)):
            assert O.translation_length(G, g * n) == n * O.translation_length(G, g)

    @given(words2, st.lists(positive_rationals, min_size=2, max_size=2))
    def test_matches_petal_sum(self, g, lengths):
        assert O.translation_length(O.rose(2, lengths), g) == loop_length_oracle(lengths, g)


class TestIntersectionForm:
    def test_examples(self):
        assert O.intersection_form_rose([1, 1], C.counting_weights(CyclicWord(P("abab")), 1)) == 4
        assert O.intersection_form_rose([2, 3], C.counting_weights(CyclicWord(P("ab")), 1)) == 5
        assert O.intersection_form_rose([1, 1], C.uniform_weights(2, 1)) == Fraction(1, 2)

    @given(words2, st.integers(1, 3), st.lists(positive_rationals, min_size=2, max_size=2))
    @settings(max_examples=80)
    def test_oracle_equivalence(self, g, m, lengths):
        mu = C.counting_weights(CyclicWord.of(g), m, 2)
        assert O.intersection_form_rose(lengths, mu) == O.translation_length(O.rose(2, lengths), g)

    @given(words2, positive_rationals, st.lists(positive_rationals, min_size=2, max_size=2))
    def test_homogeneous(self, g, c, lengths):
        mu = C.counting_weights(CyclicWord.of(g), 2, 2)
        scaled = [c * x for x in lengths]
        assert O.intersection_form_rose(scaled, mu) == c * O.intersection_form_rose(lengths, mu)
        G = O.rose(2, lengths)
        assert O.translation_length(G.scaled(c), g) == c * O.translation_length(G, g)

    @given(words2, words2, st.fractions(max_denominator=10), st.fractions(max_denominator=10),
           st.lists(positive_rationals, min_size=2, max_size=2))
    def test_linear(self, g1, g2, c1, c2, lengths):
        m1 = C.counting_weights(CyclicWord.of(g1), 2, 2)
        m2 = C.counting_weights(CyclicWord.of(g2), 2, 2)
        lhs = O.intersection_form_rose(lengths, C.linear_combination([(c1, m1), (c2, m2)]))
        rhs = c1 * O.intersection_form_rose(lengths, m1) + c2 * O.intersection_form_rose(lengths, m2)
        assert lhs == rhs

    def test_rank_mismatch(self):
        with pytest.raises(C.LevelMismatch):
            O.intersection_form_rose([1, 1, 1], C.uniform_weights(2, 1))


class TestFiles:
    def test_bundled(self):
        rose = O.load_graph(O.bundled_graph("rose2.json"))
        assert rose.lengths == {1: 1, 2: 1}
        assert O.translation_length(rose, P("ab")) == 2
        th = O.load_graph(O.bundled_graph("theta.json"))
        assert O.translation_length(th, P("a")) == 2

    def test_round_trip(self, tmp_path):
        G = O.theta([Fraction(1, 3), 2, Fraction(5, 7)])
        path = tmp_path / "g.json"
        O.dump_graph(G, path)
        assert json.loads(path.read_text())["edges"][0]["length"] == "1/3"
        back = O.load_graph(path)
        assert back == G

    def test_length_formats(self, tmp_path):
        data = O.graph_to_dict(O.rose(2, [1, 1]))
        data["edges"][0]["length"] = 0.1
        data["edges"][1]["length"] = "2.5"
        G = O.graph_from_dict(data)
        assert G.lengths == {1: Fraction(1, 10), 2: Fraction(5, 2)}

    def test_parse_error_has_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"rank": 2,\n "vertices": [}')
        with pytest.raises(O.GraphError, match="line 2"):
            O.load_graph(path)

    def test_missing_field(self):
        data = O.graph_to_dict(O.rose(2, [1, 1]))
        del data["edges"][1]["to"]
        with pytest.raises(O.GraphError, match=r"edges\[1\].*'to'"):
            O.graph_from_dict(data)

    def test_degree_two_file_rejected(self, tmp_path):
        data = {
            "rank": 2, "vertices": ["v", "w"], "base": "v",
            "edges": [{"id": 1, "from": "v", "to": "w", "length": 1},
                      {"id": 2, "from": "w", "to": "v", "length": 1},
                      {"id": 3, "from": "v", "to": "v", "length": 1}],
            "marking": [[1, 2], [3]],
        }
        path = tmp_path / "deg2.json"
        path.write_text(json.dumps(data))
        with pytest.raises(O.GraphError, match="'w' has degree 2"):
            O.load_graph(path)
