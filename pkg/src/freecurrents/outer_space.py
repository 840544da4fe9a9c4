"""Points of unprojectivized Outer space as marked metric graphs.

Oriented edges are nonzero integers: a positive id ``e`` names an edge of
the fixed orientation and ``-e`` its reverse.  Edge paths are therefore
sequences of signed ints, and free/cyclic reduction of paths reuses the word
routines.  A marking sends generator ``a_i`` to a reduced edge loop at the
base vertex; a tuple of loops is accepted as a marking when Stallings folding
shows it generates the whole fundamental group and the graph has the right
Betti number.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from . import words as W
from .currents import LevelMismatch, WeightVector, format_rational, project_to


class GraphError(ValueError):
    """Invalid marked metric graph; ``issues`` lists every failed check."""

    def __init__(self, message: str, issues: Sequence[str] = ()):
        super().__init__(message)
        self.issues = list(issues)


@dataclass(frozen=True)
class MarkedMetricGraph:
    rank: int
    vertices: tuple
    edges: Mapping  # positive edge id -> (origin, terminus)
    base: object
    marking: tuple  # one tuple of signed edge ids per generator
    lengths: Mapping | None = None  # positive edge id -> Fraction; None for bare topology

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", dict(self.edges))
        object.__setattr__(self, "marking", tuple(tuple(loop) for loop in self.marking))
        if self.lengths is not None:
            object.__setattr__(self, "lengths", {e: Fraction(x) for e, x in self.lengths.items()})

    def origin(self, e: int):
        o, t = self.edges[abs(e)]
        return o if e > 0 else t

    def terminus(self, e: int):
        o, t = self.edges[abs(e)]
        return t if e > 0 else o

    def degree(self, v) -> int:
        return sum((o == v) + (t == v) for o, t in self.edges.values())

    @property
    def positive_edges(self) -> list[int]:
        return sorted(self.edges)

    @property
    def betti(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def length(self, e: int) -> Fraction:
        if self.lengths is None:
            raise GraphError("graph has no metric")
        return self.lengths[abs(e)]

    def with_lengths(self, lengths: Mapping) -> "MarkedMetricGraph":
        return MarkedMetricGraph(self.rank, self.vertices, self.edges, self.base, self.marking, dict(lengths))

    def scaled(self, c) -> "MarkedMetricGraph":
        c = Fraction(c)
        if c <= 0:
            raise ValueError("scale factor must be positive")
        return self.with_lengths({e: c * x for e, x in self.lengths.items()})

    def volume(self) -> Fraction:
        return sum(self.lengths.values(), Fraction(0))

    def normalized(self) -> "MarkedMetricGraph":
        """Rescaled to total edge length 1 (the projectivized slice)."""
        return self.scaled(1 / self.volume())


# -- builders ------------------------------------------------------------------

def rose(rank: int, lengths: Sequence) -> MarkedMetricGraph:
    """Wedge of ``rank`` circles, generator i running once around petal i."""
    W.check_rank(rank)
    if len(lengths) != rank:
        raise GraphError(f"rose of rank {rank} needs {rank} lengths, got {len(lengths)}")
    fr = [Fraction(x) for x in lengths]
    bad = [i + 1 for i, x in enumerate(fr) if x <= 0]
    if bad:
        raise GraphError(f"nonpositive length on petal(s) {bad}")
    return MarkedMetricGraph(
        rank,
        ("v",),
        {i: ("v", "v") for i in range(1, rank + 1)},
        "v",
        tuple((i,) for i in range(1, rank + 1)),
        {i: fr[i - 1] for i in range(1, rank + 1)},
    )


def theta(lengths: Sequence = (1, 1, 1)) -> MarkedMetricGraph:
    """Theta graph: three edges u -> v, marking a = e1 e2^-1, b = e1 e3^-1."""
    return MarkedMetricGraph(
        2,
        ("u", "v"),
        {1: ("u", "v"), 2: ("u", "v"), 3: ("u", "v")},
        "u",
        ((1, -2), (1, -3)),
        {i + 1: Fraction(x) for i, x in enumerate(lengths)},
    )


# -- validation ----------------------------------------------------------------

@dataclass
class Diagnostics:
    issues: list = field(default_factory=list)
    witness: str = ""

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok


def _connected(G: MarkedMetricGraph) -> bool:
    if not G.vertices:
        return False
    adj = defaultdict(set)
    for o, t in G.edges.values():
        adj[o].add(t)
        adj[t].add(o)
    seen = {G.vertices[0]}
    stack = [G.vertices[0]]
    while stack:
        for y in adj[stack.pop()]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(G.vertices)


def fold_marking(G: MarkedMetricGraph) -> tuple[int, int, set, set]:
    """Stallings-fold the wedge of marking loops over ``G``.

    Returns ``(n_vertices, betti, vertex_images, edge_images)`` of the folded
    graph after pruning hanging trees away from the base point.  The image
    sets hold G-vertices and positive G-edges that the core covers.
    """
    parent: dict = {}
    image: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def new(gv):
        k = len(parent)
        parent[k] = k
        image[k] = gv
        return k

    out: dict = defaultdict(dict)
    pending: list = []
    h0 = new(G.base)
    for loop in G.marking:
        cur = h0
        for i, e in enumerate(loop):
            nxt = h0 if i == len(loop) - 1 else new(G.terminus(e))
            pending.append((cur, e, nxt))
            pending.append((nxt, -e, cur))
            cur = nxt

    while pending:
        u, lab, w = pending.pop()
        u, w = find(u), find(w)
        t = out[u].get(lab)
        if t is None:
            out[u][lab] = w
            continue
        t = find(t)
        if t == w:
            continue
        keep, gone = (t, w) if t < w else (w, t)
        parent[gone] = keep
        for lab2, tgt in out.pop(gone, {}).items():
            pending.append((keep, lab2, tgt))

    verts = {find(x) for x in parent}
    adj = {v: {lab: find(t) for lab, t in out.get(v, {}).items()} for v in verts}
    base = find(h0)
    changed = True
    while changed:
        changed = False
        for v in list(adj):
            if v != base and len(adj[v]) <= 1:
                for lab, t in adj.pop(v).items():
                    adj[t].pop(-lab, None)
                changed = True
    n_edges = sum(1 for v in adj for lab in adj[v] if lab > 0)
    betti = n_edges - len(adj) + 1
    vimg = {image[v] for v in adj}
    eimg = {lab for v in adj for lab in adj[v] if lab > 0}
    return len(adj), betti, vimg, eimg


def validate_graph(G: MarkedMetricGraph, require_lengths: bool = True) -> Diagnostics:
    diag = Diagnostics()
    issues = diag.issues
    vset = set(G.vertices)
    if len(vset) != len(G.vertices):
        issues.append("duplicate vertex ids")
    for e, (o, t) in G.edges.items():
        if not isinstance(e, int) or e <= 0:
            issues.append(f"edge id {e!r} must be a positive integer")
        for end in (o, t):
            if end not in vset:
                issues.append(f"edge {e} has unknown endpoint {end!r}")
    if G.base not in vset:
        issues.append(f"base vertex {G.base!r} is not a vertex")
    if issues:
        return diag

    if not _connected(G):
        issues.append("graph is not connected")
    for v in G.vertices:
        deg = G.degree(v)
        if deg < 3:
            issues.append(f"vertex {v!r} has degree {deg} < 3")
    if G.betti != G.rank:
        issues.append(f"first Betti number is {G.betti}, expected rank {G.rank}")

    if require_lengths or G.lengths is not None:
        if G.lengths is None:
            issues.append("edge lengths are missing")
        else:
            for e in G.edges:
                if e not in G.lengths:
                    issues.append(f"edge {e} has no length")
                elif G.lengths[e] <= 0:
                    issues.append(f"edge {e} has nonpositive length {G.lengths[e]}")

    loops_ok = True
    if len(G.marking) != G.rank:
        issues.append(f"marking has {len(G.marking)} loops, expected {G.rank}")
        loops_ok = False
    for i, loop in enumerate(G.marking):
        name = W.format_letter(i + 1)
        if not loop:
            issues.append(f"marking loop of {name} is empty")
            loops_ok = False
            continue
        if any(abs(e) not in G.edges for e in loop):
            issues.append(f"marking loop of {name} uses unknown edges")
            loops_ok = False
            continue
        if G.origin(loop[0]) != G.base or G.terminus(loop[-1]) != G.base:
            issues.append(f"marking loop of {name} does not start and end at the base vertex")
            loops_ok = False
        for j in range(len(loop) - 1):
            if G.terminus(loop[j]) != G.origin(loop[j + 1]):
                issues.append(f"marking loop of {name} is not a path at step {j}")
                loops_ok = False
            elif loop[j + 1] == -loop[j]:
                issues.append(f"marking loop of {name} backtracks at step {j}")
                loops_ok = False

    if loops_ok and not issues:
        nv, betti, vimg, eimg = fold_marking(G)
        missing = sorted(set(G.edges) - eimg)
        if nv == len(G.vertices) and betti == G.rank and not missing and vimg == set(G.vertices):
            diag.witness = f"marking folds onto G isomorphically ({nv} vertices, Betti {betti})"
        else:
            diag.witness = f"folded core has {nv} vertices, Betti {betti}, misses edges {missing}"
            issues.append(f"marking is not surjective on pi_1: {diag.witness}")
    return diag


def check_graph(G: MarkedMetricGraph, require_lengths: bool = True) -> MarkedMetricGraph:
    diag = validate_graph(G, require_lengths)
    if not diag.ok:
        raise GraphError("invalid marked graph:\n  " + "\n  ".join(diag.issues), diag.issues)
    return G


# -- loops and lengths -------------------------------------------------------------

@dataclass(frozen=True)
class EdgeLoop:
    """Reduced cyclic edge path, in canonical rotation."""

    edges: tuple

    def __len__(self) -> int:
        return len(self.edges)


def loop_of(G: MarkedMetricGraph, g: Sequence[int]) -> EdgeLoop | None:
    """Reduced edge loop representing the conjugacy class of ``g``; None for g = 1."""
    path: list[int] = []
    for x in g:
        if abs(x) > G.rank:
            raise W.WordError(f"letter {W.format_letter(x)} exceeds rank {G.rank}")
        loop = G.marking[abs(x) - 1]
        path.extend(loop if x > 0 else W.invert(loop))
    core, _ = W.cyclic_reduce(W.free_reduce(path))
    return EdgeLoop(W.least_rotation(core)) if core else None


def translation_length(G: MarkedMetricGraph, g: Sequence[int]) -> Fraction:
    loop = loop_of(G, g)
    if loop is None:
        return Fraction(0)
    return sum((G.lengths[abs(e)] for e in loop.edges), Fraction(0))


def edge_occurrence_vector(G: MarkedMetricGraph, g: Sequence[int]) -> dict:
    """Traversals of each positive edge (either direction) by the loop of ``g``."""
    loop = loop_of(G, g)
    if loop is None:
        raise W.WordError("the identity has no loop")
    c = Counter(abs(e) for e in loop.edges)
    return {e: c.get(e, 0) for e in G.positive_edges}


def intersection_form_rose(lengths: Sequence, mu: WeightVector) -> Fraction:
    """<T, mu> for the rose with the given petal lengths.

    ``mu`` is projected to level 1 and paired edge by edge:
    sum_i <a_i, mu> L(a_i).  Linear in ``mu``; ``mu`` may be signed.
    """
    fr = [Fraction(x) for x in lengths]
    if len(fr) != mu.rank:
        raise LevelMismatch(f"{len(fr)} lengths for a rank {mu.rank} current")
    if any(x <= 0 for x in fr):
        raise ValueError("rose lengths must be positive")
    p1 = project_to(mu, 1)
    nums = p1.numerators
    # level-1 order is a1, A1, a2, A2, ...
    return sum((nums[2 * i] * fr[i] for i in range(mu.rank)), Fraction(0)) / p1.denominator


# -- file format ---------------------------------------------------------------

def _parse_length(x, where: str) -> Fraction:
    if isinstance(x, bool):
        raise GraphError(f"{where}: length must be a rational, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # real lengths: shortest decimal repr, converted exactly
        return Fraction(Decimal(repr(x)))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            pass
        try:
            return Fraction(Decimal(x.strip()))
        except InvalidOperation:
            pass
    raise GraphError(f"{where}: invalid length {x!r}")


def graph_from_dict(data: Mapping, require_lengths: bool = True) -> MarkedMetricGraph:
    def need(key):
        if key not in data:
            raise GraphError(f"missing field {key!r}")
        return data[key]

    rank = need("rank")
    if not isinstance(rank, int):
        raise GraphError(f"field 'rank' must be an integer, got {rank!r}")
    vertices = need("vertices")
    if not isinstance(vertices, list):
        raise GraphError("field 'vertices' must be a list")
    edges, lengths = {}, {}
    for k, item in enumerate(need("edges")):
        where = f"edges[{k}]"
        if not isinstance(item, Mapping):
            raise GraphError(f"{where}: expected an object")
        for key in ("id", "from", "to"):
            if key not in item:
                raise GraphError(f"{where}: missing field {key!r}")
        e = item["id"]
        if not isinstance(e, int) or isinstance(e, bool) or e <= 0:
            raise GraphError(f"{where}: id must be a positive integer, got {e!r}")
        if e in edges:
            raise GraphError(f"{where}: duplicate edge id {e}")
        edges[e] = (item["from"], item["to"])
        if "length" in item:
            lengths[e] = _parse_length(item["length"], where)
        elif require_lengths:
            raise GraphError(f"{where}: missing field 'length'")
    marking = need("marking")
    if not isinstance(marking, list) or not all(isinstance(loop, list) for loop in marking):
        raise GraphError("field 'marking' must be a list of lists of signed edge ids")
    for i, loop in enumerate(marking):
        for j, e in enumerate(loop):
            if not isinstance(e, int) or isinstance(e, bool) or e == 0:
                raise GraphError(f"marking[{i}][{j}]: expected a nonzero signed edge id, got {e!r}")
    G = MarkedMetricGraph(rank, vertices, edges, need("base"), marking, lengths if lengths else None)
    return check_graph(G, require_lengths)


def graph_to_dict(G: MarkedMetricGraph) -> dict:
    edges = []
    for e in G.positive_edges:
        item = {"id": e, "from": G.edges[e][0], "to": G.edges[e][1]}
        if G.lengths is not None:
            item["length"] = format_rational(G.lengths[e])
        edges.append(item)
    return {
        "rank": G.rank,
        "vertices": list(G.vertices),
        "edges": edges,
        "base": G.base,
        "marking": [list(loop) for loop in G.marking],
    }


def load_graph(path, require_lengths: bool = True) -> MarkedMetricGraph:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, Mapping):
        raise GraphError(f"{path}: top level must be a JSON object")
    try:
        return graph_from_dict(data, require_lengths)
    except GraphError as exc:
        raise GraphError(f"{path}: {exc}", exc.issues) from exc


def dump_graph(G: MarkedMetricGraph, path) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(G), indent=2) + "\n")


def bundled_graph(name: str) -> Path:
    """Path of a graph file shipped with the package (``rose2.json``, ``theta.json``)."""
    return Path(__file__).parent / "data" / name
