"""Command-line front end.

Every run writes its artifacts to ``<out>/<command>-<hash>/`` where the hash
is taken over the full configuration, so identical configurations land in
the same directory with byte-identical files.  Each directory holds a
``summary.json`` (see ``schemas/summary.schema.json``) plus CSV artifacts
whose first line is a ``# config: {...}`` comment.

Exit status: 0 success, 1 experiment did not reach its goal (non-saturation,
budget exhaustion, non-unique recovery), 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from . import currents as C
from . import outer_space as O
from . import rigidity as R
from . import walks as K
from . import words as W

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    rank: int = 2
    level: int = 1
    seeds: tuple = (0,)
    source: str = "random"
    n0: int = 1
    budget: int = 1000
    mode: str = "exact"
    tol: float = 1e-9
    out: str = "runs"

    def __post_init__(self):
        if self.rank < 2:
            raise UsageError(f"--rank must be >= 2, got {self.rank}")
        if self.level < 1:
            raise UsageError(f"--level must be >= 1, got {self.level}")
        if not 1 <= self.n0 <= self.budget:
            raise UsageError(f"need 1 <= --n0 <= --budget, got n0={self.n0}, budget={self.budget}")
        if self.source not in ("random", "universal"):
            raise UsageError(f"--source must be random or universal, got {self.source!r}")
        if self.mode not in ("exact", "float"):
            raise UsageError(f"--mode must be exact or float, got {self.mode!r}")
        if not 0 < self.tol < 1:
            raise UsageError(f"--tol must lie in (0, 1), got {self.tol}")


def _jsonable(x):
    if isinstance(x, Fraction):
        return C.format_rational(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


class Run:
    """Output directory and artifact writer for one command invocation."""

    def __init__(self, command: str, config: dict, out: str):
        self.command = command
        self.config = _jsonable(config)
        digest = hashlib.sha256(json.dumps([command, self.config], sort_keys=True).encode()).hexdigest()[:12]
        self.dir = Path(out) / f"{command}-{digest}"
        self.dir.mkdir(parents=True, exist_ok=True)
        self.artifacts: list[str] = []

    def _config_line(self) -> str:
        return "# config: " + json.dumps({"command": self.command, **self.config}, sort_keys=True) + "\n"

    def write_csv(self, name: str, header: list, rows) -> str:
        buf = io.StringIO()
        buf.write(self._config_line())
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([C.format_rational(x) if isinstance(x, Fraction) else x for x in row])
        return self.write_text(name, buf.getvalue())

    def write_text(self, name: str, text: str) -> str:
        (self.dir / name).write_text(text)
        self.artifacts.append(name)
        return text

    def finish(self, status: str, exit_code: int, results) -> int:
        summary = {
            "command": self.command,
            "config": self.config,
            "status": status,
            "exit_code": exit_code,
            "artifacts": sorted(self.artifacts),
            "results": _jsonable(results),
        }
        (self.dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        print(f"[{status}] artifacts in {self.dir}")
        return exit_code


def _trajectory(source: str, rank: int, seed: int | None) -> K.Trajectory:
    return K.Trajectory(source, rank, seed if source == "random" else None)


# -- subcommands ---------------------------------------------------------------------

def cmd_walk(a) -> int:
    cfg = {"rank": a.rank, "seed": a.seed, "source": a.source, "length": a.length}
    if a.length < 1:
        raise UsageError("--length must be >= 1")
    xi = _trajectory(a.source, a.rank, a.seed).extend(a.length)
    run = Run("walk", cfg, a.out)
    text = run.write_text("trajectory.txt", xi.dumps())
    sys.stdout.write(text)
    return run.finish("ok", EXIT_OK, {"length": a.length, "cyclic_length": W.cyclic_length(xi.letters)})


def cmd_weights(a) -> int:
    w = W.parse_word(a.word, a.rank, reduced=False)
    rank = a.rank or max(2, max((abs(x) for x in w), default=2))
    cfg = {"word": a.word, "rank": rank, "level": a.level}
    c = W.CyclicWord.of(w)
    p = C.counting_weights(c, a.level, rank) if c else C.WeightVector.zero(rank, a.level)
    run = Run("weights", cfg, a.out)
    body = p.to_csv()
    run.write_text("weights.csv", run._config_line() + body)
    sys.stdout.write(body)
    member = C.check_membership(p)
    return run.finish("ok", EXIT_OK, {"cyclic_word": str(c) if c else "", "member": member.ok})


def cmd_dim(a) -> int:
    cfg = {"rank": a.rank, "level": a.level}
    d = W.sphere_size(a.rank, a.level)
    space = C.level_space(a.rank, a.level)
    run = Run("dim", cfg, a.out)
    print(f"d(M)={d}")
    print(f"dim Z~_{a.level}={space.dimension}")
    return run.finish("ok", EXIT_OK, {"sphere_size": d, "dimension": space.dimension,
                                       "constraints": len(space.matrix), "constraint_rank": space.matrix_rank})


def _span_one(args) -> dict:
    seed, cfg = args
    xi = _trajectory(cfg.source, cfg.rank, seed)
    rep = R.prefix_span_experiment(xi, cfg.n0, cfg.level, cfg.budget, mode=cfg.mode, tol=cfg.tol)
    return {"seed": seed, "rank": rep.rank, "target_dim": rep.target_dim, "rows": rep.rows_consumed,
            "basis": list(rep.basis), "saturated": rep.saturated, "history": [list(h) for h in rep.history]}


def _parallel_map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def cmd_rank_experiment(a) -> int:
    cfg = ExperimentConfig(a.rank, a.level, tuple(a.seed or [0]), a.source, a.n0, a.budget, a.mode, a.tol, a.out)
    seeds = cfg.seeds if cfg.source == "random" else (None,)
    results = _parallel_map(_span_one, [(s, cfg) for s in seeds], a.jobs)
    config = {k: v for k, v in asdict(cfg).items() if k != "out"}
    run = Run("rank-experiment", config, a.out)
    rows = []
    for r in results:
        for n, rk in r["history"]:
            rows.append([r["seed"] if r["seed"] is not None else "universal", n, rk, r["target_dim"],
                         str(rk == r["target_dim"]).lower()])
    run.write_csv("span.csv", ["seed", "n", "rank", "target_dim", "saturated"], rows)
    for r in results:
        r.pop("history")
    ok = all(r["saturated"] for r in results)
    print(f"saturated in {sum(r['saturated'] for r in results)}/{len(results)} runs")
    return run.finish("saturated" if ok else "not-saturated", EXIT_OK if ok else EXIT_FAIL, results)


def cmd_approx(a) -> int:
    w = W.parse_cyclic(a.word, a.rank)
    eps = C.parse_rational(a.eps) if a.eps else Fraction(1, 2 ** a.level)
    cfg = {"word": a.word, "rank": a.rank, "level": a.level, "n0": a.n0, "eps": eps,
           "source": a.source, "seed": a.seed if a.source == "random" else None, "max_n": a.max_n}
    if a.n0 < 1:
        raise UsageError("--n0 must be >= 1")
    xi = _trajectory(a.source, a.rank, a.seed)
    run = Run("approx", cfg, a.out)
    try:
        cert = R.approximate_target(xi, w, a.level, a.n0, eps, max_n=a.max_n)
    except R.BudgetExhausted as exc:
        table = exc.best or ()
        run.write_csv("error.csv", ["n", "error"], [[s.n, s.error] for s in table])
        print(str(exc))
        return run.finish("budget-exhausted", EXIT_FAIL, {"message": str(exc)})
    run.write_csv("error.csv", ["n", "error"], [[s.n, s.error] for s in cert.table])
    res = {
        "target": cert.target, "v": cert.v, "s": cert.s, "t": cert.t, "n": cert.n,
        "short_prefix": cert.short_prefix, "long_prefix": cert.long_prefix,
        "coefficients": [[n, c] for n, c in cert.coefficients], "error": cert.error,
        "block_identity_all": all(s.block_identity for s in cert.table),
        "displayed_identity_all": all(s.displayed_identity for s in cert.table),
        "splices": [list(s) for s in cert.trajectory.splices] if cert.trajectory else [],
    }
    print(f"n={cert.n} error={cert.error} prefixes n1={cert.short_prefix} n2={cert.long_prefix}")
    return run.finish("ok", EXIT_OK, res)


def _read_length_data(path: str, rank: int) -> list:
    rows = [r for r in csv.reader(ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#"))]
    if not rows or rows[0] != ["word", "length"]:
        raise UsageError(f"{path}: expected CSV header 'word,length'")
    return [(W.parse_word(w, rank), C.parse_rational(ell)) for w, ell in rows[1:]]


def cmd_recover(a) -> int:
    topo = O.load_graph(a.graph, require_lengths=False)
    cfg = {"graph": O.graph_to_dict(topo)}
    if a.data:
        data = _read_length_data(a.data, topo.rank)
        cfg["data"] = [[W.format_word(g), ell] for g, ell in data]
    elif a.truth:
        truth = O.load_graph(a.truth)
        xi = _trajectory(a.source, truth.rank, a.seed)
        data = R.prefix_length_data(truth, xi, a.n0, a.count)
        cfg.update({"truth": O.graph_to_dict(truth), "source": a.source, "seed": a.seed, "n0": a.n0, "count": a.count})
    else:
        raise UsageError("recover needs --data or --truth")
    run = Run("recover", cfg, a.out)
    try:
        rec = R.recover_metric(topo, data)
    except R.InconsistentLengths as exc:
        print(f"error: {exc}", file=sys.stderr)
        return run.finish("inconsistent", EXIT_INVALID, {"witness": W.format_word(exc.witness)})
    run.write_csv("lengths.csv", ["edge", "length"], [[e, x] for e, x in rec.lengths.items()])
    for e, x in rec.lengths.items():
        print(f"edge {e}: {C.format_rational(x)}")
    res = {"unique": rec.unique, "nullity": rec.nullity, "lengths": {str(e): x for e, x in rec.lengths.items()}}
    return run.finish("unique" if rec.unique else "not-unique", EXIT_OK if rec.unique else EXIT_FAIL, res)


def cmd_compare(a) -> int:
    t1, t2 = O.load_graph(a.graph1), O.load_graph(a.graph2)
    if t1.rank != t2.rank:
        raise UsageError("graphs have different ranks")
    cfg = {"graph1": O.graph_to_dict(t1), "graph2": O.graph_to_dict(t2), "source": a.source,
           "seed": a.seed if a.source == "random" else None, "budget": a.budget}
    xi = _trajectory(a.source, t1.rank, a.seed)
    cmp = R.distinguish_trees(t1, t2, xi, a.budget)
    run = Run("compare", cfg, a.out)
    if cmp.agree:
        print(f"agree up to budget {a.budget}")
        return run.finish("agree-up-to-budget", EXIT_OK, {"separating_n": None})
    print(f"separated at n={cmp.separating_n}: {cmp.lengths[0]} vs {cmp.lengths[1]}")
    return run.finish("separated", EXIT_OK, {"separating_n": cmp.separating_n,
                                             "length1": cmp.lengths[0], "length2": cmp.lengths[1],
                                             "prefix": W.format_word(xi.prefix(cmp.separating_n))})


def cmd_freq(a) -> int:
    cfg = {"rank": a.rank, "level": a.level, "source": a.source,
           "seed": a.seed if a.source == "random" else None, "n": a.n}
    xi = _trajectory(a.source, a.rank, a.seed).extend(a.n)
    rep = K.frequency_report(xi, a.n, a.level)
    run = Run("freq", cfg, a.out)
    run.write_text("frequency.csv", run._config_line() + rep.to_csv())
    print(f"max deviation {float(rep.max_deviation):.6f} from 1/{W.sphere_size(a.rank, a.level)}")
    return run.finish("ok", EXIT_OK, {"max_deviation": rep.max_deviation, "target": rep.target,
                                      "cyclic_length": W.cyclic_length(xi.letters)})


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freecurrents", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, rank=True, level=False, seed=True, source=True):
        sp.add_argument("--out", default="runs", help="parent directory for run artifacts")
        if rank:
            sp.add_argument("--rank", type=int, default=2)
        if level:
            sp.add_argument("--level", type=int, default=1)
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        if source:
            sp.add_argument("--source", choices=["random", "universal"], default="random")

    sp = sub.add_parser("walk", help="write a trajectory file")
    common(sp)
    sp.add_argument("--length", type=int, required=True)
    sp.set_defaults(func=cmd_walk)

    sp = sub.add_parser("weights", help="level-M counting weights of a word's conjugacy class")
    common(sp, rank=False, level=True, seed=False, source=False)
    sp.add_argument("--rank", type=int, default=None)
    sp.add_argument("--word", required=True)
    sp.set_defaults(func=cmd_weights)

    sp = sub.add_parser("dim", help="sphere size and dimension of the signed level space")
    common(sp, level=True, seed=False, source=False)
    sp.set_defaults(func=cmd_dim)

    sp = sub.add_parser("rank-experiment", help="span of prefix counting currents")
    common(sp, level=True, seed=False)
    sp.add_argument("--seed", type=int, action="append", help="repeatable")
    sp.add_argument("--n0", type=int, default=1)
    sp.add_argument("--budget", type=int, default=1000)
    sp.add_argument("--mode", choices=["exact", "float"], default="exact")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_rank_experiment)

    sp = sub.add_parser("approx", help="two-prefix approximation of a counting current")
    common(sp, level=True)
    sp.set_defaults(source="universal", level=2)
    sp.add_argument("--word", required=True)
    sp.add_argument("--n0", type=int, default=1)
    sp.add_argument("--eps", default=None, help="rational, default 2^-level")
    sp.add_argument("--max-n", type=int, default=200)
    sp.set_defaults(func=cmd_approx)

    sp = sub.add_parser("recover", help="recover edge lengths from length data")
    common(sp, rank=False)
    sp.add_argument("--graph", required=True, help="graph file; lengths, if any, are ignored")
    sp.add_argument("--data", help="CSV word,length")
    sp.add_argument("--truth", help="graph whose lengths generate the data on walk prefixes")
    sp.add_argument("--n0", type=int, default=1)
    sp.add_argument("--count", type=int, default=50)
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("compare", help="first walk prefix separating two trees")
    common(sp, rank=False)
    sp.add_argument("--graph1", required=True)
    sp.add_argument("--graph2", required=True)
    sp.add_argument("--budget", type=int, default=100)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("freq", help="subword frequencies along a prefix")
    common(sp, level=True)
    sp.add_argument("--n", type=int, required=True)
    sp.set_defaults(func=cmd_freq)
    return p


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, W.WordError, O.GraphError, K.TrajectoryError, C.CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
