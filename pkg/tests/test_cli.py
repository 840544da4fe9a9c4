import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from freecurrents import outer_space as O
from freecurrents.cli import ExperimentConfig, UsageError, run_command

SCHEMA = json.loads(resources.files("freecurrents").joinpath("schemas/summary.schema.json").read_text())


def run(tmp_path, *argv):
    code = run_command([*argv, "--out", str(tmp_path)])
    dirs = sorted(p for p in tmp_path.iterdir() if p.is_dir() and p.name.startswith(argv[0]))
    return code, dirs


def summary(d: Path) -> dict:
    s = json.loads((d / "summary.json").read_text())
    jsonschema.validate(s, SCHEMA)
    return s


def files(d: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


class TestSubcommands:
    def test_dim(self, tmp_path, capsys):
        code, [d] = run(tmp_path, "dim", "--rank", "2", "--level", "2")
        out = capsys.readouterr().out
        assert code == 0
        assert "d(M)=12" in out and "dim Z~_2=4" in out
        assert summary(d)["results"]["dimension"] == 4

    def test_weights(self, tmp_path, capsys):
        code, [d] = run(tmp_path, "weights", "--word", "abAB", "--level", "2")
        assert code == 0
        lines = (d / "weights.csv").read_text().splitlines()
        assert lines[0].startswith("# config: ")
        assert lines[1] == "word,weight"
        table = dict(line.split(",") for line in lines[2:])
        # windows around the circle of abAB: ab, bA, AB, Ba; weight(v) counts v and v^-1
        assert (table["ab"], table["aB"], table["AB"], table["aa"]) == ("1/1", "1/1", "1/1", "0/1")
        assert summary(d)["results"]["member"] is True

    def test_walk_deterministic(self, tmp_path):
        code, [d] = run(tmp_path, "walk", "--rank", "2", "--seed", "7", "--length", "100")
        first = files(d)
        code2, [d2] = run(tmp_path, "walk", "--rank", "2", "--seed", "7", "--length", "100")
        assert code == code2 == 0 and d == d2
        assert files(d2) == first
        text = (d / "trajectory.txt").read_text().splitlines()
        assert text[0] == "rank=2 seed=7 source=random"
        assert len("".join(text[1:])) == 100

    def test_different_configs_different_dirs(self, tmp_path):
        run(tmp_path, "walk", "--seed", "1", "--length", "10")
        run(tmp_path, "walk", "--seed", "2", "--length", "10")
        assert len(list(tmp_path.iterdir())) == 2

    def test_rank_experiment(self, tmp_path):
        code, [d] = run(tmp_path, "rank-experiment", "--level", "2", "--seed", "0", "--seed", "1",
                        "--budget", "2000")
        s = summary(d)
        assert code == 0 and s["status"] == "saturated"
        assert [r["seed"] for r in s["results"]] == [0, 1]
        lines = (d / "span.csv").read_text().splitlines()
        assert lines[1] == "seed,n,rank,target_dim,saturated"

    def test_rank_experiment_not_saturated(self, tmp_path):
        code, [d] = run(tmp_path, "rank-experiment", "--level", "2", "--n0", "5", "--budget", "5")
        assert code == 1
        assert summary(d)["status"] == "not-saturated"

    def test_rank_experiment_parallel_matches_serial(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        argv = ["rank-experiment", "--level", "2", "--seed", "3", "--seed", "4", "--budget", "500"]
        assert run_command(argv + ["--out", str(a)]) == 0
        assert run_command(argv + ["--jobs", "2", "--out", str(b)]) == 0
        [da], [db] = list(a.iterdir()), list(b.iterdir())
        assert da.name == db.name and files(da) == files(db)

    def test_approx(self, tmp_path):
        code, [d] = run(tmp_path, "approx", "--word", "ab", "--level", "2", "--n0", "10", "--eps", "1/4")
        s = summary(d)
        assert code == 0 and s["status"] == "ok"
        assert s["results"]["block_identity_all"] is True
        err = s["results"]["error"]
        num, den = map(int, err.split("/"))
        assert num * 4 <= den
        assert (d / "error.csv").read_text().splitlines()[1] == "n,error"

    def test_approx_budget(self, tmp_path):
        code, [d] = run(tmp_path, "approx", "--word", "ab", "--eps", "1/1000", "--max-n", "2")
        assert code == 1 and summary(d)["status"] == "budget-exhausted"

    def test_recover_data(self, tmp_path):
        data = tmp_path / "data.csv"
        data.write_text("word,length\na,2\nab,5\n")
        code, [d] = run(tmp_path, "recover", "--graph", str(O.bundled_graph("rose2.json")), "--data", str(data))
        s = summary(d)
        assert code == 0 and s["status"] == "unique"
        assert s["results"]["lengths"] == {"1": "2/1", "2": "3/1"}

    def test_recover_truth(self, tmp_path):
        truth = tmp_path / "truth.json"
        O.dump_graph(O.rose(2, [3, 7]), truth)
        code, [d] = run(tmp_path, "recover", "--graph", str(O.bundled_graph("rose2.json")), "--truth", str(truth))
        assert code == 0
        assert summary(d)["results"]["lengths"] == {"1": "3/1", "2": "7/1"}

    def test_recover_not_unique(self, tmp_path):
        data = tmp_path / "data.csv"
        data.write_text("word,length\nab,5\naB,5\n")
        code, [d] = run(tmp_path, "recover", "--graph", str(O.bundled_graph("rose2.json")), "--data", str(data))
        assert code == 1 and summary(d)["results"]["nullity"] == 1

    def test_recover_inconsistent(self, tmp_path, capsys):
        data = tmp_path / "data.csv"
        data.write_text("word,length\na,2\naa,5\n")
        code, [d] = run(tmp_path, "recover", "--graph", str(O.bundled_graph("rose2.json")), "--data", str(data))
        assert code == 2
        assert summary(d)["results"]["witness"] == "aa"

    def test_compare(self, tmp_path):
        code, [d] = run(tmp_path, "compare", "--graph1", str(O.bundled_graph("rose2.json")),
                        "--graph2", str(O.bundled_graph("theta.json")))
        s = summary(d)
        assert code == 0 and s["status"] == "separated"
        assert s["results"]["separating_n"] == 1
        assert (s["results"]["length1"], s["results"]["length2"]) == ("1/1", "2/1")

    def test_compare_same(self, tmp_path):
        g = str(O.bundled_graph("theta.json"))
        code, [d] = run(tmp_path, "compare", "--graph1", g, "--graph2", g)
        assert code == 0 and summary(d)["status"] == "agree-up-to-budget"

    def test_freq(self, tmp_path):
        code, [d] = run(tmp_path, "freq", "--level", "2", "--n", "10000")
        assert code == 0
        lines = (d / "frequency.csv").read_text().splitlines()
        assert lines[1] == "word,count,empirical,target,deviation"
        assert len(lines) == 2 + 12


class TestErrors:
    def test_degree_two_graph(self, tmp_path, capsys):
        bad = tmp_path / "deg2.json"
        bad.write_text(json.dumps({
            "rank": 2, "vertices": ["v", "w"], "base": "v",
            "edges": [{"id": 1, "from": "v", "to": "w", "length": 1},
                      {"id": 2, "from": "w", "to": "v", "length": 1},
                      {"id": 3, "from": "v", "to": "v", "length": 1}],
            "marking": [[1, 2], [3]],
        }))
        code = run_command(["compare", "--graph1", str(bad), "--graph2", str(bad), "--out", str(tmp_path)])
        err = capsys.readouterr().err
        assert code == 2
        assert "'w' has degree 2" in err and "Traceback" not in err

    @pytest.mark.parametrize("argv", [
        ["dim", "--rank", "1"],
        ["dim", "--level", "x"],
        ["weights", "--word", "ab1"],
        ["walk", "--length", "0"],
        ["rank-experiment", "--n0", "10", "--budget", "5"],
        ["rank-experiment", "--mode", "float", "--tol", "2"],
        ["approx", "--word", "abA"],
        ["nosuch"],
        ["recover", "--graph", "/nonexistent.json", "--data", "/nonexistent.csv"],
    ])
    def test_invalid_input_exit_two(self, tmp_path, capsys, argv):
        assert run_command(argv + ["--out", str(tmp_path)]) == 2
        assert "Traceback" not in capsys.readouterr().err

    def test_config_validation(self):
        with pytest.raises(UsageError):
            ExperimentConfig(rank=2, level=0)
        with pytest.raises(UsageError):
            ExperimentConfig(tol=0.0)

    def test_console_entry_point(self, tmp_path):
        res = subprocess.run([sys.executable, "-m", "freecurrents.cli", "dim", "--level", "3", "--out", str(tmp_path)],
                             capture_output=True, text=True)
        assert res.returncode == 0 and "d(M)=36" in res.stdout
