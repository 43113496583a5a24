import csv
import io
import json

import pytest

from discstream.cli import BENCH_HEADER, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "cycle", "6", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "6 2" and len(lines[1:]) == 6
    code, out, _ = run(capsys, "gen", "disjoint_triangles", "9", "3")
    assert len(out.splitlines()) == 10
    code, _, err = run(capsys, "gen", "hexagon", "6", "2")
    assert code == 1 and "usage" in err
    code, _, _ = run(capsys, "gen", "disjoint_triangles", "10", "3")
    assert code == 2
    path = tmp_path / "g.txt"
    assert run(capsys, "gen", "path", "5", "2", "--out", str(path))[0] == 0
    assert path.read_text().startswith("5 2\n0 1\n")


def test_lambda(capsys, tmp_path):
    g = tmp_path / "tri.txt"
    g.write_text("3 2\n0 1\n0 2\n1 2\n")
    code, out, _ = run(capsys, "lambda", "--input", str(g), "--k", "1")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["types"]) == 4
    tri = "k=1;v=3;L=0,1,1;E=0-1,0-2,1-2"
    assert doc["rows"][tri][tri] == {"num": 1, "den": 3}
    assert run(capsys, "lambda", "--input", str(g), "--k", "1")[1] == out
    code, _, err = run(capsys, "lambda", "--gen", "random_d_bounded:60:3:1", "--k", "2",
                       "--policy", "exact", "--exact-cap", "3")
    assert code == 2 and "edges" in err


def test_estimate(capsys):
    code, out, _ = run(capsys, "estimate", "--gen", "cycle:6:2", "--k", "1", "--s", "6")
    assert code == 0
    doc = json.loads(out)
    xs = {t["encoding"]: t["X"] for t in doc["types"]}
    assert xs["k=1;v=3;L=0,1,1;E=0-1,0-2"] == 1.0
    assert doc["config"]["params"]["seed"] == 0
    again = run(capsys, "estimate", "--gen", "cycle:6:2", "--k", "1", "--s", "6")[1]
    assert again == out
    assert run(capsys, "estimate", "--gen", "cycle:6:2", "--k", "1", "--s", "7")[0] == 2
    code, out, _ = run(capsys, "estimate", "--gen", "cycle:6:2", "--k", "1", "--s", "6", "--format", "csv")
    assert out.splitlines()[0] == "encoding,Y,X,X_clamped"
    assert run(capsys, "estimate", "--k", "1")[0] == 1
    for variant in ("single-union", "two-pass"):
        code, out, _ = run(capsys, "estimate", "--gen", "random_d_bounded:100:3", "--k", "2",
                           "--s", "50", "--variant", variant)
        assert code == 0 and json.loads(out)["config"]["extra"]["variant"] == variant


def test_test_subcommand(capsys, tmp_path):
    code, out, _ = run(capsys, "test", "connectivity", "--gen", "spanning_tree_plus_random:600:3:1",
                       "--k", "2", "--s", "600")
    assert code == 0 and json.loads(out)["accept"] is True
    code, out, _ = run(capsys, "test", "connectivity", "--gen", "disjoint_triangles:600:3", "--k", "2", "--s", "300")
    assert json.loads(out)["accept"] is False
    code, out, _ = run(capsys, "test", "cyclefree", "--gen", "path:300:2", "--k", "2", "--s", "300")
    assert json.loads(out)["accept"] is True

    fam = tmp_path / "fam.json"
    fam.write_text(json.dumps({"k": 2, "members": [{"k=2;v=3;L=0,1,1;E=0-1,0-2,1-2": 2}]}))
    code, out, _ = run(capsys, "test", f"family:{fam}", "--gen", "disjoint_triangles:30:2", "--s", "30")
    assert code == 0 and json.loads(out)["accept"] is False
    fam.write_text(json.dumps({"k": 2, "members": [{"k=2;v=3;L=0,1;E=0-1": 2}]}))
    code, _, err = run(capsys, "test", f"family:{fam}", "--gen", "disjoint_triangles:30:2", "--s", "30")
    assert code == 2
    assert run(capsys, "test", "planarity", "--gen", "cycle:6:2")[0] == 1


def test_matching(capsys):
    code, out, _ = run(capsys, "matching", "--gen", "disjoint_edges:40:3", "--s", "40")
    assert code == 0 and json.loads(out)["m_hat"] == 20
    code, out, _ = run(capsys, "matching", "--gen", "empty:30:3", "--s", "10")
    assert json.loads(out)["m_hat"] == 0
    assert run(capsys, "matching", "--gen", "empty:30:3", "--q", "1")[0] == 1


def test_bench(capsys):
    argv = ["bench", "--gen", "random_d_bounded:300:3:2", "--k", "1", "--s-grid", "30,300",
            "--trials", "4", "--no-timing"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == BENCH_HEADER and len(rows) == 9
    small = sorted(float(r[2]) for r in rows[1:] if r[0] == "30")
    large = sorted(float(r[2]) for r in rows[1:] if r[0] == "300")
    assert (small[1] + small[2]) / 2 > (large[1] + large[2]) / 2
    assert run(capsys, *argv)[1] == out
    code, out, _ = run(capsys, "bench", "--gen", "cycle:30:2", "--k", "1", "--trials", "0")
    assert out == ",".join(BENCH_HEADER) + "\n"
