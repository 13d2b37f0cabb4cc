import json
from math import comb

import pytest

from inducibility.cli import config_argv, main, read_config
from inducibility.graphs import parse_graph, read_graph, write_graph


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_usage_errors(capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "realize", "--n", "10")[0] == 2  # no row or spec
    assert run(capsys, "realize", "--row", "31", "--n", "10")[0] == 2
    assert run(capsys, "search", "--row", "24", "--n", "9")[0] == 2
    assert run(capsys, "count", "/nonexistent/graph.txt")[0] == 2
    code, _, err = run(capsys, "optimize", "--formula", "c99")
    assert code == 2 and "unknown formula" in err


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0].startswith("# config: ")
    assert len(lines) == 2 + 42
    rows = " ".join(l.split(",")[-1] for l in lines[2:]).split()
    assert sorted(map(int, rows)) == list(range(1, 31))


def test_count(capsys, tmp_path):
    f = tmp_path / "g.txt"
    write_graph(parse_graph("5:1223344551"), f)
    code, out, _ = run(capsys, "count", str(f))
    lines = out.strip().splitlines()
    assert code == 0 and lines[1].startswith("class_id,")
    assert sum(int(l.split(",")[2]) for l in lines[2:]) == comb(5, 4)


def test_realize_file_and_replay(capsys, tmp_path):
    f = tmp_path / "g.bin"
    assert run(capsys, "realize", "--row", "14", "--n", "40", "--seed", "3", "--out", str(f))[0] == 0
    G = read_graph(f)
    assert G.n == 40
    assert read_config(f)["seed"] == 3
    first = f.read_bytes()
    f.unlink()
    assert run(capsys, "--replay", str(tmp_path / "g.bin.config.json"))[0] == 0
    assert f.read_bytes() == first


def test_density_curve(capsys):
    code, out, _ = run(capsys, "density-curve", "--row", "13", "--ns", "64,128,256,512", "--seed", "7")
    last = out.strip().splitlines()[-1].split(",")
    assert code == 0 and last[0] == "512"
    assert abs(float(last[1]) - 2 / 21) <= 0.01


def test_optimize_c15(capsys):
    code, out, _ = run(capsys, "optimize", "--formula", "c15")
    res = json.loads(out)["results"][0]
    assert code == 0
    assert abs(res["value"] - 0.189000) <= 1e-6
    assert abs(res["argmax"][0] - 0.25202) <= 1e-3


def test_search_and_check(capsys):
    code, out, _ = run(capsys, "search", "--row", "24", "--n", "6")
    assert code == 0 and json.loads(out)["max_count"] == 9
    code, out, _ = run(capsys, "search", "--row", "16", "--n", "12", "--method", "local", "--budget", "4000")
    assert code == 0 and json.loads(out)["max_count"] == 225
    code, out, _ = run(capsys, "check-ineq", "--n", "5")
    assert code == 0 and json.loads(out)["passed"]


def test_certificate_roundtrip(capsys, tmp_path):
    f = tmp_path / "cert.json"
    assert run(capsys, "make-cert", "--target", "4:12233414", "--method", "trivial", "--out", str(f))[0] == 0
    code, out, _ = run(capsys, "verify-cert", str(f))
    assert code == 0 and json.loads(out)["accepted"]
    d = json.loads(f.read_text())
    num, den = map(int, d["lambda"].split("/"))
    d["lambda"] = f"{num * 10**6 - den}/{den * 10**6}"
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(d))
    code, out, _ = run(capsys, "verify-cert", str(bad))
    v = json.loads(out)
    assert code == 1 and v["reason"] == "inequality fails" and parse_graph(v["witness"]).n == 5
    bad.write_text("{not json")
    assert run(capsys, "verify-cert", str(bad))[0] == 1


@pytest.mark.parametrize("argv", [
    ["catalog"],
    ["check-ineq", "--n", "4"],
    ["search", "--target", "4:12233441", "--n", "8", "--method", "local", "--budget", "300", "--seed", "9"],
    ["density-curve", "--row", "28", "--ns", "40,80", "--seed", "5", "--mode", "sampled", "--samples", "2000"],
])
def test_replay_is_byte_identical(capsys, tmp_path, argv):
    f = tmp_path / "report"
    assert run(capsys, *argv, "--out", str(f))[0] == 0
    first = f.read_bytes()
    f.unlink()
    cfg = read_config_from_bytes(first, tmp_path)
    assert run(capsys, *config_argv(cfg))[0] == 0
    assert f.read_bytes() == first


def read_config_from_bytes(data: bytes, tmp_path):
    p = tmp_path / "copy"
    p.write_bytes(data)
    return read_config(p)


def test_table1_quick(capsys):
    code, out, _ = run(capsys, "table1")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 2 + 30
    assert all(l.endswith("PASS") for l in lines[2:])
