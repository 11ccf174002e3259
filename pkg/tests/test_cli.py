import json

import pytest

from efxlab.cli import run
from efxlab.fixtures import export_fixtures


@pytest.fixture(scope="module")
def fx(tmp_path_factory):
    d = tmp_path_factory.mktemp("fixtures")
    export_fixtures(d)
    return d


def out_of(capsys, argv):
    code = run(argv)
    return code, capsys.readouterr()


def test_count_sparse(fx, capsys):
    code, out = out_of(capsys, ["count", "--instance", str(fx / "sparse_efx_n2.json"), "--property", "efx"])
    assert code == 0
    assert json.loads(out.out)["count"] == 2
    code, out = out_of(capsys, ["count", "--instance", str(fx / "sparse_efx_n2.json"), "--format", "table"])
    assert out.out.strip() == "2"


def test_count_nonexistence_exit_1(fx, capsys):
    code, _ = out_of(capsys, ["count", "--instance", str(fx / "no_wwefx_budget.json"), "--property", "wwefx"])
    assert code == 1


def test_check_exit_codes(fx, tmp_path, capsys):
    good, bad = tmp_path / "good.json", tmp_path / "bad.json"
    good.write_text('{"bundles": [[0], [1, 2, 3]]}')
    bad.write_text('{"bundles": [[0, 1], [2, 3]]}')
    inst = str(fx / "sparse_efx_n2.json")
    assert out_of(capsys, ["check", "--instance", inst, "--allocation", str(good)])[0] == 0
    code, out = out_of(capsys, ["check", "--instance", inst, "--allocation", str(bad)])
    assert code == 1
    assert json.loads(out.out)["witness"] == {"envier": 1, "envied": 0, "good": 1}


def test_solve_and_check_back(fx, tmp_path, capsys):
    inst = str(fx / "unique_wefx_m3.json")
    code, out = out_of(capsys, ["solve", "--instance", inst, "--algorithm", "wefx-po-binary"])
    assert code == 0
    assert json.loads(out.out) == {"bundles": [[1, 2], [0]]}
    a = tmp_path / "a.json"
    a.write_text(out.out)
    assert out_of(capsys, ["check", "--instance", inst, "--allocation", str(a), "--property", "wefx"])[0] == 0


@pytest.mark.parametrize("algo", ["n-plus-2", "cut-and-choose", "leximax-efx-plus", "leximin-pp", "quarter-wefx", "bobw"])
def test_solve_algorithms(fx, capsys, algo):
    code, out = out_of(capsys, ["solve", "--instance", str(fx / "sparse_efx_n2.json"), "--algorithm", algo])
    if algo in ("leximin-pp", "quarter-wefx"):
        assert code == 2  # unweighted instance
        assert "weights" in out.err
    else:
        assert code == 0
        json.loads(out.out)


def test_usage_errors(fx, capsys):
    assert run(["frobnicate"]) == 2
    assert run(["count"]) == 2
    assert run(["count", "--instance", "/nonexistent.json"]) == 2
    assert run(["count", "--instance", str(fx / "unique_wefx_m3.json"), "--property", "alpha-wefx"]) == 2
    assert run(["count", "--instance", str(fx / "unique_wefx_m3.json"), "--property", "alpha-wefx", "--alpha", "5"]) == 2
    capsys.readouterr()


def test_cap_exit_3(fx, capsys, monkeypatch):
    inst = str(fx / "sparse_efx_n4.json")
    assert run(["count", "--instance", inst, "--cap", "10"]) == 3
    monkeypatch.setenv("EFXLAB_CAP", "10")
    assert run(["count", "--instance", inst]) == 3
    assert run(["count", "--instance", inst, "--cap", "5000"]) == 0
    capsys.readouterr()


def test_reduce(tmp_path, capsys):
    g = tmp_path / "g.txt"
    g.write_text("0 0\n0 1\n\n1 0\n1 1\n")
    code, out = out_of(capsys, ["reduce", "--graph", str(g), "--oracle"])
    doc = json.loads(out.out)
    assert code == 0 and doc["matchings"] == doc["permanent"] == 2 and doc["k"] == 2


def test_search_and_enumerate(fx, capsys):
    code, out = out_of(capsys, ["search", "--n", "2", "--samples", "5", "--seed", "1"])
    assert code == 0 and json.loads(out.out)["min_count"] >= 2
    code, out = out_of(capsys, ["enumerate", "--instance", str(fx / "sparse_efx_n2.json")])
    assert len(json.loads(out.out)["allocations"]) == 2


def test_verify_paper(capsys, tmp_path):
    code, out = out_of(capsys, ["verify-paper", "--format", "table", "--export", str(tmp_path / "fx")])
    assert code == 0
    assert out.out.count("PASS") == len(list((tmp_path / "fx").iterdir()))


def test_deterministic_output(fx, capsys):
    argv = ["search", "--n", "3", "--samples", "4", "--seed", "11"]
    first = out_of(capsys, argv)
    assert out_of(capsys, argv) == first
    argv = ["solve", "--instance", str(fx / "sparse_efx_n3.json"), "--algorithm", "n-plus-2"]
    assert out_of(capsys, argv) == out_of(capsys, argv)
