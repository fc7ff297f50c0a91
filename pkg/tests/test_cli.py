import random
from fractions import Fraction

import pytest
from click.testing import CliRunner

from graphquant import checks
from graphquant.cli import main
from graphquant.graphs import canonical_key
from graphquant.starprod import cocycle_graphs
from graphquant.weights import WeightTable, load_table, store_table

from oracles import FROZEN


@pytest.fixture
def run():
    runner = CliRunner()
    return lambda *args, env=None: runner.invoke(main, list(args), env=env)


def test_enumerate_lists_keys(run):
    r = run("enumerate", "--n", "2", "--m", "2", "--outdeg", "2,2")
    assert r.exit_code == 0
    keys = r.output.split()
    assert len(keys) == FROZEN["enumerate_2_2_[2,2]"]
    assert len(set(keys)) == len(keys)


def test_output_is_deterministic(run):
    args = ("bracket", "--x", "n=1;m=2;E=[(1,B1),(1,B2)]", "--y", "n=1;m=1;E=[(1,B1)]")
    assert run(*args).output == run(*args).output


def test_validate(run):
    assert run("validate", "--graph", "n=1;m=2;E=[(1,B1),(1,B2)]").exit_code == 0
    bad = run("validate", "--graph", "n=1;m=2;E=[(1,1)]")
    assert bad.exit_code == 3
    assert "graphs:" in bad.output


def test_diff_and_bracket(run):
    r = run("diff", "d1", "--x", "n=0;m=2;E=[]")
    assert r.exit_code == 0 and r.output.strip() == "0"
    assert run("diff", "d9", "--x", "n=0;m=2;E=[]").exit_code == 2


def test_apply_u(run):
    r = run("apply-U", "--graph", "n=1;m=2;E=[(1,B1),(1,B2)]", "--xi", "d1^d2", "--f", "x1", "--f", "x2")
    assert r.exit_code == 0
    assert r.output.strip() == "1"


def test_star_with_moyal_table(run):
    r = run("star", "--f", "x1", "--g", "x2", "--alpha", "d1^d2", "--order", "1", "--moyal-table")
    assert r.exit_code == 0
    assert r.output.splitlines() == ["h^0: x1*x2", "h^1: 1"]


def test_star_exit_codes(run, tmp_path):
    base = ("star", "--f", "x1", "--g", "x2", "--alpha", "d1^d2")
    assert run(*base, env={"GRAPHQUANT_TABLE": None}).exit_code == 2
    assert run(*base, "--table", str(tmp_path / "missing.tbl")).exit_code == 3
    assert run("star", "--f", "x1 +", "--g", "x2", "--alpha", "d1^d2", "--moyal-table").exit_code == 3
    r = run("star", "--f", "x1", "--g", "x2", "--dim", "3", "--alpha", "d1^d2 + x1*d2^d3 + x3*d1^d3",
            "--moyal-table")
    assert r.exit_code == 3 and "starprod:" in r.output
    empty = tmp_path / "empty.tbl"
    store_table(WeightTable(), empty)
    r = run(*base, "--table", str(empty))
    assert r.exit_code == 3 and "starprod:" in r.output


def test_table_from_environment(run, tmp_path):
    path = tmp_path / "w.tbl"
    r = run("weight", "--graph", "n=1;m=2;E=[(1,B1),(1,B2)]", "--samples", "20000", "--seed", "3",
            env={"GRAPHQUANT_TABLE": str(path)})
    assert r.exit_code == 0
    est = float(r.output.split()[1])
    assert est == pytest.approx(0.5, abs=0.05)
    assert "n=1;m=2;E=[(1,B1),(1,B2)]" in load_table(path).entries


def test_weight_rejects_wrong_degree(run):
    assert run("weight", "--graph", "n=1;m=2;E=[(1,B1)]", "--samples", "10").exit_code == 3


def _wrong_weights(path):
    rng = random.Random(0)
    t = WeightTable()
    for phi in checks.total_degree_two(2, 2):
        for g in cocycle_graphs(phi):
            if canonical_key(g) not in t.entries:
                t.set_exact(g, Fraction(rng.randint(1, 5), rng.randint(1, 4)))
    store_table(t, path)


def test_failing_check_exits_one(run, tmp_path):
    path = tmp_path / "wrong.tbl"
    _wrong_weights(path)
    r = run("check", "cocycle", "--table", str(path))
    assert r.exit_code == 1
    assert "FAIL" in r.output


def test_forest_check_passes(run):
    r = run("check", "forest", "--count", "5")
    assert r.exit_code == 0, r.output
    assert "PASS" in r.output


def test_assoc_exact(run):
    r = run("check", "assoc", "--f", "x1^2", "--g", "x2^2", "--h", "x1*x2", "--alpha", "d1^d2",
            "--order", "3", "--moyal-table")
    assert r.exit_code == 0
    assert r.output.strip().endswith("residual is zero")
