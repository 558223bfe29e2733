"""
Tests for the command line: output, exit codes and error reporting.
"""
import json

import pytest

from alphaform import main as cli
from alphaform.core.graph import dump_graph
from alphaform.services.generators import banana, dunce

PSI_TEXT = "a1*a3 + a1*a4 + a2*a3 + a2*a4 + a3*a4"


@pytest.fixture
def dunce_file(tmp_path) -> str:
    path = tmp_path / "dunce.json"
    dump_graph(dunce(), str(path))
    return str(path)


@pytest.fixture
def banana_file(tmp_path) -> str:
    path = tmp_path / "banana.txt"
    dump_graph(banana(3), str(path))
    return str(path)


@pytest.fixture
def db_path(tmp_path, monkeypatch) -> str:
    path = str(tmp_path / "reports.db")
    monkeypatch.setattr(cli, "DB_PATH", path)
    return path


def test_alpha_text(dunce_file, capsys):
    assert cli.main(["alpha", dunce_file]) == cli.EXIT_PASS
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("(1/8) · ψ^(-3/2) · [a4 · da1∧da3")
    assert out[1] == "pipelines: agree"


def test_alpha_json(dunce_file, capsys):
    assert cli.main(["alpha", dunce_file, "--format", "json", "--with-pi"]) == cli.EXIT_PASS
    record = json.loads(capsys.readouterr().out)
    assert record["L"] == 2
    assert record["v_star"] == 3
    assert record["pipelines_agree"] is True
    assert record["wedge_zero"] is True
    assert record["alpha"]["prefactor"]["pi"] == 1
    assert set(record["timings"]) == {"tree_sum", "brute"}


def test_alpha_guard_prints_notice(dunce_file, capsys):
    assert cli.main(["alpha", dunce_file, "--max-edges", "3"]) == cli.EXIT_PASS
    captured = capsys.readouterr()
    assert "notice:" in captured.err
    assert "pipelines:" not in captured.out


def test_alpha_latex_and_v_star(dunce_file, capsys):
    assert cli.main(["alpha", dunce_file, "--format", "latex", "--v-star", "1"]) == cli.EXIT_PASS
    assert r"\left[" in capsys.readouterr().out


def test_alpha_odd_loops(tmp_path, capsys):
    path = tmp_path / "multiedge.json"
    dump_graph(banana(2), str(path))
    assert cli.main(["alpha", str(path)]) == cli.EXIT_PASS
    assert capsys.readouterr().out.splitlines()[0] == "0 (odd loop number)"


def test_wedge_check(dunce_file, banana_file, capsys):
    assert cli.main(["wedge-check", dunce_file]) == cli.EXIT_PASS
    assert "α∧α = 0 (1 coefficients checked)" in capsys.readouterr().out
    assert cli.main(["wedge-check", banana_file]) == cli.EXIT_PASS
    assert "2L = 4 exceeds |E| = 3" in capsys.readouterr().out
    assert cli.main(["wedge-check", dunce_file, "--format", "json"]) == cli.EXIT_PASS
    assert json.loads(capsys.readouterr().out)["wedge_zero"] is True


def test_symanzik(dunce_file, capsys):
    assert cli.main(["symanzik", dunce_file]) == cli.EXIT_PASS
    assert capsys.readouterr().out.strip() == PSI_TEXT
    assert cli.main(["symanzik", dunce_file, "--kirchhoff"]) == cli.EXIT_PASS
    assert capsys.readouterr().out.strip() == PSI_TEXT
    assert cli.main(["symanzik", dunce_file, "--second", "--massless", "--format", "json"]) == cli.EXIT_PASS
    record = json.loads(capsys.readouterr().out)
    assert record["name"] == "phi"
    assert "s1_2" in record["variables"]


def test_parametric_integrand(dunce_file, capsys):
    assert cli.main(["symanzik", dunce_file, "--dimension", "4"]) == cli.EXIT_PASS
    assert capsys.readouterr().out.startswith("Γ(0)")


def test_dodgson(dunce_file, capsys):
    assert cli.main(["dodgson", dunce_file, "--rows", "e:2", "--cols", "e:4"]) == cli.EXIT_PASS
    assert capsys.readouterr().out.strip() == "-a3"
    assert cli.main(["dodgson", dunce_file, "--rows", "e:2", "--cols", "e:4", "--format", "latex"]) == cli.EXIT_PASS
    assert capsys.readouterr().out.startswith(r"\psi^{2,4} = ")


@pytest.mark.parametrize("rows,cols", [("e:1,2", "e:3"), ("v:3", "v:1"), ("x:1", "e:1")])
def test_dodgson_usage_errors(dunce_file, capsys, rows, cols):
    assert cli.main(["dodgson", dunce_file, "--rows", rows, "--cols", cols]) == cli.EXIT_USAGE
    assert capsys.readouterr().err.startswith("error:")


def test_missing_and_malformed_input(tmp_path, capsys):
    assert cli.main(["alpha", str(tmp_path / "absent.json")]) == cli.EXIT_USAGE
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2\n1 2\n")
    assert cli.main(["alpha", str(bad)]) == cli.EXIT_USAGE
    assert "line 3" in capsys.readouterr().err


def test_argparse_rejects_unknown_command():
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == cli.EXIT_USAGE


def test_verify_and_reports(db_path, capsys):
    assert cli.main(["verify", "formal-qe", "--loops", "2,4", "--store"]) == cli.EXIT_PASS
    assert "formal-qe: 2 passed, 0 failed" in capsys.readouterr().out
    assert cli.main(["reports"]) == cli.EXIT_PASS
    listing = capsys.readouterr().out
    assert "formal-qe" in listing
    report_id = listing.split()[0]
    assert cli.main(["reports", "--id", report_id]) == cli.EXIT_PASS
    assert json.loads(capsys.readouterr().out)["report_id"] == report_id
    assert cli.main(["reports", "--id", "missing"]) == cli.EXIT_FAILURE


def test_verify_failure_exit_code(capsys):
    assert cli.main(["verify", "formal-qe", "--loops", "3"]) == cli.EXIT_FAILURE
    assert "first failure: formal-qe-L3" in capsys.readouterr().out


def test_verify_skips_fail_the_run(capsys):
    argv = ["verify", "pipelines", "--max-vertices", "2", "--max-edges", "2", "--brute-max-edges", "1"]
    assert cli.main(argv) == cli.EXIT_FAILURE
    assert capsys.readouterr().out.strip() == "pipelines: 1 passed, 0 failed, 1 skipped"


def test_gen(tmp_path, capsys):
    assert cli.main(["gen", "banana", "3"]) == cli.EXIT_PASS
    assert capsys.readouterr().out == '{"vertices": 2, "edges": [[1, 2], [1, 2], [1, 2]]}\n'
    out = tmp_path / "corpus"
    assert cli.main(["gen", "random", "--v", "4", "--e", "5", "--count", "2", "--out", str(out)]) == cli.EXIT_PASS
    assert len(list(out.glob("*.json"))) == 2
    assert cli.main(["gen", "wheel", "4,5"]) == cli.EXIT_USAGE


def test_certificate(capsys):
    assert cli.main(["certificate", "2", "--show", "1"]) == cli.EXIT_PASS
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "L = 2: 6 terms, 3 pairs, 0 unpaired"
    assert len(lines) == 2
    assert "<->" in lines[1]
    assert cli.main(["certificate", "3"]) == cli.EXIT_USAGE
