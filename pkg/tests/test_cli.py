from __future__ import annotations

import json
import logging

import pytest

from thrsat import cli
from thrsat.core import config
from thrsat.core.logging import LOG_FILE_NAME, setup_logging
from thrsat.services.formula import serialize_dimacs
from thrsat.services.reductions import exact_count_formula

SIX_DISJOINT = "p cnf 18 6\n" + "".join(f"{3 * i + 1} {3 * i + 2} {3 * i + 3} 0\n" for i in range(6))
TWO_DISJOINT = "p cnf 4 2\n1 2 0\n3 4 0\n"
ROLES = "p cnf 3 2\nc role e 1 0\nc role p 2 3 0\n-1 2 0\n2 3 0\n"


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    monkeypatch.setattr(cli, "setup_logging", lambda: None)


@pytest.fixture
def write(tmp_path):
    def _write(text: str, name: str = "input.cnf") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write


def _json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def test_decide_yes(write, capsys):
    assert cli.main(["decide", write("p cnf 3 0\n"), "--rho", "1/2"]) == 0
    assert capsys.readouterr().out.startswith("YES")


def test_decide_no_with_json(write, capsys):
    assert cli.main(["decide", write(SIX_DISJOINT), "--rho", "1/2", "--json"]) == 1
    payload = _json(capsys)
    assert payload["ok"] is True
    assert payload["data"]["answer"] == "NO"
    assert payload["data"]["branch_tag"] == "large-disjoint-set"
    assert len(payload["data"]["certificate"]["witness_clauses"]) == 6


def test_decide_budget_exceeded(write, capsys):
    path = write(TWO_DISJOINT)
    assert cli.main(["decide", path, "--rho", "1/2", "--budget-leaves", "5"]) == 2
    assert "budget exceeded" in capsys.readouterr().err


def test_decide_fallback_oracle(write, capsys):
    path = write(TWO_DISJOINT)
    code = cli.main(["decide", path, "--rho", "1/2", "--budget-leaves", "5", "--fallback-oracle", "--json"])
    assert code == 0
    assert _json(capsys)["data"]["branch_tag"] == "oracle-fallback"


def test_decide_parse_error(write, capsys):
    assert cli.main(["decide", write("p cnf 2 1\n1 3 0\n"), "--rho", "1/2", "--json"]) == 64
    payload = _json(capsys)
    assert payload["ok"] is False
    assert payload["error"]["code"] == "parse_error"
    assert payload["error"]["details"] == {"line": 2}


def test_decide_invalid_threshold(write):
    assert cli.main(["decide", write("p cnf 2 0\n"), "--rho", "0.5"]) == 3


def test_missing_file(tmp_path):
    assert cli.main(["decide", str(tmp_path / "nope.cnf"), "--rho", "1/2"]) == 3


def test_decide_gt_with_tree(write, capsys):
    code = cli.main(["decide", write("p cnf 1 1\n1 0\n"), "--rho", "1/2", "--gt", "--with-tree", "--json"])
    assert code == 1
    data = _json(capsys)["data"]
    assert data["gt"] is True
    assert data["certificate"]["count"] == 1
    assert data["certificate"]["tree"]["truncated"] is False


def test_msb(write, capsys):
    path = write(serialize_dimacs(exact_count_formula(3, 5)))
    assert cli.main(["msb", path, "--bits", "3"]) == 0
    assert capsys.readouterr().out.strip() == "0101"


def test_emaj_and_majmaj(write, capsys):
    path = write(ROLES)
    assert cli.main(["emaj", path, "--rho", "3/4"]) == 0
    assert cli.main(["emaj", path, "--rho", "7/8"]) == 1
    capsys.readouterr()
    assert cli.main(["majmaj", path, "--rho", "1/2", "--sigma", "1/2", "--json"]) == 0
    assert _json(capsys)["data"]["good_assignment_count"] == 2


def test_emaj_without_roles(write):
    assert cli.main(["emaj", write(TWO_DISJOINT)]) == 3


def test_analyze_reports_sunflower(write, capsys):
    assert cli.main(["analyze", write(SIX_DISJOINT), "--q", "6,100", "--json"]) == 0
    data = _json(capsys)["data"]
    assert data["q_values"] == [6, 100]
    assert data["sunflower"]["weight"] == 0
    assert len(data["sunflower"]["petals"]) == 6
    assert len(data["disjoint_set"]) == 6


def test_analyze_reports_tree(write, capsys):
    assert cli.main(["analyze", write(TWO_DISJOINT), "--json"]) == 0
    data = _json(capsys)["data"]
    assert data["sunflower"] is None
    assert data["exact_count"] == 9


def test_analyze_rejects_bad_q(write):
    assert cli.main(["analyze", write(SIX_DISJOINT), "--q", "6"]) == 3


def test_reduce_verify(write, capsys):
    path = write(TWO_DISJOINT)
    assert cli.main(["reduce", "gt-hardness-gadget", path, "--verify", "--json"]) == 0
    data = _json(capsys)["data"]
    assert data["verified"] is True
    assert data["output_vars"] == 5
    assert cli.main(["reduce", "square", path]) == 0
    assert capsys.readouterr().out.startswith("p cnf 8 4")


def test_reduce_needs_t(write):
    assert cli.main(["reduce", "add-one-long-clause", write(TWO_DISJOINT)]) == 3
    assert cli.main(["reduce", "add-one-long-clause", write(TWO_DISJOINT), "--t", "2", "--verify"]) == 0


def test_gen_is_deterministic(capsys):
    argv = ["gen", "--n", "6", "--m", "8", "--k", "3", "--seed", "11"]
    assert cli.main(argv) == 0
    first = capsys.readouterr().out
    assert cli.main(argv) == 0
    assert capsys.readouterr().out == first
    assert first.startswith("p cnf 6 8")


def test_gen_with_roles(capsys):
    assert cli.main(["gen", "--n", "4", "--m", "3", "--k", "2", "--role-split", "2", "--json"]) == 0
    assert "c role e 1 2 0" in _json(capsys)["data"]["dimacs"]


def test_fuzz(capsys):
    argv = ["fuzz", "--profile", "two-cnf", "--count", "5", "--n", "2-6", "--m", "0-8", "--json"]
    assert cli.main(argv) == 0
    data = _json(capsys)["data"]
    assert data["decider"] == "thr2"
    assert data["instances"] == 5
    assert data["mismatches"] == []


def test_fuzz_unknown_profile():
    assert cli.main(["fuzz", "--profile", "nope"]) == 3


def test_usage_error_exits_with_argparse_code():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["decide"])
    assert excinfo.value.code == 2


def test_setup_logging_writes_log_file(monkeypatch):
    monkeypatch.setattr(setup_logging, "_configured", False, raising=False)
    root = logging.getLogger()
    saved = list(root.handlers)
    try:
        setup_logging()
        logging.getLogger("thrsat.test").info("日誌測試")
        for handler in root.handlers:
            handler.flush()
        assert (config.LOG_DIR / LOG_FILE_NAME).exists()
    finally:
        for handler in root.handlers:
            handler.close()
        root.handlers[:] = saved
