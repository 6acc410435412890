"""End-to-end tests for the mixv command line."""
import json
import math

import pytest

from config import Config
from main_mixv import main


def run(capsys, *argv):
    """Invoke the CLI and return (exit code, parsed stdout document)."""
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


# ==================== EQ-CHECK ====================

def test_equal_fixture(capsys, fixture_path):
    code, doc = run(capsys, "eq-check", fixture_path("one_bit_p.json"), fixture_path("one_bit_q.json"))
    assert code == 0
    assert doc["verdict"] == "equal"
    assert doc["status"] == "completed"
    assert doc["exit_code"] == 0
    assert doc["stats"]["n"] == 1
    assert doc["stats"]["basis_sizes"] and doc["stats"]["basis_sizes"][0] >= 1
    assert len(doc["inputs"]["sha256"]) == 64


def test_not_equal_fixture_with_witness(capsys, fixture_path):
    code, doc = run(capsys, "eq-check", "--emit-witness",
                    fixture_path("one_bit_p.json"), fixture_path("one_bit_q_perturbed.json"))
    assert code == 1
    assert doc["verdict"] == "not_equal"
    assert doc["witness"]["i"] == 1
    assert doc["witness"]["x"] == ["0"]
    assert doc["witness"]["verified"] is True
    assert doc["witness"]["p_prefix"] == "1/2"
    assert doc["witness"]["q_prefix"] == "11/24"


def test_brute_cross_check(capsys, fixture_path):
    code, doc = run(capsys, "eq-check", "--brute",
                    fixture_path("two_coord_p.json"), fixture_path("two_coord_q.json"))
    assert code == 1
    assert doc["method"] == "basis+brute"
    assert doc["brute"]["verdict"] == "not_equal"
    assert len(doc["brute"]["witness"]["x"]) == 2


def test_missing_file_is_input_error(capsys, tmp_path, fixture_path):
    code, doc = run(capsys, "eq-check", str(tmp_path / "nope.json"), fixture_path("one_bit_q.json"))
    assert code == 2
    assert doc["status"] == "failed"
    assert doc["error"]["kind"] == "input_error"


def test_incompatible_mixtures(capsys, fixture_path):
    code, doc = run(capsys, "eq-check", fixture_path("one_bit_p.json"), fixture_path("two_coord_p.json"))
    assert code == 2
    assert "coordinate counts" in doc["error"]["message"]


@pytest.mark.parametrize("argv", [
    [],
    ["eq-check"],
    ["--log-level", "LOUD", "eq-check", "a.json", "b.json"],
    ["frobnicate"],
])
def test_usage_errors_exit_two_with_json(capsys, argv):
    code, doc = run(capsys, *argv)
    assert code == 2
    assert doc["error"]["kind"] == "input_error"
    assert doc["error"]["message"].startswith("mixv")


def test_version(capsys):
    assert main(["--version"]) == 0
    assert "mixv" in capsys.readouterr().out


def test_reports_without_timing_are_reproducible(capsys, fixture_path):
    argv = ["--no-timing", "eq-check", fixture_path("one_bit_p.json"), fixture_path("one_bit_q.json")]
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert first == second
    assert "run_id" not in first and "timing" not in first


def test_invalid_configuration(capsys, monkeypatch, fixture_path):
    monkeypatch.setattr(Config, "EPS_SPLIT", "cubic")
    code, doc = run(capsys, "ising", "partition", fixture_path("ising_single.json"))
    assert code == 2
    assert doc["error"]["kind"] == "config_error"


# ==================== ISING ====================

def test_partition_single_spin(capsys, fixture_path):
    code, doc = run(capsys, "ising", "partition", fixture_path("ising_single.json"))
    assert code == 0
    assert doc["log_Z"] == pytest.approx(math.log(2))


def test_partition_via_marginals(capsys, fixture_path):
    code, doc = run(capsys, "ising", "partition", "--via", "marginals", fixture_path("ising_six.json"))
    assert code == 0
    assert doc["oracle_calls"] == 5
    _, brute = run(capsys, "ising", "partition", fixture_path("ising_six.json"))
    assert doc["log_Z"] == pytest.approx(brute["log_Z"], rel=1e-9)


def test_marginal_brute_and_tv_agree(capsys, fixture_path):
    _, brute = run(capsys, "ising", "marginal", fixture_path("ising_triangle.json"), "--k", "2", "--s", "-1")
    _, via_tv = run(capsys, "ising", "marginal", fixture_path("ising_triangle.json"), "--k", "2", "--s", "-1",
                    "--via", "tv", "--eps", "0.05")
    assert 0 < brute["marginal"] < 1
    assert via_tv["marginal"] == pytest.approx(brute["marginal"], rel=0.05)


def test_tv_methods_agree(capsys, fixture_path):
    models = [fixture_path("ising_triangle.json"), fixture_path("ising_triangle_b.json")]
    _, half = run(capsys, "ising", "tv", *models)
    _, events = run(capsys, "ising", "tv", *models, "--method", "events")
    assert half["method"] == "half_l1"
    assert events["method"] == "max_over_events"
    assert half["tv"] == pytest.approx(events["tv"], abs=1e-10)
    assert half["positive_part"] == pytest.approx(half["tv"], abs=1e-10)


def test_gadget_audit(capsys, fixture_path):
    code, doc = run(capsys, "ising", "gadget", fixture_path("ising_triangle.json"),
                    "--k", "1", "--h0", "-6", "--delta", "12")
    assert code == 0
    assert doc["gadget"]["auto_sized"] is False
    assert doc["gadget"]["target_sign"] == 1
    assert doc["tv_identity_holds"] is True
    assert doc["sign_property"] is True
    assert doc["bound_informative"] is True
    assert doc["bound_holds"] is True
    assert doc["dummy_marginal_residual"] <= 1e-12


def test_gadget_auto_sized(capsys, fixture_path):
    code, doc = run(capsys, "ising", "gadget", fixture_path("ising_triangle.json"), "--s", "-1", "--eps", "0.1")
    assert code == 0
    assert doc["gadget"]["auto_sized"] is True
    assert doc["gadget"]["h0"] > 0
    assert doc["bound_holds"] is True


def test_gadget_rejects_small_delta(capsys, fixture_path):
    code, doc = run(capsys, "ising", "gadget", fixture_path("ising_triangle.json"),
                    "--h0", "-3", "--delta", "0.5")
    assert code == 2
    assert doc["error"]["kind"] == "input_error"


def test_reduce_partition(capsys, fixture_path):
    code, doc = run(capsys, "ising", "reduce", "partition", fixture_path("ising_six.json"),
                    "--oracle", "brute", "--eps", "0.1")
    assert code == 0
    assert doc["within_eps"] is True
    assert doc["oracle_calls"] == 5
    assert doc["relative_error"] <= 1e-6
    assert doc["max_identity_residual"] <= 1e-10


def test_reduce_marginal(capsys, fixture_path):
    code, doc = run(capsys, "ising", "reduce", "marginal", fixture_path("ising_triangle.json"),
                    "--k", "0", "--s", "1", "--eps", "0.05")
    assert code == 0
    assert doc["within_eps"] is True
    assert doc["oracle_calls"] == 1


def test_enumeration_guard_exit_code(capsys, monkeypatch, fixture_path):
    monkeypatch.setattr(Config, "MAX_ENUM", 4)
    code, doc = run(capsys, "ising", "partition", fixture_path("ising_six.json"))
    assert code == 3
    assert doc["error"]["kind"] == "enumeration_guard"
    assert doc["error"]["size"] == 64
    assert doc["error"]["limit"] == 4


def test_infeasible_gadget_exit_code(capsys, tmp_path):
    strong = tmp_path / "strong.json"
    strong.write_text(json.dumps({"n": 6, "pairs": [{"i": i, "j": i + 1, "w": 20.0} for i in range(5)],
                                  "fields": [0.0] * 6}))
    code, doc = run(capsys, "ising", "marginal", str(strong), "--via", "tv")
    assert code == 3
    assert doc["error"]["kind"] == "gadget_infeasible"
    assert doc["error"]["required_h0"] > 700


def test_unresolvable_marginal_exit_code(capsys, tmp_path):
    biased = tmp_path / "biased.json"
    biased.write_text(json.dumps({"n": 1, "pairs": [], "fields": [-20.0]}))
    code, doc = run(capsys, "ising", "reduce", "marginal", str(biased), "--k", "0", "--s", "1", "--eps", "0.05")
    assert code == 3
    assert doc["error"]["kind"] == "numeric_error"
    assert "below the resolution" in doc["error"]["message"]


# ==================== GENERATORS ====================

def test_gen_is_deterministic(capsys):
    _, first = run(capsys, "gen", "mixture", "-n", "3", "-k", "2", "--seed", "7")
    _, second = run(capsys, "gen", "mixture", "-n", "3", "-k", "2", "--seed", "7")
    assert first == second
    assert first["n"] == 3 and len(first["components"]) == 2


def test_gen_rewrite_then_check(capsys, tmp_path):
    p, q = tmp_path / "p.json", tmp_path / "q.json"
    assert main(["gen", "mixture", "-n", "4", "-k", "3", "--alphabet", "a,b,c", "--seed", "3",
                 "-o", str(p)]) == 0
    assert main(["gen", "rewrite", str(p), "--seed", "4", "-o", str(q)]) == 0
    capsys.readouterr()
    code, doc = run(capsys, "eq-check", str(p), str(q))
    assert code == 0
    assert doc["verdict"] == "equal"


def test_gen_perturb_writes_truth(capsys, tmp_path):
    p, q, truth = tmp_path / "p.json", tmp_path / "q.json", tmp_path / "truth.json"
    main(["gen", "mixture", "-n", "2", "-k", "1", "--seed", "1", "-o", str(p)])
    main(["gen", "perturb", str(p), "--magnitude", "1/13", "--truth", str(truth), "-o", str(q)])
    capsys.readouterr()
    expected = json.loads(truth.read_text())
    code, doc = run(capsys, "eq-check", str(p), str(q))
    assert doc["verdict"] == expected["verdict"]
    assert code == (0 if expected["verdict"] == "equal" else 1)


def test_gen_ising(capsys):
    code, doc = run(capsys, "gen", "ising", "-n", "4", "--density", "1.0", "--seed", "2")
    assert code == 0
    assert doc["n"] == 4
    assert len(doc["pairs"]) == 6


def test_gen_bad_alphabet(capsys):
    code, doc = run(capsys, "gen", "mixture", "-n", "2", "-k", "1", "--alphabet", "a,,b")
    assert code == 2
    assert doc["error"]["kind"] == "input_error"


# ==================== LEDGER ====================

def test_record_and_history(capsys, tmp_path, fixture_path):
    db = str(tmp_path / "runs.db")
    code, doc = run(capsys, "--record", "--db", db, "eq-check",
                    fixture_path("one_bit_p.json"), fixture_path("one_bit_q.json"))
    assert code == 0
    code, history = run(capsys, "--db", db, "history")
    assert code == 0
    assert len(history["runs"]) == 1
    entry = history["runs"][0]
    assert entry["run_id"] == doc["run_id"]
    assert entry["inputs_digest"] == doc["inputs"]["sha256"]
    assert entry["report"]["verdict"] == "equal"

    code, single = run(capsys, "--db", db, "history", "--run", doc["run_id"][:8])
    assert code == 0
    assert single["run_id"] == doc["run_id"]


def test_history_by_inputs_digest(capsys, tmp_path, fixture_path):
    db = str(tmp_path / "runs.db")
    equal = [fixture_path("one_bit_p.json"), fixture_path("one_bit_q.json")]
    _, first = run(capsys, "--record", "--db", db, "eq-check", *equal)
    _, second = run(capsys, "--record", "--db", db, "eq-check", *equal)
    run(capsys, "--record", "--db", db, "eq-check",
        fixture_path("one_bit_p.json"), fixture_path("one_bit_q_perturbed.json"))

    code, history = run(capsys, "--db", db, "history", "--digest", first["inputs"]["sha256"])
    assert code == 0
    assert [entry["run_id"] for entry in history["runs"]] == [first["run_id"], second["run_id"]]

    _, none = run(capsys, "--db", db, "history", "--digest", "0" * 64)
    assert none["runs"] == []


def test_history_unknown_run(capsys, tmp_path):
    code, doc = run(capsys, "--db", str(tmp_path / "runs.db"), "history", "--run", "missing")
    assert code == 2
    assert doc["error"]["kind"] == "input_error"


def test_identical_file_twice(capsys, fixture_path):
    code, doc = run(capsys, "eq-check", fixture_path("two_coord_q.json"), fixture_path("two_coord_q.json"))
    assert code == 0
    assert doc["verdict"] == "equal"


def test_zero_perturbation_stays_equal(capsys, tmp_path, fixture_path):
    q = tmp_path / "q.json"
    assert main(["gen", "perturb", fixture_path("two_coord_p.json"), "--magnitude", "0",
                 "-o", str(q)]) == 0
    capsys.readouterr()
    code, _ = run(capsys, "eq-check", fixture_path("two_coord_p.json"), str(q))
    assert code == 0


def test_gadget_tv_identity_at_large_parameters(capsys, fixture_path):
    code, doc = run(capsys, "ising", "gadget", fixture_path("ising_six.json"),
                    "--k", "3", "--h0", "-10", "--delta", "25")
    assert code == 0
    assert doc["tv_identity_residual"] <= 1e-9


# ==================== ACCEPTANCE ====================

def test_acceptance_subset(capsys):
    code, doc = run(capsys, "--no-timing", "acceptance", "--scale", "0.01", "--only", "3", "11")
    assert code == 0
    report = doc["acceptance"]
    assert report["passed"] is True
    assert [c["id"] for c in report["criteria"]] == [3, 11]
