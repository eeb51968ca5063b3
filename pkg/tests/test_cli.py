import csv
import io
import json
import subprocess
import sys
from fractions import Fraction

import jsonschema
import pytest

from rdvlab.cli import main, strategy_from_spec
from rdvlab.model import format_strategy, parse_strategy
from rdvlab.report import load_schema


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, schema, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    data = json.loads(out)
    jsonschema.validate(data, load_schema(schema))
    return data


# -- eval / survival / moments / phi ------------------------------------------

def test_eval_wfm_text(capsys):
    code, out, _ = run(capsys, "eval", "--n", "4", "--tactic-a", "1 1 1 1", "--tactic-b", "1 2 3 4", "--format", "text")
    assert code == 0 and out.strip() == "w = 5/2"


def test_eval_json(capsys):
    data = run_json(capsys, "eval", "eval", "--n", "4", "--tactic-a", "1 1 1 1", "--tactic-b", "1 2 3 4")
    assert data["w"] == "5/2" and data["p_no_meet"] == "0/1"
    assert data["survival"] == ["1/1", "3/4", "1/2", "1/4", "0/1"]
    assert data["w_decimal"] == 2.5


@pytest.mark.parametrize("engine", ["ie", "enum"])
def test_eval_engines_agree(capsys, engine):
    data = run_json(capsys, "eval", "eval", "--tactic-a", "1 2 1 3 2", "--tactic-b", "2 2 1 5 4", "--engine", engine)
    assert data["n"] == 5
    assert data["w"] == run_json(capsys, "eval", "eval", "--tactic-a", "1 2 1 3 2", "--tactic-b", "2 2 1 5 4")["w"]


def test_eval_bad_tactic_exits_2(capsys):
    code, out, err = run(capsys, "eval", "--n", "3", "--tactic-a", "1 4 2", "--tactic-b", "1 2 3")
    assert code == 2 and out == "" and "out of range" in err


@pytest.mark.parametrize("argv", [
    ["eval", "--n", "3", "--tactic-a", "1 2 3"],
    ["eval", "--tactic-a", "1 x", "--tactic-b", "1 1"],
    ["eval", "--tactic-a", "1 1", "--tactic-b", "1 1 1"],
    ["eval", "--n", "1", "--tactic-a", "1", "--tactic-b", "1"],
    ["eval", "--tactics", "/nonexistent/file"],
    ["nonsense"],
    [],
    ["moments", "--tactic-a", "1 1", "--tactic-b", "1 1", "--format", "csv"],
    ["simulate", "--n", "4", "--strategy-a", "bogus", "--strategy-b", "uniform", "--seed", "1"],
    ["phi", "--n", "6", "--strategy-a", "uniform", "--strategy-b", "uniform"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_tactics_file(capsys, tmp_path):
    f = tmp_path / "pair.txt"
    f.write_text("# baby and mommy\n1 1 1\n1 2 3\n")
    data = run_json(capsys, "eval", "eval", "--tactics", str(f))
    assert data["w"] == "2/1"


def test_survival_csv(capsys):
    code, out, _ = run(capsys, "survival", "--tactic-a", "1 1", "--tactic-b", "1 1", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["survival"] for r in rows] == ["1/1", "1/2", "1/2"]
    run_json(capsys, "survival", "survival", "--tactic-a", "1 1", "--tactic-b", "1 1")


def test_moments_identity(capsys):
    data = run_json(capsys, "moments", "moments", "--tactic-a", "1 2 3 4", "--tactic-b", "1 2 3 4")
    assert (data["mean"], data["variance"], data["fourth_moment"]) == ("1/1", "1/1", "15/1")


def test_phi(capsys):
    data = run_json(capsys, "phi", "phi", "--n", "6", "--strategy-a", "wfm", "--strategy-b", "wfm")
    assert data["phi"] == "7/2"
    data = run_json(capsys, "phi", "phi", "--n", "2", "--strategy-a", "all-stay", "--strategy-b", "all-stay")
    assert data["phi"] == "2/1"


# -- verify ---------------------------------------------------------------------

def test_verify_same_kind_gap_exhaustive(capsys):
    data = run_json(capsys, "verify", "verify", "same-kind-gap", "--n", "4", "--mode", "exhaustive")
    assert data[0]["pass"] is True


def test_verify_single_pair(capsys):
    data = run_json(capsys, "verify", "verify", "var-pb", "--tactic-a", "1 2 3 4 5 6 7 8",
                    "--tactic-b", "1 2 3 4 5 6 7 8")
    assert Fraction(data[0]["lhs"]) == Fraction(14833, 40320) and data[0]["hypotheses_hold"]


def test_verify_chain_sampled_records_seed(capsys):
    data = run_json(capsys, "verify", "verify", "chain", "--n", "6", "--samples", "30")
    assert all(r["pass"] for r in data)
    seeds = {r["context"]["seed"] for r in data}
    assert len(seeds) == 1 and isinstance(seeds.pop(), int)


def test_verify_failure_exits_1(capsys, monkeypatch):
    from rdvlab import bounds
    fake = bounds.make_report("pb-waiting", True, [bounds.Check("broken", Fraction(0), Fraction(1))])
    monkeypatch.setitem(bounds.PAIR_VERIFIERS, "pb-waiting", lambda a, b: fake)
    code, out, err = run(capsys, "verify", "pb-waiting", "--tactic-a", "1 1", "--tactic-b", "1 2")
    assert code == 1 and json.loads(out)[0]["pass"] is False and "verifier failed" in err


def test_verify_theorem1(capsys, tmp_path):
    data = run_json(capsys, "verify", "verify", "theorem1-assembly", "--n", "3", "--strategy", "uniform")
    assert data[0]["pass"]
    code, _, _ = run(capsys, "verify", "theorem1-assembly", "--n", "3")
    assert code == 2


def test_verify_many_disjoint(capsys):
    data = run_json(capsys, "verify", "verify", "many-disjoint", "--n", "12", "--samples", "50", "--seed", "1")
    assert data[0]["context"]["invalid"] == 0


# -- scan / simulate / optimize ---------------------------------------------------

def test_scan_engines(capsys):
    data = run_json(capsys, "scan_engines", "scan", "engines", "--n", "3")
    assert data["pairs"] == 729 and data["disagreements"] == 0


def test_scan_aw(capsys):
    data = run_json(capsys, "scan_aw", "scan", "aw", "--n", "10", "--thetas", "0:1:1/4",
                    "--trials", "300", "--seed", "2")
    assert [r["theta"] for r in data["rows"]] == [0, 0.25, 0.5, 0.75, 1]
    code, out, _ = run(capsys, "scan", "aw", "--n", "10", "--thetas", "0.5", "--trials", "100",
                       "--seed", "2", "--format", "csv")
    assert code == 0 and out.splitlines()[0].startswith("theta,trials")


def test_simulate_and_csv(capsys, tmp_path):
    path = tmp_path / "sim.csv"
    data = run_json(capsys, "simulate", "simulate", "--n", "10", "--strategy-a", "wfm", "--strategy-b", "wfm",
                    "--horizon", "10", "--trials", "2000", "--seed", "4", "--csv", str(path))
    assert data["strategy_a"] == "baby" and data["strategy_b"] == "mommy" and data["meet_fraction"] == 1
    row = next(csv.DictReader(path.open()))
    assert row["seed"] == "4" and float(row["mean"]) == data["mean"]


def test_simulate_auto_seed_recorded(capsys):
    data = run_json(capsys, "simulate", "simulate", "--n", "5", "--strategy-a", "uniform",
                    "--strategy-b", "uniform", "--trials", "100")
    assert isinstance(data["seed"], int)


def test_simulate_aw_multiblock(capsys):
    data = run_json(capsys, "simulate", "simulate", "--n", "10", "--strategy-a", "aw", "--strategy-b", "aw",
                    "--theta", "1/4", "--aw-mode", "multiblock", "--horizon", "200", "--trials", "500",
                    "--seed", "1")
    assert data["strategy_a"].startswith("aw(")


def test_optimize_theta(capsys):
    data = run_json(capsys, "optimize_theta", "optimize", "theta", "--n", "3", "--mode", "exact")
    assert data["value"] == "65/27"
    data = run_json(capsys, "optimize_theta", "optimize", "theta", "--n", "8", "--mode", "mc",
                    "--resolution", "3", "--trials", "500", "--seed", "1")
    assert data["seed"] == 1


def test_optimize_symmetric(capsys):
    data = run_json(capsys, "optimize_symmetric", "optimize", "symmetric", "--n", "2", "--restarts", "4",
                    "--seed", "0")
    assert data["value"] == "7/4" and data["above_floor"]
    s = parse_strategy(data["strategy_text"])
    assert format_strategy(s) == data["strategy_text"]


def test_optimize_cap_exits_2(capsys):
    code, _, err = run(capsys, "optimize", "theta", "--n", "6")
    assert code == 2


# -- export and round-trips -------------------------------------------------------------

@pytest.mark.parametrize("spec", ["aw:1/4", "uniform", "wfm", "all-stay", "1 2 2"])
def test_export_round_trip(capsys, tmp_path, spec):
    code, text, _ = run(capsys, "export", "--n", "3", "--strategy", spec)
    assert code == 0
    path = tmp_path / "s.txt"
    path.write_text(text)
    code, again, _ = run(capsys, "export", "--n", "3", "--strategy", f"@{path}")
    assert code == 0 and again == text
    assert format_strategy(parse_strategy(text)) == text
    data = run_json(capsys, "export", "export", "--n", "3", "--strategy", f"@{path}", "--format", "json")
    assert data["strategy_text"] == text


def test_strategy_file_n_mismatch(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("n=2\n1/1 : 1 2\n")
    code, _, err = run(capsys, "phi", "--n", "3", "--strategy-a", f"@{path}", "--strategy-b", "uniform")
    assert code == 2 and "n=2" in err


def test_strategy_specs():
    assert strategy_from_spec("wfm", 4, "a").name == "baby"
    assert strategy_from_spec("wfm", 4, "b").name == "mommy"
    s = strategy_from_spec("aw:1/3", 3)
    assert s.support is not None
    s = strategy_from_spec("aw:0.3:multiblock", 5, horizon=20)
    assert s.support is None


# -- output file and reproducibility -------------------------------------------------

def test_out_file(capsys, tmp_path):
    out = tmp_path / "o.json"
    code, stdout, _ = run(capsys, "eval", "--tactic-a", "1 1", "--tactic-b", "1 1", "--out", str(out))
    assert code == 0 and stdout == "" and json.loads(out.read_text())["w"] == "2/1"


def test_simulate_identical_across_workers(capsys):
    argv = ["simulate", "--n", "12", "--strategy-a", "aw:0.25:multiblock", "--strategy-b", "aw:0.25:multiblock",
            "--horizon", "120", "--trials", "9000", "--seed", "77"]
    outs = {run(capsys, *argv, "--workers", str(k))[1] for k in (1, 2, 3)}
    assert len(outs) == 1


def test_workers_env_default(capsys, monkeypatch):
    monkeypatch.setenv("RDV_WORKERS", "2")
    argv = ["simulate", "--n", "6", "--strategy-a", "uniform", "--strategy-b", "uniform", "--trials", "5000",
            "--seed", "3"]
    with_env = run(capsys, *argv)[1]
    monkeypatch.delenv("RDV_WORKERS")
    assert with_env == run(capsys, *argv)[1]


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "rdvlab", "eval", "--n", "4", "--tactic-a", "1 1 1 1",
                           "--tactic-b", "1 2 3 4", "--format", "text"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "w = 5/2"


def test_all_schemas_are_valid():
    for name in ("eval", "survival", "moments", "phi", "verify", "scan_aw", "scan_engines", "simulate",
                 "optimize_theta", "optimize_symmetric", "export"):
        jsonschema.Draft7Validator.check_schema(load_schema(name))
