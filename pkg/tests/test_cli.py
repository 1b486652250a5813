import json
import subprocess
import sys
from importlib.resources import files

import jsonschema
import numpy as np
import pytest

from wstar_metrics.channels import channel_to_json, random_channel
from wstar_metrics.cli import main, read_config_file
from wstar_metrics.metrics import fisher_rao_gram
from wstar_metrics.states import random_faithful_state, state_to_json, tangent_basis


def schema(name):
    return json.loads((files("wstar_metrics") / "schemas" / f"{name}.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_metric_eval_seeded(capsys):
    code, out, _ = run(capsys, "metric", "eval", "--sig", "2", "--f", "sld", "--seed", "7")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("gram_report"))
    assert doc["basis_size"] == 3 and len(doc["gram"]) == 9
    assert doc["state_seed"] == 7
    code, again, _ = run(capsys, "metric", "eval", "--sig", "2", "--f", "sld", "--seed", "7")
    assert again == out


def test_metric_eval_state_file_matches_fisher_rao(tmp_path, capsys):
    p = [0.2, 0.3, 0.5]
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"probabilities": p}))
    code, out, _ = run(capsys, "metric", "eval", "--sig", "1,1,1", "--f", "kmb", "--state-file", str(path))
    assert code == 0
    g = np.array(json.loads(out)["gram"]).reshape(2, 2)
    coords = np.array([[b.blocks[i][0, 0].real for i in range(3)] for b in tangent_basis("1,1,1")])
    np.testing.assert_allclose(g, fisher_rao_gram(p, coords), rtol=1e-12)


def test_metric_eval_full_state_file_and_csv(tmp_path, capsys):
    path = tmp_path / "rho.json"
    doc = state_to_json(random_faithful_state("1,2", 3))
    jsonschema.validate(doc, schema("state"))
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "metric", "eval", "--f", "wy", "--state-file", str(path), "--format", "csv")
    assert code == 0
    rows = [line.split(",") for line in out.strip().splitlines()]
    assert len(rows) == 4 and all(len(r) == 4 for r in rows)


def test_metric_eval_errors(tmp_path, capsys):
    code, _, err = run(capsys, "metric", "eval", "--sig", "2", "--f", "bogus", "--seed", "1")
    assert code == 2 and "unknown monotone function" in err
    code, _, err = run(capsys, "metric", "eval", "--f", "sld", "--seed", "1")
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"probabilities": [0.0, 1.0]}))
    code, _, err = run(capsys, "metric", "eval", "--f", "sld", "--state-file", str(bad))
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "metric", "eval", "--f", "sld", "--state-file", str(tmp_path / "missing.json"))
    assert code == 2


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nonsense"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_verify_cencov(capsys):
    code, out, _ = run(capsys, "verify", "cencov", "--n", "4", "--trials", "100", "--seed", "1")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("verify_report"))
    assert code == 0 and doc["max_deviation"] <= 1e-10


def test_verify_monotonicity(capsys):
    code, out, _ = run(capsys, "verify", "monotonicity", "--sig", "2", "--f", "all", "--trials", "200", "--seed", "3")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("verify_report"))
    assert code == 0 and doc["verdict"] == "pass"


def test_verify_monotonicity_violation_exit_1(capsys):
    # an absurdly negative tolerance turns every trial into a violation
    code, out, _ = run(capsys, "verify", "monotonicity", "--sig", "2", "--f", "sld", "--trials", "3", "--seed", "0", "--tol", "-10")
    assert code == 1 and json.loads(out)["verdict"] == "violation"


def test_verify_two_form_and_invariance(capsys):
    code, out, _ = run(capsys, "verify", "two-form", "--sig", "1,2", "--trials", "100", "--seed", "0")
    assert code == 0 and json.loads(out)["max_relative_gap"] <= 1e-9
    code, out, _ = run(capsys, "verify", "invariance", "--kind", "quantum", "--f", "sld,wy", "--trials", "10", "--seed", "0")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("verify_report"))
    assert code == 0


def test_search_writes_summary_and_csv(tmp_path, capsys):
    out = tmp_path / "run.json"
    code, stdout, _ = run(capsys, "search", "--trials", "25", "--seed", "42", "--out", str(out))
    assert code == 0 and "min defect" in stdout
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, schema("search_summary"))
    assert doc["trials"] == 25 and doc["violations"] == []
    lines = out.with_suffix(".csv").read_text().splitlines()
    assert lines[0] == "trial,signature,f,defect,verdict" and len(lines) == 26


def test_search_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "search.cfg"
    cfg.write_text("# pool\ntrials = 12\nseed = 5\nsignatures = 2;1,1\nfunctions = sld,kmb\n")
    assert read_config_file(cfg)["trials"] == 12
    code, out, _ = run(capsys, "search", "--config", str(cfg), "--trials", "4")
    doc = json.loads(out)
    assert code == 0
    assert doc["trials"] == 4
    assert doc["config"]["seed"] == 5
    assert doc["config"]["signatures"] == ["2", "1,1"]
    assert doc["config"]["functions"] == ["sld", "kmb"]


def test_search_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("trials = many\n")
    code, _, err = run(capsys, "search", "--config", str(cfg))
    assert code == 2
    code, _, _ = run(capsys, "search", "--trials", "0")
    assert code == 2
    code, _, err = run(capsys, "search", "--trials", "2", "--functions", "bogus")
    assert code == 2 and "unknown monotone function" in err


def test_seed_env_fallback(monkeypatch, capsys):
    monkeypatch.setenv("WSTAR_METRIC_SEED", "7")
    _, env_out, _ = run(capsys, "metric", "eval", "--sig", "2", "--f", "sld")
    _, flag_out, _ = run(capsys, "metric", "eval", "--sig", "2", "--f", "sld", "--seed", "7")
    assert env_out == flag_out
    monkeypatch.setenv("WSTAR_METRIC_SEED", "x")
    code, _, _ = run(capsys, "metric", "eval", "--sig", "2", "--f", "sld")
    assert code == 2


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0 and len(out.strip().splitlines()) == 5
    code, out, _ = run(capsys, "catalog", "--format", "json")
    doc = json.loads(out)
    jsonschema.validate(doc, schema("catalog"))
    assert [e["name"] for e in doc] == ["sld", "rld", "kmb", "wy", "geometric"]


def test_channel_json_schema():
    jsonschema.validate(channel_to_json(random_channel("1,2", "2", 2, 0)), schema("channel"))


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "wstar_metrics", "catalog"], capture_output=True, text=True)
    assert proc.returncode == 0 and "kmb" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "wstar_metrics", "metric", "eval", "--f", "bogus", "--sig", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
