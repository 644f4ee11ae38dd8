import json

import pytest

from trustcascade.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analytic_chain(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--shape", "chain", "--n", "3", "--eta", "1.0")
    assert code == 0
    payload = json.loads(out)
    assert payload["IFA"] == pytest.approx(7 / 18)
    assert payload["true_counts"]["2"] == pytest.approx(2.5)
    assert payload["stratification"]["switching_point"] == 2.0


def test_analytic_asymptotic_mode(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--shape", "chain", "--n", "10",
                           "--eta", "0.5", "--mode", "asymptotic")
    assert code == 0
    assert json.loads(out)["IFA"] == pytest.approx(0.005194805194805195)


def test_analytic_bridged(capsys):
    code, out, _ = run_cli(capsys, "analytic", "--shape", "bridged", "--n", "10",
                           "--l", "4", "--h", "8", "--eta", "1.0")
    assert code == 0
    payload = json.loads(out)
    assert payload["bridge_gains"]["untrained_true"] == pytest.approx(2.75)
    assert payload["bridge_gains"]["trained_true"] == pytest.approx(10.0)


def test_mc_star(capsys):
    code, out, _ = run_cli(capsys, "mc", "--shape", "star", "--n", "3", "--eta", "1.0",
                           "--replications", "4000", "--seed", "7")
    assert code == 0
    payload = json.loads(out)
    assert abs(payload["IFA"] - 4 / 3) < 3 * payload["stderr_IFA"]


def test_mc_deterministic(capsys):
    args = ("mc", "--shape", "chain", "--n", "4", "--eta", "0.5",
            "--replications", "500", "--seed", "3")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2


def test_train_command(capsys, tmp_path):
    weights_path = tmp_path / "weights.txt"
    trajectory = tmp_path / "traj.csv"
    code, out, _ = run_cli(capsys, "train", "--shape", "star", "--n", "10",
                           "--eta", "0.8", "--iterations", "2000", "--seed", "1",
                           "--dump-weights", str(weights_path),
                           "--trajectory", str(trajectory), "--trajectory-stride", "1000")
    assert code == 0
    payload = json.loads(out)
    assert payload["iterations_run"] == 2000
    assert payload["final_weights"]["1->2"] > 0.9
    assert weights_path.read_text().startswith("# kinds 1=smart")
    lines = trajectory.read_text().splitlines()
    assert lines[0] == "iteration,src,dst,weight"
    assert len(lines) == 1 + 2 * 18  # two sampled iterations x 18 directed edges


def test_figure_command_and_determinism(capsys, tmp_path):
    args = ("figure", "fig5", "--out", str(tmp_path / "run1"), "--sizes", "3",
            "--eta-grid", "1.0", "--replications", "500", "--seed", "11", "--limit-weights")
    code, out, _ = run_cli(capsys, *args)
    assert code == 0
    produced = out.strip().splitlines()
    assert len(produced) == 3
    args2 = tuple(a.replace("run1", "run2") for a in args)
    run_cli(capsys, *args2)
    for name in ("fig5_a.csv", "fig5_b.csv", "fig5_c.csv"):
        assert (tmp_path / "run1" / name).read_bytes() == (tmp_path / "run2" / name).read_bytes()


def test_figure_with_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "seed": 5,
        "output_dir": str(tmp_path / "out"),
        "eta_grid": [1.0],
        "mc": {"replications": 300},
    }))
    code, _, _ = run_cli(capsys, "figure", "fig5", "--config", str(cfg),
                         "--sizes", "3", "--limit-weights")
    assert code == 0
    assert (tmp_path / "out" / "fig5_b.csv").exists()


def test_oracle_check_passes(capsys):
    code, out, _ = run_cli(capsys, "oracle-check", "--shape", "star", "--n", "6",
                           "--eta-grid", "0.5,1.0")
    assert code == 0
    assert "violations=0" in out


def test_oracle_check_detects_violation_via_tolerance(capsys):
    # an absurd tolerance forces the violation exit path
    code, out, _ = run_cli(capsys, "oracle-check", "--shape", "chain", "--n", "5",
                           "--eta-grid", "0.9", "--tolerance", "-1.0")
    assert code == 3


def test_config_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "mc", "--shape", "chain", "--n", "4")
    assert code == 2 and "eta" in err
    code, _, err = run_cli(capsys, "mc", "--eta", "0.5")
    assert code == 2
    code, _, err = run_cli(capsys, "analytic", "--shape", "chain", "--n", "1", "--eta", "0.5")
    assert code == 2


def test_missing_config_file_exit_code(capsys):
    code, _, err = run_cli(capsys, "mc", "--config", "/nonexistent.json",
                           "--shape", "chain", "--n", "3", "--eta", "0.5")
    assert code == 2
