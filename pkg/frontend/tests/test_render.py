"""Renderer tests. Panel CSVs come from the harness CLI itself (the renderer's
only upstream interface), at reduced replication counts."""
import subprocess
import sys
from pathlib import Path

import pytest

from cascadeplots import (EmptyInputError, FigureSpec, SchemaError,
                          expected_columns, load_panel, render)
from cascadeplots.cli import main as cli_main
from conftest import criterion

ALL_FIGURES = ("fig4", "fig5", "fig6", "fig7", "fig8", "fig9")


def run_harness(*argv):
    proc = subprocess.run([sys.executable, "-m", "trustcascade.cli", *argv],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc


@pytest.fixture(scope="session")
def panel_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("panels")
    common = ["--out", str(out), "--seed", "7", "--replications", "200",
              "--eta-grid", "0.3,0.7", "--limit-weights"]
    run_harness("figure", "fig4", *common)
    run_harness("figure", "fig5", "--sizes", "10,30,50", *common)
    for fig in ("fig6", "fig7", "fig8", "fig9"):
        run_harness("figure", fig, *common)
    return out


def test_all_eighteen_panels_render(panel_dir, tmp_path):
    with criterion("Plot renderer: all 18 panels render from harness CSVs; "
                   "mismatched schemas fail with a column diagnostic"):
        rendered = []
        for fig in ALL_FIGURES:
            for panel in ("a", "b", "c"):
                out = tmp_path / f"{fig}_{panel}.svg"
                result = render(FigureSpec(fig, panel, panel_dir / f"{fig}_{panel}.csv", out))
                assert result.exists() and result.stat().st_size > 0
                rendered.append(result)
        assert len(rendered) == 18
        # schema rejection carries the column diagnostic
        with pytest.raises(SchemaError, match="delta_F"):
            render(FigureSpec("fig4", "c", panel_dir / "fig4_a.csv", tmp_path / "x.svg"))


def test_schema_mismatch_names_columns(panel_dir, tmp_path):
    with pytest.raises(SchemaError) as err:
        render(FigureSpec("fig6", "a", panel_dir / "fig4_a.csv", tmp_path / "y.svg"))
    message = str(err.value)
    assert "missing" in message and "i" in message and "unexpected" in message
    assert not (tmp_path / "y.svg").exists()


def test_empty_body_is_an_error(tmp_path):
    csv = tmp_path / "fig5_a.csv"
    csv.write_text("N,eta,F_analytic,F_mc,F_mc_stderr\n")
    with pytest.raises(EmptyInputError):
        render(FigureSpec("fig5", "a", csv, tmp_path / "out.svg"))
    assert not (tmp_path / "out.svg").exists()
    csv.write_text("")
    with pytest.raises(SchemaError):
        render(FigureSpec("fig5", "a", csv, tmp_path / "out.svg"))


def test_single_row_renders(tmp_path):
    csv = tmp_path / "fig5_a.csv"
    csv.write_text("N,eta,F_analytic,F_mc,F_mc_stderr\n3,1.0,1.333,1.30,0.02\n")
    out = render(FigureSpec("fig5", "a", csv, tmp_path / "single.svg"))
    assert out.stat().st_size > 0


def test_unparseable_value_is_a_schema_error(tmp_path):
    csv = tmp_path / "fig5_a.csv"
    csv.write_text("N,eta,F_analytic,F_mc,F_mc_stderr\n3,1.0,oops,1.30,0.02\n")
    with pytest.raises(SchemaError, match="F_analytic"):
        load_panel(FigureSpec("fig5", "a", csv, tmp_path / "z.svg"))


def test_rendering_is_deterministic(panel_dir, tmp_path):
    spec1 = FigureSpec("fig7", "b", panel_dir / "fig7_b.csv", tmp_path / "one.svg")
    spec2 = FigureSpec("fig7", "b", panel_dir / "fig7_b.csv", tmp_path / "two.svg")
    assert render(spec1).read_bytes() == render(spec2).read_bytes()


def test_png_output(panel_dir, tmp_path):
    out = render(FigureSpec("fig5", "a", panel_dir / "fig5_a.csv", tmp_path / "p.png"))
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_log_y_panel(panel_dir, tmp_path):
    out = render(FigureSpec("fig4", "a", panel_dir / "fig4_a.csv",
                            tmp_path / "log.svg", log_y=True))
    assert out.stat().st_size > 0


def test_expected_columns():
    assert expected_columns("fig4", "c")[-1] == "delta_F"
    assert expected_columns("fig9", "c")[-1] == "D_after_minus_before"
    assert expected_columns("fig6", "a") == ["i", "eta", "D_analytic", "D_mc",
                                             "D_mc_stderr", "message_kind", "regime"]


def test_cli_round_trip(panel_dir, tmp_path, capsys):
    out = tmp_path / "cli.svg"
    code = cli_main(["--figure", "fig8", "--panel", "c",
                     "--in", str(panel_dir / "fig8_c.csv"), "--out", str(out)])
    assert code == 0
    assert out.exists()
    assert str(out) in capsys.readouterr().out


def test_cli_schema_failure_exit_code(panel_dir, tmp_path, capsys):
    code = cli_main(["--figure", "fig4", "--panel", "a",
                     "--in", str(panel_dir / "fig6_a.csv"), "--out", str(tmp_path / "bad.svg")])
    assert code == 2
    err = capsys.readouterr().err
    assert "column mismatch" in err and "missing" in err


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "cascadeplots.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "--panel" in proc.stdout
