"""Turn harness panel CSVs into figures.

Each figure family has a fixed column schema; anything else is rejected with
a column diagnostic before any drawing happens. Analytic values are drawn as
lines, Monte Carlo estimates as markers with error bars, one series per eta.
Output is deterministic: identical CSV input yields identical image bytes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

IFA_FIGURES = ("fig4", "fig5")
PROFILE_FIGURES = ("fig6", "fig7", "fig8", "fig9")
PANELS = ("a", "b", "c")

IFA_BASE = ["N", "eta", "F_analytic", "F_mc", "F_mc_stderr"]
PROFILE_BASE = ["i", "eta", "D_analytic", "D_mc", "D_mc_stderr", "message_kind", "regime"]

HASH_SALT = "cascadeplots"
FIGSIZE = (6.4, 4.4)
DPI = 120


class RenderError(Exception):
    """Input cannot be rendered."""


class SchemaError(RenderError):
    """CSV columns do not match the figure's schema."""


class EmptyInputError(RenderError):
    """CSV has a header but no data rows."""


def expected_columns(figure_id: str, panel: str) -> list[str]:
    if figure_id not in IFA_FIGURES + PROFILE_FIGURES:
        raise RenderError(f"unknown figure {figure_id!r}")
    if panel not in PANELS:
        raise RenderError(f"unknown panel {panel!r}")
    if figure_id in IFA_FIGURES:
        return IFA_BASE + (["delta_F"] if panel == "c" else [])
    return PROFILE_BASE + (["D_after_minus_before"] if panel == "c" else [])


@dataclass
class FigureSpec:
    figure_id: str
    panel: str
    input_csv: Path
    output_image: Path
    log_y: bool = False
    title: str | None = None


def load_panel(spec: FigureSpec) -> list[dict]:
    columns = expected_columns(spec.figure_id, spec.panel)
    try:
        with open(spec.input_csv, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{spec.input_csv}: file is empty, expected "
                                  f"columns {columns}") from None
            rows = list(reader)
    except OSError as exc:
        raise RenderError(f"cannot read {spec.input_csv}: {exc}") from exc
    if header != columns:
        missing = [c for c in columns if c not in header]
        unexpected = [c for c in header if c not in columns]
        raise SchemaError(
            f"{spec.input_csv}: column mismatch for {spec.figure_id} panel "
            f"{spec.panel}: missing {missing or 'none'}, unexpected "
            f"{unexpected or 'none'} (expected {columns}, got {header})")
    if not rows:
        raise EmptyInputError(f"{spec.input_csv}: no data rows")
    parsed = []
    text_columns = {"message_kind", "regime"}
    for raw in rows:
        if len(raw) != len(columns):
            raise SchemaError(f"{spec.input_csv}: row has {len(raw)} fields, "
                              f"expected {len(columns)}: {raw}")
        row = {}
        for name, value in zip(columns, raw):
            if name in text_columns:
                row[name] = value
            else:
                try:
                    row[name] = float(value)
                except ValueError:
                    raise SchemaError(f"{spec.input_csv}: column {name}: "
                                      f"cannot parse {value!r} as a number") from None
        parsed.append(row)
    return parsed


def _series(rows: list[dict], x_key: str):
    etas = sorted({row["eta"] for row in rows})
    for eta in etas:
        points = sorted((r for r in rows if r["eta"] == eta), key=lambda r: r[x_key])
        yield eta, points


def render(spec: FigureSpec) -> Path:
    """Draw one panel and write it; the format follows the output suffix
    (SVG by default, PNG supported)."""
    rows = load_panel(spec)
    is_ifa = spec.figure_id in IFA_FIGURES
    x_key = "N" if is_ifa else "i"
    if spec.panel == "c":
        y_line = "delta_F" if is_ifa else "D_after_minus_before"
        y_label = ("relative improvement of filtering ability" if is_ifa
                   else "profile change after training")
    else:
        y_line = "F_analytic" if is_ifa else "D_analytic"
        y_label = ("information filtering ability" if is_ifa
                   else "diffusion power difference")

    plt.rcParams["svg.hashsalt"] = HASH_SALT
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        for eta, points in _series(rows, x_key):
            xs = [p[x_key] for p in points]
            ax.plot(xs, [p[y_line] for p in points], marker="o", markersize=3,
                    linewidth=1.2, label=f"eta = {eta:g}")
            if spec.panel != "c":
                mc_key, err_key = ("F_mc", "F_mc_stderr") if is_ifa else ("D_mc", "D_mc_stderr")
                ax.errorbar(xs, [p[mc_key] for p in points],
                            yerr=[p[err_key] for p in points],
                            fmt="s", markersize=4, capsize=2, linestyle="none",
                            color=ax.lines[-1].get_color(), alpha=0.75)
        ax.set_xlabel("network size" if is_ifa else "node index from the smart terminal")
        ax.set_ylabel(y_label)
        if spec.log_y:
            ax.set_yscale("log")
        regime = {"a": "before training", "b": "after training", "c": "training effect"}[spec.panel]
        ax.set_title(spec.title or f"{spec.figure_id} ({regime})")
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        spec.output_image.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.output_image, metadata=_metadata_for(spec.output_image))
    finally:
        plt.close(fig)
    return spec.output_image


def _metadata_for(path: Path) -> dict:
    # strip timestamps so identical inputs give identical bytes
    if path.suffix.lower() == ".svg":
        return {"Date": None}
    return {}
