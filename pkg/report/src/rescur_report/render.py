"""Render figures and an HTML index from an experiment results directory.

The renderer reads only the documented result files: per-experiment
rows.csv in the fixed column order, plus the manifest.json written next
to them.  Output is a deterministic function of those files, so
re-rendering an unchanged directory reproduces every PNG and the index
byte for byte.
"""

import argparse
import csv
import html
import json
import os
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

REQUIRED_COLUMNS = ("experiment_id", "variant", "path", "eps1", "eps2",
                    "value_re", "value_im", "error", "nodes", "wall_ms")

_PNG_META = {"Software": "rescur-report"}
_DPI = 100


class SchemaError(Exception):
    """A result file does not carry the documented columns."""


def load_rows(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing required columns {', '.join(missing)}")
        rows = []
        for raw in reader:
            row = dict(raw)
            try:
                row["eps1"] = float(raw["eps1"])
                row["eps2"] = float(raw["eps2"])
                row["value"] = complex(float(raw["value_re"]),
                                       float(raw["value_im"]))
            except ValueError:
                # failure rows carry empty values; keep them out of plots
                row["value"] = None
            rows.append(row)
    return rows


def load_manifest(dirname):
    path = os.path.join(dirname, "manifest.json")
    if not os.path.exists(path):
        return {}
    with open(path) as fh:
        return json.load(fh)


def discover(results_dir):
    """All directories under results_dir holding a rows.csv, sorted."""
    found = []
    for root, dirs, files in os.walk(results_dir):
        dirs.sort()
        if "rows.csv" in files:
            found.append(root)
    return sorted(found)


def group_by_experiment(rows):
    out = {}
    for row in rows:
        out.setdefault(row["experiment_id"], []).append(row)
    return out


def is_grid(rows):
    """A full (eps1, eps2) product grid, as written by grid scans."""
    e1 = sorted({r["eps1"] for r in rows})
    e2 = sorted({r["eps2"] for r in rows})
    return len(e1) > 2 and len(e2) > 2 and len(rows) == len(e1) * len(e2)


def fit_slope(eps, vals):
    """Least-squares slope of log|value| vs log eps, or None."""
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(vals, dtype=float)
    keep = (eps > 0) & (vals > 0)
    if keep.sum() < 3 or len(set(eps[keep])) < 3:
        return None
    coef = np.polyfit(np.log10(eps[keep]), np.log10(vals[keep]), 1)
    return float(coef[0]), float(coef[1])


def plot_heatmap(rows, out_png, title):
    e1 = sorted({r["eps1"] for r in rows})
    e2 = sorted({r["eps2"] for r in rows})
    i1 = {v: i for i, v in enumerate(e1)}
    i2 = {v: i for i, v in enumerate(e2)}
    grid = np.full((len(e2), len(e1)), np.nan)
    for r in rows:
        if r["value"] is not None:
            grid[i2[r["eps2"]], i1[r["eps1"]]] = abs(r["value"])
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    with np.errstate(divide="ignore"):
        img = ax.pcolormesh(np.log10(e1), np.log10(e2),
                            np.log10(grid + 1e-300), shading="nearest",
                            cmap="viridis")
    fig.colorbar(img, ax=ax, label="log10 |value|")
    # the resonant ridge eps1 = eps2^2
    x = np.linspace(np.log10(e1[0]), np.log10(e1[-1]), 50)
    ax.plot(x, x / 2.0, "w--", lw=1.0, label="eps1 = eps2^2")
    ax.set_ylim(np.log10(e2[0]), np.log10(e2[-1]))
    ax.set_xlabel("log10 eps1")
    ax.set_ylabel("log10 eps2")
    ax.set_title(title)
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(out_png, dpi=_DPI, metadata=_PNG_META)
    plt.close(fig)


def plot_curves(rows, out_png, title):
    """Log-log decay curves per path, with fitted slope annotations."""
    by_path = {}
    for r in rows:
        if r["value"] is not None:
            by_path.setdefault(r["path"], []).append(r)
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    slopes = {}
    for path in sorted(by_path):
        pts = by_path[path]
        eps = np.array([max(r["eps1"], r["eps2"]) for r in pts])
        val = np.array([abs(r["value"]) for r in pts])
        order = np.argsort(eps)
        eps, val = eps[order], val[order]
        ax.loglog(eps, np.maximum(val, 1e-300), "o-", label=path)
        fit = fit_slope(eps, val)
        if fit is not None:
            slope, icept = fit
            slopes[path] = slope
            line = 10.0 ** (icept + slope * np.log10(eps))
            ax.loglog(eps, line, "--", lw=1.0)
            ax.annotate(f"slope {slope:.3f}", (eps[-1], line[-1]),
                        textcoords="offset points", xytext=(5, 5),
                        fontsize=8)
    ax.set_xlabel("eps = max(eps1, eps2)")
    ax.set_ylabel("|value|")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_png, dpi=_DPI, metadata=_PNG_META)
    plt.close(fig)
    return slopes


def _slug(text):
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in text)


def render(results_dir, out_dir=None):
    """Produce one PNG per experiment and an index.html linking them all."""
    if not os.path.isdir(results_dir):
        raise SchemaError(f"{results_dir}: not a directory")
    out_dir = out_dir or os.path.join(results_dir, "report")
    os.makedirs(out_dir, exist_ok=True)
    sections = discover(results_dir)

    body = ["<h1>Experiment report</h1>"]
    if not sections:
        sys.stderr.write(f"warning: no rows.csv found under {results_dir}\n")
        body.append('<div class="warn">No results found in '
                    f"{html.escape(results_dir)}; nothing to render.</div>")
    for sec in sections:
        rel = os.path.relpath(sec, results_dir)
        label = "results" if rel == "." else rel
        manifest = load_manifest(sec)
        rows = load_rows(os.path.join(sec, "rows.csv"))
        body.append(f"<h2>{html.escape(label)}</h2>")
        meta = [f"{k}: {html.escape(str(manifest[k]))}"
                for k in ("config_hash", "started_at", "rows", "failures")
                if k in manifest]
        if meta:
            body.append("<p class='meta'>" + " | ".join(meta) + "</p>")
        for exp_id in sorted(group_by_experiment(rows)):
            exp_rows = group_by_experiment(rows)[exp_id]
            plottable = [r for r in exp_rows if r["value"] is not None]
            name = _slug(f"{label}_{exp_id}") + ".png"
            body.append(f"<h3>{html.escape(exp_id)}</h3>")
            if not plottable:
                body.append("<p>no successful rows to plot</p>")
                continue
            if is_grid(plottable):
                plot_heatmap(plottable, os.path.join(out_dir, name), exp_id)
            else:
                slopes = plot_curves(plottable, os.path.join(out_dir, name),
                                     exp_id)
                for path in sorted(slopes):
                    body.append(f"<p>fitted slope on {html.escape(path)}: "
                                f"{slopes[path]:.3f}</p>")
            body.append(f'<img src="{name}" alt="{html.escape(exp_id)}">')

    page = "\n".join([
        "<!DOCTYPE html>",
        "<html><head><meta charset='utf-8'><title>Experiment report</title>",
        "<style>",
        "body { font-family: sans-serif; margin: 2em; }",
        ".warn { background: #fff3cd; border: 1px solid #ffe08a;"
        " padding: 1em; }",
        ".meta { color: #666; font-size: 0.9em; }",
        "img { max-width: 640px; display: block; margin: 1em 0; }",
        "</style></head><body>",
        *body,
        "</body></html>",
        ""])
    index = os.path.join(out_dir, "index.html")
    with open(index, "w") as fh:
        fh.write(page)
    return index


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="rescur-report",
        description="Render figures and an HTML summary from a results "
                    "directory.")
    ap.add_argument("results_dir")
    ap.add_argument("--out", metavar="DIR")
    args = ap.parse_args(argv)
    try:
        index = render(args.results_dir, args.out)
    except SchemaError as exc:
        sys.stderr.write(f"schema error: {exc}\n")
        return 2
    print(index)
    return 0


if __name__ == "__main__":
    sys.exit(main())
