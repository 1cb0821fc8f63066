import json
import os

import numpy as np
import pytest

from rescur_report import SchemaError, render
from rescur_report.render import main, load_rows, is_grid, fit_slope

HEADER = ("experiment_id,variant,path,eps1,eps2,value_re,value_im,"
          "error,nodes,wall_ms")


def write_csv(dirpath, lines):
    dirpath.mkdir(parents=True, exist_ok=True)
    (dirpath / "rows.csv").write_text("\n".join([HEADER, *lines]) + "\n")


def write_manifest(dirpath, **extra):
    base = {"format_version": 1, "config_hash": "deadbeef",
            "started_at": "2026-01-01T00:00:00", "rows": 0, "failures": 0}
    base.update(extra)
    (dirpath / "manifest.json").write_text(json.dumps(base))


def curve_lines(exp_id, path, exponent, rungs=6):
    out = []
    for k in range(rungs):
        e = 0.1 * 0.25 ** k
        v = 2.0 * e ** exponent
        out.append(f"{exp_id},CYCLE,{path},{e},{e},{v},0.0,0.0,100,1.0")
    return out


def grid_lines(exp_id):
    out = []
    for e1 in np.geomspace(1e-8, 1e-2, 7):
        for e2 in np.geomspace(1e-4, 1e-1, 5):
            # a ridge along eps1 = eps2^2
            v = 1.0 / (1.0 + (np.log10(e1) - 2 * np.log10(e2)) ** 2)
            out.append(f"{exp_id},CYCLE,grid,{e1},{e2},{v},0.0,0.0,100,1.0")
    return out


def make_results(tmp_path):
    res = tmp_path / "results"
    write_csv(res / "pt_heatmap", grid_lines("pt_heatmap"))
    write_manifest(res / "pt_heatmap", rows=35)
    write_csv(res / "decay", curve_lines("holder_demo", "diag_pt_c=1", 0.5))
    write_manifest(res / "decay", rows=6)
    return res


def test_render_writes_figures_and_index(tmp_path):
    res = make_results(tmp_path)
    index = render(str(res))
    out = res / "report"
    assert index == str(out / "index.html")
    pngs = sorted(p.name for p in out.glob("*.png"))
    assert pngs == ["decay_holder_demo.png", "pt_heatmap_pt_heatmap.png"]
    text = (out / "index.html").read_text()
    assert "pt_heatmap" in text and "holder_demo" in text
    assert "deadbeef" in text


def test_fit_slope_annotated_in_index(tmp_path):
    res = make_results(tmp_path)
    render(str(res))
    text = (res / "report" / "index.html").read_text()
    assert "fitted slope on diag_pt_c=1: 0.500" in text


def test_render_is_byte_stable(tmp_path):
    res = make_results(tmp_path)
    a = tmp_path / "out_a"
    b = tmp_path / "out_b"
    render(str(res), str(a))
    render(str(res), str(b))
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_empty_results_dir_warns(tmp_path, capsys):
    res = tmp_path / "results"
    res.mkdir()
    index = render(str(res))
    assert "no rows.csv" in capsys.readouterr().err
    text = (res / "report" / "index.html").read_text()
    assert "nothing to render" in text
    assert 'class="warn"' in text


def test_missing_columns_is_schema_error(tmp_path):
    res = tmp_path / "results"
    sub = res / "exp"
    sub.mkdir(parents=True)
    (sub / "rows.csv").write_text("experiment_id,eps1,value_re\nx,0.1,1.0\n")
    with pytest.raises(SchemaError) as exc:
        render(str(res))
    msg = str(exc.value)
    assert "eps2" in msg and "value_im" in msg


def test_failure_rows_are_skipped(tmp_path):
    res = tmp_path / "results"
    lines = curve_lines("partial", "ray_1:1", 0.5, rungs=4)
    lines.append("partial,CYCLE,ray_1:1,1e-9,1e-9,,,failed: boom,0,0.0")
    write_csv(res / "exp", lines)
    render(str(res))
    assert (res / "report" / "exp_partial.png").exists()


def test_all_failed_rows_noted(tmp_path):
    res = tmp_path / "results"
    write_csv(res / "exp",
              ["dead,CYCLE,ray_1:1,1e-2,1e-2,,,failed: boom,0,0.0"])
    render(str(res))
    text = (res / "report" / "index.html").read_text()
    assert "no successful rows to plot" in text


def test_main_exit_codes(tmp_path, capsys):
    res = make_results(tmp_path)
    assert main([str(res)]) == 0
    assert "index.html" in capsys.readouterr().out
    bad = tmp_path / "bad"
    (bad / "exp").mkdir(parents=True)
    (bad / "exp" / "rows.csv").write_text("a,b\n1,2\n")
    assert main([str(bad)]) == 2
    assert "schema error" in capsys.readouterr().err
    assert main([str(tmp_path / "missing")]) == 2


def test_load_rows_and_grid_detection(tmp_path):
    res = tmp_path / "r"
    write_csv(res, grid_lines("g"))
    rows = load_rows(str(res / "rows.csv"))
    assert len(rows) == 35
    assert is_grid(rows)
    write_csv(res, curve_lines("c", "ray_1:1", 0.25))
    assert not is_grid(load_rows(str(res / "rows.csv")))


def test_fit_slope_requires_enough_points():
    assert fit_slope([0.1, 0.01], [1.0, 0.1]) is None
    slope, _ = fit_slope([1e-1, 1e-2, 1e-3, 1e-4],
                         [3e-1, 3e-2, 3e-3, 3e-4])
    assert slope == pytest.approx(1.0, abs=1e-9)
