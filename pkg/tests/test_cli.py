import csv
import json
import os

import pytest

from rescur import cli

GOOD_CONFIG = """
[run]
out_dir = "{out}"
cache_dir = "{cache}"

[[experiment]]
id = "cycle_small"
kind = "cycle"
path = {{ kind = "diag_pt", c = 1.0, start = 0.08, ratio = 0.5, rungs = 3 }}

[[experiment]]
id = "pv_small"
kind = "expr"
variant = "SINGLE_PV"
n = 1
f = {{ alpha = [1] }}
phi = {{ alpha = [1], T = [0] }}
chi1 = {{ family = "canonical_pow", order = 1 }}
path = {{ kind = "ray", start = 0.1, ratio = 0.5, rungs = 3 }}
grid = {{ n_theta = 8, panels = 4, grading = 2.0, gl_order = 4 }}
"""


def write_config(tmp_path, text=None):
    out = tmp_path / "results"
    cache = tmp_path / "cache"
    cfg = tmp_path / "exp.toml"
    cfg.write_text((text or GOOD_CONFIG).format(out=out, cache=cache))
    return cfg, out, cache


def read_manifest(out):
    with open(os.path.join(out, "manifest.json")) as fh:
        return json.load(fh)


def test_dry_run_touches_nothing(tmp_path, capsys):
    cfg, out, cache = write_config(tmp_path)
    assert cli.main([str(cfg), "--dry-run"]) == 0
    text = capsys.readouterr().out
    assert "cycle_small" in text and "pv_small" in text
    assert not out.exists() and not cache.exists()


def test_run_writes_rows_and_manifest(tmp_path):
    cfg, out, cache = write_config(tmp_path)
    assert cli.main([str(cfg)]) == 0
    man = read_manifest(out)
    assert man["rows"] == 6
    assert man["failures"] == 0
    assert man["cache_misses"] == 6 and man["cache_hits"] == 0
    assert len(man["config_hash"]) == 64
    with open(out / "pv_small" / "rows.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["experiment_id"] for r in rows] == ["pv_small"] * 3
    assert list(rows[0]) == list(cli.ROW_FIELDS)
    assert float(rows[0]["eps1"]) == pytest.approx(0.1)
    assert float(rows[0]["value_im"]) != 0.0


def test_rerun_hits_cache_without_quadrature(tmp_path, monkeypatch):
    cfg, out, cache = write_config(tmp_path)
    assert cli.main([str(cfg)]) == 0

    def boom(*a, **kw):
        raise AssertionError("quadrature ran on a cached rerun")

    monkeypatch.setattr(cli, "integrate_polydisc", boom)
    monkeypatch.setattr(cli, "integrate_pt_cycle", boom)
    assert cli.main([str(cfg)]) == 0
    man = read_manifest(out)
    assert man["cache_hits"] == 6 and man["cache_misses"] == 0


def test_corrupt_cache_entry_recomputed(tmp_path, capsys):
    cfg, out, cache = write_config(tmp_path)
    assert cli.main([str(cfg)]) == 0
    victims = sorted(cache.glob("*.json"))
    victims[0].write_text("not json {")
    assert cli.main([str(cfg)]) == 0
    err = capsys.readouterr().err
    assert "corrupt cache entry" in err
    man = read_manifest(out)
    assert man["cache_misses"] == 1 and man["cache_hits"] == 5


def test_changed_config_misses_cache(tmp_path):
    cfg, out, cache = write_config(tmp_path)
    assert cli.main([str(cfg)]) == 0
    cfg.write_text(cfg.read_text().replace('order = 1', 'order = 2'))
    assert cli.main([str(cfg)]) == 0
    man = read_manifest(out)
    # the cycle rows still hit; the changed expression recomputes
    assert man["cache_misses"] == 3 and man["cache_hits"] == 3


def test_schema_error_names_the_field(tmp_path, capsys):
    bad = GOOD_CONFIG.replace('variant = "SINGLE_PV"', 'variant = "NOPE"')
    cfg, _, _ = write_config(tmp_path, bad)
    assert cli.main([str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "config error" in err
    assert "experiment[1].variant" in err


def test_missing_key_reported(tmp_path, capsys):
    bad = GOOD_CONFIG.replace('id = "pv_small"\n', '')
    cfg, _, _ = write_config(tmp_path, bad)
    assert cli.main([str(cfg)]) == 2
    assert "missing required key 'id'" in capsys.readouterr().err


def test_duplicate_ids_rejected(tmp_path, capsys):
    bad = GOOD_CONFIG.replace('id = "pv_small"', 'id = "cycle_small"')
    cfg, _, _ = write_config(tmp_path, bad)
    assert cli.main([str(cfg)]) == 2
    assert "duplicate" in capsys.readouterr().err


def test_empty_config_rejected(tmp_path):
    cfg = tmp_path / "empty.toml"
    cfg.write_text("[run]\n")
    assert cli.main([str(cfg)]) == 2


def test_invalid_toml_rejected(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("[[experiment\n")
    assert cli.main([str(cfg)]) == 2


def test_bad_path_kind_reported(tmp_path, capsys):
    bad = GOOD_CONFIG.replace('kind = "ray"', 'kind = "spiral"')
    cfg, _, _ = write_config(tmp_path, bad)
    assert cli.main([str(cfg)]) == 2
    assert "experiment[1].path" in capsys.readouterr().err


def test_testform_from_terms_text():
    table = {"terms": "1.0 0.0 2 1\n0.5 0.0 0 0", "T": [0]}
    phi = cli._testform_from(table, 1, cli.FlatBump(), "phi")
    import numpy as np
    z = np.array([[0.1 + 0.0j]])
    got = phi.coefficients(z)[(0,)][0]
    want = (0.1 ** 2 * 0.1 + 0.5) * 1.0
    assert got == pytest.approx(want)


def test_out_dir_flag_overrides_config(tmp_path):
    cfg, out, cache = write_config(tmp_path)
    alt = tmp_path / "alt"
    assert cli.main([str(cfg), "--out-dir", str(alt)]) == 0
    assert (alt / "manifest.json").exists()
    assert not out.exists()
