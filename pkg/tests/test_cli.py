"""End-to-end checks of the command line driver.

These tests care about the command surface: exit codes, output files,
column schemas, and rerun determinism.  The numerics behind each command
are covered by the unit modules, so a small zero table and a coarse
quadrature keep this module fast.
"""
import json
import math
import os

import numpy as np
import pytest

from fbhardy.cli import main
from fbhardy.kernels import LEMMA_IDS
from fbhardy.quadrature import MEASURE_LEBESGUE, MEASURE_MU, make_quadrature


def grid_size(measure: str) -> int:
    return len(make_quadrature("unit_interval", 64, measure=measure,
                               nu=0.5).nodes)

SMALL_CFG = """\
# fast settings for driver tests
n_zeros = 64
quad_nodes_per_unit = 64
t_min = 1e-3
t_max = 2.0
"""


@pytest.fixture()
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CFG)
    return str(path)


def run(args, cfg=None, out=None):
    argv = []
    if cfg is not None:
        argv += ["--config", cfg]
    if out is not None:
        argv += ["--out", str(out)]
    return main(argv + args)


def read_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        body = [line.strip().split(",") for line in fh if line.strip()]
    return header, body


# ---------------------------------------------------------------------------
# happy paths and file schemas


def test_zeros_writes_table(tmp_path, small_cfg):
    out = tmp_path / "out"
    assert run(["zeros"], cfg=small_cfg, out=out) == 0
    header, body = read_csv(out / "zeros.csv")
    assert header == "x,value"
    assert len(body) == 64
    # order one half has equally spaced zeros
    assert float(body[0][1]) == pytest.approx(math.pi, rel=1e-12)
    assert float(body[9][1]) == pytest.approx(10 * math.pi, rel=1e-12)


def test_kernel_csv_schema(tmp_path, small_cfg):
    out = tmp_path / "out"
    rc = run(["kernel", "--which", "poisson-mu", "--t", "0.4", "--grid", "5"],
             cfg=small_cfg, out=out)
    assert rc == 0
    header, body = read_csv(out / "kernel_poisson-mu.csv")
    assert header == "t,x,y,value"
    assert len(body) == 25
    vals = np.array([float(r[3]) for r in body])
    assert np.all(np.isfinite(vals))
    assert np.all(vals > 0)


def test_kernel_halfline_closed_form(tmp_path, small_cfg):
    out = tmp_path / "out"
    rc = run(["kernel", "--which", "bessel-poisson", "--t", "0.2",
              "--grid", "4"], cfg=small_cfg, out=out)
    assert rc == 0
    assert (out / "kernel_bessel-poisson.csv").exists()


def test_estimates_write_one_report_per_lemma(tmp_path, small_cfg):
    out = tmp_path / "out"
    rc = run(["estimates", "--lemma", "all", "--grid", "4"],
             cfg=small_cfg, out=out)
    assert rc == 0
    for lemma in LEMMA_IDS:
        with open(out / f"estimates_{lemma}.json") as fh:
            rep = json.load(fh)
        assert rep["lemma"] == lemma
        assert rep["ratio_min"] is not None and rep["ratio_min"] > 0
        assert rep["ratio_max"] is not None
        assert rep["n_samples"] > 0


def test_maximal_outputs(tmp_path, small_cfg):
    out = tmp_path / "out"
    assert run(["maximal"], cfg=small_cfg, out=out) == 0
    with open(out / "maximal.json") as fh:
        summary = json.load(fh)
    assert summary["l1_norm"] > 0
    assert summary["sup"] > 0
    assert summary["n_times"] > 10
    header, body = read_csv(out / "maximal.csv")
    assert header == "x,value"
    assert len(body) == grid_size(MEASURE_MU)


def test_duhamel_report(tmp_path, small_cfg):
    out = tmp_path / "out"
    assert run(["duhamel", "--t", "0.3"], cfg=small_cfg, out=out) == 0
    with open(out / "duhamel.json") as fh:
        summary = json.load(fh)
    assert summary["t"] == 0.3
    assert math.isfinite(summary["closure_max_error"])
    for key in ("r1", "r2", "r3"):
        assert math.isfinite(summary["residual_sup"][key])


def test_uchiyama_full_zero_table(tmp_path):
    # the deepest pieces need the full zero table to certify their floors
    out = tmp_path / "out"
    assert run(["uchiyama", "--grid", "4", "--n-r", "3"], out=out) == 0
    with open(out / "uchiyama.json") as fh:
        summary = json.load(fh)
    labels = [r["label"] for r in summary["reports"]]
    assert any(lbl.startswith("unit-mu") for lbl in labels)
    assert any(lbl.startswith("unit-flat") for lbl in labels)
    assert "halfline-0" in labels
    assert summary["spread_unit_mu"] < 5
    assert summary["spread_unit_flat"] < 5
    for rep in summary["reports"]:
        assert rep["A"] > 0 and math.isfinite(rep["A"])


def test_atoms_validate(tmp_path, small_cfg):
    out = tmp_path / "out"
    rc = run(["atoms", "validate", "--family", "mu", "--count", "12"],
             cfg=small_cfg, out=out)
    assert rc == 0
    with open(out / "atoms_validate_mu.json") as fh:
        payload = json.load(fh)
    assert payload["count"] == 12
    assert payload["n_valid"] == 12


@pytest.mark.parametrize("family,measure",
                         [("mu", MEASURE_MU), ("lebesgue", MEASURE_LEBESGUE)])
def test_atoms_decompose(tmp_path, small_cfg, family, measure):
    out = tmp_path / "out"
    rc = run(["atoms", "decompose", "--family", family],
             cfg=small_cfg, out=out)
    assert rc == 0
    with open(out / f"atoms_decompose_{family}.json") as fh:
        summary = json.load(fh)
    assert summary["residual_rel"] < 1e-6
    assert summary["n_details"] > 0
    assert summary["n_closers"] > 0
    assert summary["closure_l1"] < summary["coeff_l1"]
    header, body = read_csv(out / f"reconstruction_{family}.csv")
    assert header == "x,value"
    assert len(body) == grid_size(measure)


def test_atoms_batch(tmp_path, small_cfg):
    out = tmp_path / "out"
    rc = run(["atoms", "batch", "--family", "lebesgue", "--count", "5"],
             cfg=small_cfg, out=out)
    assert rc == 0
    with open(out / "atoms_batch_lebesgue.json") as fh:
        payload = json.load(fh)
    assert payload["count"] == 5
    assert math.isfinite(payload["max_norm"])
    assert all(r["valid"] for r in payload["rows"])


def test_h1_report(tmp_path, small_cfg):
    out = tmp_path / "out"
    assert run(["h1-report"], cfg=small_cfg, out=out) == 0
    with open(out / "h1_report.json") as fh:
        payload = json.load(fh)
    for tag in ("mu", "lebesgue"):
        assert 0 < payload[tag]["ratio"] < math.inf
        assert payload[tag]["residual_rel"] < 1e-6


def test_dirichlet_traces(tmp_path, small_cfg):
    out = tmp_path / "out"
    rc = run(["dirichlet", "--grid", "9", "--n-t", "3"],
             cfg=small_cfg, out=out)
    assert rc == 0
    with open(out / "dirichlet.json") as fh:
        manifest = json.load(fh)["traces"]
    assert len(manifest) == 3
    for entry in manifest:
        header, body = read_csv(out / entry["file"])
        assert header == "x,value"
        assert len(body) == 9


# ---------------------------------------------------------------------------
# determinism


def test_rerun_is_byte_identical(tmp_path, small_cfg):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert run(["atoms", "decompose", "--family", "mu"],
                   cfg=small_cfg, out=out) == 0
        assert run(["zeros"], cfg=small_cfg, out=out) == 0
    for name in ("atoms_decompose_mu.json", "reconstruction_mu.csv",
                 "zeros.csv"):
        with open(out1 / name, "rb") as fh:
            b1 = fh.read()
        with open(out2 / name, "rb") as fh:
            b2 = fh.read()
        assert b1 == b2, name


# ---------------------------------------------------------------------------
# failure modes and exit codes


def test_uncertified_time_exits_one(tmp_path, small_cfg, capsys):
    out = tmp_path / "out"
    rc = run(["kernel", "--which", "poisson-mu", "--t", "1e-7", "--grid", "4"],
             cfg=small_cfg, out=out)
    assert rc == 1
    report = json.loads(capsys.readouterr().out)
    assert report["error"] == "numerics"
    assert report["operation"] == "poisson_kernel"


def test_small_zero_table_fails_uchiyama(tmp_path, small_cfg, capsys):
    out = tmp_path / "out"
    rc = run(["uchiyama", "--grid", "4", "--n-r", "3"],
             cfg=small_cfg, out=out)
    assert rc == 1
    report = json.loads(capsys.readouterr().out)
    assert report["error"] == "numerics"
    assert report["operation"] == "uchiyama"


def test_unknown_config_key_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("n_zeros = 64\nmystery_knob = 3\n")
    rc = run(["zeros"], cfg=str(bad), out=tmp_path / "out")
    assert rc == 2
    report = json.loads(capsys.readouterr().err)
    assert report["error"] == "config"
    assert "mystery_knob" in report["detail"]


def test_missing_config_file_exits_two(tmp_path, capsys):
    rc = run(["zeros"], cfg=str(tmp_path / "nope.cfg"), out=tmp_path / "out")
    assert rc == 2
    report = json.loads(capsys.readouterr().err)
    assert report["error"] == "config"


def test_invalid_config_value_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("t_ratio = 2.0\n")
    rc = run(["zeros"], cfg=str(bad), out=tmp_path / "out")
    assert rc == 2
    assert json.loads(capsys.readouterr().err)["error"] == "config"
