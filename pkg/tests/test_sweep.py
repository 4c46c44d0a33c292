import json

import numpy as np
import pytest

from gmegap.sweep import (
    ConfigError,
    SweepRow,
    classify_regions,
    config_schema,
    grid_points,
    load_config,
    nesting_violations,
    run_sweep,
)
from gmegap.witnesses import DetectionVerdict


def base_config(**over):
    doc = {
        "model": {"kind": "heisenberg", "J": 1, "gamma": 1, "delta": 1, "lattice": {"kind": "square", "dims": [2, 2]}},
        "axes": [{"name": "h", "min": -2, "max": 2, "steps": 5}, {"name": "kT", "min": 0.01, "max": 2, "steps": 5}],
        "criteria": ["gap-k2", "gap-k3", "gap-k4", "Q", "concurrence"],
        "optimizer": {"restarts": 8, "seed": 3},
    }
    doc.update(over)
    return doc


@pytest.fixture(scope="module")
def small_sweep():
    return run_sweep(load_config(base_config()))


def test_grid_order_and_size(small_sweep):
    pts = grid_points(small_sweep.config)
    assert len(pts) == 25 == len(small_sweep.rows)
    assert pts[0] == {"h": -2.0, "kT": 0.01} and pts[1]["h"] == -2.0
    assert [r.params for r in small_sweep.rows] == pts


def test_csv_header_and_determinism(small_sweep):
    csv_text = small_sweep.to_csv()
    header = csv_text.splitlines()[0].split(",")
    assert header[:7] == ["h", "kT", "E0", "degeneracy", "E_2sep", "E_3sep", "E_4sep"]
    assert header[-1] == "caveats"
    assert "Q_detected" in header and "C_gme" in header
    again = run_sweep(load_config(base_config()))
    assert again.to_csv() == csv_text


def test_cached_equals_uncached(small_sweep):
    uncached = run_sweep(small_sweep.config, cache=False)
    assert uncached.to_csv() == small_sweep.to_csv()


def test_process_pool_matches_serial(small_sweep):
    assert run_sweep(small_sweep.config, workers=2).to_csv() == small_sweep.to_csv()


def test_subgrid_rows_match_full_grid(small_sweep):
    sub = run_sweep(load_config(base_config(axes=[{"name": "h", "min": 0, "max": 0, "steps": 1},
                                                  {"name": "kT", "min": 0.01, "max": 2, "steps": 5}])))
    full = [r for r in small_sweep.rows if r.params["h"] == 0.0]
    assert [r.ksep for r in sub.rows] == [r.ksep for r in full]


def test_nesting_direction_and_chain(small_sweep):
    assert nesting_violations(small_sweep.rows) == []
    for r in small_sweep.rows:
        assert r.E0 <= r.ksep[2] + 1e-8 <= r.ksep[3] + 2e-8 <= r.ksep[4] + 3e-8


def test_low_temperature_detected(small_sweep):
    cold = [r for r in small_sweep.rows if r.kT == 0.01]
    assert all(r.detected("gap-k2") for r in cold if r.degeneracy == 1)


def test_classify_regions(small_sweep):
    b = classify_regions(small_sweep.rows, "gap-k2")
    assert b.x_axis == "h" and b.y_axis == "kT"
    assert b.monotone
    assert all(0.01 <= y <= 2 for _, y in b.points)


def _row(x, y, det):
    v = DetectionVerdict("c", 0.0 if det else 2.0, 1.0)
    return SweepRow({"x": x, "y": y}, y, 0.0, 1, {}, 0.0, 0.0, {"c": v})


def test_classify_regions_interpolates_and_flags():
    rows = [_row(0.0, y, y < 2) for y in (1.0, 2.0, 3.0)]
    rows += [_row(1.0, y, y != 2) for y in (1.0, 2.0, 3.0)]
    b = classify_regions(rows, "c")
    assert b.violations == [1.0]
    x, y = b.points[0]
    assert x == 0.0 and 1.0 < y < 2.0
    with pytest.raises(ValueError):
        classify_regions(rows[:-1], "c")


def test_json_output(tmp_path, small_sweep):
    path = tmp_path / "out.json"
    small_sweep.write(str(path), "json")
    doc = json.loads(path.read_text())
    assert len(doc["rows"]) == 25
    assert doc["provenance"]["seed"] == 3
    assert set(doc["rows"][0]["verdicts"]) == {"gap-k2", "gap-k3", "gap-k4", "Q", "concurrence"}


@pytest.mark.parametrize("doc,path", [
    (base_config(axes=[{"name": "beta", "min": 0, "max": 1, "steps": 2}]), "axes.0.name"),
    (base_config(criteria=["gap-k9"]), "criteria.0"),
    (base_config(criteria=["nonsense"]), "criteria.0"),
    (base_config(axes=[]), "axes"),
    (base_config(optimizer={"restarts": 0}), "optimizer.restarts"),
    (base_config(model={"kind": "ising"}), "model"),
    (base_config(extra_field=1), "extra_field"),
    (base_config(axes=[{"name": "h", "min": 2, "max": -2, "steps": 3}]), "axes.0"),
])
def test_config_errors_carry_paths(doc, path):
    with pytest.raises(ConfigError) as err:
        load_config(doc)
    assert err.value.path.startswith(path)


def test_config_from_json_text_and_schema():
    cfg = load_config(json.dumps(base_config()))
    assert cfg.gap_levels == [2, 3, 4]
    schema = config_schema()
    assert "model" in schema["properties"] and "axes" in schema["properties"]


def test_spin1_sweep_uses_lu_trials_and_entropy():
    doc = {
        "model": {"kind": "spin1-chain", "n": 3, "beta": 1.0},
        "axes": [{"name": "h", "min": 0, "max": 4, "steps": 2}],
        "criteria": ["gap-k2", "Q", "entropy"],
        "optimizer": {"restarts": 5},
        "thermal": {"kT": 0.01},
        "entropy_restarts": 1,
        "entropy_components": 8,
    }
    res = run_sweep(load_config(doc))
    assert [r.kT for r in res.rows] == [0.01, 0.01]
    low, high = res.rows
    assert low.detected("gap-k2") and not high.detected("gap-k2")
    assert "heuristic" in low.verdicts["entropy"].caveat
    assert low.verdicts["entropy"].criterion == "entropy-k2"


def test_include_zero_temperature():
    cfg = load_config(base_config(axes=[{"name": "kT", "min": 0, "max": 1, "steps": 3}],
                                  thermal={"epsilon": 0.05, "include_zero": True}, criteria=["gap-k2"]))
    assert [p["kT"] for p in grid_points(cfg)] == [0.0, 0.05, 0.525, 1.0]
    rows = run_sweep(cfg).rows
    assert np.isclose(rows[0].energy, rows[0].E0)


ROOT = __import__("pathlib").Path(__file__).resolve().parents[1]


def test_published_schema_is_current():
    assert json.loads((ROOT / "docs" / "sweep_config.schema.json").read_text()) == config_schema()


@pytest.mark.parametrize("path", sorted((ROOT / "configs").glob("*.json")), ids=lambda p: p.name)
def test_example_configs_validate(path):
    load_config(path.read_text())
