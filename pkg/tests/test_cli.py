import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from conftest import one_square_map, square
from quietpath import cli
from quietpath.graph import DEFAULT_TOUR_PARAMS, QuietZoneMap
from quietpath.mapio import load_map, save_map
from quietpath.planner import PathPlanner, PathResult
from quietpath.tsp import import_atsp


@pytest.fixture
def map_file(tmp_path):
    p = tmp_path / "m.json"
    save_map(one_square_map(), p)
    return p


@pytest.fixture
def tour_file(tmp_path):
    m = QuietZoneMap.from_raw([square(500, 500, 150)], (0, 0), None, [(900, 700), (300, 900), (1000, 100)],
                              params=DEFAULT_TOUR_PARAMS)
    p = tmp_path / "t.json"
    save_map(m, p)
    return p


def test_path_record_and_determinism(map_file, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["path", "--map", str(map_file), "--relaxed", "--exact", "--out", str(a)]) == 0
    assert cli.main(["path", "--map", str(map_file), "--relaxed", "--exact", "--out", str(b)]) == 0
    assert a.read_text() == b.read_text()
    rec = json.loads(a.read_text())
    ex, rx = rec["results"]["exact"], rec["results"]["relaxed"]
    assert rx["cost"] <= ex["cost"] * (1 + 1e-6)
    assert "opt_time" not in ex and ex["plan"]["segments"]
    assert rec["gamma"] == pytest.approx(100 / 3000)


def test_svg_counts(map_file, tmp_path):
    svg = tmp_path / "p.svg"
    out = tmp_path / "r.json"
    assert cli.main(["path", "--map", str(map_file), "--out", str(out), "--svg", str(svg)]) == 0
    text = svg.read_text()
    segs = json.loads(out.read_text())["results"]["exact"]["plan"]["segments"]
    assert text.count('class="zone"') == 1
    assert text.count('class="seg"') == len(segs)
    # one marker per in-segment switch plus one per engine change at a segment joint
    starts = {"fuel": 1, "fuel_first": 1, "electric": 0, "electric_first": 0}
    ends = {"fuel": 1, "electric_first": 1, "electric": 0, "fuel_first": 0}
    live = [s for s in segs if s["length"] > 0]
    inner = sum(s["mode"] in ("electric_first", "fuel_first") for s in live)
    joints = sum(ends[a["mode"]] != starts[b["mode"]] for a, b in zip(live, live[1:]))
    assert text.count('class="switch"') == inner + joints


def test_generate_roundtrip_and_zero_zones(tmp_path):
    p = tmp_path / "g.json"
    assert cli.main(["generate", "--zones", "0", "--seed", "4", "--out", str(p)]) == 0
    m = load_map(p)
    assert m.zones == () or len(m.zones) == 0
    assert math.dist(m.source, m.goal) >= 1000
    assert cli.main(["path", "--map", str(p), "--out", str(tmp_path / "r.json")]) == 0
    p2 = tmp_path / "g2.json"
    assert cli.main(["generate", "--zones", "3", "--seed", "4", "--out", str(p2)]) == 0
    q = tmp_path / "g3.json"
    assert cli.main(["generate", "--zones", "3", "--seed", "4", "--out", str(q)]) == 0
    assert p2.read_text() == q.read_text()


def test_bad_inputs_exit_2(tmp_path, map_file):
    assert cli.main(["path", "--map", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["path", "--map", str(bad)]) == 2
    data = json.loads(map_file.read_text())
    data["source"] = [1500, 0]                     # inside the zone
    bad.write_text(json.dumps(data))
    assert cli.main(["path", "--map", str(bad)]) == 2
    data = json.loads(map_file.read_text())
    data["params"]["q_init"] = 150
    bad.write_text(json.dumps(data))
    assert cli.main(["path", "--map", str(bad)]) == 2
    data = json.loads(map_file.read_text())
    data["goal"] = None
    bad.write_text(json.dumps(data))
    assert cli.main(["path", "--map", str(bad)]) == 2


def test_infeasible_exit_3(map_file, monkeypatch, capsys):
    def nothing(self, method="exact", *a, **k):
        return PathResult(method, math.inf, math.inf, None, None, 0.0, 0.0, self.scaled.scale, "infeasible")
    monkeypatch.setattr(PathPlanner, "solve", nothing)
    assert cli.main(["path", "--map", str(map_file)]) == 3
    rec = json.loads(capsys.readouterr().out)
    assert rec["results"]["exact"]["cost"] is None


def test_tour_both_and_atsp_export(tour_file, tmp_path):
    out, mat = tmp_path / "t.json", tmp_path / "c.txt"
    assert cli.main(["tour", "--map", str(tour_file), "--method", "both", "--d", "2", "--out", str(out),
                     "--export-atsp", str(mat)]) == 0
    rec = json.loads(out.read_text())
    ca, cg = rec["tours"]["minsoc"]["cost"], rec["tours"]["gtsp"]["cost"]
    assert rec["percent_difference"] == pytest.approx(100 * (ca - cg) / cg if cg > 0 else 0.0)
    C = import_atsp(mat)
    assert C.shape == (4, 4) and np.isfinite(C[~np.eye(4, dtype=bool)]).all()
    assert cli.main(["tour", "--map", str(tmp_path / "t.json")]) == 2


def test_benchmark_csv_roundtrip(tmp_path, capsys):
    out = tmp_path / "b.csv"
    args = ["benchmark", "--zones", "2", "--width", "3000", "--height", "2000", "--scenarios", "2",
            "--methods", "relaxed,exact", "--out", str(out)]
    assert cli.main(args) == 0
    summary = json.loads(capsys.readouterr().err)
    rows = cli.read_rows(out.read_text())
    assert len(rows) == 4 and [r.method for r in rows] == ["relaxed", "exact"] * 2
    assert cli.write_rows(rows) == out.read_text()
    assert summary["instances"] == 2
    for r0, r1 in zip(rows[::2], rows[1::2]):
        assert r0.cost <= r1.cost * (1 + 1e-6)


def test_export_model_and_module_entry(map_file, tmp_path):
    out = tmp_path / "model.txt"
    r = subprocess.run([sys.executable, "-m", "quietpath.cli", "export-model", "--map", str(map_file),
                        "--relaxed", "--out", str(out)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert re.search(r"\d", out.read_text())
    r = subprocess.run([sys.executable, "-m", "quietpath.cli", "path"], capture_output=True, text=True)
    assert r.returncode == 2
