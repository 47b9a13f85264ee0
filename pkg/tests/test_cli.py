import csv
import io
import json
import math

import numpy as np
import pytest

from bicycle_geodesics import cli
from bicycle_geodesics.closedform import front_track_cartesian, kappa_sq_closed
from bicycle_geodesics.params import GeodesicParams


def run(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), out=buf)
    return code, buf.getvalue()


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], float)


def test_simulate_writes_track(tmp_path):
    out = tmp_path / "track.csv"
    code, _ = run("simulate", "--a", "0.5", "--b", "1", "--t-max", "10", "--dt-out", "0.01", "--out", str(out))
    assert code == 0
    header, data = read_csv(out.read_text())
    assert header == list(cli.TRACK_HEADER)
    assert data.shape == (1001, 9)
    assert data[-1, 0] == pytest.approx(10.0)
    # front and back wheel stay one unit apart
    assert np.max(np.abs(np.linalg.norm(data[:, 1:4] - data[:, 4:7], axis=1) - 1.0)) <= 1e-9
    p = GeodesicParams.from_ab(0.5, 1.0)
    assert np.max(np.abs(data[:, 7] ** 2 - kappa_sq_closed(data[:, 0], p))) <= 1e-7


def test_simulate_is_deterministic(tmp_path):
    args = ("simulate", "--a", "0.7", "--b", "0.5", "--t-max", "3")
    assert run(*args)[1] == run(*args)[1]


def test_simulate_json():
    code, text = run("simulate", "--t-max", "1", "--dt-out", "0.5", "--format", "json")
    doc = json.loads(text)
    assert code == 0
    assert doc["columns"] == list(cli.TRACK_HEADER)
    assert len(doc["rows"]) == 3


def test_closed_form_round_trip():
    code, text = run("closed-form", "--a", "0.5", "--b", "1", "--t-max", "2", "--dt-out", "0.25")
    assert code == 0
    _, data = read_csv(text)
    p = GeodesicParams.from_ab(0.5, 1.0)
    for row in data:
        exact = front_track_cartesian(row[0], p)
        assert np.all(np.abs(row[1:4] - exact) <= np.spacing(np.abs(exact)) + 1e-300)


def test_monodromy_soliton(capsys):
    code, _ = run("monodromy", "--a", "1", "--b", "0")
    assert code == 1
    assert "soliton: aperiodic" in capsys.readouterr().err


def test_monodromy_schema():
    code, text = run("monodromy", "--a", "0.5", "--b", "1")
    doc = json.loads(text)
    assert code == 0
    assert set(doc) == {"params", "period", "closed", "numeric", "conjecture"}
    assert doc["params"] == {"a": 0.5, "b": 1.0}
    assert set(doc["closed"]) == {"dtheta", "dz"}
    assert set(doc["numeric"]) == {"dtheta", "dz", "axis_point", "axis_dir", "residual"}
    assert set(doc["conjecture"]) >= {"angle_I", "matches"}
    assert doc["conjecture"]["matches"] is True
    assert abs(doc["numeric"]["dz"] - doc["closed"]["dz"]) <= 1e-6


def test_monodromy_planar_has_null_conjecture():
    doc = json.loads(run("monodromy", "--a", "0.7", "--b", "0")[1])
    assert doc["conjecture"]["angle_I"] is None


def test_correspond_report(tmp_path):
    out = tmp_path / "tracks.csv"
    code, text = run("correspond", "--a", "0.5", "--b", "1", "--out", str(out))
    doc = json.loads(text)
    assert code == 0
    assert doc["kappa_shift_residual"] <= 1e-6
    assert doc["dz_half_residual"] <= 1e-8
    header, data = read_csv(out.read_text())
    assert header[:1] == ["t"] and len(header) == data.shape[1]
    # flipped front wheel is the reflection of the front wheel through the back wheel
    f, y, g = data[:, 1:4], data[:, 4:7], data[:, 7:10]
    assert np.max(np.abs(f + g - 2 * y)) <= 1e-12


def test_shoot_forward_generated():
    code, text = run("shoot", "--a", "0.5", "--b", "1", "--t-max", "1.5")
    doc = json.loads(text)
    assert code == 0
    assert any(abs(s["duration"] - 1.5) <= 1e-5 and s["residual"] <= 1e-8 for s in doc["solutions"])


def test_shoot_needs_both_placements(capsys):
    code, _ = run("shoot", "--start", "0,0,0,1,0,0")
    assert code == 2


def test_check_all_passes():
    code, text = run("check", "--suite", "all")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines and all(line.startswith("PASS") for line in lines if line[:4] in ("PASS", "FAIL"))


@pytest.mark.parametrize("argv", [
    ("simulate", "--rel-tol", "-1"),
    ("simulate", "--a", "-0.5"),
    ("simulate", "--b", "nan"),
    ("check", "--suite", "bogus"),
    ("sweep", "--grid-a", "0.5,x"),
    ("frobnicate",),
])
def test_argument_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_closed_form_circle_is_numeric_error():
    assert run("closed-form", "--a", "0", "--b", "0")[0] == 1


def test_sweep_excludes_singular_points(caplog):
    code, text = run("sweep", "--grid-a", "0.5,1", "--grid-b", "0,0.5,1")
    assert code == 0
    header, data = read_csv(text)
    assert header == list(cli.SWEEP_HEADER)
    expected = [(a, b) for a in (0.5, 1.0) for b in (0.0, 0.5, 1.0) if (a, b) not in ((1.0, 0.0), (0.5, 0.5))]
    assert [tuple(r[:2]) for r in data] == expected
    assert "excluding" in caplog.text
    assert np.all(data[:, 5] <= 1e-7)
    assert np.all(data[:, 7] <= 1e-6)


def test_is_singular():
    assert cli.is_singular(1.0, 0.0)
    assert cli.is_singular(0.5, 0.5)
    assert cli.is_singular(0.5, 1.0) is None
    assert not math.isnan(float(cli.sweep_point(0.5, 1.0, cli.RunConfig.from_args(
        cli.build_parser().parse_args(["sweep"])))[2]))
