import json

import numpy as np
import pytest

from mollipath.cli import main
from mollipath.io import InputFormatError, parse_waypoints, read_waypoints, waypoints_csv
from mollipath.polyline import Polyline


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture
def abs_json(tmp_path):
    return _write(tmp_path, "abs.json", '{"dimension": 2, "waypoints": [[-1,1],[0,0],[1,1]]}')


def _rows(path):
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# ")
    header = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    return json.loads(lines[0][2:]), header, data


def test_parse_formats():
    pl = Polyline([(0, 1), (2, 3.5)])
    assert parse_waypoints('{"dimension": 2, "waypoints": [[0,1],[2,3.5]]}') == pl
    assert parse_waypoints("0,1\n2,3.5\n") == pl
    assert parse_waypoints("x0,x1\n0,1\n\n2,3.5\n") == pl
    for bad in ("{", '{"waypoints": [[0,1],[2]]}', '{"dimension": 3, "waypoints": [[0,1],[1,1]]}',
                "a,b\n1,2\n", "1,2\n3\n", "1,2\n", "", '{"waypoints": [["a"], ["b"]]}'):
        with pytest.raises(InputFormatError):
            parse_waypoints(bad)


def test_read_missing_file(tmp_path):
    with pytest.raises(InputFormatError):
        read_waypoints(str(tmp_path / "missing.csv"))


def test_smooth_directional_abs(tmp_path, abs_json, capsys):
    out = str(tmp_path / "o.csv")
    rc = main(["smooth", "--input", abs_json, "--output", out, "--method", "directional",
               "--epsilon", "0.5", "--samples", "1001"])
    assert rc == 0
    assert "eps >= 0.5" in capsys.readouterr().err
    manifest, header, data = _rows(out)
    assert header == ["t", "x0", "x1", "d1_0", "d1_1", "d2_0", "d2_1", "kappa"]
    assert data.shape == (1001, 8)
    row = data[data[:, 0] == 1.0][0]
    assert np.abs(row[1:3]).max() < 1e-9
    assert manifest["eps"] == 0.5 and manifest["samples"] == 1001
    assert manifest["method"] == "directional"


def test_smooth_gamma_zero_matches_conventional(tmp_path, abs_json):
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    main(["smooth", "--input", abs_json, "--output", a, "--epsilon", "0.3", "--gamma", "0"])
    main(["smooth", "--input", abs_json, "--output", b, "--epsilon", "0.3",
          "--method", "conventional"])
    assert open(a).read().splitlines()[1:] == open(b).read().splitlines()[1:]


def test_smooth_deterministic_and_extend(tmp_path, abs_json):
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    args = ["smooth", "--input", abs_json, "--epsilon", "0.2", "--extend", "-1", "3",
            "--samples", "9"]
    main(args + ["--output", a])
    first = open(a).read()
    main(args + ["--output", a])
    assert open(a).read() == first
    main(args + ["--output", b])
    assert open(b).read().splitlines()[1:] == first.splitlines()[1:]
    _, _, data = _rows(a)
    assert data[0, 0] == -1.0 and data[-1, 0] == 3.0
    # outside the corner windows the extension is the affine continuation
    assert np.allclose(data[0, 1:3], (-2.0, 2.0))


def test_gamma_sweep_agree_on_windows(tmp_path):
    from mollipath.corpus import GAMMA_SWEEP, GAMMA_SWEEP_PATH
    inp = _write(tmp_path, "g.csv", waypoints_csv(GAMMA_SWEEP_PATH))
    datas = []
    for g in GAMMA_SWEEP:
        out = str(tmp_path / f"g{g}.csv")
        assert main(["smooth", "--input", inp, "--output", out, "--epsilon", "0.25",
                     "--gamma", str(g), "--samples", "401"]) == 0
        datas.append(_rows(out)[2])
    t = datas[0][:, 0]
    frac = t - np.floor(t)
    window = (frac >= 0.25 + 1e-12) & (frac <= 0.75 - 1e-12)
    for d in datas[1:]:
        assert np.abs(d[window, 1:3] - datas[0][window, 1:3]).max() < 1e-9


def test_curvature_three_point(tmp_path):
    inp = _write(tmp_path, "t.json", '{"dimension": 2, "waypoints": [[0,0],[1,2],[3,1]]}')
    out = str(tmp_path / "k.csv")
    assert main(["curvature", "--input", inp, "--output", out, "--epsilon", "0.25",
                 "--samples", "401"]) == 0
    manifest, header, data = _rows(out)
    assert header == ["t", "kappa", "bound"]
    assert manifest["extra"]["kappa_source"] == "exact"
    assert np.all(data[:, 1] <= data[:, 2])
    assert np.all(data[:, 2] == data[0, 2])


def test_curvature_conventional_zero_at_corner_only_for_gamma_minus_one(tmp_path, abs_json):
    out = str(tmp_path / "k.csv")
    main(["curvature", "--input", abs_json, "--output", out, "--epsilon", "0.25",
          "--gamma", "-1", "--samples", "5"])
    _, _, data = _rows(out)
    assert data[2, 0] == 1.0 and data[2, 1] == 0.0


def test_select_epsilon(tmp_path, abs_json):
    out = str(tmp_path / "r.json")
    assert main(["select-epsilon", "--input", abs_json, "--output", out,
                 "--kappa-max", "14.4", "--gamma", "1"]) == 0
    doc = json.load(open(out))
    assert doc["selected_eps"] == pytest.approx(0.5, rel=0.01)
    assert doc["sampled_kappa"] <= 14.4
    assert doc["manifest"]["command"] == "select-epsilon"


def test_select_epsilon_collinear_and_infeasible(tmp_path):
    col = _write(tmp_path, "c.csv", "0,0\n1,1\n2,2\n")
    out = str(tmp_path / "r.json")
    assert main(["select-epsilon", "--input", col, "--output", out, "--kappa-max", "1"]) == 0
    doc = json.load(open(out))
    assert doc["selected_eps"] == 0.1
    assert doc["per_corner"][0]["bound_at_selected_eps"] == 0.0
    hair = _write(tmp_path, "h.csv", "0,0\n1,0\n0,0.01\n")
    assert main(["select-epsilon", "--input", hair, "--output", out, "--kappa-max", "0.1"]) == 4


def test_verify(tmp_path):
    out = str(tmp_path / "v.jsonl")
    assert main(["verify", "--suite", "counterexamples", "--output", out]) == 0
    lines = [json.loads(ln) for ln in open(out)]
    assert lines and all({"check_id", "passed", "worst_violation"} <= set(d) for d in lines)
    assert main(["verify", "--suite", "unknown"]) == 3


def test_verify_all(tmp_path):
    out = str(tmp_path / "v.jsonl")
    assert main(["verify", "--suite", "all", "--output", out]) == 0


def test_echo_input_round_trip(tmp_path, capsys):
    pts = np.random.default_rng(0).normal(size=(5, 3))
    inp = _write(tmp_path, "w.csv", "\n".join(",".join(repr(float(v)) for v in p) for p in pts))
    assert main(["smooth", "--input", inp, "--echo-input"]) == 0
    echoed = capsys.readouterr().out
    assert parse_waypoints(echoed) == Polyline(pts)


@pytest.mark.parametrize("args, code", [
    (["smooth", "--epsilon", "0.1"], 3),
    (["smooth", "--input", "{abs}"], 3),
    (["smooth", "--input", "{abs}", "--epsilon", "-1"], 3),
    (["smooth", "--input", "{abs}", "--epsilon", "0.1", "--samples", "1"], 3),
    (["smooth", "--input", "{abs}", "--epsilon", "0.1", "--method", "spline"], 3),
    (["smooth", "--input", "{abs}", "--epsilon", "abc"], 3),
    (["select-epsilon", "--input", "{abs}", "--kappa-max", "0"], 3),
    (["smooth", "--input", "{bad}", "--epsilon", "0.1"], 2),
    ([], 3),
])
def test_exit_codes(tmp_path, abs_json, args, code):
    bad = _write(tmp_path, "bad.json", "{not json")
    args = [a.format(abs=abs_json, bad=bad) for a in args]
    assert main(args) == code


def test_large_eps_warning(abs_json, capsys):
    assert main(["smooth", "--input", abs_json, "--epsilon", "1.5", "--samples", "3"]) == 0
    assert "eps >= 1" in capsys.readouterr().err
