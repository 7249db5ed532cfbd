import json

import numpy as np

from ars_tangency import models as md
from ars_tangency import output
from ars_tangency.flow import shoot
from ars_tangency.loci import ConjugatePoint, CutPoint


def test_trajectory_csv_round_trips_full_precision(tmp_path):
    traj = shoot(md.nilpotent(), 1.0, 1.7, 2.0)
    path = output.write_trajectory_csv(tmp_path / "g.csv", traj)
    header, data = output.read_csv(path)
    assert header == ["t", "y", "z", "p_y", "p_z"]
    np.testing.assert_array_equal(data[:, 0], traj.times)
    np.testing.assert_array_equal(data[:, 1:], traj.states)


def test_lifted_columns(tmp_path):
    class Fake:
        times = np.array([0.0, 1.0])
        states = np.arange(12.0).reshape(2, 6)

    path = output.write_trajectory_csv(tmp_path / "l.csv", Fake, lifted=True)
    assert path.read_text().splitlines()[0] == "t,x,y,z,p_x,p_y,p_z"


def test_json_table(tmp_path):
    pts = [CutPoint(-0.1, 0.2, 0.3, 0.05, 0.051, "upper")]
    path = output.write_cut_csv(tmp_path / "c.csv", pts, fmt="json")
    assert path.suffix == ".json"
    data = json.loads(path.read_text())
    assert data["columns"] == ["y", "z", "t", "eta", "branch"]
    assert data["rows"] == [[-0.1, 0.2, 0.3, 0.05, "upper"]]


def test_conjugate_csv_skips_missing(tmp_path):
    pts = [ConjugatePoint(0.1, 0.2, 1.0, 4.0), None]
    path = output.write_conjugate_csv(tmp_path / "k.csv", pts, "upper")
    lines = path.read_text().splitlines()
    assert lines == ["y,z,t,eta,branch", "0.10000000000000001,0.20000000000000001,1,0.5,upper"]


def test_svg_is_deterministic_with_legend(tmp_path):
    layers = {
        "sphere": [np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])],
        "cut": [np.array([[0.0, 0.0], [0.0, 1.0]])],
        "singular": [np.array([[-1.0, -0.5], [1.0, -0.5]])],
    }
    a = output.svg_plot(tmp_path / "a.svg", layers, title="t").read_bytes()
    b = output.svg_plot(tmp_path / "b.svg", layers, title="t").read_bytes()
    assert a == b
    text = a.decode()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    for label in ("sphere (solid)", "cut locus (dashed)", "singular set Z (dotted)"):
        assert label in text
    assert text.count("<polyline") == 3
