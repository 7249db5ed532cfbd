import json

import pytest

from ars_tangency import cli
from ars_tangency.output import read_csv


def run(args, tmp_path):
    return cli.main(args + ["--output-dir", str(tmp_path)])


def test_geodesic_returns_to_axis(tmp_path):
    assert run(["geodesic", "--model", "nilpotent", "--py", "1", "--pz", "1", "--t", "3.7081494"], tmp_path) == 0
    header, data = read_csv(tmp_path / "geodesic.csv")
    assert header == ["t", "y", "z", "p_y", "p_z"]
    assert abs(data[-1, 1]) < 1e-6


def test_geodesic_straight_line(tmp_path):
    assert run(["geodesic", "--model", "nilpotent", "--py", "1", "--pz", "0", "--t", "1"], tmp_path) == 0
    _, data = read_csv(tmp_path / "geodesic.csv")
    assert data[:, 1] == pytest.approx(data[:, 0], abs=1e-15)
    assert (data[:, 2] == 0).all()


def test_missing_pz_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(["geodesic", "--model", "nilpotent", "--py", "1", "--t", "1"], tmp_path)
    assert info.value.code == 2


@pytest.mark.parametrize("extra", [["--tol", "0.1"], ["--py", "0.5"], ["--epsilon", "1"], ["--format", "xml"]])
def test_bad_flags_are_usage_errors(tmp_path, extra):
    args = ["geodesic", "--model", "nilpotent", "--py", "1", "--pz", "1", "--t", "1"] + extra
    with pytest.raises(SystemExit) as info:
        run(args, tmp_path)
    assert info.value.code == 2


def test_numeric_failure_exits_1(tmp_path, capsys):
    # far outside the small-eta regime the matching has no admissible seed
    code = run(["locus", "cut", "--model", "order0", "--epsilon", "1", "--epsilon-prime", "1",
                "--eta0", "2"], tmp_path)
    assert code == 1
    assert "cut matching failed" in capsys.readouterr().err


def test_outputs_are_byte_identical(tmp_path):
    args = ["geodesic", "--model", "order0", "--epsilon", "1", "--epsilon-prime", "0.5",
            "--py", "-1", "--pz", "3", "--t", "2", "--plot"]
    run(args, tmp_path / "a")
    run(args, tmp_path / "b")
    for name in ("geodesic.csv", "geodesic.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_lifted_and_grushin_geodesics(tmp_path):
    assert run(["geodesic", "--model", "order0", "--lifted", "--py", "1", "--pz", "2", "--t", "1"], tmp_path) == 0
    assert read_csv(tmp_path / "geodesic.csv")[0] == ["t", "x", "y", "z", "p_x", "p_y", "p_z"]
    assert run(["geodesic", "--model", "grushin", "--py", "1", "--pz", "1", "--t", "3.141592653589793"],
               tmp_path) == 0
    _, data = read_csv(tmp_path / "geodesic.csv")
    assert abs(data[-1, 1]) < 1e-9


def test_cut_locus_writes_two_branches(tmp_path):
    code = run(["locus", "cut", "--model", "order0", "--epsilon", "1", "--epsilon-prime", "1",
                "--eta0", "0.08:-0.02:4", "--plot"], tmp_path)
    assert code == 0
    for branch in ("upper", "lower"):
        header, data = read_csv(tmp_path / f"cut_{branch}.csv")
        assert header == ["y", "z", "t", "eta", "branch"]
        assert len(data) == 4
    report = json.loads((tmp_path / "cut_report.json").read_text())
    assert abs(report["upper"]["exponent"] - 1.5) < 0.1
    assert "cut locus (dashed)" in (tmp_path / "cut.svg").read_text()


def test_sphere_command_symmetric(tmp_path):
    code = run(["locus", "sphere", "--model", "order0", "--epsilon", "1", "--epsilon-prime", "0",
                "--r", "0.3", "--resolution", "20"], tmp_path)
    assert code == 0
    _, pts = read_csv(tmp_path / "sphere.csv")
    for y, z in pts:
        d = ((pts[:, 0] + y) ** 2 + (pts[:, 1] - z) ** 2).min() ** 0.5
        assert d < 1e-9


def test_conjugate_command_cubic_fit(tmp_path):
    assert run(["locus", "conjugate", "--model", "nilpotent", "--eta0", "0.1:0.1:5"], tmp_path) == 0
    report = json.loads((tmp_path / "conjugate_report.json").read_text())
    assert report["upper"]["exponent"] == pytest.approx(3.0, abs=1e-8)
    assert report["upper"]["alpha"] == pytest.approx(report["nilpotent_alpha_exact"], rel=1e-8)


def test_front_command(tmp_path):
    assert run(["locus", "front", "--model", "nilpotent", "--t", "1", "--n", "5"], tmp_path) == 0
    header, data = read_csv(tmp_path / "front.csv")
    assert header == ["y", "z", "p_y0", "p_z0", "t"]
    assert len(data) == 2 * 11


def test_locus_rejects_grushin(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(["locus", "front", "--model", "grushin", "--t", "1"], tmp_path)
    assert info.value.code == 2


def test_perturb_constants(tmp_path, capsys):
    assert run(["perturb-constants"], tmp_path) == 0
    data = json.loads((tmp_path / "perturb_constants.json").read_text())
    assert set(data) == {"K", "s0", "j_prime_s0", "g1_2K", "g2_2K", "g3_2K", "Y1_2K", "Z1_2K"}
    assert json.loads(capsys.readouterr().out) == data


def test_model_file(tmp_path):
    model = tmp_path / "m.json"
    model.write_text(json.dumps({"name": "mine", "epsilon": 1.0, "epsilon_prime": 0.2,
                                 "higher_terms": [[0, 2, 0.1]]}))
    assert run(["geodesic", "--model-file", str(model), "--py", "1", "--pz", "4", "--t", "0.5"], tmp_path) == 0


def test_settings_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tol": 1e-9, "format": "json"}))
    parser = cli.build_parser()
    env = {"ARS_TOL": "1e-8"}
    assert cli.merge_settings(parser.parse_args(["verify"]), env)["tol"] == 1e-8
    s = cli.merge_settings(parser.parse_args(["verify", "--config", str(cfg)]), env)
    assert s["tol"] == 1e-9 and s["format"] == "json"
    s = cli.merge_settings(parser.parse_args(["verify", "--config", str(cfg), "--tol", "1e-11"]), env)
    assert s["tol"] == 1e-11
    assert cli.merge_settings(parser.parse_args(["verify"]), {})["tol"] is None


def test_config_with_unknown_key_is_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tolerance": 1e-9}))
    with pytest.raises(SystemExit) as info:
        run(["perturb-constants", "--config", str(cfg)], tmp_path)
    assert info.value.code == 2


@pytest.mark.parametrize("text,expected", [
    ("0.08:0.02:3", [0.08, 0.1, 0.12]),
    ("0.5", [0.5]),
    ("0.08:-0.02:4", [0.08, 0.06, 0.04, 0.02]),
])
def test_parse_range(text, expected):
    assert cli.parse_range(text) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["0.08:0.02", "a:b:c", "0.02:-0.02:3", "0.1:0.1:0"])
def test_parse_range_rejects(text):
    with pytest.raises(cli.UsageError):
        cli.parse_range(text)
