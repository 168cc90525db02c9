import json

import numpy as np
import pytest

from baselinezone.criterion import DoseResponseData, WeightedSample
from baselinezone.geometry import ConvexPolygon, regular_polygon
from baselinezone.io import (
    DataFormatError,
    parse_key_values,
    read_data,
    read_dose_response,
    read_grid,
    read_polygon,
    read_scene,
    read_weighted_sample,
    write_dose_response,
    write_grid,
    write_polygon,
    write_scene,
    write_weighted_sample,
)
from baselinezone.synth import Design, GroundTruthScene, SceneFormatError, sample_dose_response, sample_grid


def test_polygon_round_trip(tmp_path):
    poly = regular_polygon((0.4, 0.6), 0.2, 9)
    write_polygon(tmp_path / "p.json", poly)
    verts = json.loads((tmp_path / "p.json").read_text())
    assert verts[0] == min(verts)  # lexicographically smallest vertex first
    assert read_polygon(tmp_path / "p.json") == poly
    assert ConvexPolygon.from_json(poly.to_json()) == poly


def test_polygon_errors(tmp_path):
    (tmp_path / "bad.json").write_text('[[0, 0], [1, 0],\n [1]]')
    with pytest.raises(DataFormatError):
        read_polygon(tmp_path / "bad.json")
    (tmp_path / "broken.json").write_text('[[0, 0],\n oops')
    with pytest.raises(DataFormatError) as exc:
        read_polygon(tmp_path / "broken.json")
    assert exc.value.line == 2


def test_weighted_sample_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    s = WeightedSample(rng.random((30, 2)), rng.uniform(-1, 1, 30), gamma=0.7, tau_hat=0.1 + 0.2, m=17)
    write_weighted_sample(tmp_path / "w.csv", s)
    text = (tmp_path / "w.csv").read_text().splitlines()
    assert text[0].startswith("# ") and "gamma=0.7" in text[0] and "m=17" in text[0]
    assert text[1] == "x,y,weight"
    back = read_weighted_sample(tmp_path / "w.csv")
    np.testing.assert_array_equal(back.points, s.points)
    np.testing.assert_array_equal(back.weights, s.weights)
    assert (back.gamma, back.tau_hat, back.m, back.n_total) == (0.7, s.tau_hat, 17, s.n_total)


def test_dose_response_round_trip(tmp_path):
    d = sample_dose_response(GroundTruthScene(), 12, 40, 3)
    write_dose_response(tmp_path / "d.csv", d)
    back = read_data(tmp_path / "d.csv")
    assert isinstance(back, DoseResponseData)
    np.testing.assert_array_equal(back.points, d.points)
    np.testing.assert_array_equal(back.replicate_means, d.replicate_means)
    assert back.m == 12 and back.sigma0 == 0.5


def test_grid_round_trip(tmp_path):
    g = sample_grid(GroundTruthScene(), 9, 3)
    write_grid(tmp_path / "g.csv", g)
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert len(lines) == 1 + 9
    back = read_data(tmp_path / "g.csv")
    assert back.m == 9 and back.sigma0 == g.sigma0
    np.testing.assert_array_equal(back.responses, g.responses)


@pytest.mark.parametrize("body, line", [
    ("# setting=dose_response m=4\nx,y,ybar\n0.1,0.2,0.3\n0.1,abc,0.3\n", 4),
    ("# setting=dose_response m=4\nx,y,ybar\n0.1,0.2\n", 3),
    ("# setting=dose_response m=4\nx,y,ybar\n0.1,0.2,nan\n", 3),
    ("# setting=dose_response m=4\nx,y,z\n0.1,0.2,0.3\n", 2),
    ("x,y,ybar\n0.1,0.2,0.3\n", 1),
    ("# setting=dose_response\nx,y,ybar\n0.1,0.2,0.3\n", 1),
])
def test_dose_response_errors_carry_lines(tmp_path, body, line):
    (tmp_path / "d.csv").write_text(body)
    with pytest.raises(DataFormatError) as exc:
        read_dose_response(tmp_path / "d.csv")
    assert exc.value.line == line


def test_grid_shape_error(tmp_path):
    (tmp_path / "g.csv").write_text("# setting=regression m=3\n1,2,3\n4,5,6\n")
    with pytest.raises(DataFormatError, match="3 rows"):
        read_grid(tmp_path / "g.csv")


def test_unknown_setting_and_missing_file(tmp_path):
    (tmp_path / "x.csv").write_text("# setting=other\n")
    with pytest.raises(DataFormatError, match="unknown setting"):
        read_data(tmp_path / "x.csv")
    with pytest.raises(DataFormatError, match="cannot read"):
        read_data(tmp_path / "missing.csv")


def test_scene_file_round_trip(tmp_path):
    scene = GroundTruthScene(shape="ellipse", rx=0.3, ry=0.2, tau0=0.1 + 0.2,
                             design=Design([[1.0, 2.0]]))
    write_scene(tmp_path / "s.txt", scene)
    assert read_scene(tmp_path / "s.txt") == scene


def test_scene_errors_name_line_and_key(tmp_path):
    (tmp_path / "s.txt").write_text("# scene\nshape = disc\nr = 0.2\nwidth = 3\n")
    with pytest.raises(SceneFormatError) as exc:
        read_scene(tmp_path / "s.txt")
    assert (exc.value.line, exc.value.key) == (4, "width")
    assert "line 4" in str(exc.value)
    (tmp_path / "s.txt").write_text("shape = disc\nr = abc\n")
    with pytest.raises(SceneFormatError) as exc:
        read_scene(tmp_path / "s.txt")
    assert (exc.value.line, exc.value.key) == (2, "r")
    with pytest.raises(SceneFormatError) as exc:
        parse_key_values("a = 1\na = 2\n")
    assert exc.value.line == 2
    with pytest.raises(SceneFormatError) as exc:
        parse_key_values("a = 1\njunk\n")
    assert exc.value.line == 2
