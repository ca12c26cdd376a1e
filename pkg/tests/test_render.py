import xml.etree.ElementTree as ET

import numpy as np
import pytest

from wifipose.dataio import SKELETON_EDGES
from wifipose.render import parse_predictions, pose_svg, render_predictions, write_predictions

SVG_NS = "{http://www.w3.org/2000/svg}"


def sample_points(seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(10.0, 470.0, size=(17, 2))


class TestPoseSvg:
    def test_exactly_seventeen_circles(self):
        svg = pose_svg(sample_points(), 640, 480)
        root = ET.fromstring(svg)
        circles = root.findall(f"{SVG_NS}circle")
        assert len(circles) == 17

    def test_skeleton_edge_count(self):
        svg = pose_svg(sample_points(), 640, 480)
        root = ET.fromstring(svg)
        assert len(root.findall(f"{SVG_NS}line")) == len(SKELETON_EDGES)

    def test_circle_coordinates_equal_input(self):
        points = sample_points(3)
        root = ET.fromstring(pose_svg(points, 640, 480))
        got = [
            (float(c.get("cx")), float(c.get("cy")))
            for c in root.findall(f"{SVG_NS}circle")
        ]
        for (gx, gy), (x, y) in zip(got, points):
            assert gx == x and gy == y

    def test_deterministic_bytes(self):
        points = sample_points(1)
        assert pose_svg(points, 640, 480) == pose_svg(points, 640, 480)

    def test_wrong_point_count_rejected(self):
        with pytest.raises(ValueError, match="17"):
            pose_svg(np.zeros((16, 2)), 640, 480)


class TestPredictionsFormat:
    def test_write_parse_round_trip(self, tmp_path):
        frames = [(0, sample_points(0)), (3, sample_points(1))]
        path = tmp_path / "pred.jsonl"
        write_predictions(path, frames)
        parsed = parse_predictions(path)
        assert [k for k, _ in parsed] == [0, 3]
        for (_, got), (_, want) in zip(parsed, frames):
            assert np.allclose(got, want, atol=0)

    def test_malformed_line_names_line_number(self, tmp_path):
        path = tmp_path / "pred.jsonl"
        good = '{"frame": 0, "points": ' + str(sample_points().tolist()) + "}\n"
        path.write_text(good + "this is not json\n", encoding="utf-8")
        with pytest.raises(ValueError, match="line 2"):
            parse_predictions(path)

    def test_wrong_point_shape_names_line_number(self, tmp_path):
        path = tmp_path / "pred.jsonl"
        path.write_text('{"frame": 0, "points": [[1, 2], [3, 4]]}\n', encoding="utf-8")
        with pytest.raises(ValueError, match="line 1"):
            parse_predictions(path)


class TestRenderPredictions:
    def test_one_svg_per_frame(self, tmp_path):
        path = tmp_path / "pred.jsonl"
        write_predictions(path, [(i, sample_points(i)) for i in range(4)])
        out = tmp_path / "svg"
        out.mkdir()
        written = render_predictions(path, out, 640, 480)
        assert len(written) == 4
        assert sorted(p.name for p in out.iterdir()) == [
            f"frame_{i:06d}.svg" for i in range(4)
        ]

    def test_identical_input_identical_bytes(self, tmp_path):
        path = tmp_path / "pred.jsonl"
        write_predictions(path, [(0, sample_points(7))])
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        out_a.mkdir()
        out_b.mkdir()
        render_predictions(path, out_a, 640, 480)
        render_predictions(path, out_b, 640, 480)
        a = (out_a / "frame_000000.svg").read_bytes()
        b = (out_b / "frame_000000.svg").read_bytes()
        assert a == b
