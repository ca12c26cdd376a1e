import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wifipose.dataio import KEYPOINT_NAMES, L_HIP, R_SHOULDER
from wifipose.metrics import (
    PckConfig,
    PckReport,
    correct_rate,
    pck,
    report_json,
    report_table,
)


def random_poses(n, seed=0, spread=200.0):
    rng = np.random.default_rng(seed)
    gts = rng.uniform(100.0, 100.0 + spread, size=(n, 17, 2))
    preds = gts + rng.normal(0.0, 30.0, size=(n, 17, 2))
    return preds, gts


def brute_force_pck(preds, gts, thresholds, torso_epsilon=1e-6):
    """Scalar reimplementation, one frame and joint at a time."""
    rates = np.zeros((17, len(thresholds)))
    n_eval = 0
    for f in range(preds.shape[0]):
        rs = gts[f][R_SHOULDER]
        lh = gts[f][L_HIP]
        torso = math.dist(rs, lh)
        if torso < torso_epsilon:
            continue
        n_eval += 1
        for j in range(17):
            d = math.dist(preds[f][j], gts[f][j])
            for t, thr in enumerate(thresholds):
                if d / torso <= thr / 100.0:
                    rates[j, t] += 1
    return 100.0 * rates / n_eval, n_eval


class TestPck:
    def test_perfect_predictions(self):
        _, gts = random_poses(10)
        report = pck(gts.copy(), gts)
        assert np.all(report.per_joint == 100.0)
        assert np.all(report.average == 100.0)
        assert report.n_evaluated == 10

    def test_inclusive_boundary_at_half_torso(self):
        gts = np.tile(np.linspace(100, 400, 34).reshape(17, 2), (1, 1, 1))
        gts[0, R_SHOULDER] = (100.0, 100.0)
        gts[0, L_HIP] = (100.0, 200.0)  # torso exactly 100 px
        preds = gts.copy()
        preds[0, 0, 0] += 50.0  # nose displaced by exactly 50 px
        report = pck(preds, gts, PckConfig(thresholds=(5, 10, 20, 30, 40, 50)))
        assert list(report.per_joint[0]) == [0.0, 0.0, 0.0, 0.0, 0.0, 100.0]
        for j in range(1, 17):
            assert np.all(report.per_joint[j] == 100.0)

    def test_matches_brute_force_oracle(self):
        preds, gts = random_poses(20, seed=3)
        cfg = PckConfig()
        report = pck(preds, gts, cfg)
        want, n_eval = brute_force_pck(preds, gts, cfg.thresholds)
        assert report.n_evaluated == n_eval
        assert np.max(np.abs(report.per_joint - want)) < 1e-9
        assert np.max(np.abs(report.average - want.mean(axis=0))) < 1e-9

    def test_degenerate_torso_frames_skipped(self):
        preds, gts = random_poses(6, seed=4)
        gts[2, L_HIP] = gts[2, R_SHOULDER]  # zero torso
        report = pck(preds, gts)
        assert report.n_evaluated == 5
        assert report.n_skipped_degenerate == 1

    def test_all_degenerate_rejected(self):
        gts = np.zeros((3, 17, 2))
        with pytest.raises(ValueError, match="no evaluable frames"):
            pck(gts.copy(), gts)

    def test_threshold_validation(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            PckConfig(thresholds=(10, 5))
        with pytest.raises(ValueError, match="0, 100"):
            PckConfig(thresholds=(5, 200))


class TestPckProperties:
    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31))
    def test_monotone_in_threshold(self, seed):
        preds, gts = random_poses(8, seed=seed)
        report = pck(preds, gts)
        diffs = np.diff(report.per_joint, axis=1)
        assert np.all(diffs >= 0.0)

    @settings(max_examples=100, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**31),
        st.floats(min_value=-500.0, max_value=500.0, allow_nan=False),
        st.floats(min_value=-500.0, max_value=500.0, allow_nan=False),
        st.floats(min_value=0.05, max_value=40.0, allow_nan=False),
    )
    def test_similarity_invariance(self, seed, tx, ty, scale):
        preds, gts = random_poses(6, seed=seed)
        base = pck(preds, gts)
        shift = np.array([tx, ty])
        moved = pck(preds * scale + shift, gts * scale + shift)
        assert np.max(np.abs(base.per_joint - moved.per_joint)) < 1e-9

    def test_bounded_and_saturates_at_huge_threshold(self):
        preds, gts = random_poses(15, seed=9)
        report = pck(preds, gts)
        assert np.all(report.per_joint >= 0.0) and np.all(report.per_joint <= 100.0)
        assert np.all(correct_rate(preds, gts, a=1e9) == 1.0)


class TestReportRendering:
    def test_saturated_report(self):
        _, gts = random_poses(4)
        table = report_table(pck(gts.copy(), gts))
        for line in table.strip().splitlines()[1:]:
            cells = line.split()[-6:]
            assert all(c == "100.00" for c in cells)

    def test_average_row_formatting(self):
        # layout check against a published-looking average row
        per_joint = np.tile([33.39, 64.18, 83.16, 90.00, 93.27, 95.23], (17, 1))
        report = PckReport(
            thresholds=(5, 10, 20, 30, 40, 50),
            per_joint=per_joint,
            average=per_joint.mean(axis=0),
            n_evaluated=100,
            n_skipped_degenerate=0,
        )
        last = report_table(report).strip().splitlines()[-1]
        assert last.split()[0] == "Average"
        assert last.split()[1:] == ["33.39", "64.18", "83.16", "90.00", "93.27", "95.23"]

    def test_parse_round_trip(self):
        preds, gts = random_poses(12, seed=5)
        report = pck(preds, gts)
        lines = report_table(report).strip().splitlines()
        header = lines[0].split()
        assert header[0] == "Keypoint"
        assert header[1:] == [f"PCK@{t:g}" for t in report.thresholds]
        for row_idx, line in enumerate(lines[1:-1]):
            parts = line.split()
            name = " ".join(parts[:-6])
            assert name == KEYPOINT_NAMES[row_idx]
            values = [float(v) for v in parts[-6:]]
            want = [float(f"{v:.2f}") for v in report.per_joint[row_idx]]
            assert values == want
        avg = [float(v) for v in lines[-1].split()[1:]]
        assert avg == [float(f"{v:.2f}") for v in report.average]

    def test_json_matches_table_numerics(self):
        preds, gts = random_poses(7, seed=8)
        report = pck(preds, gts)
        payload = json.loads(report_json(report))
        assert payload["thresholds"] == list(report.thresholds)
        assert payload["n_evaluated"] == report.n_evaluated
        for j, name in enumerate(KEYPOINT_NAMES):
            assert payload["per_joint"][name] == report.per_joint[j].tolist()
        assert payload["average"] == report.average.tolist()

    def test_stable_output(self):
        preds, gts = random_poses(5, seed=6)
        assert report_table(pck(preds, gts)) == report_table(pck(preds, gts))
