import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wifipose.preprocess import INPUT_SIZE, bilinear_resize, flatten_antennas, preprocess, standardize


def random_frame(seed=0, shape=(3, 114, 32)):
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=shape)


class TestFlattenAntennas:
    def test_output_shape(self):
        assert flatten_antennas(random_frame()).shape == (114, 96)

    def test_antenna_constant_probe(self):
        frame = np.zeros((3, 114, 32))
        for a in range(3):
            frame[a] = a
        m = flatten_antennas(frame)
        assert np.all(m[:, 0:32] == 0)
        assert np.all(m[:, 32:64] == 1)
        assert np.all(m[:, 64:96] == 2)

    def test_exhaustive_index_mapping(self):
        frame = random_frame(7)
        m = flatten_antennas(frame)
        for a in range(3):
            for s in range(0, 114, 7):
                for t in range(0, 32, 3):
                    assert m[s, a * 32 + t] == frame[a, s, t]

    def test_values_preserved_as_multiset(self):
        frame = random_frame(9)
        m = flatten_antennas(frame)
        assert np.array_equal(np.sort(m.ravel()), np.sort(frame.ravel()))

    def test_wrong_rank_rejected(self):
        with pytest.raises(ValueError, match="3-axis"):
            flatten_antennas(np.zeros((114, 96)))


class TestBilinearResize:
    def test_constant_stays_constant(self):
        m = np.full((4, 6), 3.25)
        out = bilinear_resize(m, 9, 13)
        assert out.shape == (9, 13)
        assert np.allclose(out, 3.25, atol=1e-15)

    def test_reproduces_affine_field_exactly(self):
        # f(y, x) = 2y + 3x on a 3x3 grid, upsampled 5x5: corner-aligned
        # bilinear interpolation reproduces affine functions exactly
        y, x = np.mgrid[0:3, 0:3]
        m = 2.0 * y + 3.0 * x
        out = bilinear_resize(m, 5, 5)
        ys = np.arange(5) * (2 / 4)
        xs = np.arange(5) * (2 / 4)
        want = 2.0 * ys[:, None] + 3.0 * xs[None, :]
        assert np.max(np.abs(out - want)) <= 1e-12

    def test_identity_resize_exact(self):
        m = random_frame(3, shape=(7, 11))
        out = bilinear_resize(m, 7, 11)
        assert np.max(np.abs(out - m)) <= 1e-15

    @settings(max_examples=50)
    @given(
        st.integers(min_value=2, max_value=12),
        st.integers(min_value=2, max_value=12),
        st.integers(min_value=1, max_value=24),
        st.integers(min_value=1, max_value=24),
        st.integers(min_value=0, max_value=2**31),
    )
    def test_never_overshoots(self, h, w, oh, ow, seed):
        m = np.random.default_rng(seed).normal(size=(h, w))
        out = bilinear_resize(m, oh, ow)
        assert out.min() >= m.min() - 1e-12
        assert out.max() <= m.max() + 1e-12

    def test_size_one_output(self):
        m = np.arange(12.0).reshape(3, 4)
        out = bilinear_resize(m, 1, 1)
        assert out.shape == (1, 1)
        assert out[0, 0] == m[0, 0]

    def test_tiny_input_rejected(self):
        with pytest.raises(ValueError, match="at least 2x2"):
            bilinear_resize(np.zeros((1, 5)), 4, 4)


class TestStandardize:
    def test_constant_maps_to_zero(self):
        assert np.all(standardize(np.full((5, 5), 7.0)) == 0.0)

    def test_zero_mean_unit_std(self):
        m = random_frame(5, shape=(20, 20))
        out = standardize(m)
        assert abs(out.mean()) < 1e-9
        assert abs(out.std() - 1.0) < 1e-6

    def test_matches_two_pass_oracle(self):
        m = random_frame(6, shape=(4, 4))
        total = 0.0
        for v in m.ravel():
            total += v
        mean = total / m.size
        sq = 0.0
        for v in m.ravel():
            sq += (v - mean) ** 2
        std = (sq / m.size) ** 0.5
        want = (m - mean) / (std + 1e-8)
        assert np.max(np.abs(standardize(m) - want)) < 1e-10


class TestPreprocess:
    def test_output_shape(self):
        assert preprocess(random_frame()).shape == (1, INPUT_SIZE, INPUT_SIZE)

    def test_zero_frame_gives_zero_tensor(self):
        assert np.all(preprocess(np.zeros((3, 114, 32))) == 0.0)

    def test_equals_manual_composition(self):
        frame = random_frame(8)
        want = standardize(bilinear_resize(flatten_antennas(frame), 136, 136))[None]
        assert np.array_equal(preprocess(frame), want)

    def test_positive_scaling_removed(self):
        frame = random_frame(10)
        a = preprocess(frame)
        b = preprocess(frame * 37.5)
        assert np.max(np.abs(a - b)) < 1e-6

    def test_custom_output_size(self):
        assert preprocess(random_frame(), out_size=24).shape == (1, 24, 24)
