import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wifipose.csi import PathComponent, SubcarrierSample, amplitude, frequency_response, superpose

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def random_paths(rng, n):
    return [
        PathComponent(
            alpha=float(rng.uniform(0.0, 2.0)),
            phi=float(rng.uniform(-np.pi, np.pi)),
            tau=float(rng.uniform(0.0, 1e-7)),
        )
        for _ in range(n)
    ]


def oracle_sum(paths, freq):
    """Independent complex-arithmetic route through cmath."""
    return sum(p.alpha * cmath.exp(1j * (p.phi - 2 * math.pi * freq * p.tau)) for p in paths)


class TestAmplitude:
    def test_three_four_five(self):
        assert amplitude(SubcarrierSample(re=3.0, im=4.0)) == pytest.approx(5.0, abs=0)

    def test_zero(self):
        assert amplitude(SubcarrierSample(re=0.0, im=0.0)) == 0.0

    def test_matches_hypot_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            re, im = rng.uniform(-1e3, 1e3, size=2)
            a = amplitude(SubcarrierSample(re=re, im=im))
            assert a == pytest.approx(math.hypot(re, im), rel=1e-12)

    @given(finite, finite)
    def test_non_negative(self, re, im):
        assert amplitude(SubcarrierSample(re=re, im=im)) >= 0.0


class TestSuperpose:
    def test_identity_path(self):
        h = superpose([PathComponent(alpha=1.0, phi=0.0, tau=0.0)], 5.32e9)
        assert h.re == pytest.approx(1.0, abs=1e-15)
        assert h.im == pytest.approx(0.0, abs=1e-15)

    def test_destructive_interference(self):
        paths = [
            PathComponent(alpha=1.0, phi=0.0, tau=0.0),
            PathComponent(alpha=1.0, phi=math.pi, tau=0.0),
        ]
        h = superpose(paths, 2.4e9)
        assert abs(h.re) < 1e-12 and abs(h.im) < 1e-12

    def test_empty_path_list_rejected(self):
        with pytest.raises(ValueError, match="no propagation paths"):
            superpose([], 5.32e9)

    def test_matches_complex_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            paths = random_paths(rng, 3)
            h = superpose(paths, 5.32e9)
            want = oracle_sum(paths, 5.32e9)
            assert h.re == pytest.approx(want.real, rel=1e-10, abs=1e-12)
            assert h.im == pytest.approx(want.imag, rel=1e-10, abs=1e-12)

    def test_path_validation(self):
        with pytest.raises(ValueError):
            PathComponent(alpha=-0.1, phi=0.0, tau=0.0)
        with pytest.raises(ValueError):
            PathComponent(alpha=1.0, phi=0.0, tau=-1e-9)
        with pytest.raises(ValueError):
            PathComponent(alpha=1.0, phi=math.inf, tau=0.0)


class TestProperties:
    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**32 - 1))
    def test_triangle_inequality(self, n, seed):
        rng = np.random.default_rng(seed)
        paths = random_paths(rng, n)
        total = sum(p.alpha for p in paths)
        assert amplitude(superpose(paths, 5.32e9)) <= total + 1e-12

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_linearity_in_path_list(self, seed):
        rng = np.random.default_rng(seed)
        p1 = random_paths(rng, 3)
        p2 = random_paths(rng, 2)
        whole = superpose(p1 + p2, 5.32e9)
        a = superpose(p1, 5.32e9)
        b = superpose(p2, 5.32e9)
        assert whole.re == pytest.approx(a.re + b.re, abs=1e-12)
        assert whole.im == pytest.approx(a.im + b.im, abs=1e-12)

    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.floats(min_value=-10.0, max_value=10.0, allow_nan=False),
    )
    def test_amplitude_rotation_invariant(self, seed, shift):
        rng = np.random.default_rng(seed)
        paths = random_paths(rng, 4)
        shifted = [PathComponent(p.alpha, p.phi + shift, p.tau) for p in paths]
        a0 = amplitude(superpose(paths, 5.32e9))
        a1 = amplitude(superpose(shifted, 5.32e9))
        assert a1 == pytest.approx(a0, rel=1e-10, abs=1e-12)


class TestFrequencyResponse:
    def test_matches_scalar_superpose(self):
        rng = np.random.default_rng(5)
        paths = random_paths(rng, 4)
        freqs = 5.32e9 + np.arange(-3, 4) * 312.5e3
        h = frequency_response(
            np.array([p.alpha for p in paths]),
            np.array([p.phi for p in paths]),
            np.array([p.tau for p in paths]),
            freqs,
        )
        for i, f in enumerate(freqs):
            s = superpose(paths, float(f))
            assert h[i].real == pytest.approx(s.re, rel=1e-12, abs=1e-14)
            assert h[i].imag == pytest.approx(s.im, rel=1e-12, abs=1e-14)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="no propagation paths"):
            frequency_response(np.array([]), np.array([]), np.array([]), np.array([1e9]))
