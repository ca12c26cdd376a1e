"""Complex multipath channel arithmetic.

A wireless link is described by a discrete set of propagation paths, each
with an attenuation, a phase offset, and a time delay.  The frequency
response at a subcarrier frequency ``f`` is the coherent sum

    H(f) = sum_l  alpha_l * exp(j * (phi_l - 2*pi*f*tau_l))

and the receiver observes its magnitude per subcarrier.  Everything here is
double precision and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class PathComponent:
    """One propagation path: attenuation, phase offset (rad), delay (s)."""

    alpha: float
    phi: float
    tau: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise ValueError(f"path attenuation must be finite and >= 0, got {self.alpha}")
        if not (math.isfinite(self.tau) and self.tau >= 0.0):
            raise ValueError(f"path delay must be finite and >= 0, got {self.tau}")
        if not math.isfinite(self.phi):
            raise ValueError(f"path phase must be finite, got {self.phi}")


@dataclass(frozen=True)
class SubcarrierSample:
    """Complex channel estimate for one subcarrier, as (re, im)."""

    re: float
    im: float


def amplitude(h: SubcarrierSample) -> float:
    """Magnitude sqrt(re^2 + im^2) of a subcarrier sample."""
    return math.sqrt(h.re * h.re + h.im * h.im)


def superpose(paths: Sequence[PathComponent], freq: float) -> SubcarrierSample:
    """Coherent sum of all paths at one subcarrier frequency.

    Raises ValueError on an empty path list or a non-positive frequency.
    """
    if len(paths) == 0:
        raise ValueError("no propagation paths")
    if freq <= 0.0:
        raise ValueError(f"subcarrier frequency must be > 0, got {freq}")
    re = 0.0
    im = 0.0
    for p in paths:
        theta = p.phi - 2.0 * math.pi * freq * p.tau
        re += p.alpha * math.cos(theta)
        im += p.alpha * math.sin(theta)
    return SubcarrierSample(re=re, im=im)


def frequency_response(
    alphas: np.ndarray, phis: np.ndarray, taus: np.ndarray, freqs: np.ndarray
) -> np.ndarray:
    """Vectorized path sum: complex H for every frequency in ``freqs``.

    ``alphas``, ``phis``, ``taus`` share shape ``(L,)``; returns complex128
    of shape ``freqs.shape``.  Semantically identical to calling
    :func:`superpose` per frequency; used where per-sample Python loops
    would dominate.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    phis = np.asarray(phis, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    if alphas.size == 0:
        raise ValueError("no propagation paths")
    theta = phis - 2.0 * np.pi * np.multiply.outer(freqs, taus)  # (..., L)
    return np.sum(alphas * np.exp(1j * theta), axis=-1)
