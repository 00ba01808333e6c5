"""Convolution kernels and the Gaussian derivative jet.

Three radially symmetric point-spread models are supported:

* ``gaussian``   -- K(t) = exp(-|t|^2 / (2 sigma^2)), the standardized kernel
  everything rigorous in this package is proved for (sigma = 1).
* ``microscopy`` -- a published two-Gaussian fit to a fluorescence microscope
  PSF, K(r) = exp(-2 r^2 / 1.72^2) + 0.0208 exp(-2 (r - 2.45)^2 / 1.10^2),
  with natural unit sigma0 = 1.72 / 2.  Note K(0) = 1 + ~1e-6; the published
  constants are kept verbatim rather than renormalized.
* ``airy``       -- the diffraction-limited telescope kernel
  K(r) = (2 J1(3.8317 r) / (3.8317 r))^2, normalized so K(0) = 1 and the first
  zero sits at r = 1.

J1 is implemented here (power series below x = 12, Hankel asymptotic beyond)
so the package has no special-function dependency; accuracy ~1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# microscopy fit constants (published values, kept verbatim)
_MICRO_W1 = 1.72
_MICRO_A2 = 0.0208
_MICRO_R2 = 2.45
_MICRO_W2 = 1.10
SIGMA0 = _MICRO_W1 / 2.0  # from 2 sigma0^2 = 1.72^2 / 2

AIRY_SCALE = 3.8317  # first positive zero of J1; puts K's first zero at r = 1


def gaussian_jet(t):
    """Value, gradient, and Hessian entries of K(t) = exp(-|t|^2/2).

    Returns (K, Kx, Ky, Kxx, Kyy, Kxy).  Accepts a 2-vector or an (..., 2)
    array (vectorized over leading axes).
    """
    t = np.asarray(t, dtype=float)
    x, y = t[..., 0], t[..., 1]
    K = np.exp(-0.5 * (x * x + y * y))
    return (K, -x * K, -y * K, (x * x - 1.0) * K, (y * y - 1.0) * K, x * y * K)


# ---------------------------------------------------------------------------
# Bessel J1


def _j1_series(x):
    """Power series sum for |x| < ~12."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    q = -half * half  # -(x/2)^2
    term = np.array(half, copy=True)  # k = 0 term: (x/2) / (0! 1!)
    total = np.array(term, copy=True)
    for k in range(1, 40):
        term = term * q / (k * (k + 1))
        total += term
    return total


def _j1_asymptotic(x):
    """Hankel expansion for x >= ~12 (mu = 4 nu^2 = 4)."""
    x = np.asarray(x, dtype=float)
    mu = 4.0
    inv8x = 1.0 / (8.0 * x)
    # c_k = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k x^k)
    P = np.ones_like(x)
    Q = np.zeros_like(x)
    c = np.ones_like(x)
    sign = 1.0
    for k in range(1, 12):
        c = c * (mu - (2 * k - 1) ** 2) / k * inv8x
        if k % 2 == 1:
            Q = Q + sign * c
            sign = -sign  # flip after completing each (P, Q) pair
        else:
            P = P + sign * c
    chi = x - 0.75 * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (P * np.cos(chi) - Q * np.sin(chi))


def besselj1(x):
    """First-kind Bessel function of order one, vectorized, ~1e-10 accurate."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    ax = np.abs(x)
    small = ax < 12.0
    if np.any(small):
        out[small] = _j1_series(ax[small])
    if np.any(~small):
        out[~small] = _j1_asymptotic(ax[~small])
    out = np.where(x < 0, -out, out)  # J1 is odd
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# Kernel models


@dataclass(frozen=True)
class KernelModel:
    """A radial PSF model: ``kind`` in {gaussian, microscopy, airy} plus its
    scale constant (sigma, sigma0, or the Airy argument normalization)."""

    kind: str
    scale: float

    @staticmethod
    def gaussian(sigma: float = 1.0) -> "KernelModel":
        return KernelModel("gaussian", sigma)

    @staticmethod
    def microscopy() -> "KernelModel":
        return KernelModel("microscopy", SIGMA0)

    @staticmethod
    def airy() -> "KernelModel":
        return KernelModel("airy", AIRY_SCALE)

    @property
    def unit(self) -> float:
        """Natural unit length: sigma, sigma0, or the first-zero radius."""
        if self.kind == "gaussian":
            return self.scale
        if self.kind == "microscopy":
            return SIGMA0
        return 1.0


def kernel_eval(model: KernelModel, t):
    """K(t) for a 2-vector or (..., 2) array of offsets from the center."""
    t = np.asarray(t, dtype=float)
    r2 = t[..., 0] ** 2 + t[..., 1] ** 2
    if model.kind == "gaussian":
        return np.exp(-0.5 * r2 / (model.scale * model.scale))
    r = np.sqrt(r2)
    if model.kind == "microscopy":
        return (np.exp(-2.0 * r2 / (_MICRO_W1 ** 2))
                + _MICRO_A2 * np.exp(-2.0 * (r - _MICRO_R2) ** 2 / (_MICRO_W2 ** 2)))
    if model.kind == "airy":
        z = AIRY_SCALE * r
        with np.errstate(invalid="ignore", divide="ignore"):
            amp = np.where(z > 1e-8, 2.0 * besselj1(np.maximum(z, 1e-300)) / np.maximum(z, 1e-300),
                           1.0 - z * z / 8.0)  # series limit near 0
        return amp * amp
    raise ValueError(f"unknown kernel kind {model.kind!r}")
