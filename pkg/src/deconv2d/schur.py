"""Scalar norm bounds for the interpolation block system.

The certificate coefficients solve a 3x3 block system (bump block and two
wave blocks, in values and in both partial derivatives).  Everything the
certifier needs from that system is a handful of scalars: infinity-norm
bounds on the coefficient vectors alpha, beta, gamma and a lower bound on
min |alpha_i|.  Those come from a chain of Schur-complement estimates whose
inputs are the nine block infinity-norms, each bounded by summing the
matching radial envelope over the hexagonal partition.

A numeric (floating-point LU) construction of the same certificate is also
provided; it is not part of the rigorous chain but serves as a cross-check
and produces the contour-plot style evaluator used by the demos.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .bumpwave import KINDS, SpikeConfig, bw_coefficients, bw_eval, bw_grad
from .envelope import OutOfValidatedRange, envelope_query, tail_constants, zeta_band
from .hexgeom import HexPartition, d_U


class SingularSystem(ValueError):
    """Numeric block system is singular (spikes too close or degenerate)."""


class NonFinite(ValueError):
    """Matrix input contains NaN or infinity."""


# block name -> (envelope kind, whether the wave epsilon applies)
_BLOCK_ENVELOPES = {
    "i_minus_b": ("bump", False),
    "b_x": ("bump_dx", False),
    "b_y": ("bump_dy", False),
    "w1": ("wave1", True),
    "w2": ("wave2", True),
    "i_minus_w1x": ("wave1_dx", True),
    "w2x": ("wave2_dx", True),
    "w1y": ("wave1_dy", True),
    "i_minus_w2y": ("wave2_dy", True),
}


@dataclass(frozen=True)
class NormBounds:
    """Infinity-norm bounds on the nine blocks of the interpolation system.

    Diagonal blocks are recorded as deviations from the identity
    (``i_minus_b``, ``i_minus_w1x``, ``i_minus_w2y``); the rest are plain
    norms.  ``eps_b``/``eps_w`` are the far-tail constants already folded
    into the sums, kept for reporting.
    """

    i_minus_b: float
    b_x: float
    b_y: float
    w1: float
    w2: float
    i_minus_w1x: float
    w2x: float
    w1y: float
    i_minus_w2y: float
    eps_b: float
    eps_w: float


@dataclass(frozen=True)
class SchurReport:
    """Coefficient bounds from the Schur-complement chain.

    ``conditions_hold`` records, in order, the three invertibility
    conditions: the second wave diagonal block, the first Schur complement,
    and the final one.  When a condition fails the dependent fields are NaN.
    """

    conditions_hold: tuple
    alpha_inf: float
    beta_inf: float
    gamma_inf: float
    alpha_minus_tau_inf: float
    alpha_lb: float


def block_norm_bounds(partition: HexPartition, envelopes: dict,
                      k1: int) -> NormBounds:
    """Sum each block's envelope at every cell's constrained distance.

    Any spike other than the one at the origin lies in a unique cell of the
    partition at radial distance at least ``d_U``; the envelopes are radial
    and non-increasing, so the row sum of any block is at most the sum of
    envelope values over the 216 cells, plus the tail constant for
    everything beyond the eighth layer.
    """
    if partition.delta < 2.0:
        raise OutOfValidatedRange(f"delta {partition.delta} < 2")
    eps = tail_constants(zeta_band(k1)[1])
    dists = [d_U(c, partition.delta) for c in partition.cells]
    vals = {}
    for name, (kind, is_wave) in _BLOCK_ENVELOPES.items():
        env = envelopes[kind]
        s = float(np.sum(env.query_many(np.asarray(dists))))
        vals[name] = s + (eps["eps_W"] if is_wave else eps["eps_B"])
    return NormBounds(eps_b=eps["eps_B"], eps_w=eps["eps_W"], **vals)


def schur_bounds(nb: NormBounds) -> SchurReport:
    """Run the scalar bound chain; record which conditions fail."""
    nan = math.nan
    if not nb.i_minus_w2y < 1.0:
        return SchurReport((False, False, False), nan, nan, nan, nan, nan)
    w2y_inv = 1.0 / (1.0 - nb.i_minus_w2y)
    i_minus_s1 = nb.i_minus_w1x + nb.w2x * w2y_inv * nb.w1y
    if not i_minus_s1 < 1.0:
        return SchurReport((True, False, False), nan, nan, nan, nan, nan)
    s1_inv = 1.0 / (1.0 - i_minus_s1)
    s2 = nb.b_x + nb.w2x * w2y_inv * nb.b_y
    i_minus_s3 = (nb.i_minus_b + nb.w1 * s1_inv * s2
                  + nb.w2 * w2y_inv * (nb.w1y * s1_inv * s2 + nb.b_y))
    if not i_minus_s3 < 1.0:
        return SchurReport((True, True, False), nan, nan, nan, nan, nan)
    s3_inv = 1.0 / (1.0 - i_minus_s3)
    amt = s3_inv * i_minus_s3
    return SchurReport(
        conditions_hold=(True, True, True),
        alpha_inf=s3_inv,
        beta_inf=s1_inv * s2 * s3_inv,
        gamma_inf=s1_inv * s2 * s3_inv,
        alpha_minus_tau_inf=amt,
        alpha_lb=1.0 - amt,
    )


# -- numeric certificate ----------------------------------------------------

@dataclass(frozen=True)
class NumericCertificate:
    """Floating-point interpolation certificate for a concrete support."""

    configs: tuple          # one SpikeConfig per spike
    coeffs: tuple           # one BumpWaveCoeffs per spike
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    q: np.ndarray           # (n, 3) per-sample Gaussian weights

    def _weights(self):
        return np.stack([self.alpha, self.beta, self.gamma], axis=1)

    def evaluate(self, t):
        """Q(t); t may be (..., 2)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape[:-1])
        for cfg, cf, w in zip(self.configs, self.coeffs, self._weights()):
            for kind, wk in zip(KINDS, w):
                out = out + wk * bw_eval(cfg, cf, kind, t)
        return out

    def gradient(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape[:-1] + (2,))
        for cfg, cf, w in zip(self.configs, self.coeffs, self._weights()):
            for kind, wk in zip(KINDS, w):
                out = out + wk * bw_grad(cfg, cf, kind, t)
        return out


def numeric_certificate(T, tau, zeta: float, origin=(0.0, 0.0)) -> NumericCertificate:
    """Solve the 3n x 3n interpolation system with dense LU.

    Unknowns are (alpha_j, beta_j, gamma_j) per spike; equations fix
    Q(t_i) = tau_i and grad Q(t_i) = 0.  Not rigorous: this is the
    cross-check construction, not the certified bound chain.
    """
    T = np.asarray(T, dtype=float)
    tau = np.asarray(tau, dtype=float)
    n = len(T)
    if n == 0 or tau.shape != (n,):
        raise ValueError("need one sign per spike")
    configs = tuple(SpikeConfig.from_nearest(t, zeta, origin) for t in T)
    coeffs = tuple(bw_coefficients(c) for c in configs)
    M = np.empty((3 * n, 3 * n))
    rhs = np.zeros(3 * n)
    rhs[:n] = tau
    for j, (cfg, cf) in enumerate(zip(configs, coeffs)):
        for k, kind in enumerate(KINDS):
            col = 3 * j + k
            M[:n, col] = bw_eval(cfg, cf, kind, T)
            g = bw_grad(cfg, cf, kind, T)
            M[n:2 * n, col] = g[:, 0]
            M[2 * n:, col] = g[:, 1]
    with warnings.catch_warnings():
        # zero pivots are reported as SingularSystem below
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(M)
    diag = np.abs(np.diag(lu))
    if diag.min() < 1e-12 * diag.max():
        raise SingularSystem(
            f"pivot ratio {diag.min() / diag.max():.2e}; spikes too close?")
    x = lu_solve((lu, piv), rhs)
    alpha, beta, gamma = x[0::3], x[1::3], x[2::3]
    w = np.stack([alpha, beta, gamma], axis=1)       # (n, 3)
    q = np.stack([cf.mat @ w[j] for j, cf in enumerate(coeffs)])
    return NumericCertificate(configs, coeffs, alpha, beta, gamma, q)


# -- small dense SVD --------------------------------------------------------

def svd_small(M, tol: float = 1e-10, max_sweeps: int = 60) -> np.ndarray:
    """Singular values by one-sided Jacobi, descending.

    Columns are rotated pairwise until all are numerically orthogonal
    (relative inner product below ``tol``); the singular values are then the
    column norms.  Quadratic convergence makes the sweep cap generous.
    """
    A = np.array(M, dtype=float)
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix contains non-finite entries")
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if A.shape[0] < A.shape[1]:
        A = A.T.copy()
    n = A.shape[1]
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                a = float(A[:, i] @ A[:, i])
                b = float(A[:, j] @ A[:, j])
                c = float(A[:, i] @ A[:, j])
                if abs(c) <= tol * math.sqrt(a * b):
                    continue
                off = max(off, abs(c) / math.sqrt(a * b) if a * b > 0 else 0.0)
                zeta_r = (b - a) / (2.0 * c)
                t = math.copysign(1.0, zeta_r) / (abs(zeta_r)
                                                  + math.hypot(1.0, zeta_r))
                cs = 1.0 / math.hypot(1.0, t)
                sn = cs * t
                ai = A[:, i].copy()
                A[:, i] = cs * ai - sn * A[:, j]
                A[:, j] = sn * ai + cs * A[:, j]
        if off == 0.0:
            break
    sv = np.sqrt(np.sum(A * A, axis=0))
    return np.sort(sv)[::-1]
