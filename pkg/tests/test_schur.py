import math

import numpy as np
import pytest

from conftest import desk_envelopes
from deconv2d.bumpwave import SpikeConfig, bw_coefficients, bw_eval, bw_grad
from deconv2d.envelope import OutOfValidatedRange
from deconv2d.hexgeom import build_partition
from deconv2d.schur import (
    NonFinite,
    NormBounds,
    SingularSystem,
    block_norm_bounds,
    numeric_certificate,
    schur_bounds,
    svd_small,
)

DELTA = 4.5
K1 = 5          # zeta band [0.30, 0.35]
ZETA = 0.32


@pytest.fixture(scope="module")
def envs():
    return desk_envelopes(K1)


@pytest.fixture(scope="module")
def nb(envs):
    return block_norm_bounds(build_partition(DELTA), envs, K1)


def test_block_bounds_large_delta_floor(envs):
    b = block_norm_bounds(build_partition(50.0), envs, K1)
    # every cell is past radius 10: each sum collapses to 216 tails
    for name in ("i_minus_b", "b_x", "b_y"):
        assert getattr(b, name) <= 216 * 2e-9 + b.eps_b * 1.001
    for name in ("w1", "w2", "i_minus_w1x", "w2x", "w1y", "i_minus_w2y"):
        assert getattr(b, name) <= 216 * 2e-9 + b.eps_w * 1.001


def test_block_bounds_monotone_in_delta(envs):
    b1 = block_norm_bounds(build_partition(4.5), envs, K1)
    b2 = block_norm_bounds(build_partition(5.0), envs, K1)
    for name in ("i_minus_b", "b_x", "b_y", "w1", "w2",
                 "i_minus_w1x", "w2x", "w1y", "i_minus_w2y"):
        assert getattr(b2, name) <= getattr(b1, name) + 1e-15, name


def test_block_bounds_working_point(nb):
    assert nb.i_minus_w2y < 1.0
    rep = schur_bounds(nb)
    assert all(rep.conditions_hold)
    assert rep.alpha_lb >= 0.0
    assert rep.beta_inf == rep.gamma_inf
    assert rep.alpha_inf <= 2.0 and rep.beta_inf <= 1.0


def test_block_bounds_delta_precondition(envs):
    with pytest.raises(OutOfValidatedRange):
        block_norm_bounds(build_partition(1.5), envs, K1)


def _nb(**kw):
    base = dict(i_minus_b=0.0, b_x=0.0, b_y=0.0, w1=0.0, w2=0.0,
                i_minus_w1x=0.0, w2x=0.0, w1y=0.0, i_minus_w2y=0.0,
                eps_b=0.0, eps_w=0.0)
    base.update(kw)
    return NormBounds(**base)


def test_schur_identity_limit():
    rep = schur_bounds(_nb())
    assert rep.alpha_inf == 1.0 and rep.beta_inf == 0.0
    assert rep.gamma_inf == 0.0 and rep.alpha_lb == 1.0


def test_schur_short_circuits():
    rep = schur_bounds(_nb(i_minus_w2y=1.0))
    assert rep.conditions_hold == (False, False, False)
    assert math.isnan(rep.alpha_inf) and math.isnan(rep.alpha_lb)
    rep = schur_bounds(_nb(i_minus_w1x=0.5, w2x=2.0, w1y=0.5, i_minus_w2y=0.5))
    assert rep.conditions_hold == (True, False, False)
    rep = schur_bounds(_nb(i_minus_b=1.5))
    assert rep.conditions_hold == (True, True, False)


def test_schur_chain_oracle():
    """Independent scalar re-evaluation of the chain on random inputs."""
    rng = np.random.default_rng(5)
    for _ in range(200):
        v = rng.uniform(0, 0.3, 9)
        nb = _nb(i_minus_b=v[0], b_x=v[1], b_y=v[2], w1=v[3], w2=v[4],
                 i_minus_w1x=v[5], w2x=v[6], w1y=v[7], i_minus_w2y=v[8])
        rep = schur_bounds(nb)
        inv_w2y = 1 / (1 - v[8])
        ims1 = v[5] + v[6] * inv_w2y * v[7]
        inv_s1 = 1 / (1 - ims1)
        s2 = v[1] + v[6] * inv_w2y * v[2]
        ims3 = v[0] + v[3] * inv_s1 * s2 + v[4] * inv_w2y * (
            v[7] * inv_s1 * s2 + v[2])
        if ims3 >= 1:
            assert not rep.conditions_hold[2]
            continue
        inv_s3 = 1 / (1 - ims3)
        assert abs(rep.alpha_inf - inv_s3) < 1e-12
        assert abs(rep.beta_inf - inv_s1 * s2 * inv_s3) < 1e-12
        assert abs(rep.alpha_lb - (1 - inv_s3 * ims3)) < 1e-12


# -- numeric certificate ----------------------------------------------------

def random_support(rng, n, delta, box):
    pts = []
    while len(pts) < n:
        p = rng.uniform(-box, box, 2)
        if all(np.hypot(*(p - q)) >= delta * 1.001 for q in pts):
            pts.append(p)
    return np.array(pts)


def test_certificate_single_spike():
    cert = numeric_certificate([[0.3, -0.2]], [1.0], ZETA)
    assert abs(cert.alpha[0] - 1.0) < 1e-12
    assert abs(cert.beta[0]) < 1e-12 and abs(cert.gamma[0]) < 1e-12
    assert abs(cert.evaluate([0.3, -0.2]) - 1.0) < 1e-12


def test_certificate_three_spikes():
    T = np.array([[0.0, 0.0], [4.6, 0.3], [1.1, 4.9]])
    tau = np.array([1.0, 1.0, -1.0])
    cert = numeric_certificate(T, tau, 0.5)
    assert np.max(np.abs(cert.evaluate(T) - tau)) < 1e-8
    assert np.max(np.abs(cert.gradient(T))) < 1e-8
    # |Q| < 1 away from the support
    xs = np.arange(-2.0, 7.0, 0.05)
    G = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
    far = np.min(np.linalg.norm(G[:, None] - T[None], axis=-1), axis=1) > DELTA / 8
    assert np.max(np.abs(cert.evaluate(G[far]))) < 1.0


def test_certificate_q_weights_consistent():
    T = np.array([[0.0, 0.0], [5.0, 1.0]])
    cert = numeric_certificate(T, [1.0, -1.0], ZETA)
    # direct Gaussian synthesis from the per-sample weights
    p = np.array([1.7, -0.4])
    val = 0.0
    for cfg, qrow in zip(cert.configs, cert.q):
        d = cfg.samples - p
        val += qrow @ np.exp(-0.5 * np.sum(d * d, axis=1))
    assert abs(val - cert.evaluate(p)) < 1e-12


def test_certificate_singular():
    with pytest.raises(SingularSystem):
        numeric_certificate([[0.0, 0.0], [1e-9, 0.0]], [1.0, 1.0], ZETA)


def test_norm_and_chain_soundness(nb, envs):
    """Sampled truth never exceeds the rigorous bounds (reduced size)."""
    rng = np.random.default_rng(7)
    rep = schur_bounds(nb)
    assert all(rep.conditions_hold)
    for _ in range(10):
        n = int(rng.integers(3, 10))
        T = random_support(rng, n, DELTA, 3 * DELTA)
        origin = rng.uniform(-ZETA / 2, ZETA / 2, 2)
        cfgs = [SpikeConfig.from_nearest(t, ZETA, origin) for t in T]
        cfs = [bw_coefficients(c) for c in cfgs]
        rows = {k: np.zeros(n) for k in ("i_minus_b", "b_x", "b_y", "w1",
                                         "w2", "i_minus_w1x", "w2x", "w1y",
                                         "i_minus_w2y")}
        for k in range(n):
            for j in range(n):
                vB = bw_eval(cfgs[k], cfs[k], "B", T[j])
                v1 = bw_eval(cfgs[k], cfs[k], "W1", T[j])
                v2 = bw_eval(cfgs[k], cfs[k], "W2", T[j])
                gB = bw_grad(cfgs[k], cfs[k], "B", T[j])
                g1 = bw_grad(cfgs[k], cfs[k], "W1", T[j])
                g2 = bw_grad(cfgs[k], cfs[k], "W2", T[j])
                dd = 1.0 if j == k else 0.0
                rows["i_minus_b"][j] += abs(dd - vB)
                rows["b_x"][j] += abs(gB[0])
                rows["b_y"][j] += abs(gB[1])
                rows["w1"][j] += abs(v1)
                rows["w2"][j] += abs(v2)
                rows["i_minus_w1x"][j] += abs(dd - g1[0])
                rows["w2x"][j] += abs(g2[0])
                rows["w1y"][j] += abs(g1[1])
                rows["i_minus_w2y"][j] += abs(dd - g2[1])
        for name, r in rows.items():
            assert r.max() <= getattr(nb, name) + 1e-15, name
        tau = rng.choice([-1.0, 1.0], n)
        cert = numeric_certificate(T, tau, ZETA, origin)
        assert np.max(np.abs(cert.alpha)) <= rep.alpha_inf
        assert np.max(np.abs(cert.beta)) <= rep.beta_inf
        assert np.max(np.abs(cert.gamma)) <= rep.gamma_inf
        assert np.min(np.abs(cert.alpha)) >= rep.alpha_lb


# -- svd ---------------------------------------------------------------------

def jacobi_eigvals(S, sweeps=50):
    """Cyclic Jacobi symmetric eigenvalues (independent oracle)."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    for _ in range(sweeps):
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-15:
                    continue
                theta = 0.5 * math.atan2(2 * A[p, q], A[q, q] - A[p, p])
                c, s = math.cos(theta), math.sin(theta)
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))[::-1]


def test_svd_identity():
    assert np.allclose(svd_small(np.eye(7)), np.ones(7))


def test_svd_duplicate_columns():
    rng = np.random.default_rng(3)
    M = rng.normal(size=(6, 4))
    M[:, 3] = M[:, 0]
    assert svd_small(M)[-1] < 1e-10 * svd_small(M)[0]


def test_svd_random_vs_eigen_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        M = rng.normal(size=(5, 5))
        sv = svd_small(M)
        ev = jacobi_eigvals(M.T @ M)
        assert np.allclose(sv, np.sqrt(np.maximum(ev, 0.0)), atol=1e-9)
        assert np.all(np.diff(sv) <= 0)


def test_svd_wide_and_errors():
    rng = np.random.default_rng(13)
    M = rng.normal(size=(3, 8))
    assert np.allclose(svd_small(M), np.linalg.svd(M, compute_uv=False),
                       atol=1e-9)
    with pytest.raises(NonFinite):
        svd_small(np.array([[1.0, np.nan], [0.0, 1.0]]))
