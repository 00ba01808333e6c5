"""The recovery certifier.

Given a minimum spike separation Delta and a grid-spacing band (index k1),
this module decides whether the interpolation function Q is guaranteed to
stay inside (-1, 1) away from the spike support.  The decision reduces to
one radial profile: with the nearest spike at the origin, bounds on Q, its
radial derivative, and its largest Hessian eigenvalue are constant on each
of 100 segments tiling (0, Delta].  Near the spike, negativity of the
curvature integral (and then of its gradient extension) controls Q < 1; far
out, the segment value bounds take over; Q > -1 holds segment by segment;
beyond Delta a single norm inequality covers the rest of the plane.

All inputs are the precomputed radial envelopes and the scalar coefficient
bounds; nothing here evaluates Q itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envelope import load_envelope_set
from .hexgeom import build_partition, segment_cell_distance
from .schur import NormBounds, SchurReport, block_norm_bounds, schur_bounds

EPS_SEG = 1e-9         # absorbs the beyond-layer-8 tails in every segment bound
N_SEGMENTS = 100


class CoefficientBoundExceeded(ValueError):
    """The segment-bound epsilon budget requires |alpha| <= 2, |beta|,
    |gamma| <= 1; a report outside that range cannot use these formulas."""


@dataclass(frozen=True)
class SegmentBound:
    """Constant bounds on Q and its derivatives over [a, b] x {0}."""

    a: float
    b: float
    q_ub: float
    q_lb: float
    grad_ub: float      # on grad Q . t_hat (signed)
    eig_ub: float       # on the largest Hessian quadratic form (signed)


@dataclass(frozen=True)
class CertificateReport:
    delta: float
    k1: int
    u1: float | None
    u2: float | None
    segments: tuple
    schur: SchurReport
    far_field_ok: bool
    verdict: str        # "certified" or "failed(<stage>)"

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    @property
    def stage(self) -> str:
        if self.certified:
            return ""
        return self.verdict[len("failed("):-1]


# Segment-to-cell distances depend on Delta only through dilation, so the
# (n_segments x 216) matrix is computed once at Delta = 1 and scaled.
_UNIT_DISTS: dict = {}


def _unit_distances(n_segments: int) -> np.ndarray:
    if n_segments not in _UNIT_DISTS:
        part = build_partition(1.0)
        out = np.empty((n_segments, len(part.cells)))
        for i in range(n_segments):
            a, b = i / n_segments, (i + 1) / n_segments
            for j, cell in enumerate(part.cells):
                out[i, j] = segment_cell_distance(a, b, cell)
        _UNIT_DISTS[n_segments] = out
    return _UNIT_DISTS[n_segments]


def _require_coefficient_budget(schur: SchurReport) -> None:
    if not (schur.alpha_inf <= 2.0 and schur.beta_inf <= 1.0
            and schur.gamma_inf <= 1.0):
        raise CoefficientBoundExceeded(
            f"alpha_inf={schur.alpha_inf}, beta_inf={schur.beta_inf}")


def _grad_norm(envelopes, prefix: str, r) -> np.ndarray:
    dx = envelopes[prefix + "_dx"].query_many(r)
    dy = envelopes[prefix + "_dy"].query_many(r)
    return np.sqrt(dx * dx + dy * dy)


def qtri_segment_bounds(seg, partition, envelopes,
                        schur: SchurReport, cell_dists=None) -> SegmentBound:
    """Bounds on Q over one segment of the positive axis.

    ``cell_dists`` optionally supplies the per-cell segment distances (the
    sweep precomputes them at Delta = 1 and dilates); otherwise they are
    computed exactly here.
    """
    a, b = float(seg[0]), float(seg[1])
    if not (0 <= a <= b <= partition.delta):
        raise ValueError(f"segment [{a}, {b}] outside [0, {partition.delta}]")
    if not all(schur.conditions_hold):
        raise ValueError("schur conditions must hold")
    _require_coefficient_budget(schur)
    if cell_dists is None:
        cell_dists = np.array([segment_cell_distance(a, b, c)
                               for c in partition.cells])
    # Two global constraints sharpen the raw segment-to-cell distance: every
    # other spike is farther from t than the origin spike (>= a), and has
    # norm >= Delta while |t| <= b (>= Delta - b).  Without the second clamp
    # the inner-layer cells, which overlap the exclusion disk, would dominate
    # every bound near the spike.
    d_u = np.maximum(cell_dists, max(a, partition.delta - b))
    al, be, ga = schur.alpha_inf, schur.beta_inf, schur.gamma_inf
    ra = np.array([a])

    def q_terms(r):
        return (al * envelopes["bump"].query_many(r)
                + be * envelopes["wave1"].query_many(r)
                + ga * envelopes["wave2"].query_many(r))

    neighbor_q = float(np.sum(q_terms(d_u)))
    wave_self = float(be * envelopes["wave1"].query_many(ra)[0]
                      + ga * envelopes["wave2"].query_many(ra)[0])
    bump_self = float(al * envelopes["bump"].query_many(ra)[0])
    q_ub = bump_self + wave_self + neighbor_q + EPS_SEG
    q_lb = -(wave_self + neighbor_q + EPS_SEG)

    omega = envelopes["bump_slope"].seg_max(a, b)
    grad_self = max(schur.alpha_lb * omega, al * omega)
    grad_neighbor = float(np.sum(al * _grad_norm(envelopes, "bump", d_u)
                                 + be * _grad_norm(envelopes, "wave1", d_u)
                                 + ga * _grad_norm(envelopes, "wave2", d_u)))
    grad_wave_self = float(be * _grad_norm(envelopes, "wave1", ra)[0]
                           + ga * _grad_norm(envelopes, "wave2", ra)[0])
    grad_ub = grad_self + grad_wave_self + grad_neighbor + EPS_SEG

    eta = envelopes["bump_eig_max"].seg_max(a, b)
    eig_self = max(schur.alpha_lb * eta, al * eta)
    eig_neighbor = float(np.sum(al * envelopes["bump_eig"].query_many(d_u)
                                + be * envelopes["wave1_eig"].query_many(d_u)
                                + ga * envelopes["wave2_eig"].query_many(d_u)))
    eig_wave_self = float(be * envelopes["wave1_eig"].query_many(ra)[0]
                          + ga * envelopes["wave2_eig"].query_many(ra)[0])
    eig_ub = eig_self + eig_wave_self + eig_neighbor + EPS_SEG

    return SegmentBound(a, b, q_ub, q_lb, grad_ub, eig_ub)


def regions_integrals(segments, r: float, lo: float = 0.0) -> dict:
    """Closed-form integrals of the step-constant bound profiles.

    ``curvature_integral_ub`` is the convolution-style integral of the
    eigenvalue bound against (r - s) over [0, r]; ``gradient_integral_ub``
    integrates the gradient bound over [lo, r].
    """
    curv = 0.0
    grad = 0.0
    for s in segments:
        a1, b1 = min(s.a, r), min(s.b, r)
        if b1 > a1:
            curv += s.eig_ub * ((r - a1) ** 2 - (r - b1) ** 2) / 2.0
        a2, b2 = min(max(s.a, lo), r), min(max(s.b, lo), r)
        if b2 > a2:
            grad += s.grad_ub * (b2 - a2)
    return {"curvature_integral_ub": curv, "gradient_integral_ub": grad}


def _curvature_negative_on(segments, i: int) -> bool:
    """Is the curvature integral I(r) < 0 for every r in (a_i, b_i]?

    On one segment I is a quadratic in r; its maximum sits at an endpoint
    unless the leading coefficient (eig_ub_i / 2) is negative, in which case
    the interior vertex must be checked too.
    """
    s = segments[i]

    def ival(r):
        return regions_integrals(segments, r)["curvature_integral_ub"]

    if ival(s.a) > 0.0 or not ival(s.b) < 0.0:
        return False
    if s.eig_ub < 0.0:
        # concave on this segment; the vertex sits where I'(r) vanishes,
        # with I'(r) = integral of the eig bound over [0, r]
        slope_a = sum(seg.eig_ub * (min(seg.b, s.a) - min(seg.a, s.a))
                      for seg in segments if min(seg.b, s.a) > min(seg.a, s.a))
        rv = s.a - slope_a / s.eig_ub
        if s.a < rv < s.b and not ival(rv) < 0.0:
            return False
    return True


def _max_extension(segments, last_ok: int, i1: int) -> float:
    """Farthest u2 for the candidate u1 = segments[i1].b."""
    u1 = segments[i1].b
    base = regions_integrals(segments, u1)["curvature_integral_ub"]
    u2 = u1
    for i in range(i1 + 1, len(segments)):
        s = segments[i]
        g = regions_integrals(segments, s.b, lo=u1)["gradient_integral_ub"]
        g_a = regions_integrals(segments, s.a, lo=u1)["gradient_integral_ub"]
        # F is linear on the segment: both endpoint values must be negative
        if base + g < 0.0 and base + g_a < 0.0:
            u2 = s.b
        else:
            break
    return u2


def find_u1_u2(segments):
    """Radii satisfying the curvature / gradient conditions.

    Any prefix endpoint with an everywhere-negative curvature integral is an
    admissible u1; a smaller u1 keeps more negative reserve for the gradient
    extension, so the pair maximizing u2 is returned (ties prefer the larger
    u1).  Returns (u1, u2) on success or (None, stage).
    """
    n = len(segments)
    last_ok = -1
    for i in range(n):
        if not _curvature_negative_on(segments, i):
            break
        last_ok = i
    if last_ok < 0:
        return None, "no_negative_curvature"
    best_u1, best_u2 = None, -math.inf
    for i1 in range(last_ok, -1, -1):
        u1 = segments[i1].b
        u2 = _max_extension(segments, last_ok, i1)
        if u2 > best_u2:
            best_u1, best_u2 = u1, u2
    if best_u2 <= best_u1:
        # no segment extends; u2 = u1 is still a valid pair provided the
        # value bound already takes over there
        u1 = segments[last_ok].b
        if all(s.q_ub < 1.0 for s in segments if s.a >= u1 - 1e-12):
            return u1, u1
        return None, "no_gradient_extension"
    return best_u1, best_u2


def far_field_check(schur: SchurReport, nb: NormBounds) -> bool:
    """|Q| < 1 beyond Delta: the evaluation point joins the support as an
    extra row of the same block system, so the same norm bounds apply."""
    val = (schur.alpha_inf * nb.i_minus_b + schur.beta_inf * nb.w1
           + schur.gamma_inf * nb.w2)
    return val < 1.0


@dataclass(frozen=True)
class CertifyConfig:
    """Everything certify_cell needs besides (delta, k1)."""

    envelopes_by_k1: dict           # k1 -> {kind: StepEnvelope}
    n_segments: int = N_SEGMENTS

    @staticmethod
    def from_cache(directory: str, k1_set) -> "CertifyConfig":
        return CertifyConfig({k1: load_envelope_set(directory, k1)
                              for k1 in k1_set})


def certify_cell(delta: float, k1: int, config: CertifyConfig) -> CertificateReport:
    envelopes = config.envelopes_by_k1[k1]
    partition = build_partition(delta)
    nb = block_norm_bounds(partition, envelopes, k1)
    rep = schur_bounds(nb)

    def fail(stage, segments=(), u1=None, u2=None, ff=False):
        return CertificateReport(delta, k1, u1, u2, tuple(segments), rep,
                                 ff, f"failed({stage})")

    if not all(rep.conditions_hold):
        return fail("schur")
    try:
        _require_coefficient_budget(rep)
    except CoefficientBoundExceeded:
        return fail("coefficient_bounds")
    ff = far_field_check(rep, nb)
    if not ff:
        return fail("far_field")

    n = config.n_segments
    dists = _unit_distances(n) * delta
    segments = [
        qtri_segment_bounds((i * delta / n, (i + 1) * delta / n), partition,
                            envelopes, rep, cell_dists=dists[i])
        for i in range(n)
    ]
    u1, u2 = find_u1_u2(segments)
    if u1 is None:
        return fail(u2, segments, ff=True)
    if not all(s.q_ub < 1.0 for s in segments if s.a >= u2 - 1e-12):
        return fail("q_upper", segments, u1, u2, True)
    if not all(s.q_lb > -1.0 for s in segments):
        return fail("q_lower", segments, u1, u2, True)
    return CertificateReport(delta, k1, u1, u2, tuple(segments), rep, True,
                             "certified")


def recovery_sweep(delta_grid, k1_set, config: CertifyConfig) -> dict:
    """Per band, the reports along the grid and the least certified Delta."""
    out = {}
    for k1 in k1_set:
        reports = [certify_cell(d, k1, config) for d in delta_grid]
        threshold = next((r.delta for r in reports if r.certified), None)
        out[k1] = {"threshold": threshold, "reports": reports}
    return out
