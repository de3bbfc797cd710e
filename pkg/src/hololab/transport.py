"""Parallel transport along piecewise-C1 paths, holonomy, loop families.

The transport equation for a vector field U along sigma is linear,

    dU^k/dt + Gamma^k_ij(sigma(t)) sigma'^i(t) U^j = 0,

so each segment contributes a transfer matrix.  We integrate with classical
fixed-step RK4 (default 2000 steps per segment) and estimate the error by
one step-halving: the returned matrix is the half-step result, and
``est_error`` is the max-entry difference between the two resolutions
scaled by 1/(2^4 - 1).

Because the coefficient matrix depends only on the (known) path position,
all Christoffel evaluations are batched over the step grid, the per-step
RK4 transfer matrices are built with stacked matmuls, and the ordered
product is taken by pairwise reduction -- no Python-level inner loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (EmptyRegion, FamilyNotTrivial, NotClosed, NotTotallyGeodesic,
                     OutOfDomain, StepUnderflow)
from .manifold import (ConnectionKind, WeightedManifold, christoffel_many,
                       restrict_manifold)

DEFAULT_STEPS = 2000
RK4_RICHARDSON = 15.0  # 2^order - 1
CLOSURE_TOL = 1e-9
ENDPOINT_TOL = 1e-12


# ---------------------------------------------------------------------------
# Paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PathSegment:
    """One C1 piece, parametrized over t in [0, 1].

    Use Line(start, end) for coordinate straight lines, or Curve(position,
    velocity) for general smooth pieces; both callables must accept a float
    or a 1-d array of parameter values.
    """

    position: Callable
    velocity: Callable
    start: np.ndarray
    end: np.ndarray

    def sample(self, ts):
        ts = np.asarray(ts, dtype=float)
        try:
            pos = np.asarray(self.position(ts), dtype=float)
            vel = np.asarray(self.velocity(ts), dtype=float)
        except (TypeError, ValueError):
            pos = vel = None
        if pos is None or pos.ndim == 1:  # scalar-only callables
            pos = np.stack([np.asarray(self.position(t), dtype=float) for t in ts])
            vel = np.stack([np.asarray(self.velocity(t), dtype=float) for t in ts])
        return pos, vel


def Line(start, end) -> PathSegment:
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    delta = end - start

    def position(ts):
        ts = np.asarray(ts, dtype=float)
        return start[None, :] + np.atleast_1d(ts)[:, None] * delta[None, :]

    def velocity(ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        return np.broadcast_to(delta, (ts.shape[0], delta.shape[0])).copy()

    return PathSegment(position=position, velocity=velocity, start=start, end=end)


def Curve(position, velocity, check_consistency=True) -> PathSegment:
    """General segment from position/velocity callables on [0, 1].

    The velocity is spot-checked against a central difference of the
    position at five interior parameters.
    """
    p0 = np.asarray(position(0.0), dtype=float)
    p1 = np.asarray(position(1.0), dtype=float)
    seg = PathSegment(position=lambda ts: _vectorize_curve(position, ts),
                      velocity=lambda ts: _vectorize_curve(velocity, ts),
                      start=p0, end=p1)
    if check_consistency:
        h = 1e-6
        for t in (0.1, 0.3, 0.5, 0.7, 0.9):
            fd = (np.asarray(position(t + h), dtype=float)
                  - np.asarray(position(t - h), dtype=float)) / (2 * h)
            v = np.asarray(velocity(t), dtype=float)
            scale = max(1.0, float(np.abs(v).max()))
            if np.abs(fd - v).max() > 1e-6 * scale:
                raise ValueError(f"velocity inconsistent with position at t={t}")
    return seg


def _vectorize_curve(fn, ts):
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    out = np.asarray(fn(ts[0]), dtype=float)
    if out.ndim == 1:
        return np.stack([np.asarray(fn(t), dtype=float) for t in ts])
    return np.asarray(fn(ts), dtype=float)


def polyline_segments(points) -> list:
    pts = [np.asarray(p, dtype=float) for p in points]
    return [Line(a, b) for a, b in zip(pts[:-1], pts[1:])]


def rectangle_loop(corner, axis_a, axis_b, extent_a, extent_b, basepoint=None):
    """Axis-aligned rectangle based at ``basepoint`` via straight spokes."""
    corner = np.asarray(corner, dtype=float)
    e1 = np.zeros_like(corner); e1[axis_a] = extent_a
    e2 = np.zeros_like(corner); e2[axis_b] = extent_b
    ring = [corner, corner + e1, corner + e1 + e2, corner + e2, corner]
    if basepoint is None or np.allclose(basepoint, corner):
        return Loop(segments=polyline_segments(ring), basepoint=corner)
    base = np.asarray(basepoint, dtype=float)
    pts = [base] + ring + [base]
    return Loop(segments=polyline_segments(pts), basepoint=base)


@dataclass(frozen=True)
class Loop:
    segments: tuple
    basepoint: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "basepoint", np.asarray(self.basepoint, dtype=float))
        if not self.segments:
            raise NotClosed("loop has no segments")

    def validate(self, chart):
        """Consecutive endpoints must match exactly; the final endpoint must
        equal the basepoint modulo the chart's declared periods."""
        segs = self.segments
        if np.abs(segs[0].start - self.basepoint).max() > ENDPOINT_TOL:
            raise NotClosed("first segment does not start at the basepoint")
        for a, b in zip(segs[:-1], segs[1:]):
            if np.abs(a.end - b.start).max() > ENDPOINT_TOL:
                raise NotClosed(f"segment endpoints do not match: {a.end} vs {b.start}")
        gap = np.abs(chart.wrap_difference(segs[-1].end, self.basepoint)).max()
        if gap > CLOSURE_TOL:
            raise NotClosed(f"loop endpoint misses basepoint by {gap:.3e}")

    def reversed(self) -> "Loop":
        segs = []
        for seg in self.segments[::-1]:
            pos, vel = seg.position, seg.velocity
            segs.append(PathSegment(
                position=(lambda ts, p=pos: p(1.0 - np.asarray(ts, dtype=float))),
                velocity=(lambda ts, v=vel: -np.asarray(v(1.0 - np.asarray(ts, dtype=float)))),
                start=seg.end, end=seg.start))
        return Loop(segments=segs, basepoint=self.basepoint)


@dataclass(frozen=True)
class HolonomyElement:
    matrix: np.ndarray
    loop: Loop
    steps_used: int
    est_error: float


@dataclass(frozen=True)
class LoopFamily:
    """One-parameter family s -> Loop on [0, s_max], trivial at s = 0."""

    family: Callable
    s_max: float
    trivial_at_zero: bool = True


# ---------------------------------------------------------------------------
# Vectorized RK4 for linear matrix ODEs  Y' = A(t) Y
# ---------------------------------------------------------------------------

def _ordered_product(mats):
    """Product mats[-1] @ ... @ mats[0] by pairwise reduction."""
    while mats.shape[0] > 1:
        m = mats.shape[0]
        even = mats[0:m - m % 2:2]
        odd = mats[1:m:2]
        paired = odd @ even
        if m % 2:
            mats = np.concatenate([paired, mats[-1:]], axis=0)
        else:
            mats = paired
    return mats[0]


def _rk4_transfer(A_half, h):
    """Per-step RK4 transfer matrices from A sampled on the half-step grid.

    A_half has shape (2N+1, d, d); returns the ordered product over all N
    steps of  I + h/6 (K1 + 2 K2 + 2 K3 + K4).
    """
    d = A_half.shape[1]
    A1 = A_half[0:-1:2]
    A2 = A_half[1::2]
    A3 = A_half[2::2]
    eye = np.eye(d)[None, :, :]
    K1 = A1
    K2 = A2 @ (eye + (h / 2) * K1)
    K3 = A2 @ (eye + (h / 2) * K2)
    K4 = A3 @ (eye + h * K3)
    steps = eye + (h / 6) * (K1 + 2 * K2 + 2 * K3 + K4)
    return _ordered_product(steps)


def _segment_transfer_pair(sample_A, steps):
    """(fine, coarse) transfer matrices for one segment.

    ``sample_A(ts) -> (m, d, d)`` evaluates the coefficient matrix; the fine
    pass uses 2*steps RK4 steps and shares its sample grid with the coarse
    pass (the even-index subset).
    """
    n_fine = 2 * steps
    ts = np.linspace(0.0, 1.0, 2 * n_fine + 1)
    A = sample_A(ts)
    fine = _rk4_transfer(A, 1.0 / n_fine)
    coarse = _rk4_transfer(A[::2], 1.0 / steps)
    return fine, coarse


def _transport_sampler(M, kind, segment, matrix_map):
    """Coefficient sampler for one segment; matrix_map turns the contracted
    Christoffel array B^k_j = Gamma^k_ij sigma'^i into the ODE matrix."""

    def sample_A(ts):
        pos, vel = segment.sample(ts)
        inside = M.chart.contains(pos)
        if not inside.all():
            raise OutOfDomain(tuple(pos[~inside][0]), "path exits the chart")
        gamma = christoffel_many(M, kind, pos)
        B = np.einsum('mkij,mi->mkj', gamma, vel)
        return matrix_map(B)

    return sample_A


def _vector_map(B):
    return -B


def _covector_map(B):
    return np.swapaxes(B, 1, 2)


def path_transport_matrix(M, kind, path, steps=DEFAULT_STEPS, covector=False,
                          error_target=None):
    """Transfer matrix of a piecewise path with its Richardson error estimate.

    Returns (matrix, est_error).  Raises StepUnderflow when an explicit
    error target is not met at the given step count.
    """
    mmap = _covector_map if covector else _vector_map
    fine = np.eye(M.dim)
    coarse = np.eye(M.dim)
    for seg in path:
        f, c = _segment_transfer_pair(_transport_sampler(M, kind, seg, mmap), steps)
        fine = f @ fine
        coarse = c @ coarse
    est = float(np.abs(fine - coarse).max()) / RK4_RICHARDSON
    if error_target is not None and est > error_target:
        raise StepUnderflow(f"estimated error {est:.3e} exceeds target {error_target:.3e}")
    return fine, est


def transport_vector(M, kind, path, v0, steps=DEFAULT_STEPS, error_target=None):
    """Parallel-transport the vector v0 along the path; returns endpoint
    components in the coordinate basis."""
    P, _ = path_transport_matrix(M, kind, path, steps=steps, error_target=error_target)
    return P @ np.asarray(v0, dtype=float)


def transport_covector(M, kind, path, a0, steps=DEFAULT_STEPS, error_target=None):
    """Parallel-transport the 1-form a0 (row of components) along the path."""
    P, _ = path_transport_matrix(M, kind, path, steps=steps, covector=True,
                                 error_target=error_target)
    return P @ np.asarray(a0, dtype=float)


def holonomy(M, kind, loop: Loop, steps=DEFAULT_STEPS, error_target=None) -> HolonomyElement:
    loop.validate(M.chart)
    P, est = path_transport_matrix(M, kind, loop.segments, steps=steps,
                                   error_target=error_target)
    return HolonomyElement(matrix=P, loop=loop,
                           steps_used=2 * steps * len(loop.segments), est_error=est)


# ---------------------------------------------------------------------------
# Loop families and their s-derivative at 0
# ---------------------------------------------------------------------------

def family_derivative(M, kind, fam: LoopFamily, s_step=1e-2, steps=DEFAULT_STEPS,
                      trivial_tol=1e-6):
    """One-sided derivative of s -> P(s) at 0, Richardson-extrapolated over
    s, s/2, s/4.  The family must integrate to the identity at s = 0."""
    if fam.trivial_at_zero:
        P0 = holonomy(M, kind, fam.family(0.0), steps=steps)
        gap = np.abs(P0.matrix - np.eye(M.dim)).max()
        if gap > max(10.0 * P0.est_error, trivial_tol):
            raise FamilyNotTrivial(f"P(0) differs from identity by {gap:.3e}")
    if not 0 < s_step <= fam.s_max:
        raise ValueError("s_step must lie in (0, s_max]")

    def diff_quotient(s):
        P = holonomy(M, kind, fam.family(s), steps=steps).matrix
        return (P - np.eye(M.dim)) / s

    f1 = diff_quotient(s_step)
    f2 = diff_quotient(s_step / 2)
    f4 = diff_quotient(s_step / 4)
    return (8.0 * f4 - 6.0 * f2 + f1) / 3.0


def shrinking_rectangle_family(corner, axis_a, axis_b, extent_a, extent_b, s_max=1.0):
    """Family s -> rectangle with extents scaled by s; trivially I at s=0."""
    corner = np.asarray(corner, dtype=float)

    def make(s):
        if s == 0.0:
            # degenerate: out-and-back along the first edge keeps segment
            # count fixed and has identity transport
            e1 = np.zeros_like(corner)
            return Loop(segments=[Line(corner, corner + e1), Line(corner + e1, corner),
                                  Line(corner, corner), Line(corner, corner)],
                        basepoint=corner)
        return rectangle_loop(corner, axis_a, axis_b, s * extent_a, s * extent_b)

    return LoopFamily(family=make, s_max=s_max)


# ---------------------------------------------------------------------------
# Random loop sampling
# ---------------------------------------------------------------------------

def random_rectangle_loops(M, region, count, seed, basepoint=None,
                           min_extent=0.25, max_extent=0.95):
    """Deterministic seed-reproducible axis-aligned rectangles in ``region``.

    Each loop picks a random corner (kept away from the upper region edge so
    rectangles never degenerate), a random axis pair and random extents
    (fractions of the room left in the region), and is based at
    ``basepoint`` (default: region center) through straight spokes.
    """
    region = [(float(lo), float(hi)) for lo, hi in region]
    n = M.dim
    if len(region) != n:
        raise EmptyRegion("region dimension mismatch")
    for lo, hi in region:
        if not lo < hi:
            raise EmptyRegion(f"empty region side ({lo}, {hi})")
    inside = M.chart.contains(np.array([[lo for lo, _ in region],
                                        [hi for _, hi in region]]))
    if not inside.all():
        raise OutOfDomain(region, "region not inside chart domain")
    if basepoint is None:
        basepoint = np.array([(lo + hi) / 2 for lo, hi in region])
    rng = np.random.default_rng(seed)
    loops = []
    for _ in range(count):
        corner = np.array([lo + 0.65 * (hi - lo) * rng.random() for lo, hi in region])
        if n == 2:
            i, j = 0, 1
        else:
            i, j = rng.choice(n, size=2, replace=False)
        room_i = region[i][1] - corner[i]
        room_j = region[j][1] - corner[j]
        ext_i = room_i * rng.uniform(min_extent, max_extent)
        ext_j = room_j * rng.uniform(min_extent, max_extent)
        loops.append(rectangle_loop(corner, int(i), int(j), ext_i, ext_j,
                                    basepoint=basepoint))
    return loops


# ---------------------------------------------------------------------------
# Block prediction for totally geodesic coordinate slices
# ---------------------------------------------------------------------------

def predicted_block_transport(N: WeightedManifold, free_indices, fixed_values,
                              loop: Loop, steps=DEFAULT_STEPS, geodesy_tol=1e-8):
    """Predicted ambient weighted transport along a loop inside the slice
    {x_j = c_j, j not free}, assembled block by block:

        [ induced weighted transport   sourced mixing block ]
        [            0                 ambient metric transport on normals ]

    The mixing block transports each normal by the ambient metric
    connection and feeds e^{phi(sigma(t)) - phi(p)} dphi(normal) sigma'
    into the induced weighted equation.  The slice must be totally geodesic
    (checked numerically along the loop) and metric-orthogonal to the
    normal coordinate directions.
    """
    free = sorted(int(i) for i in free_indices)
    normal = [j for j in range(N.dim) if j not in free]
    if not normal:
        raise ValueError("slice is the whole manifold")
    loop.validate(N.chart)

    # sample geodesy along the loop: Gamma^k_ij = 0 for i,j tangent, k normal
    probe_ts = np.linspace(0.05, 0.95, 20)
    probe_pts = np.concatenate([seg.sample(probe_ts)[0] for seg in loop.segments])
    gamma_probe = christoffel_many(N, ConnectionKind.LEVI_CIVITA, probe_pts)
    worst = max(np.abs(gamma_probe[:, k][:, free][:, :, free]).max() for k in normal)
    if worst > geodesy_tol:
        raise NotTotallyGeodesic(f"max tangent-tangent-normal coefficient {worst:.3e}")
    g_probe = N.metric.matrices(probe_pts)
    cross = max(np.abs(g_probe[:, i, j]).max() for i in free for j in normal)
    if cross > geodesy_tol:
        raise NotTotallyGeodesic(
            f"coordinate normals not metric-orthogonal to the slice ({cross:.3e})")

    fixed = {j: float(fixed_values[j]) for j in normal}
    sub = restrict_manifold(N, free, fixed)
    base_phi = float(N.density.values(np.atleast_2d(loop.basepoint))[0])
    s = len(free)
    d = s + N.dim

    def make_sampler(segment):
        def sample_A(ts):
            pos, vel = segment.sample(ts)
            inside = N.chart.contains(pos)
            if not inside.all():
                raise OutOfDomain(tuple(pos[~inside][0]), "path exits the chart")
            sub_pos = pos[:, free]
            sub_vel = vel[:, free]
            gamma_sub = christoffel_many(sub, ConnectionKind.WEIGHTED, sub_pos)
            B_sub = np.einsum('mkij,mi->mkj', gamma_sub, sub_vel)
            gamma_amb = christoffel_many(N, ConnectionKind.LEVI_CIVITA, pos)
            B_amb = np.einsum('mkij,mi->mkj', gamma_amb, vel)
            lam = np.exp(N.density.values(pos) - base_phi)
            dphi = N.density.gradients(pos)
            m = pos.shape[0]
            A = np.zeros((m, d, d))
            A[:, :s, :s] = -B_sub
            A[:, s:, s:] = -B_amb
            # source: lambda(t) * sigma'_tangent (x) dphi acting on the normal flow
            A[:, :s, s:] = lam[:, None, None] * np.einsum('mi,mj->mij', sub_vel, dphi)
            return A

        return sample_A

    fine = np.eye(d)
    for seg in loop.segments:
        f, _ = _segment_transfer_pair(make_sampler(seg), steps)
        fine = f @ fine

    top = fine[:s, :s]
    mix = fine[:s, s:]          # acting on full ambient normal start vectors
    amb = fine[s:, s:]          # ambient metric transport in ambient coordinates
    n = N.dim
    out = np.zeros((n, n))
    for a, i in enumerate(free):
        for b, j in enumerate(free):
            out[i, j] = top[a, b]
    for a, i in enumerate(free):
        for j in normal:
            out[i, j] = mix[a, j]
    for i in normal:
        for j in normal:
            out[i, j] = amb[i, j]
    return out


# ---------------------------------------------------------------------------
# Trajectory recording (CSV plotting support)
# ---------------------------------------------------------------------------

def transport_frame_trajectory(M, kind, loop: Loop, samples_per_segment=50,
                               steps=DEFAULT_STEPS):
    """Coordinate positions and transported-frame components along a loop.

    Returns (positions, frames): positions is (m, n), frames is (m, n, n)
    with frames[t] mapping basepoint components to components at positions[t].
    Used by the CLI --plot output; accuracy matches the holonomy integrator.
    """
    P = np.eye(M.dim)
    positions = [np.asarray(loop.basepoint, dtype=float)]
    frames = [P.copy()]
    per_seg = max(1, samples_per_segment)
    sub_steps = max(1, steps // per_seg)
    for seg in loop.segments:
        for k in range(per_seg):
            t0, t1 = k / per_seg, (k + 1) / per_seg
            piece = PathSegment(
                position=lambda ts, s=seg, a=t0, b=t1: s.position(a + (b - a) * np.asarray(ts, dtype=float)),
                velocity=lambda ts, s=seg, a=t0, b=t1: (b - a) * np.asarray(s.velocity(a + (b - a) * np.asarray(ts, dtype=float))),
                start=seg.position(np.asarray([t0]))[0], end=seg.position(np.asarray([t1]))[0])
            f, _ = _segment_transfer_pair(
                _transport_sampler(M, kind, piece, _vector_map), sub_steps)
            P = f @ P
            positions.append(np.asarray(piece.end, dtype=float))
            frames.append(P.copy())
    return np.stack(positions), np.stack(frames)
