"""Charts, metric and density fields, connections and curvature.

A weighted manifold is a triple (chart, metric g, density phi).  Three
torsion-free connections live on it:

* ``LEVI_CIVITA``   -- the metric connection of g,
* ``WEIGHTED``      -- Gamma^k_ij - (d_i phi) delta^k_j - (d_j phi) delta^k_i,
* ``DUAL_WEIGHTED`` -- Gamma^k_ij + g_ij (grad phi)^k,

the last two being dual to each other with respect to h = e^{-phi} g.

Fields carry their own derivative machinery: expression-backed fields
differentiate exactly through dual numbers, callable-backed fields fall
back to central differences (step 1e-5 for first derivatives, nested
3-point stencil with step 1e-4 for second derivatives).  Everything is
evaluated in batch over (m, n) point arrays so path integration stays
vectorized.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .errors import BadSignature, OutOfDomain, SingularMetric, UnboundVariable

H_FIRST = 1e-5   # central-difference step for first derivatives
H_SECOND = 1e-4  # step for the nested second-derivative stencil
DET_FLOOR = 1e-10
SYMMETRY_TOL = 1e-12


class ConnectionKind(enum.Enum):
    LEVI_CIVITA = "levi_civita"
    WEIGHTED = "weighted"
    DUAL_WEIGHTED = "dual_weighted"


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoordinateChart:
    """A single coordinate chart: names, open domain box, optional periods."""

    dim: int
    coord_names: tuple
    periodicity: tuple = None  # per-coordinate period or None
    domain: tuple = None       # per-coordinate (lo, hi), open; may be +-inf

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("chart dimension must be >= 1")
        if len(self.coord_names) != self.dim:
            raise ValueError("coord_names length must equal dim")
        if len(set(self.coord_names)) != self.dim:
            raise ValueError("coordinate names must be distinct")
        per = self.periodicity if self.periodicity is not None else (None,) * self.dim
        dom = self.domain if self.domain is not None else ((-math.inf, math.inf),) * self.dim
        if len(per) != self.dim or len(dom) != self.dim:
            raise ValueError("periodicity/domain length must equal dim")
        for p in per:
            if p is not None and not p > 0:
                raise ValueError("periods must be positive")
        for lo, hi in dom:
            if not lo < hi:
                raise ValueError("domain intervals must be nonempty")
        object.__setattr__(self, "periodicity", tuple(per))
        object.__setattr__(self, "domain", tuple((float(lo), float(hi)) for lo, hi in dom))

    def contains(self, pts) -> np.ndarray:
        """Vectorized open-interval membership test for an (m, n) array."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = np.ones(pts.shape[0], dtype=bool)
        for i, (lo, hi) in enumerate(self.domain):
            ok &= (pts[:, i] > lo) & (pts[:, i] < hi)
        return ok

    def require_inside(self, pts):
        pts2 = np.atleast_2d(np.asarray(pts, dtype=float))
        ok = self.contains(pts2)
        if not ok.all():
            bad = pts2[~ok][0]
            raise OutOfDomain(tuple(bad))

    def env(self, pts) -> dict:
        """Bind coordinate names to the columns of an (m, n) point array."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return {name: pts[:, i] for i, name in enumerate(self.coord_names)}

    def sample_box(self, width=2.0):
        """A finite box inside the domain, used for validation grids.

        Unbounded sides are clamped to +-width/2 around 0 (or just inside a
        half-bounded edge).
        """
        box = []
        for lo, hi in self.domain:
            if math.isfinite(lo) and math.isfinite(hi):
                pad = 0.05 * (hi - lo)
                box.append((lo + pad, hi - pad))
            elif math.isfinite(lo):
                box.append((lo + 0.1, lo + 0.1 + width))
            elif math.isfinite(hi):
                box.append((hi - 0.1 - width, hi - 0.1))
            else:
                box.append((-width / 2, width / 2))
        return tuple(box)

    def wrap_difference(self, a, b):
        """Coordinate difference a - b reduced modulo declared periods."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        out = d.copy()
        for i, p in enumerate(self.periodicity):
            if p is not None:
                out[i] = (d[i] + p / 2.0) % p - p / 2.0
        return out


def grid_points(box, per_axis=3):
    """Lattice of per_axis**n points over a box (validation sampling)."""
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in box]
    return np.array(list(itertools.product(*axes)))


# ---------------------------------------------------------------------------
# Scalar fields (one matrix entry, or the density)
# ---------------------------------------------------------------------------

class ExprScalarField:
    """Scalar field backed by an expression AST; derivatives are exact."""

    mode = "autodiff"

    def __init__(self, expression, chart):
        if isinstance(expression, str):
            expression = ex.parse(expression)
        unknown = ex.variables(expression) - set(chart.coord_names)
        if unknown:
            raise UnboundVariable(sorted(unknown)[0])
        self.expression = expression
        self.chart = chart

    def values(self, pts):
        env = self.chart.env(pts)
        out = ex.eval_expr(self.expression, env)
        return np.broadcast_to(np.asarray(out, dtype=float),
                               (np.atleast_2d(pts).shape[0],)).copy()

    def derivatives(self, pts, i):
        env = self.chart.env(pts)
        _, d = ex.eval_dual(self.expression, env, self.chart.coord_names[i])
        return np.broadcast_to(np.asarray(d, dtype=float),
                               (np.atleast_2d(pts).shape[0],)).copy()

    def second_derivatives(self, pts, i, j):
        env = self.chart.env(pts)
        *_, d12 = ex.eval_dual2(self.expression, env,
                                self.chart.coord_names[i], self.chart.coord_names[j])
        return np.broadcast_to(np.asarray(d12, dtype=float),
                               (np.atleast_2d(pts).shape[0],)).copy()


class CallableScalarField:
    """Scalar field backed by a plain callable; derivatives by central
    differences (h=1e-5) and a nested 3-point stencil (h=1e-4)."""

    mode = "finite_difference"

    def __init__(self, fn, chart, h_first=H_FIRST, h_second=H_SECOND):
        self.fn = fn
        self.chart = chart
        self.h1 = h_first
        self.h2 = h_second

    def values(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.array([float(self.fn(p)) for p in pts])

    def derivatives(self, pts, i):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        step = np.zeros(pts.shape[1])
        step[i] = self.h1
        return (self.values(pts + step) - self.values(pts - step)) / (2 * self.h1)

    def second_derivatives(self, pts, i, j):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        ei = np.zeros(pts.shape[1]); ei[i] = self.h2
        ej = np.zeros(pts.shape[1]); ej[j] = self.h2
        if i == j:
            return (self.values(pts + ei) - 2 * self.values(pts) + self.values(pts - ei)) / self.h2**2
        return (self.values(pts + ei + ej) - self.values(pts + ei - ej)
                - self.values(pts - ei + ej) + self.values(pts - ei - ej)) / (4 * self.h2**2)


# ---------------------------------------------------------------------------
# Metric and density fields
# ---------------------------------------------------------------------------

class MetricField:
    """Symmetric bilinear field with declared signature (p, q)."""

    def __init__(self, chart, entry_fields, signature, validate=True, sample_grid=None):
        n = chart.dim
        p, q = signature
        if p < 0 or q < 0 or p + q != n:
            raise BadSignature(f"signature {signature} incompatible with dimension {n}")
        self.chart = chart
        self.entries = entry_fields  # n x n nested list of scalar fields (symmetric)
        self.signature = (p, q)
        self.mode = entry_fields[0][0].mode
        if validate:
            self.validate(sample_grid)

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_expressions(cls, chart, entries, signature, validate=True, sample_grid=None):
        """entries: n x n nested sequence of expression strings / ASTs, or a
        length-n sequence for a diagonal metric."""
        n = chart.dim
        if len(entries) == n and not isinstance(entries[0], (list, tuple)):
            full = [["0"] * n for _ in range(n)]
            for i in range(n):
                full[i][i] = entries[i]
            entries = full
        fields = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                f = ExprScalarField(entries[i][j], chart)
                fields[i][j] = f
                fields[j][i] = f
        return cls(chart, fields, signature, validate=validate, sample_grid=sample_grid)

    @classmethod
    def from_callable(cls, chart, fn, signature, validate=True, sample_grid=None):
        """fn: point -> (n, n) symmetric matrix; finite-difference mode."""
        n = chart.dim
        if validate:
            probe = sample_grid if sample_grid is not None else grid_points(
                chart.sample_box())
            for p in np.atleast_2d(probe)[:3]:
                raw = np.asarray(fn(p), dtype=float)
                if np.abs(raw - raw.T).max() > SYMMETRY_TOL:
                    raise ValueError(f"metric callable not symmetric at {tuple(p)}")
        fields = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                entry = CallableScalarField(
                    (lambda p, a=i, b=j: np.asarray(fn(p), dtype=float)[a, b]), chart)
                fields[i][j] = entry
                fields[j][i] = entry
        return cls(chart, fields, signature, validate=validate, sample_grid=sample_grid)

    # -- evaluation --------------------------------------------------------

    def matrices(self, pts):
        """(m, n, n) metric values; symmetry is structural."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        m, n = pts.shape[0], self.chart.dim
        g = np.empty((m, n, n))
        for i in range(n):
            for j in range(i, n):
                v = self.entries[i][j].values(pts)
                g[:, i, j] = v
                g[:, j, i] = v
        return g

    def partials(self, pts):
        """(m, n, n, n) array of d_l g_ij, index order [l, i, j]."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        m, n = pts.shape[0], self.chart.dim
        dg = np.empty((m, n, n, n))
        for l in range(n):
            for i in range(n):
                for j in range(i, n):
                    v = self.entries[i][j].derivatives(pts, l)
                    dg[:, l, i, j] = v
                    dg[:, l, j, i] = v
        return dg

    def second_partials(self, pts):
        """(m, n, n, n, n) array of d_a d_b g_ij, index order [a, b, i, j]."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        m, n = pts.shape[0], self.chart.dim
        d2g = np.empty((m, n, n, n, n))
        for a in range(n):
            for b in range(a, n):
                for i in range(n):
                    for j in range(i, n):
                        v = self.entries[i][j].second_derivatives(pts, a, b)
                        d2g[:, a, b, i, j] = v
                        d2g[:, a, b, j, i] = v
                        d2g[:, b, a, i, j] = v
                        d2g[:, b, a, j, i] = v
        return d2g

    # -- validation --------------------------------------------------------

    def validate(self, sample_grid=None):
        pts = sample_grid if sample_grid is not None else grid_points(self.chart.sample_box())
        g = self.matrices(pts)
        asym = np.abs(g - np.swapaxes(g, 1, 2)).max()
        if asym > SYMMETRY_TOL:
            raise ValueError(f"metric not symmetric: max asymmetry {asym:.3e}")
        dets = np.linalg.det(g)
        if np.abs(dets).min() <= DET_FLOOR:
            k = int(np.abs(dets).argmin())
            raise SingularMetric(tuple(np.atleast_2d(pts)[k]), dets[k])
        eigs = np.linalg.eigvalsh(g)
        pos = (eigs > 0).sum(axis=1)
        p, q = self.signature
        if not ((pos == p).all()):
            k = int(np.argmax(pos != p))
            raise BadSignature(
                f"declared signature {self.signature} but found {int(pos[k])} positive "
                f"eigenvalues at {tuple(np.atleast_2d(pts)[k])}")


class DensityField:
    """The weight function phi of the triple (M, g, phi)."""

    def __init__(self, scalar_field):
        self.field = scalar_field
        self.chart = scalar_field.chart
        self.mode = scalar_field.mode

    @classmethod
    def from_expression(cls, chart, expression):
        return cls(ExprScalarField(expression, chart))

    @classmethod
    def from_callable(cls, chart, fn):
        return cls(CallableScalarField(fn, chart))

    @classmethod
    def zero(cls, chart):
        return cls(ExprScalarField(ex.Num(0.0), chart))

    def values(self, pts):
        return self.field.values(pts)

    def gradients(self, pts):
        """(m, n) rows of coordinate partials d_i phi."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = self.chart.dim
        return np.stack([self.field.derivatives(pts, i) for i in range(n)], axis=1)

    def hessians(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = self.chart.dim
        out = np.empty((pts.shape[0], n, n))
        for i in range(n):
            for j in range(i, n):
                v = self.field.second_derivatives(pts, i, j)
                out[:, i, j] = v
                out[:, j, i] = v
        return out


@dataclass(frozen=True)
class WeightedManifold:
    chart: CoordinateChart
    metric: MetricField
    density: DensityField
    name: str = ""

    def __post_init__(self):
        if self.metric.chart is not self.chart or self.density.chart is not self.chart:
            raise ValueError("metric and density must share the manifold's chart")

    @property
    def dim(self):
        return self.chart.dim


@dataclass(frozen=True)
class ConnectionCoefficients:
    """Gamma^k_ij at a point; gamma[k, i, j], symmetric in (i, j)."""

    gamma: np.ndarray
    point: tuple
    kind: ConnectionKind


# ---------------------------------------------------------------------------
# Pointwise operations
# ---------------------------------------------------------------------------

def _one_point(x):
    return np.atleast_2d(np.asarray(x, dtype=float))


def metric_at(M: WeightedManifold, x) -> np.ndarray:
    M.chart.require_inside(x)
    return M.metric.matrices(_one_point(x))[0]


def weighted_metric_at(M: WeightedManifold, x) -> np.ndarray:
    """h = e^{-phi} g, the metric the weighted/dual pair is dual under."""
    M.chart.require_inside(x)
    pts = _one_point(x)
    return math.exp(-M.density.values(pts)[0]) * M.metric.matrices(pts)[0]


def conformal_metric_at(M: WeightedManifold, x) -> np.ndarray:
    """e^{-2 phi} g, the metric of the dual triple."""
    M.chart.require_inside(x)
    pts = _one_point(x)
    return math.exp(-2.0 * M.density.values(pts)[0]) * M.metric.matrices(pts)[0]


def dphi_at(M: WeightedManifold, x) -> np.ndarray:
    M.chart.require_inside(x)
    return M.density.gradients(_one_point(x))[0]


def christoffel_many(M: WeightedManifold, kind: ConnectionKind, pts) -> np.ndarray:
    """(m, n, n, n) connection coefficients gamma[., k, i, j] at each point."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    g = M.metric.matrices(pts)
    dets = np.linalg.det(g)
    if np.abs(dets).min() <= DET_FLOOR:
        k = int(np.abs(dets).argmin())
        raise SingularMetric(tuple(pts[k]), dets[k])
    ginv = np.linalg.inv(g)
    dg = M.metric.partials(pts)  # dg[m, l, i, j] = d_l g_ij
    # Levi-Civita: 1/2 g^{ka} (d_i g_aj + d_j g_ai - d_a g_ij)
    c = (np.einsum('miaj->maij', dg) + np.einsum('mjai->maij', dg) - dg)
    gamma = 0.5 * np.einsum('mka,maij->mkij', ginv, c)
    if kind == ConnectionKind.LEVI_CIVITA:
        return gamma
    grad_phi = M.density.gradients(pts)
    eye = np.eye(M.dim)
    if kind == ConnectionKind.WEIGHTED:
        corr = (np.einsum('mi,kj->mkij', grad_phi, eye)
                + np.einsum('mj,ki->mkij', grad_phi, eye))
        return gamma - corr
    if kind == ConnectionKind.DUAL_WEIGHTED:
        grad_up = np.einsum('mka,ma->mk', ginv, grad_phi)
        return gamma + np.einsum('mij,mk->mkij', g, grad_up)
    raise ValueError(f"unknown connection kind {kind!r}")


def christoffel(M: WeightedManifold, kind: ConnectionKind, x) -> ConnectionCoefficients:
    M.chart.require_inside(x)
    gamma = christoffel_many(M, kind, _one_point(x))[0]
    return ConnectionCoefficients(gamma=gamma, point=tuple(np.asarray(x, dtype=float)),
                                  kind=kind)


def christoffel_derivative_many(M: WeightedManifold, kind: ConnectionKind, pts) -> np.ndarray:
    """(m, n, n, n, n) array of d_l Gamma^k_ij, index order [l, k, i, j].

    Assembled from exact first/second field derivatives (chain rule through
    the inverse metric), so curvature inherits the field's derivative mode.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    g = M.metric.matrices(pts)
    ginv = np.linalg.inv(g)
    dg = M.metric.partials(pts)          # [l, i, j]
    d2g = M.metric.second_partials(pts)  # [a, b, i, j]
    # c_{aij} = d_i g_aj + d_j g_ai - d_a g_ij, and its l-derivative
    c = np.einsum('miaj->maij', dg) + np.einsum('mjai->maij', dg) - dg
    dc = (np.einsum('mliaj->mlaij', d2g) + np.einsum('mljai->mlaij', d2g) - d2g)
    dginv = -np.einsum('mka,mlab,mbn->mlkn', ginv, dg, ginv)  # [l, k, n] = d_l g^{kn}
    dgamma = 0.5 * (np.einsum('mlka,maij->mlkij', dginv, c)
                    + np.einsum('mka,mlaij->mlkij', ginv, dc))
    if kind == ConnectionKind.LEVI_CIVITA:
        return dgamma
    hess = M.density.hessians(pts)
    n = M.dim
    eye = np.eye(n)
    if kind == ConnectionKind.WEIGHTED:
        corr = (np.einsum('mli,kj->mlkij', hess, eye)
                + np.einsum('mlj,ki->mlkij', hess, eye))
        return dgamma - corr
    if kind == ConnectionKind.DUAL_WEIGHTED:
        grad_phi = M.density.gradients(pts)
        grad_up = np.einsum('mka,ma->mk', ginv, grad_phi)
        dgrad_up = (np.einsum('mlka,ma->mlk', dginv, grad_phi)
                    + np.einsum('mka,mla->mlk', ginv, hess))
        extra = (np.einsum('mlij,mk->mlkij', dg, grad_up)
                 + np.einsum('mij,mlk->mlkij', g, dgrad_up))
        return dgamma + extra
    raise ValueError(f"unknown connection kind {kind!r}")


def amari_chentsov(M: WeightedManifold, x) -> np.ndarray:
    """Totally symmetric 3-tensor d phi (.) h(.,.) symmetrized, h = e^{-phi} g."""
    M.chart.require_inside(x)
    pts = _one_point(x)
    h = math.exp(-M.density.values(pts)[0]) * M.metric.matrices(pts)[0]
    dphi = M.density.gradients(pts)[0]
    return (np.einsum('i,jk->ijk', dphi, h)
            + np.einsum('j,ki->ijk', dphi, h)
            + np.einsum('k,ij->ijk', dphi, h))


class WeightedMetricTensorField:
    """The bilinear field h = e^{-phi} g with exact partials; feeds the
    covariant-derivative operation."""

    def __init__(self, M: WeightedManifold):
        self.M = M

    def matrices(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        w = np.exp(-self.M.density.values(pts))
        return w[:, None, None] * self.M.metric.matrices(pts)

    def partials(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        w = np.exp(-self.M.density.values(pts))
        g = self.M.metric.matrices(pts)
        dg = self.M.metric.partials(pts)
        dphi = self.M.density.gradients(pts)
        return w[:, None, None, None] * (dg - np.einsum('ml,mij->mlij', dphi, g))


class _CallableTensorField:
    def __init__(self, fn, chart, h=H_FIRST):
        self.fn = fn
        self.chart = chart
        self.h = h

    def matrices(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.stack([np.asarray(self.fn(p), dtype=float) for p in pts])

    def partials(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        n = pts.shape[1]
        cols = []
        for l in range(n):
            step = np.zeros(n)
            step[l] = self.h
            cols.append((self.matrices(pts + step) - self.matrices(pts - step)) / (2 * self.h))
        return np.stack(cols, axis=1)


def covariant_derivative_of_tensor(M: WeightedManifold, kind: ConnectionKind, T, x) -> np.ndarray:
    """(nabla_i T)_{jk} = d_i T_jk - Gamma^m_ij T_mk - Gamma^m_ik T_jm.

    T may be a tensor-field object exposing matrices()/partials() or a plain
    callable point -> (n, n), in which case partials use the metric's
    central-difference step.
    """
    M.chart.require_inside(x)
    if callable(T) and not hasattr(T, "matrices"):
        T = _CallableTensorField(T, M.chart)
    pts = _one_point(x)
    gamma = christoffel_many(M, kind, pts)[0]
    tval = T.matrices(pts)[0]
    dt = T.partials(pts)[0]
    return (dt - np.einsum('mij,mk->ijk', gamma, tval)
            - np.einsum('mik,jm->ijk', gamma, tval))


def curvature_at(M: WeightedManifold, kind: ConnectionKind, x) -> np.ndarray:
    """R^l_{ijk} = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik."""
    M.chart.require_inside(x)
    pts = _one_point(x)
    gamma = christoffel_many(M, kind, pts)[0]
    dgamma = christoffel_derivative_many(M, kind, pts)[0]  # [l, k, i, j]
    first = np.einsum('iljk->lijk', dgamma)
    second = np.einsum('jlik->lijk', dgamma)
    quad1 = np.einsum('lim,mjk->lijk', gamma, gamma)
    quad2 = np.einsum('ljm,mik->lijk', gamma, gamma)
    return first - second + quad1 - quad2


def ricci_at(M: WeightedManifold, kind: ConnectionKind, x) -> np.ndarray:
    """Ric(j, k) = R^i_{ijk}: trace of X -> R(X, Y) Z over the first slot."""
    R = curvature_at(M, kind, x)
    return np.einsum('iijk->jk', R)


def restrict_manifold(M: WeightedManifold, free_indices: Sequence[int], fixed_values: dict) -> WeightedManifold:
    """Coordinate slice {x_j = c_j for j not free} as its own manifold.

    Only expression-backed manifolds can be sliced (the substitution happens
    on the ASTs).  The induced metric is the free-by-free block; the density
    is restricted.  Validation is skipped: the caller samples the slice.
    """
    free = list(free_indices)
    names = [M.chart.coord_names[i] for i in free]
    bindings = {M.chart.coord_names[j]: fixed_values[j]
                for j in range(M.dim) if j not in free}
    sub_chart = CoordinateChart(
        dim=len(free),
        coord_names=tuple(names),
        periodicity=tuple(M.chart.periodicity[i] for i in free),
        domain=tuple(M.chart.domain[i] for i in free),
    )
    entries = [[None] * len(free) for _ in free]
    for a, i in enumerate(free):
        for b, j in enumerate(free):
            f = M.metric.entries[i][j]
            if not isinstance(f, ExprScalarField):
                raise TypeError("only expression-backed manifolds can be sliced")
            entries[a][b] = ex.substitute(f.expression, bindings)
    if not isinstance(M.density.field, ExprScalarField):
        raise TypeError("only expression-backed manifolds can be sliced")
    p, q = M.metric.signature
    sub_metric = MetricField.from_expressions(
        sub_chart, entries, signature=(min(p, len(free)), len(free) - min(p, len(free))),
        validate=False)
    sub_density = DensityField.from_expression(
        sub_chart, ex.substitute(M.density.field.expression, bindings))
    return WeightedManifold(chart=sub_chart, metric=sub_metric, density=sub_density,
                            name=f"{M.name}|slice" if M.name else "slice")
