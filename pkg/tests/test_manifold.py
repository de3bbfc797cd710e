"""Metric/density fields, connection coefficients, curvature."""

import math

import numpy as np
import pytest

from hololab.errors import BadSignature, OutOfDomain, SingularMetric
from hololab.manifold import (ConnectionKind, CoordinateChart, DensityField,
                              MetricField, WeightedManifold,
                              WeightedMetricTensorField, amari_chentsov,
                              christoffel, christoffel_many, conformal_metric_at,
                              covariant_derivative_of_tensor, curvature_at,
                              dphi_at, metric_at, ricci_at, weighted_metric_at)

E = math.e
LC = ConnectionKind.LEVI_CIVITA
W = ConnectionKind.WEIGHTED
DW = ConnectionKind.DUAL_WEIGHTED


def euclidean(phi="0"):
    chart = CoordinateChart(dim=2, coord_names=("x", "y"))
    metric = MetricField.from_expressions(chart, ["1", "1"], signature=(2, 0))
    return WeightedManifold(chart=chart, metric=metric,
                            density=DensityField.from_expression(chart, phi))


def test_metric_at_values(sphere2, borel, tri2):
    assert np.allclose(metric_at(sphere2.manifold, [math.pi / 2, 0.0]), np.eye(2),
                       atol=1e-15)
    assert np.allclose(metric_at(euclidean(), [0.3, -0.8]), np.eye(2))
    assert np.allclose(metric_at(borel.manifold, [1.0, 1.0]),
                       np.diag([1.0, E ** 2]), rtol=1e-15)


def test_out_of_domain(sphere2):
    with pytest.raises(OutOfDomain):
        metric_at(sphere2.manifold, [0.01, 0.0])  # past the pole cutoff


def test_weighted_metric_at(borel, tri3):
    # phi = 0 at the origin: no rescaling of the flat frame
    assert np.allclose(weighted_metric_at(tri3.manifold, np.zeros(3)), np.eye(3))
    got = weighted_metric_at(borel.manifold, [1.0, 1.0])  # phi = 1 there
    assert np.allclose(got, math.exp(-1) * np.diag([1.0, E ** 2]), rtol=1e-14)
    M0 = euclidean()
    assert np.allclose(weighted_metric_at(M0, [0.2, 0.4]),
                       metric_at(M0, [0.2, 0.4]))


def test_conformal_metric_at(tri2):
    M = tri2.manifold  # metric diag(e^x, e^{2x+y}), phi = x+y
    assert np.allclose(conformal_metric_at(M, [0.0, 0.0]), np.eye(2))
    got = conformal_metric_at(M, [1.0, 0.0])
    assert np.allclose(got, math.exp(-2) * np.diag([E, E ** 2]), rtol=1e-14)
    Mc = euclidean("3")  # constant density scales by e^{-2c}
    assert np.allclose(conformal_metric_at(Mc, [0.5, 0.5]),
                       math.exp(-6) * np.eye(2), rtol=1e-14)


def test_dphi_at(sphere2, tri2):
    assert np.allclose(dphi_at(tri2.manifold, [0.3, -0.7]), [1.0, 1.0], rtol=1e-14)
    assert np.allclose(dphi_at(euclidean("5"), [0.1, 0.2]), [0.0, 0.0])
    got = dphi_at(sphere2.manifold, [math.pi / 2, 0.0])  # d cos r = -sin r
    assert np.allclose(got, [-1.0, 0.0], atol=1e-15)


def test_euclidean_christoffels_vanish():
    gamma = christoffel(euclidean(), W, [0.4, 0.9]).gamma
    assert np.abs(gamma).max() == 0.0


def test_torsion_free_all_kinds(borel, sphere2, so11):
    for entry in (borel, sphere2, so11):
        pts = entry.random_points(10, seed=42)
        for kind in (LC, W, DW):
            g = christoffel_many(entry.manifold, kind, pts)
            assert np.abs(g - np.swapaxes(g, 2, 3)).max() < 1e-10


def test_weighted_reduces_to_levi_civita_for_constant_phi():
    chart = CoordinateChart(dim=2, coord_names=("x", "y"))
    metric = MetricField.from_expressions(chart, ["1+x^2", "2+sin(y)"],
                                          signature=(2, 0))
    M = WeightedManifold(chart=chart, metric=metric,
                         density=DensityField.from_expression(chart, "3/4"))
    pts = np.random.default_rng(0).uniform(-1, 1, (10, 2))
    lc = christoffel_many(M, LC, pts)
    assert np.abs(christoffel_many(M, W, pts) - lc).max() < 1e-10
    assert np.abs(christoffel_many(M, DW, pts) - lc).max() < 1e-10


def test_coefficient_level_duality_identity(borel, so11):
    # directional derivative of h(Y,Z) splits into the two dual connections
    for entry in (borel, so11):
        M = entry.manifold
        rng = np.random.default_rng(7)
        pts = entry.random_points(6, seed=8)
        h_field = WeightedMetricTensorField(M)
        for x in pts:
            gw = christoffel_many(M, W, x[None])[0]
            gd = christoffel_many(M, DW, x[None])[0]
            h = h_field.matrices(x[None])[0]
            dh = h_field.partials(x[None])[0]
            X, Y, Z = rng.standard_normal((3, 2))
            lhs = np.einsum('l,ljk,j,k->', X, dh, Y, Z)
            dxY = np.einsum('kij,i,j->k', gw, X, Y)
            dxZ = np.einsum('kij,i,j->k', gd, X, Z)
            rhs = np.einsum('k,kj,j->', dxY, h, Z) + np.einsum('j,jk,k->', Y, h, dxZ)
            assert abs(lhs - rhs) < 1e-6


def test_amari_chentsov_values(tri2):
    D = amari_chentsov(tri2.manifold, np.zeros(2))  # h = I, dphi = (1,1) there
    assert D[0, 0, 0] == pytest.approx(3.0, abs=1e-14)
    assert D[0, 0, 1] == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(D, np.transpose(D, (1, 0, 2)))
    assert np.abs(amari_chentsov(euclidean("2"), [0.1, 0.1])).max() == 0.0


def test_amari_chentsov_is_weighted_derivative_of_pairing(borel):
    M = borel.manifold
    h = WeightedMetricTensorField(M)
    for x in borel.random_points(20, seed=3):
        D = amari_chentsov(M, x)
        nabla_h = covariant_derivative_of_tensor(M, W, h, x)
        assert np.abs(nabla_h - D).max() < 1e-6


def test_covariant_derivative_metric_compatibility(sphere2):
    M = sphere2.manifold

    class GField:
        def matrices(self, pts):
            return M.metric.matrices(pts)

        def partials(self, pts):
            return M.metric.partials(pts)

    for x in sphere2.random_points(5, seed=1):
        T = covariant_derivative_of_tensor(M, LC, GField(), x)
        assert np.abs(T).max() < 1e-8


def test_dual_weighted_derivative_is_minus_density_tensor(borel, tri3):
    for entry in (borel, tri3):
        M = entry.manifold
        h = WeightedMetricTensorField(M)
        for x in entry.random_points(5, seed=9):
            T = covariant_derivative_of_tensor(M, DW, h, x)
            assert np.abs(T + amari_chentsov(M, x)).max() < 1e-6


def test_callable_tensor_field_fallback(borel):
    M = borel.manifold
    x = np.array([0.3, -0.2])
    h = WeightedMetricTensorField(M)

    def h_fn(p):
        return h.matrices(np.atleast_2d(p))[0]

    exact = covariant_derivative_of_tensor(M, W, h, x)
    fd = covariant_derivative_of_tensor(M, W, h_fn, x)
    assert np.abs(exact - fd).max() < 1e-8


def test_curvature_flat_and_golden(tri2, so11):
    assert np.abs(curvature_at(euclidean(), W, [0.1, 0.2])).max() == 0.0
    ric = ricci_at(tri2.manifold, W, np.zeros(2))
    assert np.abs(ric - np.diag([0.0, 1.0])).max() < 1e-6
    ric = ricci_at(so11.manifold, W, np.zeros(2))
    assert np.abs(ric - np.diag([1 / 8, -1 / 24])).max() < 1e-6


def test_curvature_closed_form_off_origin(tri2):
    # Ricci of the weighted connection is (1+e^{x+y})/2 dy^2 on this entry
    for (x, y) in [(0.3, -0.2), (-0.5, 0.1)]:
        ric = ricci_at(tri2.manifold, W, [x, y])
        expected = np.diag([0.0, (1 + math.exp(x + y)) / 2])
        assert np.abs(ric - expected).max() < 1e-9


def test_finite_difference_mode_agrees_with_autodiff(borel):
    chart = borel.manifold.chart

    def g_fn(p):
        return np.diag([1.0, math.exp(2 * p[0] * p[1])])

    M_fd = WeightedManifold(
        chart=chart,
        metric=MetricField.from_callable(chart, g_fn, signature=(2, 0)),
        density=DensityField.from_callable(chart, lambda p: p[0] * p[1]))
    pts = borel.random_points(5, seed=4)
    exact = christoffel_many(borel.manifold, W, pts)
    approx = christoffel_many(M_fd, W, pts)
    assert np.abs(exact - approx).max() < 1e-6
    assert np.abs(dphi_at(M_fd, pts[0]) - dphi_at(borel.manifold, pts[0])).max() < 1e-6
    ric_exact = ricci_at(borel.manifold, W, np.array([0.2, 0.1]))
    ric_approx = ricci_at(M_fd, W, np.array([0.2, 0.1]))
    assert np.abs(ric_exact - ric_approx).max() < 1e-5


def test_singular_metric_detection():
    chart = CoordinateChart(dim=2, coord_names=("x", "y"),
                            domain=((-2, 2), (-2, 2)))
    with pytest.raises(SingularMetric):
        MetricField.from_expressions(chart, ["x", "1"], signature=(2, 0))


def test_signature_validation():
    chart = CoordinateChart(dim=2, coord_names=("x", "y"))
    with pytest.raises(BadSignature):
        MetricField.from_expressions(chart, ["1", "1"], signature=(1, 1))
    m = MetricField.from_expressions(chart, ["1", "-1"], signature=(1, 1))
    assert m.signature == (1, 1)


def test_chart_invariants():
    with pytest.raises(ValueError):
        CoordinateChart(dim=0, coord_names=())
    with pytest.raises(ValueError):
        CoordinateChart(dim=2, coord_names=("x", "y"), periodicity=(0.0, None))
    with pytest.raises(ValueError):
        CoordinateChart(dim=1, coord_names=("x",), domain=((1.0, 1.0),))
