import numpy as np
import pytest

from supremal import gallery
from supremal.calculus import (
    ResidualReport,
    derivatives_at_points,
    hj_residual,
    infty_laplacian_scalar,
    infty_laplacian_system,
    laplacian,
    normal_part,
    normal_residual,
    observed_order,
    perp_projections,
    residual_at_points,
    residual_sweep,
    scalar_part,
    system_part,
    tangential_part,
    tangential_residual,
)
from supremal.grid import GridDomain, GridField, SubdomainMask
from supremal.hamiltonian import builtin
from supremal.tensor import range_perp_projection
from supremal.utilities.constants import RANK_FLAG_FACTOR
from supremal.utilities.errors import InvalidInputError, ParameterError


@pytest.fixture
def square():
    return GridDomain(lower=[-2.0, -2.0], upper=[2.0, 2.0], h=0.1)


def _random_points(rng, count, low=-1.0, high=1.0, min_radius=None):
    pts = rng.uniform(low, high, size=(4 * count, 2))
    if min_radius is not None:
        pts = pts[np.linalg.norm(pts, axis=-1) >= min_radius]
    return pts[:count]


def test_hj_residual_of_unit_affine_map(unit_square):
    domain, mask = unit_square
    u = gallery.sample("affine", domain)
    report = hj_residual(builtin("euclidean-norm", 1, 2), u, mask, 1.0)
    assert report.sup <= 1e-12
    assert report.h == domain.h
    assert report.points == mask.count


def test_hj_residual_of_constant_with_zero_level(unit_square):
    domain, mask = unit_square
    u = GridField(domain=domain, values=np.full(domain.shape, 3.0))
    assert hj_residual(builtin("euclidean-norm", 1, 2), u, mask, 0.0).sup == 0.0


def test_hj_residual_negative_control_on_complex_exp(centered_square):
    domain, mask = centered_square
    u = gallery.sample("complex-exp", domain)
    H = builtin("euclidean-norm", 2, 2)
    report = hj_residual(H, u, mask, 1.0)
    assert report.sup == pytest.approx(np.sqrt(2) - 1, abs=1e-12)
    assert hj_residual(H, u, mask, np.sqrt(2)).sup <= 1e-12


def test_hj_residual_rejects_negative_level(unit_square):
    domain, mask = unit_square
    u = gallery.sample("affine", domain)
    with pytest.raises(ParameterError):
        hj_residual(builtin("euclidean-norm", 1, 2), u, mask, -1.0)


def test_scalar_infty_laplacian_by_hand(square):
    u = GridField.from_function(square, lambda x: x[..., 0] ** 2 - x[..., 1] ** 2)
    assert infty_laplacian_scalar(u, [1.0, 1.0]) == pytest.approx(0.0, abs=1e-9)
    assert infty_laplacian_scalar(u, [1.0, 0.0]) == pytest.approx(8.0, abs=1e-9)


def test_affine_maps_have_zero_residuals(square, rng):
    A = rng.normal(size=(3, 2))
    u = gallery.get("affine", A=A).sample(square)
    x = [0.3, -0.7]
    for analytic in (True, False):
        for residual in (infty_laplacian_system, tangential_residual, normal_residual):
            np.testing.assert_allclose(residual(u, x, use_analytic=analytic), 0, atol=1e-10)


def test_cone_is_infty_harmonic_off_the_origin(centered_square):
    domain, _ = centered_square
    u = gallery.sample("cone", domain)
    assert infty_laplacian_scalar(u, [0.5, 0.3]) == pytest.approx(0.0, abs=1e-14)
    assert abs(infty_laplacian_scalar(u, [0.5, 0.3], use_analytic=False)) < 0.1


def test_one_d_pair_reduces_to_speed_times_curvature():
    domain = GridDomain(lower=[-2.0], upper=[2.0], h=0.01)
    u = gallery.sample("one-d-pair", domain)
    np.testing.assert_allclose(infty_laplacian_system(u, [1.0]), [10.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(
        infty_laplacian_system(u, [1.0], use_analytic=False), [10.0, 0.0], atol=1e-6
    )
    for t in (-1.5, 0.0, 0.4):
        np.testing.assert_allclose(
            infty_laplacian_system(u, [t]), [2 * (4 * t**2 + 1), 0.0], atol=1e-12
        )


def test_complex_exp_solves_the_system_with_analytic_derivatives(centered_square, rng):
    domain, _ = centered_square
    u = gallery.sample("complex-exp", domain)
    report = residual_at_points(u, _random_points(rng, 100))
    assert report.sup <= 1e-10


def test_complex_exp_sweep_flags_points_near_the_diagonal(centered_square):
    domain, mask = centered_square
    u = gallery.sample("complex-exp", domain)
    report, residual_map = residual_sweep(u, mask, rank_tol=domain.h, use_analytic=False)
    assert 0 < report.flagged < report.points
    # central differences scale both columns of Du by sin(h)/h exactly
    d = residual_map.points[:, 0] - residual_map.points[:, 1]
    smallest = np.sin(domain.h) / domain.h * np.sqrt(1 - np.abs(np.cos(d)))
    threshold = RANK_FLAG_FACTOR * domain.h
    assert np.all(smallest[residual_map.flagged] <= threshold + 1e-9)
    assert np.all(smallest[~residual_map.flagged] >= threshold - 1e-9)
    # the Laplacian of u is -u, which lies in range(Du), so flagging changes nothing
    assert report.sup <= 1e-9
    assert report.sup_unflagged <= 1e-9


@pytest.mark.parametrize(
    "name,params,min_radius",
    [
        ("affine", {"A": [[1.0, 2.0], [0.5, -1.0]]}, None),
        ("cone", {}, 0.2),
        ("complex-exp", {}, None),
        ("distance-to-set", {"points": [[3.0, 0.0], [-3.0, 0.5]]}, None),
    ],
)
def test_system_splits_into_tangential_and_normal_parts(name, params, min_radius, rng):
    field = gallery.get(name, **params)
    x = _random_points(rng, 1000, min_radius=min_radius)
    grads, hess = field.gradient(x), field.hessian(x)
    whole = system_part(grads, hess)
    tangential = tangential_part(grads, hess)
    normal = normal_part(grads, hess)
    np.testing.assert_allclose(whole, tangential + normal, rtol=1e-12, atol=1e-12)
    scale = np.linalg.norm(tangential, axis=-1) * np.linalg.norm(normal, axis=-1)
    inner = np.abs(np.sum(tangential * normal, axis=-1))
    assert np.all(inner <= 1e-10 * np.maximum(scale, 1.0))


def test_one_d_pair_split(rng):
    field = gallery.get("one-d-pair")
    t = rng.uniform(-2, 2, size=(1000, 1))
    grads, hess = field.gradient(t), field.hessian(t)
    np.testing.assert_allclose(
        system_part(grads, hess),
        tangential_part(grads, hess) + normal_part(grads, hess),
        rtol=1e-12,
        atol=1e-12,
    )


def test_scalar_fields_have_no_normal_part(centered_square, rng):
    domain, _ = centered_square
    u = gallery.sample("cone", domain)
    x = _random_points(rng, 200, min_radius=0.2)
    grads, hess = derivatives_at_points(u, x)
    np.testing.assert_allclose(normal_part(grads, hess), 0.0, atol=1e-14)
    np.testing.assert_allclose(
        system_part(grads, hess)[:, 0], scalar_part(grads, hess), atol=1e-12
    )


def test_laplacian_of_quadratic(square):
    u = GridField.from_function(
        square,
        lambda x: np.stack([x[..., 0] ** 2 + 3 * x[..., 1] ** 2, x[..., 0] * x[..., 1]], -1),
    )
    np.testing.assert_allclose(laplacian(u, [0.5, 0.5]), [8.0, 0.0], atol=1e-9)


def test_perp_projections_match_single_matrix_version(rng):
    grads = rng.normal(size=(50, 3, 2))
    grads[:5, :, 1] = 0.0
    perp, margin = perp_projections(grads)
    for G, P in zip(grads, perp):
        np.testing.assert_allclose(P, range_perp_projection(G), atol=1e-12)
    assert np.all(np.isfinite(margin[5:]))


def test_perp_projection_margin_flags_near_rank_change():
    G = np.array([[[1.0, 0.0], [0.0, 5e-9]]])
    _, margin = perp_projections(G, rank_tol=1e-9)
    assert margin[0] == pytest.approx(5.0)
    _, margin = perp_projections(np.zeros((1, 2, 2)))
    assert margin[0] == np.inf
    with pytest.raises(ParameterError):
        perp_projections(G, rank_tol=-1.0)


def test_sup_residual_of_cone_converges_at_second_order():
    points = [[0.6, 0.3], [0.5, 0.5], [-0.4, 0.7], [0.8, -0.2], [0.3, -0.6]]
    hs = [0.1, 0.05, 0.025]
    sups = []
    for h in hs:
        domain = GridDomain(lower=[-1.0, -1.0], upper=[1.0, 1.0], h=h)
        u = gallery.sample("cone", domain)
        sups.append(residual_at_points(u, points, kind="scalar", use_analytic=False).sup)
    assert observed_order(hs, sups) >= 1.8


def test_observed_order_needs_two_positive_samples():
    assert observed_order([0.1, 0.05], [4e-2, 1e-2]) == pytest.approx(2.0)
    assert observed_order([0.1], [1e-2]) is None
    assert observed_order([0.1, 0.05], [0.0, 0.0]) is None


def test_sweep_is_independent_of_workers():
    domain = GridDomain(lower=[-1.0, -1.0], upper=[1.0, 1.0], h=0.01)
    mask = SubdomainMask.from_predicate(domain, lambda x: np.linalg.norm(x, axis=-1) > 0.3)
    u = gallery.sample("cone", domain)
    serial, _ = residual_sweep(u, mask, kind="scalar", use_analytic=False)
    threaded, _ = residual_sweep(u, mask, kind="scalar", use_analytic=False, workers=4)
    assert serial == threaded


def test_report_merge_is_a_max(rng):
    domain = GridDomain(lower=[-1.0, -1.0], upper=[1.0, 1.0], h=0.05)
    u = gallery.sample("cone", domain)
    a = residual_at_points(u, [[0.5, 0.5]], kind="scalar", use_analytic=False)
    b = residual_at_points(u, [[0.2, 0.1]], kind="scalar", use_analytic=False)
    c = residual_at_points(u, [[-0.7, 0.1]], kind="scalar", use_analytic=False)
    left, right = a.merge(b).merge(c), a.merge(b.merge(c))
    assert left == right
    assert left.sup == max(a.sup, b.sup, c.sup)
    assert left.points == 3


def test_residual_map_csv_header(centered_square):
    domain, _ = centered_square
    mask = SubdomainMask.box(domain, [0.2, 0.2], [0.3, 0.3])
    _, residual_map = residual_sweep(gallery.sample("cone", domain), mask, kind="scalar")
    lines = residual_map.to_csv().splitlines()
    assert lines[0] == "x1,x2,residual,flagged"
    assert len(lines) == 1 + mask.count


def test_scalar_kind_rejects_systems(centered_square):
    domain, _ = centered_square
    u = gallery.sample("complex-exp", domain)
    with pytest.raises(InvalidInputError):
        infty_laplacian_scalar(u, [0.1, 0.2])


def test_report_is_nonnegative():
    with pytest.raises(ValueError):
        ResidualReport(kind="hj", sup=-1.0, worst_point=[0.0], h=0.1, points=1)
