import numpy as np
import pytest

from supremal import gallery
from supremal.calculus import hj_residual
from supremal.grid import GridDomain, SubdomainMask, gradient_at
from supremal.hamiltonian import builtin
from supremal.tensor import rank
from supremal.utilities.errors import InvalidInputError, SingularPointError, UnknownFieldError


def test_catalog_names():
    assert gallery.names() == ["affine", "cone", "complex-exp", "distance-to-set", "one-d-pair"]
    rows = gallery.describe()
    assert [row["name"] for row in rows] == gallery.names()
    assert rows[2]["dims"] == "2x2"


def test_unknown_name():
    with pytest.raises(UnknownFieldError):
        gallery.get("saddle")


def test_affine_identity_gradient(rng):
    field = gallery.get("affine", A=np.eye(2), b=[1.0, -1.0])
    x = rng.normal(size=(20, 2))
    np.testing.assert_array_equal(field.gradient(x), np.broadcast_to(np.eye(2), (20, 2, 2)))
    np.testing.assert_allclose(field.value(x), x + [1.0, -1.0])


def test_complex_exp_rank_and_speed(rng):
    field = gallery.get("complex-exp")
    t = rng.uniform(-1, 1, size=(50, 1))
    diagonal = np.hstack([t, t])
    grads = field.gradient(diagonal)
    np.testing.assert_allclose(np.linalg.det(grads), 0.0, atol=1e-15)
    x = rng.uniform(-1, 1, size=(500, 2))
    np.testing.assert_allclose(np.sum(field.gradient(x) ** 2, axis=(1, 2)), 2.0, atol=1e-14)
    np.testing.assert_allclose(
        np.linalg.det(field.gradient(x)), np.sin(x[:, 0] - x[:, 1]), atol=1e-14
    )


def test_complex_exp_rank_map_on_the_grid(rng):
    h = 0.025
    domain = GridDomain(lower=[-1.0, -1.0], upper=[1.0, 1.0], h=h)
    u = gallery.sample("complex-exp", domain)
    mask = SubdomainMask.interior_of(domain)
    idx = mask.indices()
    points = domain.points_at(idx)
    grads = gradient_at(u, idx, use_analytic=True)
    near = np.abs(points[:, 0] - points[:, 1]) <= h + 1e-12
    assert all(rank(G, tol=h) == 1 for G in grads[near])
    far = np.flatnonzero(np.abs(points[:, 0] - points[:, 1]) > 0.5)
    for k in rng.choice(far, size=50, replace=False):
        assert rank(grads[k], tol=h) == 2


def test_cone_signals_its_singular_point():
    field = gallery.get("cone")
    with pytest.raises(SingularPointError):
        field.gradient(np.zeros((1, 2)))
    with pytest.raises(SingularPointError):
        field.hessian(np.array([[0.5, 0.5], [0.0, 0.0]]))
    assert field.value(np.zeros(2)) == 0.0


def test_cone_solves_the_eikonal_equation_off_the_origin():
    domain = GridDomain(lower=[-1.0, -1.0], upper=[1.0, 1.0], h=0.02)
    mask = SubdomainMask.from_predicate(domain, lambda x: np.linalg.norm(x, axis=-1) >= 0.1)
    u = gallery.sample("cone", domain)
    assert hj_residual(builtin("euclidean-norm", 1, 2), u, mask, 1.0).sup <= 1e-10


def test_distance_to_set_follows_the_nearest_point():
    field = gallery.get("distance-to-set")
    x = np.array([[-0.5, 0.3], [0.9, 0.0]])
    np.testing.assert_allclose(field.value(x), [0.3, 0.4])
    np.testing.assert_allclose(field.gradient(x)[:, 0], [[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(SingularPointError):
        field.gradient(np.array([[0.5, 0.0]]))


def test_sample_rejects_wrong_dimension():
    domain = GridDomain(lower=[0.0], upper=[1.0], h=0.1)
    with pytest.raises(InvalidInputError):
        gallery.sample("complex-exp", domain)


def _fd_gradient_errors(name, lower, upper, points, hs, **params):
    errors = []
    for h in hs:
        domain = GridDomain(lower=lower, upper=upper, h=h)
        u = gallery.sample(name, domain, **params)
        idx = np.array([domain.index_of(p) for p in points])
        exact = gradient_at(u, idx, use_analytic=True)
        errors.append(np.max(np.abs(gradient_at(u, idx) - exact)))
    return np.asarray(errors)


@pytest.mark.parametrize(
    "name,points",
    [
        ("cone", [[0.6, 0.3], [-0.5, 0.5], [0.2, -0.8], [-0.7, -0.4]]),
        ("complex-exp", [[0.6, 0.3], [-0.5, 0.5], [0.2, -0.8], [0.0, 0.0]]),
        ("distance-to-set", [[-0.5, 0.5], [0.6, -0.4], [-0.8, -0.3], [0.3, 0.6]]),
    ],
)
def test_finite_differences_converge_at_second_order(name, points):
    hs = [0.1, 0.05, 0.025]
    errors = _fd_gradient_errors(name, [-1.0, -1.0], [1.0, 1.0], points, hs)
    order = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    assert order >= 1.9


def test_finite_differences_are_exact_on_polynomials():
    hs = [0.1, 0.05]
    affine = _fd_gradient_errors("affine", [-1.0, -1.0], [1.0, 1.0], [[0.3, 0.4]], hs)
    pair = _fd_gradient_errors("one-d-pair", [-1.0], [1.0], [[0.3], [-0.6]], hs)
    assert affine.max() <= 1e-12
    assert pair.max() <= 1e-12
