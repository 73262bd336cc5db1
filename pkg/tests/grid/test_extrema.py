import numpy as np

from supremal.grid import GridDomain, GridField, SubdomainMask, ball_mask, interior_extrema


def test_single_cone_bump_has_one_max_at_center():
    domain = GridDomain(lower=[-1.0, -1.0], upper=[1.0, 1.0], h=0.05)
    phi = GridField.from_function(
        domain, lambda x: np.maximum(0.0, 1.0 - np.linalg.norm(x, axis=-1) / 0.5)
    )
    found = interior_extrema(phi, SubdomainMask.interior_of(domain))
    assert len(found) == 1
    assert found[0].kind == "max"
    np.testing.assert_allclose(found[0].point, [0.0, 0.0], atol=1e-12)
    assert found[0].value == 1.0


def test_zero_field_is_one_degenerate_plateau():
    domain = GridDomain(lower=[0.0, 0.0], upper=[1.0, 1.0], h=0.1)
    phi = GridField(domain=domain, values=np.zeros(domain.shape))
    mask = SubdomainMask.interior_of(domain)
    found = interior_extrema(phi, mask)
    assert len(found) == 1
    assert found[0].kind == "both"
    assert mask.flags[found[0].index]
    assert found[0].plateau_size == domain.size


def test_zero_field_on_an_off_centre_ball_is_represented_by_its_centre():
    domain = GridDomain(lower=[0.0, 0.0], upper=[1.0, 1.0], h=0.02)
    phi = GridField(domain=domain, values=np.zeros(domain.shape))
    mask = ball_mask(domain, [0.46, 0.22], 0.098, parent=SubdomainMask.interior_of(domain))
    found = interior_extrema(phi, mask)
    assert len(found) == 1
    assert found[0].index == domain.index_of([0.46, 0.22])
    np.testing.assert_allclose(found[0].point, [0.46, 0.22], atol=1e-12)


def test_sine_product_has_four_extrema():
    domain = GridDomain(lower=[0.0, 0.0], upper=[1.0, 1.0], h=0.02)
    phi = GridField.from_function(
        domain, lambda x: np.sin(2 * np.pi * x[..., 0]) * np.sin(2 * np.pi * x[..., 1])
    )
    found = interior_extrema(phi, SubdomainMask.interior_of(domain))
    assert len(found) == 4
    expected = {(0.25, 0.25): "max", (0.75, 0.75): "max", (0.25, 0.75): "min", (0.75, 0.25): "min"}
    for target, kind in expected.items():
        near = [e for e in found if np.linalg.norm(np.subtract(e.point, target)) <= 0.02]
        assert len(near) == 1
        assert near[0].kind == kind


def test_plateau_top_reports_barycentric_point():
    domain = GridDomain(lower=[0.0, 0.0], upper=[1.0, 1.0], h=0.1)
    values = np.zeros(domain.shape)
    values[3:6, 4:7] = 2.0
    found = interior_extrema(
        GridField(domain=domain, values=values), SubdomainMask.interior_of(domain)
    )
    assert len(found) == 1
    assert found[0].index == (4, 5)
    assert found[0].plateau_size == 9


def test_random_compact_bumps_always_have_an_extremum(rng):
    domain = GridDomain(lower=[0.0, 0.0], upper=[1.0, 1.0], h=0.05)
    mask = SubdomainMask.interior_of(domain)
    for _ in range(20):
        c = rng.uniform(0.3, 0.7, size=2)
        r = rng.uniform(0.1, 0.25)
        a = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 2.0)
        phi = GridField.from_function(
            domain,
            lambda x: a * np.maximum(0.0, 1 - np.sum((x - c) ** 2, axis=-1) / r**2) ** 3,
        )
        assert len(interior_extrema(phi, mask)) >= 1
