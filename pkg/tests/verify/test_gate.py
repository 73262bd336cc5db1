import numpy as np
import pytest

from supremal import gallery
from supremal.grid import GridDomain, GridField, ball_mask
from supremal.hamiltonian import builtin
from supremal.verify import gradient_jumps, hypothesis_gate


@pytest.fixture
def cone_on_ball():
    domain = GridDomain(lower=[-1.2, -1.2], upper=[1.2, 1.2], h=0.02)
    mask = ball_mask(domain, [0.0, 0.0], 1.0)
    return domain, mask, gallery.sample("cone", domain)


def test_affine_eikonal_solution_meets_the_hypothesis(unit_square):
    domain, mask = unit_square
    u = gallery.sample("affine", domain)
    report = hypothesis_gate(builtin("euclidean-norm", 1, 2), u, mask)
    assert report.met
    assert not report.near_miss
    assert report.level == pytest.approx(1.0, abs=1e-12)
    assert report.hj_residual <= 1e-12
    assert report.worst_jump <= 1e-12
    assert report.tau == pytest.approx(4 * 0.02 * 2, rel=1e-9)
    assert report.diagnostic() == "hypothesis met"


def test_wrong_level_fails_with_a_diagnostic(unit_square):
    domain, mask = unit_square
    u = gallery.sample("affine", domain)
    report = hypothesis_gate(builtin("euclidean-norm", 1, 2), u, mask, c=2.0)
    assert not report.met
    assert report.c1_proxy_ok
    assert report.hj_residual == pytest.approx(1.0, abs=1e-12)
    assert "HJ residual" in report.diagnostic()


def test_cone_fails_the_c1_proxy_at_the_origin(cone_on_ball):
    domain, mask, u = cone_on_ball
    report = hypothesis_gate(builtin("euclidean-norm", 1, 2), u, mask)
    assert not report.c1_proxy_ok
    assert not report.met
    assert report.worst_jump >= 0.9
    assert np.linalg.norm(report.jump_point) <= domain.h
    assert np.linalg.norm(report.residual_point) <= 1e-12
    assert "gradient jump" in report.diagnostic()


def test_near_miss_is_flagged(unit_square):
    domain, mask = unit_square
    u = GridField.from_function(domain, lambda x: 1.01 * (0.6 * x[..., 0] + 0.8 * x[..., 1]))
    report = hypothesis_gate(builtin("euclidean-norm", 1, 2), u, mask, c=1.0, tau=0.015)
    assert report.met
    assert report.near_miss


def test_smooth_field_has_small_jumps(centered_square):
    domain, mask = centered_square
    u = gallery.sample("complex-exp", domain)
    worst, where, sup = gradient_jumps(u, mask)
    assert sup == pytest.approx(np.sqrt(2), rel=1e-2)
    assert worst <= 2 * domain.h
    assert where is not None
