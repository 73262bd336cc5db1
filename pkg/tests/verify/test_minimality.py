import json

import numpy as np
import pytest

from supremal import gallery
from supremal.calculus import BumpSpec, make_bump, zero_field
from supremal.grid import GridDomain, GridField, ball_mask
from supremal.hamiltonian import builtin
from supremal.utilities.errors import BoundaryConditionError, InvalidInputError
from supremal.utilities.events import HypothesisGateEvent, supremal_events
from supremal.utilities.report_json_encoder import dumps_report
from supremal.verify import minimality_check


@pytest.fixture
def eikonal():
    return builtin("euclidean-norm", 1, 2)


def test_affine_passes_for_a_centered_bump(unit_square, eikonal):
    domain, mask = unit_square
    u = gallery.sample("affine", domain)
    phi = make_bump(BumpSpec(center=[0.5, 0.5], radius=0.2, amplitude=0.02), domain, mask)
    report = minimality_check(eikonal, u, mask, [1.0], phi, seed=11)
    assert report.hypothesis.met
    assert report.passed
    assert report.status == "minimality holds"
    assert report.lhs == pytest.approx(1.0, abs=1e-12)
    assert report.margin >= -1e-10
    assert report.tol == pytest.approx(4 * domain.h * 2, rel=1e-9)
    assert sorted(b.rho for b in report.balls) == pytest.approx([0.22, 0.46])


def test_lifted_affine_map_with_oblique_direction(unit_square):
    domain, mask = unit_square
    u = gallery.sample("affine", domain, A=[[0.6, 0.8], [0.0, 0.0]])
    spec = BumpSpec(center=[0.4, 0.6], radius=0.15, amplitude=0.01, sign=-1)
    phi = make_bump(spec, domain, mask)
    report = minimality_check(builtin("euclidean-norm", 2, 2), u, mask, [3.0, 4.0], phi)
    assert report.xi == pytest.approx([0.6, 0.8])
    assert report.passed
    assert report.margin >= -2 * domain.h


def test_null_variation_has_zero_margin(unit_square, eikonal):
    domain, mask = unit_square
    u = GridField.from_function(
        domain, lambda x: np.exp(-4.0 * np.sum((x - 0.5) ** 2, axis=-1))
    )
    report = minimality_check(eikonal, u, mask, [1.0], zero_field(domain))
    assert report.margin == 0.0
    assert report.inf_rhs == report.lhs
    assert report.passed
    assert report.status == "hypothesis not met"
    for ball in report.balls:
        assert ball.center == pytest.approx(report.lhs_point)


def test_cone_fails_the_gate_and_the_comparison(eikonal):
    domain = GridDomain(lower=[-1.2, -1.2], upper=[1.2, 1.2], h=0.02)
    mask = ball_mask(domain, [0.0, 0.0], 1.0)
    u = gallery.sample("cone", domain)
    # u + phi is the constant extension max(|x|, 1/2)
    phi = GridField.from_function(
        domain, lambda x: np.maximum(0.5 - np.linalg.norm(x, axis=-1), 0.0)
    )
    report = minimality_check(eikonal, u, mask, [1.0], phi)
    assert not report.hypothesis.c1_proxy_ok
    assert report.status == "hypothesis not met"
    assert not report.passed
    assert report.margin <= -0.9
    best = min(report.balls, key=lambda b: b.rhs)
    assert best.center == pytest.approx([0.0, 0.0], abs=1e-12)
    assert best.rho <= 0.5
    assert best.rhs <= 1e-10


def test_report_json_has_stable_keys(unit_square, eikonal):
    domain, mask = unit_square
    u = gallery.sample("affine", domain)
    phi = make_bump(BumpSpec(center=[0.5, 0.5], radius=0.2, amplitude=0.02), domain, mask)
    payload = json.loads(dumps_report(minimality_check(eikonal, u, mask, [1.0], phi, seed=5)))
    for key in ("lhs", "balls", "inf_rhs", "margin", "tol", "pass", "hypothesis", "seed"):
        assert key in payload
    assert set(payload["balls"][0]) >= {"center", "rho", "rhs"}
    assert set(payload["hypothesis"]) >= {"hj_residual", "tau", "c1_proxy_ok"}
    assert payload["seed"] == 5
    assert payload["pass"] is True


def test_gate_event_is_emitted(unit_square, eikonal):
    domain, mask = unit_square
    seen = []

    def receiver(source, event):
        seen.append(event)

    supremal_events.connect(receiver)
    try:
        minimality_check(eikonal, gallery.sample("affine", domain), mask, [1.0], zero_field(domain))
    finally:
        supremal_events.disconnect(receiver)
    gates = [e for e in seen if isinstance(e, HypothesisGateEvent)]
    assert len(gates) == 1 and gates[0].met


def test_phi_must_vanish_on_the_boundary(unit_square, eikonal):
    domain, mask = unit_square
    u = gallery.sample("affine", domain)
    phi = GridField.from_function(domain, lambda x: x[..., 0])
    with pytest.raises(BoundaryConditionError):
        minimality_check(eikonal, u, mask, [1.0], phi)


def test_direction_must_match_the_target(unit_square, eikonal):
    domain, mask = unit_square
    with pytest.raises(InvalidInputError):
        minimality_check(
            eikonal, gallery.sample("affine", domain), mask, [1.0, 0.0], zero_field(domain)
        )
