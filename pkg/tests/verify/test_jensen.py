import numpy as np
import pytest

from supremal.hamiltonian import builtin
from supremal.verify import annulus_control, jensen_check, jensen_trials, section_of
from supremal.utilities.errors import InvalidInputError, ParameterError


def norm(p):
    return np.linalg.norm(p, axis=-1)


def sqrt_sup_norm(p):
    # level sets are cubes: level-convex but not convex
    return np.sqrt(np.max(np.abs(p), axis=-1))


def test_point_mass_is_an_equality(rng):
    f = rng.normal(size=(1, 3))
    result = jensen_check(norm, [1.0], f)
    assert result.lhs == result.rhs
    assert result.passed and result.margin == 0.0


@pytest.mark.parametrize("phi", [norm, sqrt_sup_norm])
def test_random_measures_against_brute_force(phi, rng):
    for _ in range(1000):
        m = rng.integers(1, 6)
        w = rng.random(m)
        w[rng.random(m) < 0.25] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
        w /= w.sum()
        f = rng.normal(size=(m, 2))

        barycentre = sum(wi * fi for wi, fi in zip(w, f))
        lhs = float(phi(barycentre[np.newaxis])[0])
        rhs = max(float(phi(fi[np.newaxis])[0]) for wi, fi in zip(w, f) if wi > 0)

        result = jensen_check(phi, w, f)
        assert result.lhs == pytest.approx(lhs, abs=1e-14)
        assert result.rhs == rhs
        assert result.passed
        assert lhs <= rhs + 1e-12


def test_zero_weight_atoms_do_not_count():
    result = jensen_check(norm, [1.0, 0.0], [[0.0, 0.0], [10.0, 0.0]])
    assert result.rhs == 0.0
    assert result.passed


def test_annulus_control_fails_as_documented():
    result = annulus_control()
    assert result.lhs == 1.0
    assert result.rhs == 0.0
    assert not result.passed
    assert result.model_dump(by_alias=True)["pass"] is False


def test_trials_pass_for_level_convex_sections():
    H = builtin("euclidean-norm", 2, 2)
    report = jensen_trials(section_of(H), dim=4, trials=1000, seed=7)
    assert report.passed
    assert report.trials == 1000
    assert report.worst_margin >= -1e-12


def test_trials_find_the_annulus_violation():
    report = jensen_trials(section_of(builtin("annulus", 1, 2)), dim=2, trials=1000, seed=7)
    assert not report.passed
    assert report.worst is not None and report.worst.lhs > report.worst.rhs


def test_trials_are_deterministic():
    H = builtin("euclidean-norm", 1, 3)
    first = jensen_trials(section_of(H), dim=3, trials=50, seed=3)
    second = jensen_trials(section_of(H), dim=3, trials=50, seed=3)
    assert first == second


def test_weight_errors():
    with pytest.raises(ParameterError):
        jensen_check(norm, [0.5, 0.4], [[1.0], [2.0]])
    with pytest.raises(ParameterError):
        jensen_check(norm, [1.5, -0.5], [[1.0], [2.0]])
    with pytest.raises(InvalidInputError):
        jensen_check(norm, [0.5, 0.5], [[1.0], [2.0], [3.0]])
    with pytest.raises(InvalidInputError):
        jensen_check(norm, [1.0], [[np.nan]])
