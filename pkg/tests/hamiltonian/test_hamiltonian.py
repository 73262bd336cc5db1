import numpy as np
import pytest
from pydantic import ValidationError

from supremal.hamiltonian import HamiltonianSpec, builtin, eval_hamiltonian
from supremal.utilities.errors import HamiltonianContractError, InvalidInputError


def test_euclidean_norm_values():
    H = builtin("euclidean-norm", 2, 2)
    assert eval_hamiltonian(H, [0.0, 0.0], [[3.0, 0.0], [4.0, 0.0]]) == 5.0
    assert eval_hamiltonian(H, [0.0, 0.0], np.zeros((2, 2))) == 0.0


def test_euclidean_norm_is_frobenius(rng):
    H = builtin("euclidean-norm", 3, 2)
    P = rng.normal(size=(10_000, 3, 2))
    np.testing.assert_allclose(
        H.evaluate(np.zeros(2), P), np.linalg.norm(P, axis=(1, 2)), rtol=0, atol=1e-14
    )


def test_annulus_values():
    H = builtin("annulus", 2, 2)
    assert H(np.zeros(2), np.diag([1.0, 0.0])) == 0.0
    assert H(np.zeros(2), np.zeros((2, 2))) == 1.0


def test_weighted_eikonal_uses_weight_and_entry_weights():
    H = builtin("weighted-eikonal", 1, 2, expression="1 + x1^2", weights=[[4.0, 1.0]])
    assert H([1.0, 0.0], [[1.0, 2.0]]) == pytest.approx(2.0 * np.sqrt(4.0 + 4.0))
    assert H.depends_on_x
    assert H.claimed_rank_one_level_convex


def test_weighted_eikonal_rejects_nonpositive_weight():
    H = builtin("weighted-eikonal", 1, 1, expression="x1")
    with pytest.raises(HamiltonianContractError):
        H([-1.0], [[1.0]])


def test_custom_expression_claim_defaults_to_false():
    H = HamiltonianSpec(kind="custom-expression", N=1, n=1, expression="abs(P11)")
    assert H.claimed_rank_one_level_convex is False


def test_builtin_rejects_expression():
    with pytest.raises(ValidationError):
        HamiltonianSpec(kind="euclidean-norm", N=1, n=1, expression="P11")


def test_dimension_mismatch():
    H = builtin("euclidean-norm", 2, 2)
    with pytest.raises(InvalidInputError):
        H(np.zeros(2), np.zeros((1, 2)))


def test_evaluate_broadcasts_points_against_matrices(rng):
    H = builtin("weighted-eikonal", 1, 2, expression="1 + x1^2")
    x = rng.normal(size=(7, 2))
    P = rng.normal(size=(1, 2))
    values = H.evaluate(x, P)
    assert values.shape == (7,)
    np.testing.assert_allclose(values, (1 + x[:, 0] ** 2) * np.linalg.norm(P))
