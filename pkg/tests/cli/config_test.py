import numpy as np
import pytest

from supremal.cli.config import RunConfig, load_run_config, resolve
from supremal.utilities.errors import ConfigError, ExpressionSyntaxError


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.json5"
    path.write_text(
        """
        // trailing commas and comments are fine
        {
          hamiltonian: {expression: "norm(P)", N: 1, n: 2},
          field: {gallery: "affine"},
          grid: {lower: [0, 0], upper: [1, 1], h: 0.02},
          checks: ["minimality", "falsify",],
          seed: 3,
          minimality: {trials: 12},
        }
        """,
        encoding="utf-8",
    )
    return path


def test_file_values_and_defaults(config_file):
    config = load_run_config(config_file)
    assert config.seed == 3
    assert config.checks == ["minimality", "falsify"]
    assert config.minimality.trials == 12
    assert config.falsify.expect_witness
    assert config.mask.kind == "interior"


def test_overrides_win_over_the_file(config_file):
    config = load_run_config(config_file, {"seed": 9, "grid.h": 0.05, "tol": None})
    assert config.seed == 9
    assert config.grid.h == 0.05
    assert config.grid.upper == [1, 1]
    assert config.tol is None


def test_no_file_means_defaults():
    config = load_run_config(None, {"out": "elsewhere"})
    assert config == RunConfig(out="elsewhere")


def test_malformed_and_invalid_configs(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{checks: [", encoding="utf-8")
    with pytest.raises(ConfigError, match="Malformed"):
        load_run_config(broken)
    with pytest.raises(ConfigError, match="Cannot read"):
        load_run_config(tmp_path / "missing.json")
    with pytest.raises(ConfigError, match="checks"):
        load_run_config(None, {"checks": ["sorcery"]})
    with pytest.raises(ConfigError):
        load_run_config(None, {"field": {"gallery": "cone", "piecewise_affine": 3}})
    with pytest.raises(ConfigError):
        load_run_config(None, {"mask": {"kind": "ball", "radius": 0.3}})


def test_resolve_checks_dimensions():
    config = load_run_config(
        None, {"hamiltonian": {"builtin": "euclidean-norm", "N": 2, "n": 2}}
    )
    with pytest.raises(ConfigError, match="Hamiltonian acts on 2x2"):
        resolve(config)
    with pytest.raises(ConfigError, match="xi"):
        resolve(load_run_config(None, {"xi": [1.0, 0.0]}))
    with pytest.raises(ConfigError):
        resolve(load_run_config(None, {"grid.h": 0.3}))


def test_expression_errors_keep_their_column():
    config = load_run_config(None, {"hamiltonian": {"expression": "norm(P", "N": 1, "n": 2}})
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        resolve(config)
    assert excinfo.value.column == 7


def test_resolved_problem():
    config = load_run_config(
        None,
        {
            "field": {"gallery": "affine", "params": {"A": [[0.6, 0.8], [0.0, 1.0]]}},
            "hamiltonian": {"builtin": "euclidean-norm", "N": 2, "n": 2},
            "mask": {"kind": "box", "lower": [0.2, 0.2], "upper": [0.8, 0.8]},
        },
    )
    problem = resolve(config)
    assert problem.xi == [1.0, 0.0]
    assert problem.u.N == 2
    assert problem.mask.count == 31 * 31


def test_piecewise_affine_field_follows_the_seed():
    first = resolve(load_run_config(None, {"field": {"piecewise_affine": 4}, "seed": 1}))
    again = resolve(load_run_config(None, {"field": {"piecewise_affine": 4}, "seed": 1}))
    other = resolve(load_run_config(None, {"field": {"piecewise_affine": 4}, "seed": 2}))
    np.testing.assert_array_equal(first.u.values, again.u.values)
    assert not np.array_equal(first.u.values, other.u.values)
