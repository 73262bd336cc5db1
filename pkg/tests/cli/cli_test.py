import json

import pytest
from click.testing import CliRunner

from supremal.cli.cli import supremal


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def write_config(tmp_path):
    def write(**values):
        path = tmp_path / "config.json"
        path.write_text(json.dumps(values), encoding="utf-8")
        return path

    return write


def _report(out, name):
    return json.loads((out / name).read_text(encoding="utf-8"))


def _events(output):
    return [json.loads(line) for line in output.splitlines() if line.startswith("{")]


AFFINE = {
    "hamiltonian": {"expression": "norm(P)", "N": 1, "n": 2},
    "field": {"gallery": "affine"},
    "minimality": {"trials": 20},
}

CONE = {
    "hamiltonian": {"builtin": "euclidean-norm", "N": 1, "n": 2},
    "field": {"gallery": "cone"},
    "grid": {"lower": [-1.2, -1.2], "upper": [1.2, 1.2], "h": 0.02},
    "mask": {"kind": "ball", "center": [0.0, 0.0], "radius": 1.0},
}


def test_affine_minimality_passes(runner, write_config, output_dir):
    config = write_config(**AFFINE)
    result = runner.invoke(
        supremal, ["--config", str(config), "--out", str(output_dir), "check-minimality"]
    )
    assert result.exit_code == 0, result.output
    payload = _report(output_dir, "minimality.json")
    assert payload["status"] == "pass"
    assert payload["report"]["pass_rate"] == 1.0
    assert payload["report"]["worst_margin"] >= -payload["report"]["tol"]
    assert payload["config"]["hamiltonian"]["expression"] == "norm(P)"
    assert payload["config"]["minimality"]["trials"] == 20

    margins = (output_dir / "margins.csv").read_text().splitlines()
    assert margins[0] == "trial,margin,tol"
    assert len(margins) == 21

    kinds = [e["type"] for e in _events(result.output)]
    assert kinds[0] == "check_started"
    assert "hypothesis_gate" in kinds
    assert kinds[-1] == "check_finished"


def test_cone_falsify_finds_the_witness(runner, write_config, output_dir):
    config = write_config(**CONE, falsify={"budget": 5})
    result = runner.invoke(supremal, ["--config", str(config), "--out", str(output_dir), "falsify"])
    assert result.exit_code == 0, result.output
    witness = _report(output_dir, "falsify.json")["report"]["witness"]
    assert witness["competitor"] == "level-set-truncation"
    assert witness["gap"] >= 0.9


def test_affine_falsify_passes_only_when_no_witness_is_expected(
    runner, write_config, output_dir
):
    config = write_config(**AFFINE, falsify={"budget": 20})
    args = ["--config", str(config), "--out", str(output_dir), "falsify"]
    assert runner.invoke(supremal, args).exit_code == 1
    assert runner.invoke(supremal, args + ["--expect-none"]).exit_code == 0


def test_malformed_expression_is_a_config_error(runner, write_config, output_dir):
    config = write_config(hamiltonian={"expression": "norm(P", "N": 1, "n": 2})
    result = runner.invoke(
        supremal, ["--config", str(config), "--out", str(output_dir), "check-minimality"]
    )
    assert result.exit_code == 64
    assert "column 7" in result.output
    errors = [e for e in _events(result.output) if e["type"] == "config_error"]
    assert errors[0]["column"] == 7
    assert not (output_dir / "minimality.json").exists()


def test_missing_config_file(runner, tmp_path):
    result = runner.invoke(supremal, ["--config", str(tmp_path / "nope.json"), "jensen"])
    assert result.exit_code == 64


def test_errors_while_checking_are_failures_not_config_errors(runner, write_config, output_dir):
    negative = dict(AFFINE, hamiltonian={"expression": "P11 - 5", "N": 1, "n": 2})
    config = write_config(**negative, checks=["minimality", "convexity"])
    result = runner.invoke(supremal, ["--config", str(config), "--out", str(output_dir), "run"])
    assert result.exit_code == 1, result.output
    assert "HamiltonianContractError" in result.output
    for name in ("minimality.json", "convexity.json"):
        payload = _report(output_dir, name)
        assert payload["status"] == "fail"
        assert payload["report"]["error"] == "HamiltonianContractError"
    kinds = [e["type"] for e in _events(result.output)]
    assert "config_error" not in kinds
    assert kinds.count("check_error") == 2
    assert kinds.count("check_finished") == 2


def test_wrong_level_fails(runner, write_config, output_dir):
    config = write_config(**AFFINE, c=2.0)
    result = runner.invoke(
        supremal, ["--config", str(config), "--out", str(output_dir), "check-minimality"]
    )
    assert result.exit_code == 1
    payload = _report(output_dir, "minimality.json")
    assert payload["report"]["aborted"]
    assert "HJ residual" in payload["warnings"][0]


def test_near_miss_passes_with_a_warning(runner, write_config, output_dir):
    # |Du| = 1.1 against c = 1: residual 0.1 inside tau = 0.168 but above half of it
    steep = dict(AFFINE, field={"gallery": "affine", "params": {"A": [[0.66, 0.88]]}}, c=1.0)
    config = write_config(**steep)
    result = runner.invoke(
        supremal, ["--config", str(config), "--out", str(output_dir), "check-minimality"]
    )
    assert result.exit_code == 2
    payload = _report(output_dir, "minimality.json")
    assert payload["status"] == "warn"
    assert payload["report"]["gate"]["near_miss"]


def test_same_seed_gives_byte_identical_reports(runner, write_config, output_dir):
    config = write_config(**AFFINE)
    args = ["--config", str(config), "--out", str(output_dir), "--seed", "7", "check-minimality"]
    assert runner.invoke(supremal, args).exit_code == 0
    first = (output_dir / "minimality.json").read_bytes()
    assert runner.invoke(supremal, args).exit_code == 0
    assert (output_dir / "minimality.json").read_bytes() == first
    assert json.loads(first)["config"]["seed"] == 7


def test_convexity_check(runner, write_config, output_dir):
    norm = write_config(hamiltonian={"builtin": "euclidean-norm", "N": 1, "n": 2})
    args = ["--config", str(norm), "--out", str(output_dir), "convexity-check"]
    assert runner.invoke(supremal, args + ["--segments", "2000"]).exit_code == 0

    annulus = write_config(hamiltonian={"builtin": "annulus", "N": 1, "n": 2})
    args = ["--config", str(annulus), "--out", str(output_dir), "convexity-check"]
    assert runner.invoke(supremal, args + ["--segments", "2000"]).exit_code == 1
    verdict = _report(output_dir, "convexity.json")["report"]["rank_one"]
    assert verdict["status"] == "fail"
    assert verdict["witness"]["violation"] >= 0.99


def test_jensen(runner, write_config, output_dir):
    config = write_config(hamiltonian={"builtin": "euclidean-norm", "N": 1, "n": 2})
    result = runner.invoke(
        supremal, ["--config", str(config), "--out", str(output_dir), "jensen", "--trials", "200"]
    )
    assert result.exit_code == 0
    payload = _report(output_dir, "jensen.json")["report"]
    assert payload["trials"]["failures"] == 0
    assert payload["control"]["lhs"] == 1.0 and payload["control"]["rhs"] == 0.0


def test_residual_order_of_the_cone_off_the_origin(runner, write_config, output_dir):
    config = write_config(
        hamiltonian={"builtin": "euclidean-norm", "N": 1, "n": 2},
        field={"gallery": "cone"},
        grid={"lower": [-1.0, -1.0], "upper": [1.0, 1.0], "h": 0.1},
        mask={"kind": "box", "lower": [0.4, 0.4], "upper": [0.8, 0.8]},
        residual={"kind": "scalar", "min_order": 1.8},
    )
    result = runner.invoke(
        supremal,
        ["--config", str(config), "--out", str(output_dir), "residual"]
        + ["--h", "0.05", "--h", "0.025"],
    )
    assert result.exit_code == 0, result.output
    lines = (output_dir / "residual.csv").read_text().splitlines()
    assert lines[0] == "h,sup_residual"
    assert [float(line.split(",")[0]) for line in lines[1:4]] == [0.1, 0.05, 0.025]
    assert lines[-1].startswith("# fitted_order,")
    assert float(lines[-1].split(",")[1]) >= 1.8


def test_mollify_demo(runner, write_config, output_dir):
    config = write_config(
        field={"piecewise_affine": 5},
        grid={"lower": [-0.1, -0.1], "upper": [1.1, 1.1], "h": 0.0025},
        mask={"kind": "box", "lower": [0.0, 0.0], "upper": [1.0, 1.0]},
    )
    result = runner.invoke(
        supremal, ["--config", str(config), "--out", str(output_dir), "mollify-demo"]
    )
    assert result.exit_code in (0, 2), result.output
    payload = _report(output_dir, "mollify.json")["report"]
    assert len(payload["epsilons"]) == 3
    assert all(row["satisfied"] for row in payload["table"]["rows"])
    lines = (output_dir / "mollify.csv").read_text().splitlines()
    assert lines[0] == "l,epsilon,measured,bound"
    assert len(lines) == 1 + len(payload["table"]["rows"])


def test_run_executes_every_listed_check(runner, write_config, output_dir):
    config = write_config(
        hamiltonian={"builtin": "euclidean-norm", "N": 1, "n": 2},
        checks=["jensen", "convexity"],
        jensen={"trials": 100},
        convexity={"segments": 500, "sections": 1},
    )
    result = runner.invoke(supremal, ["--config", str(config), "--out", str(output_dir), "run"])
    assert result.exit_code == 0, result.output
    assert (output_dir / "jensen.json").exists()
    assert (output_dir / "convexity.json").exists()
    finished = [e for e in _events(result.output) if e["type"] == "check_finished"]
    assert [e["check"] for e in finished] == ["jensen", "convexity"]


def test_gallery_listing_and_csv(runner, output_dir):
    result = runner.invoke(supremal, ["--out", str(output_dir), "gallery", "--csv", "affine"])
    assert result.exit_code == 0, result.output
    assert "cone" in result.output
    text = (output_dir / "affine.csv").read_text()
    assert text.startswith("# {")
    assert text.splitlines()[1] == "x1,x2,u1"
