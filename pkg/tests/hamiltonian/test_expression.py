import numpy as np
import pytest

from supremal.hamiltonian import builtin, parse, parse_expression, to_text
from supremal.hamiltonian.expression import (
    BinOp,
    Call,
    Entry,
    MatrixVar,
    Neg,
    Number,
    Pow,
    Var,
    evaluate_node,
)
from supremal.utilities.errors import (
    ArityError,
    ExpressionSyntaxError,
    HamiltonianContractError,
    UnknownIdentifierError,
)


def test_norm_of_matrix_variable():
    H = parse("norm(P)", dims=(2, 2))
    assert H(np.zeros(2), np.ones((2, 2))) == pytest.approx(2.0)


def test_precedence_and_unary_minus():
    tree = parse_expression("-x1^2 + 3*P11/2")
    assert tree == BinOp(
        "+",
        Neg(Pow(Var(0), 2)),
        BinOp("/", BinOp("*", Number(3.0), Entry(0, 0)), Number(2.0)),
    )


def test_norm_of_scalars_and_min_max():
    H = parse("norm(P11, P12) + max(0, P21) + min(1, abs(P22))", dims=(2, 2))
    P = np.array([[3.0, 4.0], [-1.0, 0.5]])
    assert H(np.zeros(2), P) == pytest.approx(5.0 + 0.0 + 0.5)


def test_annulus_expression_matches_builtin(rng):
    parsed = parse("abs(norm(P)^2 - 1)", dims=(2, 2))
    annulus = builtin("annulus", 2, 2)
    P = rng.normal(size=(1000, 2, 2))
    x = np.zeros((1000, 2))
    np.testing.assert_allclose(parsed.evaluate(x, P), annulus.evaluate(x, P), atol=1e-12)


def test_unbalanced_parenthesis_reports_column():
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse("norm(P", dims=(2, 2))
    assert excinfo.value.column == 7
    assert excinfo.value.line == 1
    assert "column 7" in str(excinfo.value)


def test_error_on_second_line():
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse_expression("P11 +\n  * 2")
    assert (excinfo.value.line, excinfo.value.column) == (2, 3)


def test_exponents_are_single_nonnegative_integers():
    with pytest.raises(ExpressionSyntaxError) as excinfo:
        parse_expression("x1^2^3")
    assert excinfo.value.column == 5
    for text in ("x1^2.5", "x1^-1", "x1^P11"):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression(text)
    assert parse_expression("(x1^2)^3") == parse_expression("((x1^2))^3")


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_expression("y1 + 2")
    with pytest.raises(UnknownIdentifierError):
        parse_expression("tan(P11)")


def test_identifier_outside_declared_dims():
    with pytest.raises(UnknownIdentifierError):
        parse("P13", dims=(1, 2))
    with pytest.raises(UnknownIdentifierError):
        parse("x3 * norm(P)", dims=(1, 2))


def test_matrix_variable_only_inside_norm():
    with pytest.raises(UnknownIdentifierError):
        parse_expression("P + 1")
    with pytest.raises(UnknownIdentifierError):
        parse_expression("norm(P, P11)")


def test_arity_errors():
    with pytest.raises(ArityError):
        parse_expression("sqrt(P11, P12)")
    with pytest.raises(ArityError):
        parse_expression("max(P11)")


def test_dims_are_inferred_from_variables():
    H = parse("x2 * abs(P13)")
    assert H.dims == (1, 3)


def test_print_parse_is_a_fixed_point(rng):
    texts = [
        "norm(P)",
        "abs(norm(P)^2 - 1)",
        "-x1^2 + 3*P11/2.5e-1",
        "max(abs(P11) + abs(P12), abs(P21) + abs(P22))",
        "(1 + x1^2) * norm(P)",
        "sqrt(exp(sin(x1)) * cos(pi * x2) + 4) * norm(P11, P22)",
    ]
    x = rng.normal(size=(50, 2))
    P = rng.normal(size=(50, 2, 2))
    for text in texts:
        tree = parse_expression(text)
        printed = to_text(tree)
        assert parse_expression(printed) == tree
        assert to_text(parse_expression(printed)) == printed
        original = evaluate_node(tree, x, P)
        reparsed = evaluate_node(parse_expression(printed), x, P)
        np.testing.assert_allclose(reparsed, original, rtol=0, atol=1e-15)


def test_printer_output_shape():
    assert to_text(Call("norm", (MatrixVar(),))) == "norm(P)"
    assert to_text(parse_expression("-(x1 - 2)")) == "(-(x1 - 2.0))"


def test_invalid_arithmetic_is_a_contract_error():
    with pytest.raises(HamiltonianContractError):
        parse("sqrt(P11)", dims=(1, 1))(np.zeros(1), -np.ones((1, 1)))
    with pytest.raises(HamiltonianContractError):
        parse("1 / P11", dims=(1, 1))(np.zeros(1), np.zeros((1, 1)))
    with pytest.raises(HamiltonianContractError):
        parse("P11", dims=(1, 1))(np.zeros(1), -np.ones((1, 1)))
