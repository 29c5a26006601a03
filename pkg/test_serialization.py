import pytest
from sympy import I, Matrix, Rational

from certificate import Certificate
from errors import HKError, MalformedInput, NotIsotropic
from linalg_utils import (
    clear_denominators,
    congruence_diagonal,
    integer_kernel,
    normalize_sign,
    rank_sequence,
    saturate,
)
from serialization import (
    complex_vector_to_json,
    loads,
    matrix_to_json,
    parse_complex_vector,
    parse_int_vector,
    parse_matrix,
    parse_rational,
    rational_to_str,
)


class TestRationals:
    @pytest.mark.parametrize("value, expected", [(3, Rational(3)), ("3/6", Rational(1, 2)), ("-4", Rational(-4)), (" 7/1 ", Rational(7))])
    def test_parse(self, value, expected):
        assert parse_rational(value) == expected

    @pytest.mark.parametrize("value", [0.5, True, "1/0", "a/b", None])
    def test_reject_inexact(self, value):
        with pytest.raises(MalformedInput):
            parse_rational(value, "$.x")

    def test_canonical_string(self):
        assert rational_to_str(2) == "2/1"
        assert rational_to_str(Rational(-6, 4)) == "-3/2"


class TestStructures:
    def test_int_vector_from_text(self):
        assert parse_int_vector("[1, -2, 3]") == (1, -2, 3)

    def test_int_vector_path(self):
        with pytest.raises(MalformedInput) as e:
            parse_int_vector([1, "1/2"], "--delta")
        assert e.value.details["path"] == "--delta[1]"

    def test_ragged_matrix(self):
        with pytest.raises(MalformedInput) as e:
            parse_matrix([[1, 2], [3]], "$.T")
        assert e.value.details["path"] == "$.T[1]"

    def test_matrix_json(self):
        assert matrix_to_json(Matrix([[1, 0], [0, 1]])) == [[1, 0], [0, 1]]
        assert matrix_to_json(Matrix([[Rational(1, 2)]])) == [["1/2"]]

    def test_complex_vector(self):
        v = parse_complex_vector('[[1, 0], ["1/2", "-1"]]')
        assert v == (1, Rational(1, 2) - I)
        assert complex_vector_to_json(v) == [["1/1", "0/1"], ["1/2", "-1/1"]]

    def test_invalid_json_position(self):
        with pytest.raises(MalformedInput) as e:
            loads('{"a": }', "--certificate")
        assert e.value.details["line"] == 1
        assert e.value.details["column"] == 7


class TestErrors:
    def test_error_dict(self):
        error = NotIsotropic("pair(delta,delta) = 1, expected 0", {"pair": 1})
        assert isinstance(error, HKError)
        assert error.to_dict() == {
            "error": "NotIsotropic",
            "message": "pair(delta,delta) = 1, expected 0",
            "details": {"pair": 1},
        }

    def test_certificate_validity(self):
        cert = Certificate("demo")
        assert not cert.valid
        cert.check("a", True)
        cert.check("b", False)
        assert cert.failed_checks() == ["b"]
        assert cert.to_dict()["valid"] is False


class TestExactLinearAlgebra:
    def test_integer_kernel(self):
        basis = integer_kernel(Matrix([[2, 4, 6]]))
        assert len(basis) == 2
        for b in basis:
            assert 2 * b[0] + 4 * b[1] + 6 * b[2] == 0

    def test_saturate(self):
        assert saturate([(2, 2, 0)]) == [(1, 1, 0)]

    def test_rank_sequence(self):
        N = Matrix([[0, 1, 0], [0, 0, 1], [0, 0, 0]])
        assert rank_sequence(N) == [3, 2, 1, 0]

    def test_congruence_diagonal(self):
        diagonal = congruence_diagonal(Matrix([[0, 1], [1, 0]]))
        assert sorted(d > 0 for d in diagonal) == [False, True]

    def test_normalize_and_clear(self):
        assert normalize_sign((0, -1, 2)) == (0, 1, -2)
        assert clear_denominators([Rational(1, 2), Rational(-1, 3)]) == (3, -2)
