"""JSON codecs for exact values.

Rationals travel as "p/q" strings, complex entries as [re, im] pairs of
rational strings, integer vectors and lattices as plain JSON ints.
"""

import json
from typing import Any, List, Sequence

from sympy import I, Matrix, Rational, im, re

from errors import MalformedInput


def rational_to_str(x) -> str:
    x = Rational(x)
    return f"{x.p}/{x.q}"


def parse_rational(value: Any, path: str = "$") -> Rational:
    if isinstance(value, bool):
        raise MalformedInput(f"Expected a rational at {path}, got a boolean", {"path": path})
    if isinstance(value, int):
        return Rational(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                p, q = text.split("/")
                if int(q) == 0:
                    raise ZeroDivisionError(text)
                return Rational(int(p), int(q))
            return Rational(int(text))
        except (ValueError, ZeroDivisionError):
            pass
    raise MalformedInput(f"Expected an exact rational at {path}, got {value!r}", {"path": path})


def parse_int(value: Any, path: str = "$") -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        x = parse_rational(value, path)
        if x.q != 1:
            raise MalformedInput(f"Expected an integer at {path}, got {value!r}", {"path": path})
        return int(x)
    return value


def parse_int_vector(value: Any, path: str = "$") -> tuple:
    if isinstance(value, str):
        value = loads(value, path)
    if not isinstance(value, list):
        raise MalformedInput(f"Expected a list of integers at {path}", {"path": path})
    return tuple(parse_int(x, f"{path}[{i}]") for i, x in enumerate(value))


def parse_matrix(value: Any, path: str = "$", integral: bool = False) -> Matrix:
    if isinstance(value, dict):
        if "matrix" not in value:
            raise MalformedInput(f"Missing 'matrix' key at {path}", {"path": path})
        value, path = value["matrix"], f"{path}.matrix"
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise MalformedInput(f"Expected a non-empty list of rows at {path}", {"path": path})
    width = len(value[0])
    parse = parse_int if integral else parse_rational
    rows = []
    for i, row in enumerate(value):
        if len(row) != width:
            raise MalformedInput(f"Ragged row at {path}[{i}]", {"path": f"{path}[{i}]"})
        rows.append([parse(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    return Matrix(rows)


def matrix_to_json(M: Matrix) -> List[list]:
    """Integer matrices stay ints; anything rational becomes "p/q"."""
    if all(Rational(x).q == 1 for x in M):
        return [[int(x) for x in M.row(i)] for i in range(M.rows)]
    return [[rational_to_str(x) for x in M.row(i)] for i in range(M.rows)]


def parse_complex(value: Any, path: str = "$"):
    if not isinstance(value, list) or len(value) != 2:
        raise MalformedInput(f"Expected a [re, im] pair at {path}", {"path": path})
    return parse_rational(value[0], f"{path}[0]") + I * parse_rational(value[1], f"{path}[1]")


def parse_complex_vector(value: Any, path: str = "$") -> tuple:
    if isinstance(value, str):
        value = loads(value, path)
    if not isinstance(value, list):
        raise MalformedInput(f"Expected a list of [re, im] pairs at {path}", {"path": path})
    return tuple(parse_complex(x, f"{path}[{i}]") for i, x in enumerate(value))


def complex_to_json(z) -> List[str]:
    return [rational_to_str(re(z)), rational_to_str(im(z))]


def complex_vector_to_json(v: Sequence) -> List[List[str]]:
    return [complex_to_json(z) for z in v]


def loads(text: str, path: str = "$") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedInput(
            f"Invalid JSON at {path}: {e.msg} (line {e.lineno}, column {e.colno})",
            {"path": path, "line": e.lineno, "column": e.colno},
        )


def read_json(path) -> Any:
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as e:
        raise MalformedInput(f"Cannot read {path}: {e}", {"path": str(path)})
    return loads(text, str(path))
