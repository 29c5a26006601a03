import logging
from typing import Dict, Optional, Sequence, Tuple

import pandas as pd
from sympy import Matrix, Rational

from errors import DegenerateForm, ValidationFailed
from lattice import Lattice, Signature, signature

logger = logging.getLogger(__name__)

SUCCESS = "Success"
ERROR = "Error"


def _is_exact_int(x) -> bool:
    if isinstance(x, bool):
        return False
    if isinstance(x, int):
        return True
    try:
        return Rational(x).q == 1 and not isinstance(x, float)
    except (TypeError, ValueError):
        return False


class GramValidator:
    """Gram matrix validator.

    Each check returns {"status", "message", "affected_rows"} where
    affected_rows is a DataFrame of the offending entries.
    """

    def __init__(self, gram: Sequence[Sequence], name: str = "lattice"):
        self.gram = [list(row) if isinstance(row, (list, tuple)) else row for row in gram]
        self.name = name
        self.validation_results = {}
        logger.info(f"Initialized validator for {name} with {len(self.gram)} rows")

    def _result(self, key: str, status: str, message: str, rows: Optional[list] = None, columns=None) -> Dict:
        result = {
            "status": status,
            "message": message,
            "affected_rows": pd.DataFrame(rows or [], columns=columns),
        }
        self.validation_results[key] = result
        return result

    def _ok(self, key: str) -> bool:
        return self.validation_results.get(key, {}).get("status") == SUCCESS

    def shape_check(self) -> Dict:
        """The Gram matrix is a non-empty list of rows, all of length rank."""
        logger.info("Running shape check...")
        n = len(self.gram)
        if n == 0:
            return self._result("shape", ERROR, f"{self.name}: Gram matrix is empty.")
        bad = [
            {"row": i, "length": len(row) if isinstance(row, list) else None}
            for i, row in enumerate(self.gram)
            if not isinstance(row, list) or len(row) != n
        ]
        if bad:
            return self._result("shape", ERROR, f"{self.name}: Gram matrix is not {n}x{n}.", bad, ["row", "length"])
        return self._result("shape", SUCCESS, f"{self.name}: Gram matrix is {n}x{n}.")

    def integrality_check(self) -> Dict:
        logger.info("Running integrality check...")
        bad = [
            {"row": i, "col": j, "value": x}
            for i, row in enumerate(self.gram)
            for j, x in enumerate(row)
            if not _is_exact_int(x)
        ]
        if bad:
            return self._result("integrality", ERROR, f"{self.name}: Gram entries must be integers.", bad, ["row", "col", "value"])
        return self._result("integrality", SUCCESS, f"{self.name}: all entries are integers.")

    def symmetry_check(self) -> Dict:
        logger.info("Running symmetry check...")
        bad = [
            {"row": i, "col": j, "value": self.gram[i][j], "transpose_value": self.gram[j][i]}
            for i in range(len(self.gram))
            for j in range(i + 1, len(self.gram))
            if self.gram[i][j] != self.gram[j][i]
        ]
        if bad:
            return self._result(
                "symmetry", ERROR, f"{self.name}: Gram matrix is not symmetric.", bad,
                ["row", "col", "value", "transpose_value"],
            )
        return self._result("symmetry", SUCCESS, f"{self.name}: Gram matrix is symmetric.")

    def nondegeneracy_check(self) -> Dict:
        logger.info("Running nondegeneracy check...")
        det = Matrix(self.gram).det()
        if det == 0:
            return self._result("nondegeneracy", ERROR, f"{self.name}: determinant is 0.", [{"determinant": 0}], ["determinant"])
        return self._result("nondegeneracy", SUCCESS, f"{self.name}: determinant is {det}.")

    def signature_check(self, expected: Optional[Tuple[int, int]] = None) -> Dict:
        """Signature equals expected; (3, rank - 3) when expected is None."""
        logger.info("Running signature check...")
        n = len(self.gram)
        expected = Signature(*(expected or (3, n - 3)))
        try:
            sig = signature(Lattice(self.name, Matrix(self.gram)))
        except DegenerateForm:
            return self._result("signature", ERROR, f"{self.name}: form is degenerate.")
        if sig != expected:
            return self._result(
                "signature", ERROR, f"{self.name}: signature {tuple(sig)}, expected {tuple(expected)}.",
                [{"positive": sig.positive, "negative": sig.negative}], ["positive", "negative"],
            )
        return self._result("signature", SUCCESS, f"{self.name}: signature {tuple(sig)}.")

    def validate_all(self, bb: bool = False) -> Dict:
        """Run every check; later checks are skipped once the matrix is malformed."""
        logger.info("Running all validation checks...")
        self.validation_results = {}
        self.shape_check()
        if self._ok("shape"):
            self.integrality_check()
            self.symmetry_check()
        if self._ok("integrality") and self._ok("symmetry"):
            self.nondegeneracy_check()
            if bb and self._ok("nondegeneracy"):
                self.signature_check()
        return self.validation_results

    def validation_passed(self) -> bool:
        return bool(self.validation_results) and all(r["status"] == SUCCESS for r in self.validation_results.values())

    def failures(self) -> Dict[str, str]:
        return {k: r["message"] for k, r in self.validation_results.items() if r["status"] != SUCCESS}


def validate_gram(gram: Sequence[Sequence], name: str = "lattice", bb: bool = False, path: str = "$") -> Lattice:
    """Run the validator and build the Lattice, raising ValidationFailed with every failure."""
    validator = GramValidator(gram, name)
    validator.validate_all(bb=bb)
    if not validator.validation_passed():
        failures = validator.failures()
        first = next(iter(failures))
        raise ValidationFailed(f"{name}: {failures[first]}", {"path": f"{path}.gram", "checks": failures})
    return Lattice(name, Matrix(validator.gram))
