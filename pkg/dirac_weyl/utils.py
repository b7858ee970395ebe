import json
from typing import Iterable, Optional, Sequence, Union

import numpy as np


def write_json(data, file_path):
    with open(file_path, 'w') as f:
        json.dump(data, f, indent=4)


def pluralize(num: Union[int, Iterable], singular: str, plural: str = None) -> str:
    if isinstance(num, Iterable):
        num = len(num)
    if plural is None:
        plural = singular + 's'
    return f"{singular if num == 1 else plural}"


def complex_to_pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(value) -> complex:
    """Accept [re, im], a bare real number or a python complex."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex pair must have 2 entries, got {len(value)}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def matrix_to_pairs(mat) -> list:
    """Row-major nested list of [re, im] pairs."""
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    return [[complex_to_pair(z) for z in row] for row in mat]


def pairs_to_matrix(rows) -> np.ndarray:
    if not isinstance(rows, (list, tuple)) or not rows:
        raise ValueError("matrix must be a non-empty list of rows")
    mat = np.array([[pair_to_complex(v) for v in row] for row in rows], dtype=complex)
    if mat.ndim != 2:
        raise ValueError("matrix rows have unequal lengths")
    return mat


def opnorm(mat) -> float:
    """Spectral norm, zero for empty matrices."""
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


class DiracWeylError(Exception):
    """Base class for all errors raised by dirac_weyl."""

    exit_code = 1


class ContractViolation(DiracWeylError):
    def __init__(self, operation: str, detail: str):
        self.operation = operation
        self.detail = detail

    def __str__(self):
        return f"{self.operation}: {self.detail}"


class SignatureError(DiracWeylError):
    def __init__(self, check: str, measured: float, threshold: float):
        self.check = check
        self.measured = measured
        self.threshold = threshold

    def __str__(self):
        return (
            f"Not a signature matrix: |{self.check}| = {self.measured:.3e}"
            f" exceeds {self.threshold:.1e}"
        )


class PotentialError(DiracWeylError):
    exit_code = 2

    def __init__(self, msg: str, family: Optional[str] = None):
        self.msg = msg
        self.family = family

    def __str__(self):
        if self.family:
            return f"Potential '{self.family}': {self.msg}"
        return f"Potential: {self.msg}"


class IntegrationFailure(DiracWeylError):
    exit_code = 3

    def __init__(self, last_x: float, lam: complex, msg: str = ""):
        self.last_x = last_x
        self.lam = lam
        self.msg = msg

    def __str__(self):
        msg = f"Integration failed at x={self.last_x:.6g} for λ={self.lam}"
        if self.msg:
            msg += ": " + self.msg
        return msg


class AdmissibilityError(DiracWeylError):
    def __init__(self, rank: int, p: int, singular_values: Sequence[float] = ()):
        self.rank = rank
        self.p = p
        self.singular_values = list(singular_values)

    def __str__(self):
        msg = f"Pair is not admissible: rank [C1 C2] = {self.rank} < p = {self.p}"
        if self.singular_values:
            msg += " (singular values " + ", ".join(
                f"{s:.3e}" for s in self.singular_values) + ")"
        return msg


class UnsupportedFrameError(DiracWeylError):
    def __init__(self, operation: str, residual: float):
        self.operation = operation
        self.residual = residual

    def __str__(self):
        return (
            f"{self.operation} needs J in the off-diagonal form [[0, -I], [I, 0]]"
            f" (distance {self.residual:.3e}); change the frame first"
        )


class BoundarySingularError(DiracWeylError):
    exit_code = 3

    def __init__(self, condition: float, limit: float, lam: Optional[complex] = None):
        self.condition = condition
        self.limit = limit
        self.lam = lam

    def __str__(self):
        msg = "Boundary matrix singular"
        if self.lam is not None:
            msg += f" at λ={self.lam}"
        msg += (
            f": cond(C1 v1(0) + C2 v2(0)) = {self.condition:.3e} exceeds {self.limit:.1e}."
            " It is invertible exactly when λ is in the resolvent set of the extension."
        )
        return msg


class CayleyError(DiracWeylError):
    def __init__(self, condition: float):
        self.condition = condition

    def __str__(self):
        return (
            f"M0 + iI is singular (condition {self.condition:.3e});"
            " the Cayley transform needs Im M0 > 0"
        )


class UnwarrantedRegimeError(DiracWeylError):
    exit_code = 3

    def __init__(self, lam: complex, alpha: float, beta: float):
        self.lam = lam
        self.alpha = alpha
        self.beta = beta

    def __str__(self):
        return (
            f"λ={self.lam} has Im λ in the strip [{self.alpha:.6g}, {self.beta:.6g}],"
            " where the Weyl function is not unique. Pass --force to compute a candidate"
        )


class NonConvergenceError(DiracWeylError):
    exit_code = 3

    def __init__(self, failures: Sequence):
        self.failures = list(failures)

    def __str__(self):
        n = len(self.failures)
        head = ", ".join(str(f) for f in self.failures[:5])
        more = f" and {n - 5} more" if n > 5 else ""
        return f"No convergence for {n} {pluralize(n, 'λ-value')}: {head}{more}"


class SupportError(DiracWeylError):
    def __init__(self, value: float, tol: float):
        self.value = value
        self.tol = tol

    def __str__(self):
        return (
            f"Test function is not compactly supported in the interior:"
            f" endpoint magnitude {self.value:.3e} exceeds {self.tol:.1e}"
        )


class ScenarioError(DiracWeylError):
    exit_code = 2

    def __init__(self, source, detail: str = "", errors: Sequence[dict] = ()):
        self.source = source
        self.detail = detail
        self.errors = list(errors)

    def __str__(self):
        msg = f"Invalid scenario in {self.source}"
        if self.detail:
            msg += ": " + self.detail
        elif self.errors:
            msg += f": {len(self.errors)} validation {pluralize(self.errors, 'error')}"
        return msg
