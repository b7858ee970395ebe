"""
Potentials Q(x) of the Dirac-type expression J y' + Q(x) y.

Every named family is a subclass of `Potential` with a `family` attribute and is
picked up by `collect_families`. Derived potentials (adjoint, reflection, change of frame, block doubling) are
built by wrapping and are never registered.
"""

import inspect
import sys
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import make_interp_spline

from dirac_weyl.utils import PotentialError, matrix_to_pairs, pairs_to_matrix


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """Matrix from an ndarray or from row-major [re, im] pairs."""
    if isinstance(value, np.ndarray):
        mat = value.astype(complex)
    else:
        try:
            mat = pairs_to_matrix(value)
        except (TypeError, ValueError) as e:
            raise PotentialError(f"{name}: {e}") from e
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise PotentialError(f"{name} must be square, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise PotentialError(f"{name} has non-finite entries")
    return mat


class Potential:
    """Base class. Subclasses implement `_eval(x)` returning an n×n complex array."""

    family: Optional[str] = None
    is_constant = False

    def __init__(self, n: int):
        if n < 1:
            raise PotentialError(f"dimension must be positive, got {n}", self.family)
        self.n = n

    def _eval(self, x: float) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x: float) -> np.ndarray:
        return self._eval(float(x))

    def evaluate(self, xs: Sequence[float]) -> np.ndarray:
        return np.array([self._eval(float(x)) for x in xs]).reshape(len(xs), self.n, self.n)

    @property
    def breakpoints(self) -> tuple:
        """Abscissas where Q may jump; the integrator restarts there."""
        return ()

    def q1(self, x: float) -> np.ndarray:
        q = self(x)
        return (q + q.conj().T) / 2

    def q2(self, x: float) -> np.ndarray:
        q = self(x)
        return (q - q.conj().T) / 2j

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"family": self.family, "n": self.n, "params": self.params()}

    @classmethod
    def from_params(cls, n: int, params: dict) -> "Potential":
        raise NotImplementedError

    def adjoint(self) -> "Potential":
        return MappedPotential(self, lambda q: q.conj().T, label="adjoint")

    def reflected(self) -> "Potential":
        return MappedPotential(self, lambda q: q, x_map=lambda x: -x, label="reflected")

    def conjugated(self, U: np.ndarray) -> "Potential":
        """U* Q(x) U."""
        U = np.asarray(U, dtype=complex)
        Uh = U.conj().T
        return MappedPotential(self, lambda q: Uh @ q @ U, label="frame")

    def __repr__(self):
        return f"{self.__class__.__name__}(n={self.n})"


class ZeroPotential(Potential):
    family = "zero"
    is_constant = True

    def _eval(self, x):
        return np.zeros((self.n, self.n), dtype=complex)

    @classmethod
    def from_params(cls, n, params):
        if params:
            raise PotentialError(f"takes no parameters, got {sorted(params)}", cls.family)
        return cls(n)


class ConstantPotential(Potential):
    family = "constant"
    is_constant = True

    def __init__(self, matrix):
        self.matrix = as_matrix(matrix)
        super().__init__(self.matrix.shape[0])

    def _eval(self, x):
        return self.matrix.copy()

    def params(self):
        return {"matrix": matrix_to_pairs(self.matrix)}

    @classmethod
    def from_params(cls, n, params):
        pot = cls(params.get("matrix", np.zeros((n, n))))
        if pot.n != n:
            raise PotentialError(f"matrix is {pot.n}×{pot.n}, expected n={n}", cls.family)
        return pot


class ExpDecayPotential(Potential):
    """Q(x) = exp(-μ|x|) Q0."""

    family = "exp_decay"

    def __init__(self, matrix, mu: float = 1.0):
        self.matrix = as_matrix(matrix)
        if not (np.isfinite(mu) and mu >= 0):
            raise PotentialError(f"decay rate must be a finite μ >= 0, got {mu}", self.family)
        self.mu = float(mu)
        super().__init__(self.matrix.shape[0])
        self.is_constant = self.mu == 0

    def _eval(self, x):
        return np.exp(-self.mu * abs(x)) * self.matrix

    @property
    def breakpoints(self):
        return (0.0,)

    def params(self):
        return {"matrix": matrix_to_pairs(self.matrix), "mu": self.mu}

    @classmethod
    def from_params(cls, n, params):
        pot = cls(params.get("matrix", np.eye(n)), params.get("mu", 1.0))
        if pot.n != n:
            raise PotentialError(f"matrix is {pot.n}×{pot.n}, expected n={n}", cls.family)
        return pot


class NlsOffdiagPotential(Potential):
    """Q = i [[0, -q], [-q*, 0]] with q(x) = exp(-μ|x|) q0 and q0 = q0ᵀ.

    This is the shape for which the expression with J = i·diag(I, -I) is j-symmetric.
    """

    family = "nls_offdiag"

    def __init__(self, q, mu: float = 0.0):
        self.q = as_matrix(q, "q")
        if not np.allclose(self.q, self.q.T, rtol=0, atol=1e-14):
            raise PotentialError("q must be symmetric (q = qᵀ)", self.family)
        if not (np.isfinite(mu) and mu >= 0):
            raise PotentialError(f"decay rate must be a finite μ >= 0, got {mu}", self.family)
        self.mu = float(mu)
        self.p = self.q.shape[0]
        super().__init__(2 * self.p)
        self.is_constant = self.mu == 0

    def _eval(self, x):
        q = np.exp(-self.mu * abs(x)) * self.q
        zero = np.zeros_like(q)
        return 1j * np.block([[zero, -q], [-q.conj().T, zero]])

    @property
    def breakpoints(self):
        return (0.0,) if self.mu else ()

    def params(self):
        return {"q": matrix_to_pairs(self.q), "mu": self.mu}

    @classmethod
    def from_params(cls, n, params):
        if n % 2:
            raise PotentialError(f"needs even n, got {n}", cls.family)
        pot = cls(params.get("q", np.eye(n // 2)), params.get("mu", 0.0))
        if pot.n != n:
            raise PotentialError(f"q is {pot.p}×{pot.p}, expected p={n // 2}", cls.family)
        return pot


class SampledPotential(Potential):
    """Spline through samples (xs[k], Qs[k]), constant beyond the first and last sample.

    A repeated abscissa declares a breakpoint: the left and right samples there
    belong to separate spline pieces, so Q may jump.
    """

    family = "sampled"

    def __init__(self, xs, values, order: int = 3):
        xs = np.asarray(xs, dtype=float)
        values = np.asarray(values, dtype=complex)
        if xs.ndim != 1 or len(xs) < 2:
            raise PotentialError("need at least two sample abscissas", self.family)
        if values.ndim != 3 or values.shape[0] != len(xs) or values.shape[1] != values.shape[2]:
            raise PotentialError(
                f"values must have shape (m, n, n) with m={len(xs)}, got {values.shape}",
                self.family,
            )
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(values))):
            raise PotentialError("samples must be finite (no local singularities)", self.family)
        steps = np.diff(xs)
        if np.any(steps < 0):
            raise PotentialError("abscissas must be non-decreasing", self.family)
        if order not in (1, 3):
            raise PotentialError(f"interpolation order must be 1 or 3, got {order}", self.family)
        super().__init__(values.shape[1])
        self.xs = xs
        self.values = values
        self.order = order

        cuts = np.flatnonzero(steps == 0) + 1
        self._breaks = tuple(float(xs[i]) for i in cuts)
        self._starts = []
        self._pieces = []
        for idx in np.split(np.arange(len(xs)), cuts):
            if len(idx) < 2:
                raise PotentialError(
                    f"piece starting at x={xs[idx[0]]} has a single sample", self.family)
            k = min(order, len(idx) - 1)
            px, pv = xs[idx], values[idx]
            self._starts.append(px[0])
            self._pieces.append((
                make_interp_spline(px, pv.real, k=k, axis=0),
                make_interp_spline(px, pv.imag, k=k, axis=0),
                px[0],
                px[-1],
            ))

    def _eval(self, x):
        i = max(int(np.searchsorted(self._starts, x, side="right")) - 1, 0)
        re, im, lo, hi = self._pieces[i]
        x = min(max(x, lo), hi)
        return re(x) + 1j * im(x)

    @property
    def breakpoints(self):
        return self._breaks

    def params(self):
        return {
            "xs": self.xs.tolist(),
            "values": [matrix_to_pairs(v) for v in self.values],
            "order": self.order,
        }

    @classmethod
    def from_params(cls, n, params):
        try:
            xs = params["xs"]
            values = [as_matrix(v, "values") for v in params["values"]]
        except KeyError as e:
            raise PotentialError(f"missing parameter {e}", cls.family) from e
        pot = cls(xs, np.array(values), params.get("order", 3))
        if pot.n != n:
            raise PotentialError(f"samples are {pot.n}×{pot.n}, expected n={n}", cls.family)
        return pot


class MappedPotential(Potential):
    """Q̃(x) = f(Q(g(x))) for a derived expression."""

    def __init__(
        self,
        base: Potential,
        value_map: Callable[[np.ndarray], np.ndarray],
        x_map: Optional[Callable[[float], float]] = None,
        label: str = "",
    ):
        super().__init__(base.n)
        self.base = base
        self.value_map = value_map
        self.x_map = x_map
        self.label = label
        self.is_constant = base.is_constant

    def _eval(self, x):
        if self.x_map is not None:
            x = self.x_map(x)
        return self.value_map(self.base._eval(x))

    @property
    def breakpoints(self):
        if self.x_map is None:
            return self.base.breakpoints
        return tuple(sorted(self.x_map(b) for b in self.base.breakpoints))

    def describe(self):
        return {"derived": self.label, "of": self.base.describe()}

    def __repr__(self):
        return f"{self.label}({self.base!r})"


class BlockPotential(Potential):
    """[[0, Q], [Q*, 0]], the potential of the doubled formally selfadjoint expression."""

    def __init__(self, base: Potential):
        super().__init__(2 * base.n)
        self.base = base
        self.is_constant = base.is_constant

    def _eval(self, x):
        q = self.base._eval(x)
        zero = np.zeros_like(q)
        return np.block([[zero, q], [q.conj().T, zero]])

    @property
    def breakpoints(self):
        return self.base.breakpoints

    def describe(self):
        return {"derived": "block", "of": self.base.describe()}


def collect_families() -> dict:
    """Registered potential families by name."""
    families = {}
    for _, cls in inspect.getmembers(sys.modules[__name__], inspect.isclass):
        if issubclass(cls, Potential) and cls.family is not None:
            families[cls.family] = cls
    return families


@lru_cache()
def _families():
    return collect_families()


def family_names() -> list:
    return sorted(_families())


def make_potential(family: str, n: int, params: Optional[dict] = None) -> Potential:
    try:
        cls = _families()[family]
    except KeyError:
        raise PotentialError(
            f"unknown family, expected one of {', '.join(family_names())}", family) from None
    return cls.from_params(n, dict(params or {}))
