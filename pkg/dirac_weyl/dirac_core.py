"""
Dirac-type expressions J y' + Q(x) y = λ y: signature matrices, symmetry
classification, the fundamental solution and quadrature-based residuals.

Inner products are (a, b) = b* a throughout.
"""

from typing import Callable, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp, simpson
from scipy.linalg import svdvals

from dirac_weyl import logger
from dirac_weyl.potentials import BlockPotential, Potential
from dirac_weyl.settings import Settings, resolve
from dirac_weyl.utils import (
    ContractViolation,
    IntegrationFailure,
    PotentialError,
    SignatureError,
    matrix_to_pairs,
    opnorm,
)

# function evaluations per attempted step, used to estimate rejected steps
STAGES = {"RK45": 6, "DOP853": 15}


class SignatureMatrix:
    """Constant J with J* = J⁻¹ = -J."""

    __slots__ = ("matrix", "name")

    def __init__(self, matrix, name: Optional[str] = None, tol: Optional[float] = None):
        J = np.array(matrix, dtype=complex)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] == 0:
            raise ContractViolation("SignatureMatrix", f"J must be square, got shape {J.shape}")
        if tol is None:
            tol = resolve().signature.tol
        Jh = J.conj().T
        skew = opnorm(Jh + J)
        if skew >= tol:
            raise SignatureError("J* + J", skew, tol)
        unitary = opnorm(Jh @ J - np.eye(len(J)))
        if unitary >= tol:
            raise SignatureError("J*J - I", unitary, tol)
        J.setflags(write=False)
        self.matrix = J
        self.name = name

    @classmethod
    def canonical(cls, p: int = 1) -> "SignatureMatrix":
        """[[0, -I], [I, 0]]"""
        eye, zero = np.eye(p), np.zeros((p, p))
        return cls(np.block([[zero, -eye], [eye, zero]]), "canonical")

    @classmethod
    def diag_i(cls, p: int = 1) -> "SignatureMatrix":
        """i·diag(I, -I)"""
        return cls(1j * np.diag([1.0] * p + [-1.0] * p), "diag_i")

    @classmethod
    def diag_minus_i(cls, p: int = 1) -> "SignatureMatrix":
        """diag(-iI, iI)"""
        return cls(np.diag([-1j] * p + [1j] * p), "diag_minus_i")

    @classmethod
    def from_name(cls, name: str, n: int) -> "SignatureMatrix":
        constructors = {
            "canonical": cls.canonical,
            "diag_i": cls.diag_i,
            "diag_minus_i": cls.diag_minus_i,
        }
        if name not in constructors:
            raise ContractViolation(
                "SignatureMatrix", f"unknown form '{name}', expected one of {sorted(constructors)}")
        if n % 2:
            raise ContractViolation("SignatureMatrix", f"form '{name}' needs even n, got {n}")
        return constructors[name](n // 2)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def p(self) -> Optional[int]:
        return self.n // 2 if self.n % 2 == 0 else None

    @property
    def inverse(self) -> np.ndarray:
        return self.matrix.conj().T

    def negated(self) -> "SignatureMatrix":
        return SignatureMatrix(-self.matrix)

    def conjugated(self, U: np.ndarray) -> "SignatureMatrix":
        """U* J U for a unitary U."""
        U = np.asarray(U, dtype=complex)
        return SignatureMatrix(U.conj().T @ self.matrix @ U)

    def describe(self):
        if self.name:
            return self.name
        return matrix_to_pairs(self.matrix)

    def __eq__(self, other):
        return isinstance(other, SignatureMatrix) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def __repr__(self):
        return f"SignatureMatrix({self.name or self.n})"


def kappa(J: SignatureMatrix, settings: Optional[Settings] = None) -> Tuple[int, int]:
    """(κ₊, κ₋) = (dim ker(J + iI), dim ker(J - iI))."""
    thr = resolve(settings).rank.kappa_threshold * opnorm(J.matrix)
    eye = np.eye(J.n)
    plus = int(np.sum(svdvals(J.matrix + 1j * eye) <= thr))
    minus = int(np.sum(svdvals(J.matrix - 1j * eye) <= thr))
    return plus, minus


class Interval(NamedTuple):
    kind: Literal["finite", "half_line", "whole_line"]
    length: float  # L for a finite interval, the numeric cap L_max otherwise

    @classmethod
    def finite(cls, L: float) -> "Interval":
        if not L > 0:
            raise ContractViolation("Interval", f"length must be positive, got {L}")
        return cls("finite", float(L))

    @classmethod
    def half_line(cls, L_max: float = 40.0) -> "Interval":
        if not L_max > 0:
            raise ContractViolation("Interval", f"cap must be positive, got {L_max}")
        return cls("half_line", float(L_max))

    @classmethod
    def whole_line(cls, L_max: float = 40.0) -> "Interval":
        if not L_max > 0:
            raise ContractViolation("Interval", f"cap must be positive, got {L_max}")
        return cls("whole_line", float(L_max))

    def window(self) -> Tuple[float, float]:
        if self.kind == "whole_line":
            return -self.length, self.length
        return 0.0, self.length

    def contains(self, x: float) -> bool:
        a, b = self.window()
        return a <= x <= b


class DiracExpression:
    """D(Q) y = J y' + Q(x) y on an interval."""

    __slots__ = ("J", "Q", "interval")

    def __init__(self, J: SignatureMatrix, Q: Potential, interval: Optional[Interval] = None):
        if J.n != Q.n:
            raise ContractViolation("DiracExpression", f"J is {J.n}×{J.n} but Q is {Q.n}×{Q.n}")
        self.J = J
        self.Q = Q
        self.interval = interval if interval is not None else Interval.half_line()

    @property
    def n(self) -> int:
        return self.J.n

    @property
    def p(self) -> Optional[int]:
        return self.J.p

    def coefficient(self, x: float, lam: complex) -> np.ndarray:
        """J⁻¹(λI - Q(x)), the matrix of the explicit system y' = A(x) y."""
        return self.J.inverse @ (lam * np.eye(self.n) - self.Q(x))

    def with_interval(self, interval: Interval) -> "DiracExpression":
        return DiracExpression(self.J, self.Q, interval)

    def adjoint(self) -> "DiracExpression":
        """The formal adjoint D(Q*)."""
        return DiracExpression(self.J, self.Q.adjoint(), self.interval)

    def change_frame(self, U: np.ndarray) -> "DiracExpression":
        """Expression for z with y = U z: J -> U*JU, Q -> U*QU."""
        return DiracExpression(self.J.conjugated(U), self.Q.conjugated(U), self.interval)

    def reflected(self) -> "DiracExpression":
        """Expression for z(x) = y(-x): J -> -J, Q(x) -> Q(-x)."""
        return DiracExpression(self.J.negated(), self.Q.reflected(), self.interval)

    def half_line(self) -> "DiracExpression":
        return DiracExpression(self.J, self.Q, Interval.half_line(self.interval.length))

    def block_selfadjoint(self) -> "DiracExpression":
        """[[0, J], [J, 0]] y' + [[0, Q], [Q*, 0]] y, formally selfadjoint in dimension 2n."""
        zero = np.zeros_like(self.J.matrix)
        J2 = SignatureMatrix(np.block([[zero, self.J.matrix], [self.J.matrix, zero]]))
        return DiracExpression(J2, BlockPotential(self.Q), self.interval)

    def describe(self) -> dict:
        return {
            "J": self.J.describe(),
            "n": self.n,
            "potential": self.Q.describe(),
            "interval": {"kind": self.interval.kind, "length": self.interval.length},
        }

    def __repr__(self):
        return f"DiracExpression(J={self.J!r}, Q={self.Q!r}, {self.interval.kind})"


class SymmetryReport(NamedTuple):
    formally_selfadjoint: bool
    j_symmetric: bool
    almost_fsa: bool
    alpha: Optional[float]
    beta: Optional[float]
    p: Optional[int]
    j_reason: Optional[str] = None
    hermitian_residual: float = 0.0

    def to_record(self) -> dict:
        return self._asdict()


def flip(p: int) -> np.ndarray:
    """Ũ = [[0, I], [I, 0]], the matrix part of the flip conjugation."""
    eye, zero = np.eye(p), np.zeros((p, p))
    return np.block([[zero, eye], [eye, zero]])


def sample_points(expr: DiracExpression, settings: Optional[Settings] = None) -> np.ndarray:
    """Evaluation abscissas over the numeric window, breakpoints included."""
    settings = resolve(settings)
    a, b = expr.interval.window()
    xs = np.linspace(a, b, settings.potential.sample_points)
    extra = [x for x in expr.Q.breakpoints if a <= x <= b]
    return np.unique(np.concatenate([xs, extra]))


def classify(
    expr: DiracExpression, tol: Optional[float] = None, settings: Optional[Settings] = None
) -> SymmetryReport:
    settings = resolve(settings)
    if tol is None:
        tol = settings.signature.tol
    xs = sample_points(expr, settings)
    Qs = expr.Q.evaluate(xs)
    if not np.all(np.isfinite(Qs)):
        bad = xs[np.argmax(~np.isfinite(Qs).reshape(len(xs), -1).any(axis=1))]
        raise PotentialError(f"non-finite value at x={bad:.6g}", expr.Q.family)

    Qh = np.conj(np.swapaxes(Qs, 1, 2))
    Q1 = (Qs + Qh) / 2
    Q2 = (Qs - Qh) / 2j
    scale = max(1.0, float(np.max(np.abs(Qs))))
    herm = max(
        float(np.max(np.abs(Q1 - np.conj(np.swapaxes(Q1, 1, 2))))),
        float(np.max(np.abs(Q2 - np.conj(np.swapaxes(Q2, 1, 2))))),
    )
    if herm > settings.potential.hermitian_tol * scale:
        raise ContractViolation("classify", f"Q1/Q2 split is not Hermitian ({herm:.3e})")

    q2_norms = np.array([opnorm(m) for m in Q2])
    fsa = bool(np.all(q2_norms <= tol * scale))

    n = expr.n
    reason = None
    if n % 2:
        j_sym = False
        reason = "n odd"
    else:
        U = flip(n // 2)
        J = expr.J.matrix
        j_res = opnorm(U @ J.conj() @ U - J)
        if j_res > tol:
            j_sym = False
            reason = f"J is not invariant under the flip conjugation ({j_res:.3e})"
        else:
            res = np.abs(U @ Qs.conj() @ U - Qh).reshape(len(xs), -1).max(axis=1)
            j_sym = bool(np.all(res <= tol * scale))
            if not j_sym:
                reason = f"Q violates the flip symmetry at x={xs[np.argmax(res)]:.6g}"

    # every family is bounded beyond the window (sampled data is held constant),
    # so the sampled eigenvalue extremes of Q2 are its bounds
    eigs = np.linalg.eigvalsh(Q2)
    almost = bool(np.all(np.isfinite(eigs)))
    alpha = beta = None
    if fsa:
        alpha = beta = 0.0
    elif almost:
        alpha, beta = float(eigs.min()), float(eigs.max())

    report = SymmetryReport(
        formally_selfadjoint=fsa,
        j_symmetric=j_sym,
        almost_fsa=almost,
        alpha=alpha,
        beta=beta,
        p=expr.p,
        j_reason=reason,
        hermitian_residual=herm,
    )
    logger.debug(f"classify {expr!r}: {report}")
    return report


class Trajectory:
    """Dense solution of y' = A(x) y for an N×k block of columns.

    The grid is strictly increasing whatever the direction of integration was.
    """

    def __init__(self, segments, grid: np.ndarray, values: np.ndarray, stats: dict):
        self.segments = segments  # (lo, hi, OdeSolution), sorted by lo
        self.grid = grid
        self.values = values
        self.stats = stats
        self._highs = np.array([hi for _, hi, _ in segments])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape[1:]

    @property
    def domain(self) -> Tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def __call__(self, x: float) -> np.ndarray:
        i = min(int(np.searchsorted(self._highs, x, side="left")), len(self.segments) - 1)
        return self.segments[i][2](x).reshape(self.shape)

    def sample(self, xs: Sequence[float]) -> np.ndarray:
        return np.array([self(x) for x in xs]).reshape(len(xs), *self.shape)


def propagate_system(
    matrix_fn: Callable[[float], np.ndarray],
    y0: np.ndarray,
    x0: float,
    x1: float,
    *,
    breakpoints: Sequence[float] = (),
    rtol: float,
    atol: float,
    method: str = "RK45",
    lam: Optional[complex] = None,
) -> Trajectory:
    """Integrate y' = A(x) y from x0 to x1, restarting at breakpoints."""
    y0 = np.array(y0, dtype=complex)
    if y0.ndim == 1:
        y0 = y0[:, None]
    N, k = y0.shape

    def rhs(x, y):
        return (matrix_fn(x) @ y.reshape(N, k)).ravel()

    direction = 1.0 if x1 >= x0 else -1.0
    inner = sorted(
        (b for b in breakpoints if min(x0, x1) < b < max(x0, x1)),
        key=lambda b: direction * b,
    )
    knots = [x0, *inner, x1]

    segments, times, values = [], [], []
    steps = nfev = 0
    y = y0.ravel()
    for a, b in zip(knots[:-1], knots[1:]):
        if a == b:
            continue
        sol = solve_ivp(rhs, (a, b), y, method=method, rtol=rtol, atol=atol, dense_output=True)
        if sol.status == -1:
            logger.warning(f"Step size underflow at x={sol.t[-1]:.6g} (λ={lam})")
            raise IntegrationFailure(float(sol.t[-1]), lam, sol.message)
        steps += len(sol.t) - 1
        nfev += sol.nfev
        segments.append((min(a, b), max(a, b), sol.sol))
        skip = 1 if times else 0  # junction point already stored
        times.extend(sol.t[skip:])
        values.extend(sol.y.T[skip:])
        y = sol.y[:, -1]

    if not segments:
        # zero-length span: Y = y0 exactly
        grid = np.array([x0], dtype=float)
        vals = y0[None]
        const = _Constant(y0.ravel())
        return Trajectory([(x0, x0, const)], grid, vals, _stats(0, 0, 0, rtol, atol, 1.0, method))

    grid = np.asarray(times, dtype=float)
    vals = np.asarray(values).reshape(len(grid), N, k)
    vals[0] = y0
    if direction < 0:
        grid, vals = grid[::-1], vals[::-1]
        segments = segments[::-1]
    peak = float(np.max(np.abs(vals)))
    return Trajectory(segments, grid, vals, _stats(steps, nfev, len(segments), rtol, atol, peak, method))


class _Constant:
    """Dense-output stand-in for a zero-length integration."""

    def __init__(self, y):
        self.y = y

    def __call__(self, x):
        return self.y.copy()


def _stats(steps, nfev, pieces, rtol, atol, peak, method):
    attempts = max(nfev - 2 * pieces, 0) // STAGES.get(method, 6)
    return {
        "steps": steps,
        "rejected": max(attempts - steps, 0),
        "nfev": nfev,
        "error_bound": steps * (rtol * peak + atol),
    }


class FundamentalSolution(Trajectory):
    """Y(x; λ) with Y(x_start) = y0 (the identity by default)."""

    def __init__(self, lam: complex, traj: Trajectory, order: int, residual: float, max_cond: float):
        super().__init__(traj.segments, traj.grid, traj.values, traj.stats)
        self.lam = lam
        self.order = order
        self.ode_residual = residual
        self.max_condition = max_cond

    def column(self, coeffs, expr: DiracExpression) -> "VectorFunction":
        """y(x) = Y(x) c as a VectorFunction with the exact ODE derivative."""
        return VectorFunction.from_solution(self, expr, coeffs)

    def to_frame(self) -> pd.DataFrame:
        data = {"x": self.grid}
        N, k = self.shape
        for i in range(N):
            for j in range(k):
                data[f"Y_{i}_{j}_re"] = self.values[:, i, j].real
                data[f"Y_{i}_{j}_im"] = self.values[:, i, j].imag
        return pd.DataFrame(data)


def propagate(
    expr: DiracExpression,
    lam: complex,
    x_end: float,
    rtol: Optional[float] = None,
    atol: Optional[float] = None,
    settings: Optional[Settings] = None,
    *,
    x_start: float = 0.0,
    y0: Optional[np.ndarray] = None,
) -> FundamentalSolution:
    settings = resolve(settings)
    cfg = settings.integrator
    rtol = cfg.rtol if rtol is None else rtol
    atol = cfg.atol if atol is None else atol
    if not (rtol > 0 and atol > 0):
        raise ContractViolation("propagate", f"rtol and atol must be positive, got {rtol}, {atol}")
    for x in (x_start, x_end):
        if not expr.interval.contains(x):
            raise ContractViolation(
                "propagate", f"x={x} outside the window {expr.interval.window()}")
    lam = complex(lam)
    if y0 is None:
        y0 = np.eye(expr.n, dtype=complex)
    elif np.asarray(y0).shape[0] != expr.n:
        raise ContractViolation("propagate", f"initial value has {np.asarray(y0).shape[0]} rows, n={expr.n}")

    traj = propagate_system(
        lambda x: expr.coefficient(x, lam),
        y0,
        x_start,
        x_end,
        breakpoints=expr.Q.breakpoints,
        rtol=rtol,
        atol=atol,
        method=cfg.method,
        lam=lam,
    )
    max_cond = 1.0
    if traj.shape[0] == traj.shape[1]:
        max_cond = _check_conditioning(traj, lam, cfg.condition_warning)
    residual = _ode_residual(expr, lam, traj)
    if residual > cfg.residual_tol:
        logger.warning(f"ODE residual {residual:.3e} above {cfg.residual_tol:.1e} for λ={lam}")
    order = 5 if cfg.method == "RK45" else 7
    return FundamentalSolution(lam, traj, order, residual, max_cond)


def _check_conditioning(traj: Trajectory, lam: complex, limit: float) -> float:
    conds = np.linalg.cond(traj.values)
    if not np.all(np.isfinite(conds)):
        bad = traj.grid[np.argmax(~np.isfinite(conds))]
        raise IntegrationFailure(float(bad), lam, "fundamental matrix became singular")
    worst = int(np.argmax(conds))
    if conds[worst] > limit:
        logger.warning(
            f"Ill-conditioned fundamental matrix at x={traj.grid[worst]:.6g}"
            f" (cond {conds[worst]:.3e}, λ={lam})"
        )
    return float(conds[worst])


def _ode_residual(expr: DiracExpression, lam: complex, traj: Trajectory, max_points: int = 200) -> float:
    """max over step midpoints of |J Y' + Q Y - λY|, Y' by central differences of the dense output."""
    grid = traj.grid
    if len(grid) < 2:
        return 0.0
    mids = (grid[:-1] + grid[1:]) / 2
    widths = np.diff(grid)
    pick = np.unique(np.linspace(0, len(mids) - 1, min(max_points, len(mids))).astype(int))
    worst = 0.0
    J = expr.J.matrix
    for m, w in zip(mids[pick], widths[pick]):
        if w <= 0:
            continue
        h = min(1e-5, w / 4)
        dY = (traj(m + h) - traj(m - h)) / (2 * h)
        Y = traj(m)
        Qm = expr.Q(m)
        r = opnorm(J @ dY + Qm @ Y - lam * Y)
        worst = max(worst, r / (max(1.0, opnorm(Y)) * (1 + abs(lam) + opnorm(Qm))))
    return worst


class VectorFunction:
    """An n-vector function with derivative access on [lo, hi].

    `value(xs)` and `derivative(xs)` return arrays of shape (len(xs), n).
    """

    def __init__(
        self,
        n: int,
        value: Callable[[np.ndarray], np.ndarray],
        derivative: Callable[[np.ndarray], np.ndarray],
        domain: Tuple[float, float] = (-np.inf, np.inf),
        breakpoints: Sequence[float] = (),
    ):
        self.n = n
        self._value = value
        self._derivative = derivative
        self.domain = domain
        self.breakpoints = tuple(breakpoints)

    def __call__(self, xs) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        return np.asarray(self._value(xs), dtype=complex).reshape(len(xs), self.n)

    def derivative(self, xs) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        return np.asarray(self._derivative(xs), dtype=complex).reshape(len(xs), self.n)

    @classmethod
    def zero(cls, n: int) -> "VectorFunction":
        def z(xs):
            return np.zeros((len(xs), n), dtype=complex)
        return cls(n, z, z)

    @classmethod
    def from_solution(cls, sol: Trajectory, expr: DiracExpression, coeffs=None) -> "VectorFunction":
        """y = Y(x) c with y' = J⁻¹(λ - Q(x)) y."""
        N, k = sol.shape
        c = np.ones(1, dtype=complex) if k == 1 and coeffs is None else np.asarray(coeffs, dtype=complex)
        if c.shape != (k,):
            raise ContractViolation("VectorFunction", f"need {k} coefficients, got shape {c.shape}")
        lam = getattr(sol, "lam", None)
        if lam is None:
            raise ContractViolation("VectorFunction", "solution carries no spectral parameter")

        def value(xs):
            return np.array([sol(x) @ c for x in xs])

        def derivative(xs):
            return np.array([expr.coefficient(x, lam) @ (sol(x) @ c) for x in xs])

        return cls(N, value, derivative, sol.domain, expr.Q.breakpoints)

    @classmethod
    def from_polynomials(cls, polys: Sequence[Polynomial]) -> "VectorFunction":
        derivs = [p.deriv() for p in polys]

        def value(xs):
            return np.stack([p(xs) for p in polys], axis=1)

        def derivative(xs):
            return np.stack([d(xs) for d in derivs], axis=1)

        return cls(len(polys), value, derivative)

    @classmethod
    def bump(cls, a: float, b: float, vector) -> "VectorFunction":
        """exp(-1/((x-a)(b-x))) on (a, b) times a fixed vector, zero elsewhere."""
        if not a < b:
            raise ContractViolation("VectorFunction.bump", f"empty support [{a}, {b}]")
        vec = np.asarray(vector, dtype=complex)

        def profile(xs):
            out = np.zeros_like(xs)
            dout = np.zeros_like(xs)
            inside = (xs > a) & (xs < b)
            t = xs[inside]
            g = (t - a) * (b - t)
            out[inside] = np.exp(-1.0 / g)
            dout[inside] = out[inside] * (b + a - 2 * t) / g ** 2
            return out, dout

        def value(xs):
            return profile(xs)[0][:, None] * vec[None, :]

        def derivative(xs):
            return profile(xs)[1][:, None] * vec[None, :]

        return cls(len(vec), value, derivative)

    def scaled(self, c: complex) -> "VectorFunction":
        return VectorFunction(
            self.n,
            lambda xs: c * self._value(xs),
            lambda xs: c * self._derivative(xs),
            self.domain,
            self.breakpoints,
        )


class Quadrature(NamedTuple):
    value: complex
    error: float


def quadrature_grid(a: float, b: float, breakpoints: Sequence[float], settings: Settings):
    """Pieces of odd-sized uniform grids covering [a, b], split at breakpoints."""
    cfg = settings.quadrature
    cuts = [a, *sorted(x for x in set(breakpoints) if a < x < b), b]
    pieces = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        m = max(cfg.min_points, int(np.ceil(cfg.points_per_unit * (hi - lo))))
        m += 1 - m % 2  # odd, so every other node is again a Simpson grid
        pieces.append(np.linspace(lo, hi, m))
    return pieces


def integrate(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    breakpoints: Sequence[float] = (),
    settings: Optional[Settings] = None,
) -> Quadrature:
    """Composite Simpson of fn over [a, b]; error by comparison with the halved grid.

    fn maps an abscissa array to values with the abscissa on axis 0.
    """
    settings = resolve(settings)
    total = 0.0
    error = 0.0
    for xs in quadrature_grid(a, b, breakpoints, settings):
        vals = np.asarray(fn(xs))
        fine = simpson(vals, x=xs, axis=0)
        coarse = simpson(vals[::2], x=xs[::2], axis=0)
        total = total + fine
        error += float(np.max(np.abs(fine - coarse))) / 15
    return Quadrature(total, error)


def lagrange_residual(
    expr: DiracExpression,
    y: VectorFunction,
    z: VectorFunction,
    interval: Tuple[float, float],
    settings: Optional[Settings] = None,
) -> complex:
    """∫[(D(Q)y, z) - (y, D(Q*)z)] + (J y(a), z(a)) - (J y(b), z(b)); vanishes identically."""
    if y.n != expr.n or z.n != expr.n:
        raise ContractViolation(
            "lagrange_residual", f"functions have dimensions {y.n}, {z.n} but n={expr.n}")
    a, b = interval
    if not a < b:
        raise ContractViolation("lagrange_residual", f"empty interval [{a}, {b}]")
    J = expr.J.matrix

    def integrand(xs):
        yv, zv = y(xs), z(xs)
        Qs = expr.Q.evaluate(xs)
        Dy = y.derivative(xs) @ J.T + np.einsum("mij,mj->mi", Qs, yv)
        Dz = z.derivative(xs) @ J.T + np.einsum("mji,mj->mi", Qs.conj(), zv)
        return np.einsum("mi,mi->m", zv.conj(), Dy) - np.einsum("mi,mi->m", Dz.conj(), yv)

    def jform(x):
        return complex(np.vdot(z(x)[0], J @ y(x)[0]))

    breaks = set(expr.Q.breakpoints) | set(y.breakpoints) | set(z.breakpoints)
    quad = integrate(integrand, a, b, tuple(breaks), settings)
    return complex(quad.value) + jform(a) - jform(b)


def l2_tail_norm(
    sol,
    window: Tuple[float, float],
    settings: Optional[Settings] = None,
    breakpoints: Sequence[float] = (),
) -> Quadrature:
    """∫_a^b |v(x)|² dx for a VectorFunction-like v (callable on abscissa arrays)."""
    a, b = window
    lo, hi = getattr(sol, "domain", (-np.inf, np.inf))
    if not a < b:
        raise ContractViolation("l2_tail_norm", f"empty window [{a}, {b}]")
    if a < lo - 1e-12 or b > hi + 1e-12:
        raise ContractViolation("l2_tail_norm", f"window [{a}, {b}] outside [{lo}, {hi}]")

    def integrand(xs):
        v = sol(xs)
        return np.sum(np.abs(v) ** 2, axis=1)

    breaks = tuple(breakpoints) + tuple(getattr(sol, "breakpoints", ()))
    quad = integrate(integrand, a, b, breaks, settings)
    return Quadrature(float(np.real(quad.value)), quad.error)


def conjugation_residual(
    expr: DiracExpression, lam: complex, x_end: float, settings: Optional[Settings] = None
) -> float:
    """max_x |Ũ conj(Y(x; λ)) Ũ - Y_{Q*}(x; λ̄)| relative to |Y_{Q*}(x; λ̄)|."""
    if expr.n % 2:
        raise ContractViolation("conjugation_residual", f"needs even n, got {expr.n}")
    U = flip(expr.n // 2)
    Y = propagate(expr, lam, x_end, settings=settings)
    Ystar = propagate(expr.adjoint(), np.conj(lam), x_end, settings=settings)
    xs = np.linspace(*sorted((0.0, x_end)), 101)
    worst = 0.0
    for x in xs:
        target = Ystar(x)
        worst = max(worst, opnorm(U @ Y(x).conj() @ U - target) / max(1.0, opnorm(target)))
    return worst
