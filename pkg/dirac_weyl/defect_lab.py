"""
Defect numbers: L² solution counts on the half-line, and finite-interval
surrogates of the dual-pair dimension formulas, where every solution is
square integrable and each count is a rank.
"""

from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import svdvals

from dirac_weyl import logger
from dirac_weyl.boundary_algebra import BoundarySubspace, theta_cross
from dirac_weyl.dirac_core import (
    DiracExpression,
    SignatureMatrix,
    SymmetryReport,
    Trajectory,
    VectorFunction,
    classify,
    integrate,
    kappa,
    propagate,
    propagate_system,
)
from dirac_weyl.settings import Settings, resolve
from dirac_weyl.utils import ContractViolation, SupportError
from dirac_weyl.weyl_engine import regime_of


class DefectReport(NamedTuple):
    lam: complex
    count: Optional[int]  # None when indeterminate
    exponents: Tuple[float, ...]
    regime: str
    expected: Optional[int]
    status: str  # PASS, FAIL, indeterminate or n/a
    margin: float
    offending: Optional[float] = None

    def to_record(self) -> dict:
        return {
            "lam_re": self.lam.real,
            "lam_im": self.lam.imag,
            "count": self.count,
            "expected": self.expected,
            "regime": self.regime,
            "status": self.status,
            "margin": self.margin,
            "exponents": " ".join(f"{e:.6g}" for e in self.exponents),
            "offending": self.offending,
        }


def expected_count(
    expr: DiracExpression, lam: complex, report: SymmetryReport, settings: Optional[Settings] = None
) -> Optional[int]:
    """κ₊ above the strip and κ₋ below it for almost-fsa expressions, p for j-symmetric ones."""
    regime = regime_of(complex(lam), report)
    if regime in ("upper", "lower"):
        plus, minus = kappa(expr.J, settings)
        return plus if regime == "upper" else minus
    if report.j_symmetric:
        return report.p
    return None


def growth_exponents(
    expr: DiracExpression, lam: complex, L: float, settings: Settings
) -> np.ndarray:
    """Lyapunov-type exponents of the solution space by forward QR continuation.

    The log-diagonal of R is accumulated at every re-orthonormalization and the
    slope is fitted over the trailing `regression_fraction` of [0, L].
    """
    cfg = settings.defect
    icfg = settings.integrator
    n = expr.n
    W = np.eye(n, dtype=complex)
    xs, logs = [0.0], [np.zeros(n)]
    total = np.zeros(n)
    x = 0.0
    while x < L:
        x_next = min(x + cfg.reorth_interval, L)
        traj = propagate_system(
            lambda s: expr.coefficient(s, lam),
            W,
            x,
            x_next,
            breakpoints=expr.Q.breakpoints,
            rtol=icfg.rtol,
            atol=icfg.atol,
            method=icfg.method,
            lam=lam,
        )
        W, R = np.linalg.qr(traj(x_next))
        total = total + np.log(np.abs(np.diag(R)))
        xs.append(x_next)
        logs.append(total.copy())
        x = x_next
    xs = np.asarray(xs)
    logs = np.asarray(logs)
    tail = xs >= L * (1 - cfg.regression_fraction)
    slopes = np.polyfit(xs[tail], logs[tail], 1)[0]
    return np.sort(np.atleast_1d(slopes))


def count_l2(
    expr: DiracExpression,
    lam: complex,
    settings: Optional[Settings] = None,
    report: Optional[SymmetryReport] = None,
    L: Optional[float] = None,
) -> DefectReport:
    settings = resolve(settings)
    if expr.interval.kind != "half_line":
        raise ContractViolation("count_l2", f"needs a half-line expression, got {expr.interval.kind}")
    lam = complex(lam)
    report = report or classify(expr, settings=settings)
    L = min(L or settings.defect.L, expr.interval.length)
    exps = growth_exponents(expr, lam, L, settings)

    if report.alpha is not None:
        gap = min(abs(lam.imag - report.alpha), abs(lam.imag - report.beta))
    else:
        gap = abs(lam.imag)
    margin = settings.defect.margin_fraction * gap
    regime = regime_of(lam, report)
    expected = expected_count(expr, lam, report, settings)

    close = np.abs(exps) <= margin
    if close.any():
        offending = float(exps[np.argmax(close)])
        logger.info(f"λ={lam}: exponent {offending:.3e} within ±{margin:.3e}, indeterminate")
        return DefectReport(lam, None, tuple(exps.tolist()), regime, expected,
                            "indeterminate", margin, offending)

    count = int(np.sum(exps < -margin))
    if expected is None:
        status = "n/a"
    else:
        status = "PASS" if count == expected else "FAIL"
    if status == "FAIL":
        logger.warning(f"λ={lam}: counted {count} L² solutions, expected {expected}")
    return DefectReport(lam, count, tuple(exps.tolist()), regime, expected, status, margin)


class KernelRank(NamedTuple):
    rank: int
    singular_values: Tuple[float, ...]
    ambiguous: bool
    L: float


def _require_finite(expr: DiracExpression, operation: str):
    if expr.interval.kind != "finite":
        raise ContractViolation(operation, f"needs a finite interval, got {expr.interval.kind}")


def second_order_matrix(expr: DiracExpression, x: float) -> np.ndarray:
    """Z = (y, w) with w = D(Q*)y and D(Q)w = -y, as Z' = [[-J⁻¹Q*, J⁻¹], [-J⁻¹, -J⁻¹Q]] Z."""
    Jinv = expr.J.inverse
    Q = expr.Q(x)
    return np.block([[-Jinv @ Q.conj().T, Jinv], [-Jinv, -Jinv @ Q]])


def kernel_basis(
    expr: DiracExpression, settings: Optional[Settings] = None, L: Optional[float] = None
) -> Trajectory:
    """Fundamental solution of the 2n-system behind ker(I + B*A*), identity at 0."""
    settings = resolve(settings)
    cfg = settings.integrator
    L = expr.interval.length if L is None else L
    return propagate_system(
        lambda x: second_order_matrix(expr, x),
        np.eye(2 * expr.n, dtype=complex),
        0.0,
        L,
        breakpoints=expr.Q.breakpoints,
        rtol=cfg.rtol,
        atol=cfg.atol,
        method=cfg.method,
    )


def _rank(mat: np.ndarray, settings: Settings) -> Tuple[int, np.ndarray, bool]:
    s = svdvals(mat)
    thr = settings.rank.finite_interval_threshold * s[0]
    band = settings.rank.ambiguity_band
    ambiguous = bool(np.any((s > thr / band) & (s < thr * band)))
    return int(np.sum(s > thr)), s, ambiguous


def kernel_rank(expr: DiracExpression, settings: Optional[Settings] = None) -> KernelRank:
    settings = resolve(settings)
    _require_finite(expr, "kernel_rank")
    L = expr.interval.length
    rank, s, ambiguous = _rank(kernel_basis(expr, settings)(L), settings)
    if ambiguous:
        L = L * 1.01
        logger.warning(f"Rank ambiguous at L={expr.interval.length:g}, retrying at L={L:g}")
        stretched = expr.with_interval(expr.interval.finite(L))
        rank, s, ambiguous = _rank(kernel_basis(stretched, settings)(L), settings)
    return KernelRank(rank, tuple(s.tolist()), ambiguous, L)


def finite_interval_kernel(expr: DiracExpression, settings: Optional[Settings] = None) -> int:
    """dim ker(I + B*A*): every solution of D(Q)D(Q*)y = -y lies in the maximal domain."""
    return kernel_rank(expr, settings).rank


def kernel_element(
    expr: DiracExpression, basis: Trajectory, coeffs
) -> Tuple[VectorFunction, VectorFunction]:
    """(g, D(Q*)g) for the kernel solution with Z(0) = coeffs."""
    n = expr.n
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (2 * n,):
        raise ContractViolation("kernel_element", f"need {2 * n} coefficients, got {c.shape}")

    def z(xs):
        return np.array([basis(x) @ c for x in xs])

    def dz(xs):
        return np.array([second_order_matrix(expr, x) @ (basis(x) @ c) for x in xs])

    g = VectorFunction(n, lambda xs: z(xs)[:, :n], lambda xs: dz(xs)[:, :n], basis.domain, expr.Q.breakpoints)
    w = VectorFunction(n, lambda xs: z(xs)[:, n:], lambda xs: dz(xs)[:, n:], basis.domain, expr.Q.breakpoints)
    return g, w


def graph_orthogonality_probe(
    expr: DiracExpression,
    g: Tuple[VectorFunction, VectorFunction],
    f: VectorFunction,
    settings: Optional[Settings] = None,
    support_tol: float = 1e-12,
) -> float:
    """|(f, g) + (D(Q*)f, D(Q*)g)| for f vanishing near both endpoints.

    `g` is the pair returned by `kernel_element`.
    """
    settings = resolve(settings)
    _require_finite(expr, "graph_orthogonality_probe")
    g_fn, w_fn = g
    if f.n != expr.n or g_fn.n != expr.n:
        raise ContractViolation("graph_orthogonality_probe", f"dimension mismatch with n={expr.n}")
    L = expr.interval.length
    ends = np.array([0.0, 0.005 * L, 0.995 * L, L])
    edge = float(max(np.max(np.abs(f(ends))), np.max(np.abs(f.derivative(ends)))))
    if edge > support_tol:
        raise SupportError(edge, support_tol)
    J = expr.J.matrix

    def integrand(xs):
        fv = f(xs)
        Qs = expr.Q.evaluate(xs)
        Df = f.derivative(xs) @ J.T + np.einsum("mji,mj->mi", Qs.conj(), fv)
        return np.einsum("mi,mi->m", g_fn(xs).conj(), fv) + np.einsum("mi,mi->m", w_fn(xs).conj(), Df)

    return float(abs(integrate(integrand, 0.0, L, expr.Q.breakpoints, settings).value))


class VonNeumannCheck(NamedTuple):
    rank: int
    passed: bool
    singular_values: Tuple[float, ...]


def von_neumann_dimension_check(
    expr: DiracExpression, settings: Optional[Settings] = None
) -> VonNeumannCheck:
    """Rank of the boundary traces (y(0), y(L)) of the solutions at ±i; must be 2n."""
    settings = resolve(settings)
    _require_finite(expr, "von_neumann_dimension_check")
    report = classify(expr, settings=settings)
    if not report.formally_selfadjoint:
        raise ContractViolation("von_neumann_dimension_check", "needs a formally selfadjoint expression")
    n = expr.n
    L = expr.interval.length
    Yp = propagate(expr, 1j, L, settings=settings)(L)
    Ym = propagate(expr, -1j, L, settings=settings)(L)
    eye = np.eye(n)
    traces = np.block([[eye, eye], [Yp, Ym]])
    rank, s, _ = _rank(traces, settings)
    passed = rank == 2 * n
    if not passed:
        logger.warning(f"von Neumann rank {rank} < {2 * n}; singular values {s}")
    return VonNeumannCheck(rank, passed, tuple(s.tolist()))


class QuasiDims(NamedTuple):
    dim_theta: int
    dim_cross: int
    quasi: bool


def quasi_selfadjoint_dims(theta: BoundarySubspace, J: SignatureMatrix) -> QuasiDims:
    cross = theta_cross(theta, J)
    quasi = J.n % 2 == 0 and theta.dim == cross.dim == J.n // 2
    return QuasiDims(theta.dim, cross.dim, quasi)


class FiniteDefectSum(NamedTuple):
    dim_adjoint: int  # solutions of D(Q*) at λ̄
    dim_direct: int  # solutions of D(Q) at λ
    total: int
    passed: bool


def finite_defect_sum(expr: DiracExpression, lam: complex = 1j,
                      settings: Optional[Settings] = None) -> FiniteDefectSum:
    """dim N_λ̄(A) + dim N_λ(B) = 2n on a finite interval."""
    settings = resolve(settings)
    _require_finite(expr, "finite_defect_sum")
    L = expr.interval.length
    lam = complex(lam)
    first, _, _ = _rank(propagate(expr.adjoint(), np.conj(lam), L, settings=settings)(L), settings)
    second, _, _ = _rank(propagate(expr, lam, L, settings=settings)(L), settings)
    total = first + second
    return FiniteDefectSum(first, second, total, total == 2 * expr.n)


class BlockDefectCheck(NamedTuple):
    trace_rank: int
    n_plus: int
    n_minus: int
    passed: bool


def block_defect_check(expr: DiracExpression, settings: Optional[Settings] = None) -> BlockDefectCheck:
    """On S = [[0, D(Q)], [D(Q*), 0]] (dimension 2n): von Neumann rank 4n, n±(S) = 2n."""
    settings = resolve(settings)
    _require_finite(expr, "block_defect_check")
    block = expr.block_selfadjoint()
    L = block.interval.length
    vn = von_neumann_dimension_check(block, settings)
    n_plus, _, _ = _rank(propagate(block, 1j, L, settings=settings)(L), settings)
    n_minus, _, _ = _rank(propagate(block, -1j, L, settings=settings)(L), settings)
    m = block.n
    return BlockDefectCheck(vn.rank, n_plus, n_minus, vn.passed and n_plus == n_minus == m)


class FiniteIntervalCheck(NamedTuple):
    L: float
    n: int
    kernel_dim: int
    kernel_dim_adjoint: int
    trace_rank: Optional[int]
    defect_sum: int
    quasi: Optional[QuasiDims]
    status: str

    def to_record(self) -> dict:
        rec = self._asdict()
        quasi = rec.pop("quasi")
        rec["dim_theta"] = quasi.dim_theta if quasi else None
        rec["dim_theta_cross"] = quasi.dim_cross if quasi else None
        rec["quasi_selfadjoint"] = quasi.quasi if quasi else None
        return rec


def finite_interval_check(
    expr: DiracExpression,
    theta: Optional[BoundarySubspace] = None,
    settings: Optional[Settings] = None,
) -> FiniteIntervalCheck:
    """All finite-interval counts for one expression; PASS when each equals its theory value."""
    settings = resolve(settings)
    _require_finite(expr, "finite_interval_check")
    n = expr.n
    k = finite_interval_kernel(expr, settings)
    k_adj = finite_interval_kernel(expr.adjoint(), settings)
    trace_rank = None
    if classify(expr, settings=settings).formally_selfadjoint:
        trace_rank = von_neumann_dimension_check(expr, settings).rank
    dsum = finite_defect_sum(expr, settings=settings).total
    quasi = quasi_selfadjoint_dims(theta, expr.J) if theta is not None else None
    ok = k == k_adj == 2 * n and dsum == 2 * n and trace_rank in (None, 2 * n)
    return FiniteIntervalCheck(expr.interval.length, n, k, k_adj, trace_rank, dsum, quasi,
                               "PASS" if ok else "FAIL")
