"""
Weyl solutions and Weyl functions on the half-line.

The L² solution subspace is found by integrating a candidate subspace backward
from a truncation point L to 0, re-orthonormalizing every `reorth_interval`
(the decaying directions grow toward 0, so nothing overflows). At L the
candidate comes from the stable eigenvectors of the frozen coefficient matrix
when Q has settled, otherwise from y2(L) = 0. L is increased along a geometric
schedule until M stops moving.

All functions expect the expression in the frame where J = [[0, -I], [I, 0]];
see `BoundaryScheme.canonical_expression`.
"""

from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.linalg import orth, subspace_angles

from dirac_weyl import logger
from dirac_weyl.boundary_algebra import Completion, check_canonical, gamma_maps
from dirac_weyl.dirac_core import (
    DiracExpression,
    SymmetryReport,
    classify,
    integrate,
    propagate,
    propagate_system,
    quadrature_grid,
)
from dirac_weyl.settings import Settings, resolve
from dirac_weyl.utils import (
    BoundarySingularError,
    CayleyError,
    ContractViolation,
    UnwarrantedRegimeError,
    opnorm,
)


class TruncationSchedule(NamedTuple):
    L0: float = 5.0
    growth: float = 2.0
    L_max: float = 40.0
    tol: float = 1e-9

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None) -> "TruncationSchedule":
        w = resolve(settings).weyl
        return cls(w.L0, w.growth, w.L_max, w.tol).validated()

    def validated(self) -> "TruncationSchedule":
        if not (self.L0 > 0 and self.growth > 1 and self.tol > 0 and self.L_max >= self.L0):
            raise ContractViolation("TruncationSchedule", f"invalid schedule {tuple(self)}")
        return self

    def lengths(self, cap: float = np.inf) -> List[float]:
        top = min(self.L_max, cap)
        out = []
        L = self.L0
        while L <= top * (1 + 1e-12):
            out.append(L)
            L *= self.growth
        if not out or out[-1] < top:
            out.append(top)
        return out


class WeylSolution:
    """Solution block v(x) = raw(x) @ norm on [0, L], from backward orthonormalized pieces."""

    def __init__(self, expr: DiracExpression, lam: complex, L: float, pieces, norm: np.ndarray):
        self.expr = expr
        self.lam = lam
        self.L = L
        self._pieces = pieces  # (lo, hi, Trajectory, coef), sorted by lo
        self._highs = np.array([hi for _, hi, _, _ in pieces])
        self.norm = norm

    @property
    def domain(self) -> Tuple[float, float]:
        return 0.0, self.L

    @property
    def breakpoints(self):
        return self.expr.Q.breakpoints

    @property
    def k(self) -> int:
        return self.norm.shape[1]

    def _raw(self, x: float) -> np.ndarray:
        i = min(int(np.searchsorted(self._highs, x, side="left")), len(self._pieces) - 1)
        _, _, traj, coef = self._pieces[i]
        return traj(x) @ coef

    def __call__(self, xs) -> np.ndarray:
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        return np.array([self._raw(x) @ self.norm for x in xs]).reshape(len(xs), self.expr.n, self.k)

    def derivative(self, xs) -> np.ndarray:
        vals = self(xs)
        return np.array([self.expr.coefficient(x, self.lam) @ v for x, v in zip(np.atleast_1d(xs), vals)])

    @property
    def at0(self) -> np.ndarray:
        return self(np.array([0.0]))[0]

    def normalized(self, right: np.ndarray) -> "WeylSolution":
        return WeylSolution(self.expr, self.lam, self.L, self._pieces, self.norm @ right)

    def tail_ratio(self, dx: float) -> float:
        """|v(L)| / |v(L - dx)|"""
        x_in = max(self.L - dx, 0.0)
        vals = self(np.array([x_in, self.L]))
        inner = np.linalg.norm(vals[0])
        return float(np.linalg.norm(vals[1]) / inner) if inner else np.inf


def _has_settled(expr: DiracExpression, L: float, growth: float, tol: float) -> bool:
    if expr.Q.is_constant:
        return True
    return opnorm(expr.Q(L) - expr.Q(L / growth)) < tol


def frozen_stable_subspace(expr: DiracExpression, lam: complex, x: float) -> np.ndarray:
    """Orthonormal span of the eigenvectors of J⁻¹(λ - Q(x)) with negative real part."""
    w, V = np.linalg.eig(expr.coefficient(x, lam))
    stable = V[:, w.real < 0]
    if stable.shape[1] == 0:
        return np.zeros((expr.n, 0), dtype=complex)
    return orth(stable)


def backward_subspace(
    expr: DiracExpression, lam: complex, L: float, W: np.ndarray, settings: Settings
) -> WeylSolution:
    """Integrate span(W) from L to 0 with QR every reorth_interval; v(0) is orthonormal."""
    cfg = settings.integrator
    dx = cfg.reorth_interval
    x = L
    segs, Rs = [], []
    while x > 0:
        x_next = max(x - dx, 0.0)
        traj = propagate_system(
            lambda s: expr.coefficient(s, lam),
            W,
            x,
            x_next,
            breakpoints=expr.Q.breakpoints,
            rtol=cfg.rtol,
            atol=cfg.atol,
            method=cfg.method,
            lam=lam,
        )
        W, R = np.linalg.qr(traj(x_next))
        segs.append((x_next, x, traj))
        Rs.append(R)
        x = x_next

    # coefficients so that all pieces continue one solution, normalized at 0
    coef = np.eye(W.shape[1], dtype=complex)
    pieces = []
    for (lo, hi, traj), R in zip(reversed(segs), reversed(Rs)):
        coef = np.linalg.solve(R, coef)
        pieces.append((lo, hi, traj, coef))
    return WeylSolution(expr, lam, L, pieces, np.eye(W.shape[1], dtype=complex))


def _candidate_at(expr: DiracExpression, lam: complex, L: float, k: Optional[int], settings: Settings):
    if _has_settled(expr, L, settings.weyl.growth, settings.weyl.limit_tol):
        W = frozen_stable_subspace(expr, lam, L)
        if k is None or W.shape[1] == k:
            return W, "frozen"
        logger.debug(f"λ={lam}: frozen coefficients give {W.shape[1]} stable modes, expected {k}")
    if expr.n % 2:
        raise ContractViolation("decaying_subspace", f"no fallback condition for odd n={expr.n}")
    p = expr.n // 2
    return np.vstack([np.eye(p), np.zeros((p, p))]).astype(complex), "y2=0"


class DecayingSubspace(NamedTuple):
    solution: WeylSolution
    converged: bool
    L_used: float
    angle: float
    tail_ratio: float
    condition: str


def decaying_subspace(
    expr: DiracExpression,
    lam: complex,
    sched: Optional[TruncationSchedule] = None,
    settings: Optional[Settings] = None,
    k: Optional[int] = None,
) -> DecayingSubspace:
    """The L² solution subspace without any normalization; converged when the
    span at 0 stops moving (principal angles) and the tail decays."""
    settings = resolve(settings)
    sched = (sched or TruncationSchedule.from_settings(settings)).validated()
    lam = complex(lam)
    prev = None
    result = None
    for L in sched.lengths(expr.interval.length):
        W, how = _candidate_at(expr, lam, L, k, settings)
        if W.shape[1] == 0:
            raise ContractViolation("decaying_subspace", f"no decaying modes at λ={lam}")
        sol = backward_subspace(expr, lam, L, W, settings)
        ratio = sol.tail_ratio(settings.integrator.reorth_interval)
        angle = np.inf
        if prev is not None and prev.shape == sol.at0.shape:
            angle = float(np.max(subspace_angles(prev, sol.at0)))
        converged = angle < settings.boundary.subspace_angle_tol and ratio < settings.weyl.tail_ratio_max
        result = DecayingSubspace(sol, converged, L, angle, ratio, how)
        logger.debug(f"λ={lam}: L={L:g} angle={angle:.3e} tail={ratio:.3f} ({how})")
        if converged:
            break
        prev = sol.at0
    return result


def weyl_function_from_boundary(
    comp: Completion, v0: np.ndarray, limit: Optional[float] = None, lam: Optional[complex] = None
) -> np.ndarray:
    """M = (C3 v1 + C4 v2)(C1 v1 + C2 v2)⁻¹ for v0 = (v1(0), v2(0))."""
    if limit is None:
        limit = resolve().weyl.singular_condition
    gamma0, gamma1 = gamma_maps(comp, v0, "B")
    cond = np.linalg.cond(gamma0)
    if not np.isfinite(cond) or cond > limit:
        raise BoundarySingularError(float(cond), limit, lam)
    return np.linalg.solve(gamma0.T, gamma1.T).T


class WeylSample(NamedTuple):
    lam: complex
    M: Optional[np.ndarray]
    v0: Optional[np.ndarray]
    norm_residual: float
    identity_residuals: Dict[str, Optional[float]]
    tail_decay_ratio: float
    converged: bool
    L_used: float
    regime: str
    solution: Optional[WeylSolution] = None
    history: tuple = ()

    def to_record(self) -> dict:
        """Flat row: λ, entries of M, residuals, convergence."""
        rec = {"lam_re": self.lam.real, "lam_im": self.lam.imag}
        if self.M is not None:
            p = self.M.shape[0]
            for i in range(p):
                for j in range(p):
                    rec[f"M_{i}_{j}_re"] = self.M[i, j].real
                    rec[f"M_{i}_{j}_im"] = self.M[i, j].imag
        rec["norm_residual"] = self.norm_residual
        rec["pair_identity"] = self.identity_residuals.get("pair_identity")
        rec["imag_identity"] = self.identity_residuals.get("imag_identity")
        rec["converged"] = self.converged
        rec["L_used"] = self.L_used
        rec["regime"] = self.regime
        return rec


def regime_of(lam: complex, report: SymmetryReport) -> str:
    if not report.almost_fsa or report.alpha is None:
        return "unclassified"
    if lam.imag > report.beta:
        return "upper"
    if lam.imag < report.alpha:
        return "lower"
    return "strip"


def weyl_solution(
    expr: DiracExpression,
    comp: Completion,
    lam: complex,
    sched: Optional[TruncationSchedule] = None,
    settings: Optional[Settings] = None,
    *,
    force: bool = False,
    report: Optional[SymmetryReport] = None,
) -> WeylSample:
    settings = resolve(settings)
    check_canonical(expr.J, "weyl_solution", settings)
    sched = (sched or TruncationSchedule.from_settings(settings)).validated()
    lam = complex(lam)
    p = expr.p
    report = report or classify(expr, settings=settings)
    regime = regime_of(lam, report)
    if regime == "strip":
        if not force:
            raise UnwarrantedRegimeError(lam, report.alpha, report.beta)
        regime = "unwarranted"
        logger.warning(f"λ={lam} lies in the strip; computing an unwarranted candidate")

    prev_M = None
    history = []
    last = None
    for L in sched.lengths(expr.interval.length):
        W, how = _candidate_at(expr, lam, L, p, settings)
        raw = backward_subspace(expr, lam, L, W, settings)
        v0 = raw.at0
        M = weyl_function_from_boundary(comp, v0, settings.weyl.singular_condition, lam)
        delta = opnorm(M - prev_M) if prev_M is not None else np.inf
        ratio = raw.tail_ratio(settings.integrator.reorth_interval)
        history.append((L, delta, ratio))
        logger.debug(f"λ={lam}: L={L:g} |ΔM|={delta:.3e} tail={ratio:.3f} ({how})")
        last = (L, raw, v0, ratio)
        if delta < sched.tol and ratio < settings.weyl.tail_ratio_max:
            break
        prev_M = M
    else:
        L, raw, v0, ratio = last
        logger.info(f"λ={lam}: no convergence by L={L:g}")
        return WeylSample(lam, None, v0, np.nan, {"pair_identity": None, "imag_identity": None},
                          ratio, False, L, regime, raw, tuple(history))

    L, raw, v0, ratio = last
    gamma0, _ = gamma_maps(comp, v0, "B")
    sol = raw.normalized(np.linalg.inv(gamma0))
    v0 = sol.at0
    g0, g1 = gamma_maps(comp, v0, "B")
    norm_residual = opnorm(g0 - np.eye(p))
    M = g1
    converged = norm_residual < settings.weyl.normalization_tol and ratio < 1
    if not converged:
        logger.warning(f"λ={lam}: normalization residual {norm_residual:.3e} too large")
    sample = WeylSample(lam, M, v0, norm_residual, {"pair_identity": None, "imag_identity": None}, ratio,
                        converged, L, regime, sol, tuple(history))
    if converged and comp_is_j_unitary(comp, expr, settings):
        # pair_identity on the diagonal μ = λ until a second grid point is paired in
        h = herglotz_residuals(expr, comp, sample, sample, settings)
        sample = sample._replace(
            identity_residuals={"pair_identity": h.pair_identity, "imag_identity": h.imag_identity})
    logger.info(f"λ={lam}: converged at L={L:g}")
    return sample


def comp_is_j_unitary(comp: Completion, expr: DiracExpression, settings: Optional[Settings] = None) -> bool:
    """X* J X = J, the condition under which M is Herglotz-normalized."""
    tol = resolve(settings).boundary.completion_tol
    J = expr.J.matrix
    return opnorm(comp.X.conj().T @ J @ comp.X - J) < tol


class L2Verdict(NamedTuple):
    is_weyl: Optional[bool]  # None when indeterminate
    verdict: str
    growth_exponent: float
    ratio: float
    window: Tuple[float, float]
    probe_growth_exponent: float
    probe_grows: bool


def _window_end(expr: DiracExpression, lam: complex, settings: Settings) -> float:
    w = settings.weyl
    xs = np.linspace(0.0, min(w.L0, expr.interval.length), 5)
    r_max = max(float(np.max(np.abs(np.linalg.eigvals(expr.coefficient(x, lam)).real))) for x in xs)
    cap = min(w.L_max, expr.interval.length)
    if r_max < 1e-8:
        return cap
    scale = max(w.tol, settings.integrator.rtol)
    return min(np.log(w.l2_safety / scale) / (2 * r_max), cap)


def _tail_growth(expr, lam, y0, b, settings) -> Tuple[float, float]:
    sol = propagate(expr, lam, b, settings=settings, y0=y0)
    edges = np.linspace(0.0, b, settings.weyl.l2_subwindows + 1)

    def sq(xs):
        return np.sum(np.abs(sol.sample(xs)) ** 2, axis=(1, 2))

    pieces = [
        float(np.real(integrate(sq, lo, hi, expr.Q.breakpoints, settings).value))
        for lo, hi in zip(edges[:-1], edges[1:])
    ]
    width = edges[1] - edges[0]
    ratio = pieces[-1] / pieces[-2] if pieces[-2] > 0 else np.inf
    exponent = np.log(ratio) / width if np.isfinite(ratio) and ratio > 0 else np.inf
    return ratio, exponent


def verify_l2_characterization(
    expr: DiracExpression,
    lam: complex,
    M_candidate: np.ndarray,
    comp: Completion,
    window: Optional[Tuple[float, float]] = None,
    settings: Optional[Settings] = None,
    seed: int = 0,
) -> L2Verdict:
    """Is φM + ψ in L²? φ, ψ solve the system with Γ0 φ = 0, Γ1 φ = I, Γ0 ψ = I, Γ1 ψ = 0.

    Tail integrals of |φM + ψ|² over equal subwindows must shrink geometrically;
    M + εE for a random unit E must make them grow.
    """
    settings = resolve(settings)
    check_canonical(expr.J, "verify_l2_characterization", settings)
    lam = complex(lam)
    p = expr.p
    M = np.atleast_2d(np.asarray(M_candidate, dtype=complex))
    Xinv = np.linalg.inv(comp.X)
    phi0 = Xinv @ np.vstack([np.zeros((p, p)), np.eye(p)])
    psi0 = Xinv @ np.vstack([np.eye(p), np.zeros((p, p))])
    b = window[1] if window is not None else _window_end(expr, lam, settings)
    w = settings.weyl

    ratio, exponent = _tail_growth(expr, lam, phi0 @ M + psi0, b, settings)
    if ratio < w.indeterminate_low:
        is_weyl, verdict = True, "weyl"
    elif ratio > w.indeterminate_high:
        is_weyl, verdict = False, "not_weyl"
    else:
        is_weyl, verdict = None, "indeterminate"

    rng = np.random.default_rng(seed)
    E = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    E /= opnorm(E)
    p_ratio, p_exponent = _tail_growth(expr, lam, phi0 @ (M + w.probe_epsilon * E) + psi0, b, settings)
    return L2Verdict(is_weyl, verdict, float(exponent), float(ratio), (0.0, float(b)),
                     float(p_exponent), bool(p_ratio > w.indeterminate_high))


class HerglotzResiduals(NamedTuple):
    pair_identity: float
    imag_identity: float
    error: float


def herglotz_residuals(
    expr: DiracExpression,
    comp: Completion,
    sample_lam: WeylSample,
    sample_mu: WeylSample,
    settings: Optional[Settings] = None,
) -> HerglotzResiduals:
    """M(λ) - M(μ)* against ∫ v(μ)*((λ - μ̄) - 2iQ2) v(λ), and Im M(λ) against
    ∫ v(λ)*(Im λ - Q2) v(λ); both need a J-unitary completion."""
    settings = resolve(settings)
    for s in (sample_lam, sample_mu):
        if not s.converged:
            raise ContractViolation("herglotz_residuals", f"sample at λ={s.lam} did not converge")
    if not comp_is_j_unitary(comp, expr, settings):
        raise ContractViolation("herglotz_residuals", "completion is not J-unitary (X*JX != J)")
    lam, mu = sample_lam.lam, sample_mu.lam
    vl, vm = sample_lam.solution, sample_mu.solution
    L = min(sample_lam.L_used, sample_mu.L_used)
    n = expr.n

    def q2(xs):
        Qs = expr.Q.evaluate(xs)
        return (Qs - np.conj(np.swapaxes(Qs, 1, 2))) / 2j

    def pair_integrand(xs):
        weight = (lam - np.conj(mu)) * np.eye(n)[None] - 2j * q2(xs)
        return np.einsum("mik,mij,mjl->mkl", vm(xs).conj(), weight, vl(xs))

    def imag_integrand(xs):
        weight = lam.imag * np.eye(n)[None] - q2(xs)
        v = vl(xs)
        return np.einsum("mik,mij,mjl->mkl", v.conj(), weight, v)

    Ml, Mm = sample_lam.M, sample_mu.M
    q_pair = integrate(pair_integrand, 0.0, L, expr.Q.breakpoints, settings)
    q_imag = integrate(imag_integrand, 0.0, sample_lam.L_used, expr.Q.breakpoints, settings)
    pair_identity = opnorm(Ml - Mm.conj().T - q_pair.value)
    imag_identity = opnorm((Ml - Ml.conj().T) / 2j - q_imag.value)
    return HerglotzResiduals(pair_identity, imag_identity, q_pair.error + q_imag.error)


class SignCheck(NamedTuple):
    min_eig_imM: float
    side: str


def sign_check(sample: WeylSample, expr: DiracExpression, report: Optional[SymmetryReport] = None,
               settings: Optional[Settings] = None) -> SignCheck:
    if not sample.converged or sample.M is None:
        raise ContractViolation("sign_check", f"sample at λ={sample.lam} did not converge")
    report = report or classify(expr, settings=settings)
    M = sample.M
    im = (M - M.conj().T) / 2j
    return SignCheck(float(np.linalg.eigvalsh(im).min()), regime_of(sample.lam, report))


class SchurSample(NamedTuple):
    lam: Optional[complex]
    M_s: np.ndarray
    operator_norm: float


def cayley(M0: np.ndarray, lam: Optional[complex] = None, limit: float = 1e12) -> SchurSample:
    """M_s = (M0 - iI)(M0 + iI)⁻¹"""
    M0 = np.atleast_2d(np.asarray(M0, dtype=complex))
    eye = np.eye(len(M0))
    denom = M0 + 1j * eye
    cond = np.linalg.cond(denom)
    if not np.isfinite(cond) or cond > limit:
        raise CayleyError(float(cond))
    Ms = np.linalg.solve(denom.T, (M0 - 1j * eye).T).T
    return SchurSample(lam, Ms, opnorm(Ms))


def schur_l2_check(
    expr: DiracExpression,
    lam: complex,
    M_s: np.ndarray,
    window: Optional[Tuple[float, float]] = None,
    settings: Optional[Settings] = None,
) -> L2Verdict:
    """For J = diag(-iI, iI): the solution with y(0) = (I, M_s) must be in L²."""
    settings = resolve(settings)
    p = expr.p
    if p is None or opnorm(expr.J.matrix - np.diag([-1j] * p + [1j] * p)) > settings.signature.tol:
        raise ContractViolation("schur_l2_check", "needs J = diag(-iI, iI)")
    M_s = np.atleast_2d(np.asarray(M_s, dtype=complex))
    lam = complex(lam)
    b = window[1] if window is not None else _window_end(expr, lam, settings)
    w = settings.weyl
    ratio, exponent = _tail_growth(expr, lam, np.vstack([np.eye(p), M_s]), b, settings)
    if ratio < w.indeterminate_low:
        is_weyl, verdict = True, "weyl"
    elif ratio > w.indeterminate_high:
        is_weyl, verdict = False, "not_weyl"
    else:
        is_weyl, verdict = None, "indeterminate"
    rng = np.random.default_rng(0)
    E = rng.standard_normal((p, p)) + 1j * rng.standard_normal((p, p))
    E /= opnorm(E)
    p_ratio, p_exponent = _tail_growth(
        expr, lam, np.vstack([np.eye(p), M_s + w.probe_epsilon * E]), b, settings)
    return L2Verdict(is_weyl, verdict, float(exponent), float(ratio), (0.0, float(b)),
                     float(p_exponent), bool(p_ratio > w.indeterminate_high))


def cauchy_riemann_residual(
    expr: DiracExpression,
    comp: Completion,
    lam: complex,
    sched: Optional[TruncationSchedule] = None,
    settings: Optional[Settings] = None,
    report: Optional[SymmetryReport] = None,
) -> float:
    """|∂M/∂y - i ∂M/∂x| / |∂M/∂x| by central differences; a holomorphy diagnostic."""
    settings = resolve(settings)
    h = settings.weyl.cr_step
    report = report or classify(expr, settings=settings)
    values = {}
    for d in (h, -h, 1j * h, -1j * h):
        s = weyl_solution(expr, comp, lam + d, sched, settings, force=True, report=report)
        if not s.converged:
            return np.nan
        values[d] = s.M
    dx = (values[h] - values[-h]) / (2 * h)
    dy = (values[1j * h] - values[-1j * h]) / (2 * h)
    return opnorm(dy - 1j * dx) / max(opnorm(dx), 1e-300)


class ProductScan(NamedTuple):
    grid: np.ndarray
    profile: np.ndarray
    sup_estimate: float
    note: str
    L: float


def _whole_line_block(expr, half, lam, settings, mirrored: bool):
    """(fine grid, |Ψ|²) on [-L, L] for the subspace decaying at +∞ (or -∞ if mirrored)."""
    sub = decaying_subspace(half, lam, settings=settings)
    if not sub.converged:
        side = "-∞" if mirrored else "+∞"
        raise ContractViolation(
            "whole_line_product_scan", f"subspace decaying at {side} did not converge for λ={lam}")
    sol = sub.solution
    L = sub.L_used
    Psi0 = sol.at0
    # continuation across 0 with the whole-line expression
    other = propagate(expr, lam, L if mirrored else -L, settings=settings, y0=Psi0)
    return sol, other, L


def whole_line_product_scan(
    expr: DiracExpression,
    lam: complex,
    grid,
    settings: Optional[Settings] = None,
) -> ProductScan:
    """sup_x (∫_{-∞}^x |Ψ₋|²)(∫_x^∞ |Ψ₊|²) over the truncated window.

    Ψ₊ decays at +∞, Ψ₋ at -∞ (computed on the reflected half-line); both
    have orthonormal columns at 0.
    """
    settings = resolve(settings)
    if expr.interval.kind != "whole_line":
        raise ContractViolation("whole_line_product_scan", "needs a whole-line expression")
    lam = complex(lam)
    plus, plus_back, L_plus = _whole_line_block(expr, expr.half_line(), lam, settings, False)
    minus, minus_fwd, L_minus = _whole_line_block(
        expr, expr.reflected().half_line(), lam, settings, True)
    L = min(L_plus, L_minus)

    def sq_plus(x):
        v = plus(np.array([x]))[0] if x >= 0 else plus_back(x)
        return float(np.sum(np.abs(v) ** 2))

    def sq_minus(x):
        v = minus(np.array([-x]))[0] if x <= 0 else minus_fwd(x)
        return float(np.sum(np.abs(v) ** 2))

    breaks = tuple(expr.Q.breakpoints) + (0.0,)
    fine = np.unique(np.concatenate(quadrature_grid(-L, L, breaks, settings)))
    f_minus = np.array([sq_minus(x) for x in fine])
    f_plus = np.array([sq_plus(x) for x in fine])
    left = cumulative_simpson(f_minus, x=fine, initial=0.0)
    right_cum = cumulative_simpson(f_plus, x=fine, initial=0.0)
    right = right_cum[-1] - right_cum
    product = left * right

    grid = np.asarray(grid, dtype=float)
    if grid.min() < -L or grid.max() > L:
        raise ContractViolation("whole_line_product_scan", f"grid leaves the window [{-L}, {L}]")
    profile = np.interp(grid, fine, product)
    inside = (fine >= grid.min()) & (fine <= grid.max())
    sup = float(product[inside].max()) if inside.any() else float(profile.max())

    tail = max(len(fine) // 10, 2)
    left_tail = np.all(np.diff(product[:tail]) >= -1e-12 * sup)
    right_tail = np.all(np.diff(product[-tail:]) <= 1e-12 * sup)
    if left_tail and right_tail:
        note = "tails monotone toward the window edges; truncation does not raise the supremum"
    else:
        note = "tail not monotone near the window edge; supremum may be affected by truncation"
    return ProductScan(grid, profile, sup, note, L)
