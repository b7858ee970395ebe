"""
The invariant suite behind `diracw verify`.

Every check is registered once with the module whose invariant it measures
and reports the measured value next to the threshold it was held to.
"""

from functools import lru_cache
from typing import Callable, List, NamedTuple, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.linalg import expm

from dirac_weyl import logger
from dirac_weyl.boundary_algebra import (
    AdmissiblePair,
    BoundarySubspace,
    Completion,
    PhiParameter,
    complete_pair,
    green_identity_residual,
    pair_from_theta,
    same_subspace,
    theta_cross,
    theta_from_pair,
)
from dirac_weyl.defect_lab import (
    block_defect_check,
    count_l2,
    finite_defect_sum,
    finite_interval_kernel,
    graph_orthogonality_probe,
    kernel_basis,
    kernel_element,
    quasi_selfadjoint_dims,
    von_neumann_dimension_check,
)
from dirac_weyl.dirac_core import (
    DiracExpression,
    Interval,
    SignatureMatrix,
    VectorFunction,
    classify,
    conjugation_residual,
    kappa,
    lagrange_residual,
    propagate,
)
from dirac_weyl.potentials import ConstantPotential, ExpDecayPotential, ZeroPotential
from dirac_weyl.scenario import ScenarioConfig, builtin
from dirac_weyl.settings import Settings, resolve
from dirac_weyl.utils import UnwarrantedRegimeError, opnorm, pluralize
from dirac_weyl.weyl_engine import (
    TruncationSchedule,
    cayley,
    frozen_stable_subspace,
    herglotz_residuals,
    schur_l2_check,
    sign_check,
    verify_l2_characterization,
    weyl_function_from_boundary,
    weyl_solution,
    whole_line_product_scan,
)

ORACLE_TOL = 1e-8
IDENTITY_TOL = 1e-6
SEED = 20240611


class Verdict(NamedTuple):
    module: str
    check: str
    status: str  # PASS or FAIL
    measured: float
    threshold: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_record(self) -> dict:
        return self._asdict()


class Outcome(NamedTuple):
    measured: float
    threshold: float
    passed: bool
    detail: str = ""


SUITE: List[tuple] = []


def check(module: str, name: str):
    def register(fn: Callable[[Settings], Outcome]):
        SUITE.append((module, name, fn))
        return fn
    return register


def _below(measured: float, threshold: float, detail: str = "") -> Outcome:
    return Outcome(float(measured), float(threshold), bool(measured < threshold), detail)


def _count(violations: List[str], total: int, what: str) -> Outcome:
    detail = "; ".join(violations[:3]) if violations else f"{total} {pluralize(total, what)}"
    return Outcome(float(len(violations)), 0.0, not violations, detail)


def _free(p: int = 1, interval: Optional[Interval] = None) -> DiracExpression:
    return DiracExpression(SignatureMatrix.canonical(p), ZeroPotential(2 * p), interval)


def _canonical_setup(name: str, settings: Settings):
    sc = builtin(name)
    s = sc.settings(settings)
    expr = sc.build_expression()
    scheme = sc.boundary_scheme(s)
    return expr, scheme, scheme.canonical_expression(expr), classify(expr, settings=s), s


def _weyl(name: str, lam: complex, settings: Settings, sched: Optional[TruncationSchedule] = None):
    _, scheme, canon, report, s = _canonical_setup(name, settings)
    return canon, scheme.completion, weyl_solution(canon, scheme.completion, lam, sched, s, report=report)


def _random_complex(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _random_constant(rng, n: int) -> np.ndarray:
    """Q1 + iQ2 with Hermitian Q1 and |Q2| <= 1."""
    A = _random_complex(rng, n, n)
    H = _random_complex(rng, n, n)
    H = (H + H.conj().T) / 2
    return (A + A.conj().T) / 2 + 1j * 0.8 * H / opnorm(H)


# dirac_core

@check("dirac_core", "signature_matrix_laws")
def _signature_laws(settings):
    worst = 0.0
    for p in (1, 2, 3):
        for J in (SignatureMatrix.canonical(p), SignatureMatrix.diag_i(p), SignatureMatrix.diag_minus_i(p)):
            M = J.matrix
            worst = max(worst, opnorm(M.conj().T + M), opnorm(M.conj().T @ M - np.eye(J.n)))
    return _below(worst, settings.signature.tol, "J* = -J and J*J = I for the named forms")


@check("dirac_core", "kappa_sum")
def _kappa_sum(settings):
    bad = []
    for p in (1, 2, 3):
        for J in (SignatureMatrix.canonical(p), SignatureMatrix.diag_i(p), SignatureMatrix.diag_minus_i(p)):
            plus, minus = kappa(J, settings)
            if plus + minus != J.n or plus != p:
                bad.append(f"{J!r}: ({plus}, {minus})")
    return _count(bad, 9, "form")


@check("dirac_core", "classify_symmetry")
def _classify_symmetry(settings):
    bad = []
    free = classify(_free(), settings=settings)
    if not (free.formally_selfadjoint and free.almost_fsa and free.alpha == free.beta == 0.0):
        bad.append(f"free Dirac: {free}")
    nls = classify(builtin("nls_offdiag_p2").build_expression(), settings=settings)
    if not nls.j_symmetric or nls.formally_selfadjoint:
        bad.append(f"nls_offdiag: {nls}")
    gamma = classify(builtin("almost_fsa_canonical").build_expression(), settings=settings)
    if not (gamma.almost_fsa and abs(gamma.alpha - 0.5) < 1e-12 and abs(gamma.beta - 0.5) < 1e-12):
        bad.append(f"constant Q2 = 0.5: {gamma}")
    return _count(bad, 3, "expression")


@check("dirac_core", "propagate_matches_exponential")
def _propagate_exponential(settings):
    expr = _free()
    lam = 1 + 1j
    Y = propagate(expr, lam, 5.0, settings=settings)
    exact = expm(expr.coefficient(0.0, lam) * 5.0)
    err = opnorm(Y(5.0) - exact) / opnorm(exact) + opnorm(Y(0.0) - np.eye(2))
    return _below(err, IDENTITY_TOL, f"ODE residual {Y.ode_residual:.3e}")


@check("dirac_core", "semigroup")
def _semigroup(settings):
    rng = np.random.default_rng(SEED + 9)
    Q = ExpDecayPotential(0.5 * _random_complex(rng, 2, 2), 0.5)
    expr = DiracExpression(SignatureMatrix.canonical(1), Q)
    worst = 0.0
    for _ in range(20):
        lam = complex(rng.uniform(-2, 2), rng.uniform(-1.5, 1.5))
        x1 = float(rng.uniform(0.5, 2.5))
        x2 = float(rng.uniform(x1 + 0.5, 5.0))
        direct = propagate(expr, lam, x2, settings=settings)(x2)
        first = propagate(expr, lam, x1, settings=settings)(x1)
        restarted = propagate(expr, lam, x2, settings=settings, x_start=x1, y0=first)(x2)
        worst = max(worst, opnorm(restarted - direct) / opnorm(direct))
    return _below(worst, 10 * settings.integrator.rtol, "20 random (λ, x1, x2), restart at x1")


@check("dirac_core", "liouville_determinant")
def _liouville(settings):
    # named forms have tr J⁻¹ = 0, so det Y(x) = exp(-tr(J⁻¹Q0)(1 - e^{-μx})/μ)
    rng = np.random.default_rng(SEED + 10)
    Q0, mu = 0.5 * _random_complex(rng, 4, 4), 0.7
    expr = DiracExpression(SignatureMatrix.diag_i(2), ExpDecayPotential(Q0, mu))
    Y = propagate(expr, 0.5 + 0.5j, 5.0, settings=settings)
    xs = np.linspace(0.0, 5.0, 51)
    dets = np.array([np.linalg.det(Y(x)) for x in xs])
    exact = np.exp(-np.trace(expr.J.inverse @ Q0) * (1 - np.exp(-mu * xs)) / mu)
    if np.min(np.abs(dets)) == 0:
        return Outcome(np.inf, IDENTITY_TOL, False, "det Y vanished on the grid")
    err = float(np.max(np.abs(dets - exact) / np.abs(exact)))
    return _below(err, IDENTITY_TOL, f"max cond Y {Y.max_condition:.3e}")


@check("dirac_core", "classify_stable")
def _classify_stable(settings):
    fine = settings.model_copy(update={
        "potential": settings.potential.model_copy(
            update={"sample_points": 4 * settings.potential.sample_points})
    })
    bad = []
    for name in ("free_dirac_p1", "exp_decay_p1", "nls_offdiag_p2", "almost_fsa_canonical"):
        expr = builtin(name).build_expression()
        first = classify(expr, settings=settings)
        flags = first[:3]
        if classify(expr, settings=settings) != first:
            bad.append(f"{name}: differs on a second call")
        refined = classify(expr, settings=fine)
        moved = max(abs(refined.alpha - first.alpha), abs(refined.beta - first.beta))
        if refined[:3] != flags or moved > 1e-12:
            bad.append(f"{name}: {refined} after refinement, {first} before")
    return _count(bad, 4, "expression")


@check("dirac_core", "lagrange_identity")
def _lagrange(settings):
    rng = np.random.default_rng(SEED)
    expr = DiracExpression(SignatureMatrix.canonical(1), ExpDecayPotential(_random_complex(rng, 2, 2), 1.0))
    worst = 0.0
    for _ in range(3):
        y = VectorFunction.from_polynomials([Polynomial(_random_complex(rng, 4)) for _ in range(2)])
        z = VectorFunction.from_polynomials([Polynomial(_random_complex(rng, 4)) for _ in range(2)])
        worst = max(worst, abs(lagrange_residual(expr, y, z, (0.0, 2.0), settings)))
    return _below(worst, IDENTITY_TOL, "polynomial pairs on [0, 2]")


@check("dirac_core", "conjugation_relation")
def _conjugation(settings):
    expr = builtin("nls_offdiag_p2").build_expression()
    res = conjugation_residual(expr, 2j, 3.0, settings)
    return _below(res, IDENTITY_TOL, "flip of Y(x; λ) against Y_Q*(x; conj λ)")


# boundary_algebra

@check("boundary_algebra", "completion_identity")
def _completion(settings):
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for k in range(100):
        p = 1 + k % 3
        J = SignatureMatrix.canonical(p)
        pair = AdmissiblePair(_random_complex(rng, p, p), _random_complex(rng, p, p), settings)
        worst = max(worst, complete_pair(pair, J, settings).residual(J))
    return _below(worst, settings.boundary.completion_tol, "|Y*JX - J| over 100 random pairs")


@check("boundary_algebra", "theta_cross_laws")
def _theta_cross(settings):
    rng = np.random.default_rng(SEED + 2)
    bad = []
    for k in range(50):
        p = 1 + k % 3
        J = SignatureMatrix.canonical(p)
        dim = int(rng.integers(0, 2 * p + 1))
        theta = (BoundarySubspace.span(_random_complex(rng, 2 * p, dim)) if dim
                 else BoundarySubspace.zero(2 * p))
        cross = theta_cross(theta, J)
        if theta.dim + cross.dim != 2 * p:
            bad.append(f"dim {theta.dim} + {cross.dim} != {2 * p}")
        elif not same_subspace(theta_cross(cross, J), theta):
            bad.append(f"double cross moved a {theta.dim}-dim subspace")
    return _count(bad, 50, "subspace")


@check("boundary_algebra", "pair_theta_roundtrip")
def _pair_theta(settings):
    rng = np.random.default_rng(SEED + 3)
    bad = []
    for k in range(20):
        p = 1 + k % 3
        pair = AdmissiblePair(_random_complex(rng, p, p), _random_complex(rng, p, p), settings)
        theta = theta_from_pair(pair)
        if not same_subspace(theta_from_pair(pair_from_theta(theta, settings)), theta):
            bad.append(f"p={p}")
        if not quasi_selfadjoint_dims(theta, SignatureMatrix.canonical(p)).quasi:
            bad.append(f"p={p}: not quasi-selfadjoint")
    return _count(bad, 20, "pair")


@check("boundary_algebra", "green_identity")
def _green(settings):
    expr = _free()
    comp = Completion.from_phi(PhiParameter.scalar(0.3), settings)
    lam, mu = 1j, -2j
    F = weyl_solution(expr, comp, lam, settings=settings).solution
    G = weyl_solution(expr, comp, np.conj(mu), settings=settings).solution
    window = (0.0, min(F.L, G.L))
    res = green_identity_residual(comp, lam, F, mu, G, window, settings)
    return _below(res, IDENTITY_TOL, f"free Dirac, Φ = 0.3, λ = {lam}, μ = {mu}")


# weyl_engine

@check("weyl_engine", "free_dirac_value")
def _free_value(settings):
    worst = 0.0
    for lam in (1j, 2j, 1 + 1j):
        _, _, sample = _weyl("free_dirac_p1", lam, settings)
        worst = max(worst, opnorm(sample.M - 1j) if sample.converged else np.inf)
    return _below(worst, ORACLE_TOL, "M(λ) = i for λ in {i, 2i, 1+i}")


@check("weyl_engine", "herglotz_identities")
def _herglotz(settings):
    worst = 0.0
    details = []
    for name, lam, mu in (
        ("free_dirac_p1", 1j, 2j),
        ("exp_decay_p1", 1.5j, 0.5 + 1.5j),
        ("nls_offdiag_p2", 2j, 0.3 + 2.5j),
    ):
        canon, comp, a = _weyl(name, lam, settings)
        _, _, b = _weyl(name, mu, settings)
        h = herglotz_residuals(canon, comp, a, b, settings)
        worst = max(worst, h.pair_identity, h.imag_identity)
        details.append(f"{name}: {max(h.pair_identity, h.imag_identity):.2e}")
    return _below(worst, IDENTITY_TOL, ", ".join(details))


@check("weyl_engine", "constant_coefficient_oracle")
def _constant_oracle(settings):
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for k in range(10):
        n = 2 if k < 5 else 4
        p = n // 2
        Q = _random_constant(rng, n)
        expr = DiracExpression(SignatureMatrix.canonical(p), ConstantPotential(Q))
        comp = Completion.identity(expr.J)
        beta = float(np.linalg.eigvalsh((Q - Q.conj().T) / 2j).max())
        for re, above in ((-0.5, 0.6), (0.7, 1.0), (0.0, 1.5), (1.5, 2.0), (-1.2, 3.0)):
            lam = complex(re, beta + above)
            sample = weyl_solution(expr, comp, lam, settings=settings)
            exact = weyl_function_from_boundary(comp, frozen_stable_subspace(expr, lam, 0.0))
            worst = max(worst, opnorm(sample.M - exact) if sample.converged else np.inf)
    return _below(worst, IDENTITY_TOL, "10 random constant Q, n in {2, 4}, 5 λ above the strip each")


@lru_cache(maxsize=1)
def _sign_grid(settings: Settings) -> tuple:
    """exp_decay_p1 on 50 λ above and 50 λ below its strip, at least 1 away from it."""
    _, scheme, canon, report, s = _canonical_setup("exp_decay_p1", settings)
    offsets = (1.0, 1.5, 2.0, 2.5, 3.0)
    lams = [complex(re, report.beta + d) for re in np.linspace(-2, 2, 10) for d in offsets]
    lams += [complex(re, report.alpha - d) for re in np.linspace(-2, 2, 10) for d in offsets]
    samples = tuple(
        weyl_solution(canon, scheme.completion, lam, settings=s, report=report) for lam in lams)
    return canon, report, samples


@check("weyl_engine", "sign_law")
def _sign_law(settings):
    canon, report, samples = _sign_grid(settings)
    bad = []
    for sample in samples:
        if not sample.converged:
            bad.append(f"λ={sample.lam}: no convergence")
            continue
        s = sign_check(sample, canon, report, settings)
        ok = s.min_eig_imM > 0 if s.side == "upper" else s.min_eig_imM < 0
        if not ok:
            bad.append(f"λ={sample.lam}: min eig Im M = {s.min_eig_imM:.3e} ({s.side})")
    return _count(bad, len(samples), "λ-value")


@check("weyl_engine", "schur_contraction")
def _schur(settings):
    _, _, samples = _sign_grid(settings)
    upper = [s for s in samples if s.converged and s.regime == "upper"]
    norms = [cayley(s.M, s.lam, settings.weyl.singular_condition).operator_norm for s in upper]
    worst = max(norms, default=np.inf)
    return Outcome(worst, 1.0, bool(upper) and worst < 1, f"{len(upper)} converged upper-regime λ")


@check("weyl_engine", "schur_l2_verdict")
def _schur_l2(settings):
    expr, scheme, canon, report, s = _canonical_setup("almost_fsa_diag_minus_i", settings)
    sample = weyl_solution(canon, scheme.completion, 2j, settings=s, report=report)
    schur = cayley(sample.M, 2j, s.weyl.singular_condition)
    verdict = schur_l2_check(expr, 2j, schur.M_s, settings=s)
    detail = f"L² verdict {verdict.verdict} (ratio {verdict.ratio:.3e})"
    return Outcome(schur.operator_norm, 1.0, schur.operator_norm < 1 and bool(verdict.is_weyl), detail)


@check("weyl_engine", "l2_characterization")
def _l2(settings):
    canon, comp, sample = _weyl("exp_decay_p1", 1.5j, settings)
    v = verify_l2_characterization(canon, 1.5j, sample.M, comp, settings=settings, seed=SEED)
    detail = f"{v.verdict}; perturbed M grows: {v.probe_grows}"
    return Outcome(v.ratio, settings.weyl.indeterminate_low, bool(v.is_weyl) and v.probe_grows, detail)


@check("weyl_engine", "gauge_invariance")
def _gauge(settings):
    rng = np.random.default_rng(SEED + 5)
    _, comp, sample = _weyl("nls_offdiag_p2", 2j, settings)
    R = np.eye(2) + 0.3 * _random_complex(rng, 2, 2)
    M = weyl_function_from_boundary(comp, sample.v0)
    MR = weyl_function_from_boundary(comp, sample.v0 @ R)
    return _below(opnorm(M - MR) / opnorm(M), 1e-12, "v0 -> v0 R")


@check("weyl_engine", "truncation_path_independence")
def _path(settings):
    base = TruncationSchedule.from_settings(settings)
    other = TruncationSchedule(4.0, 1.5, base.L_max, base.tol)
    _, _, a = _weyl("exp_decay_p1", 0.5 + 1.5j, settings, base)
    _, _, b = _weyl("exp_decay_p1", 0.5 + 1.5j, settings, other)
    diff = opnorm(a.M - b.M) if a.converged and b.converged else np.inf
    return _below(diff, 10 * base.tol, f"L_used {a.L_used:g} vs {b.L_used:g}")


@check("weyl_engine", "strip_refusal")
def _strip(settings):
    try:
        _weyl("almost_fsa_canonical", 0.5j, settings)
    except UnwarrantedRegimeError as e:
        return Outcome(0.0, 0.0, True, str(e))
    return Outcome(1.0, 0.0, False, "λ = 0.5i in the strip was computed without force")


@check("weyl_engine", "whole_line_product")
def _product(settings):
    expr = _free(interval=Interval.whole_line(40.0))
    scan = whole_line_product_scan(expr, 1j, np.linspace(-5.0, 5.0, 41), settings)
    return _below(abs(scan.sup_estimate - 0.25), 1e-3, f"sup {scan.sup_estimate:.6f}; {scan.note}")


# defect_lab

@check("defect_lab", "regime_table")
def _regime_table(settings):
    bad = []
    for name in ("almost_fsa_canonical", "almost_fsa_diag_i", "almost_fsa_diag_minus_i"):
        expr = builtin(name).build_expression()
        report = classify(expr, settings=settings)
        for lam in (2j, -2j):
            r = count_l2(expr, lam, settings, report)
            if r.count != r.expected or r.count != 1:
                bad.append(f"{name} λ={lam}: count {r.count}, expected {r.expected}")
    return _count(bad, 6, "case")


@check("defect_lab", "regime_table_sweep")
def _regime_sweep(settings):
    expr = builtin("almost_fsa_canonical").build_expression()
    report = classify(expr, settings=settings)
    offsets = (1.0, 1.5, 2.0, 2.5, 3.0)
    lams = [complex(re, report.beta + d) for re in np.linspace(-2, 2, 4) for d in offsets]
    lams += [complex(re, report.alpha - d) for re in np.linspace(-2, 2, 4) for d in offsets]
    bad = []
    for lam in lams:
        r = count_l2(expr, lam, settings, report)
        if r.expected is None or r.count != r.expected:
            bad.append(f"λ={lam}: count {r.count}, expected {r.expected}")
    return _count(bad, len(lams), "λ-value")


@check("defect_lab", "j_symmetric_count")
def _j_count(settings):
    r = count_l2(builtin("nls_offdiag_p2").build_expression(), 2j, settings)
    return Outcome(float(r.count if r.count is not None else np.nan), 2.0, r.count == 2,
                   f"exponents {', '.join(f'{e:.3f}' for e in r.exponents)}")


@check("defect_lab", "j_symmetric_weyl_consistency")
def _j_weyl(settings):
    expr = builtin("nls_offdiag_p2").build_expression()
    bad = []
    for lam in (2j, 0.3 + 2.5j, -1 + 3j):
        _, _, sample = _weyl("nls_offdiag_p2", lam, settings)
        if not sample.converged:
            bad.append(f"λ={lam}: Weyl sample did not converge")
            continue
        r = count_l2(expr, lam, settings)
        if r.count != expr.p:
            bad.append(f"λ={lam}: count {r.count}, p = {expr.p}")
    return _count(bad, 3, "λ-value")


def _finite_cases(rng):
    for n in (2, 4):
        p = n // 2
        Q = _random_constant(rng, n)
        for L in (1.0, 2.0):
            yield DiracExpression(SignatureMatrix.canonical(p), ConstantPotential(Q), Interval.finite(L))


@check("defect_lab", "finite_interval_kernel")
def _kernel(settings):
    rng = np.random.default_rng(SEED + 6)
    bad = []
    for expr in _finite_cases(rng):
        k = finite_interval_kernel(expr, settings)
        if k != 2 * expr.n:
            bad.append(f"n={expr.n}, L={expr.interval.length:g}: {k}")
    return _count(bad, 4, "case")


@check("defect_lab", "adjoint_kernel_count")
def _adjoint_kernel(settings):
    rng = np.random.default_rng(SEED + 6)
    bad = []
    for expr in _finite_cases(rng):
        k, k_adj = finite_interval_kernel(expr, settings), finite_interval_kernel(expr.adjoint(), settings)
        if k != k_adj:
            bad.append(f"n={expr.n}, L={expr.interval.length:g}: {k} vs {k_adj} for Q*")
    return _count(bad, 4, "case")


@check("defect_lab", "von_neumann_rank")
def _von_neumann(settings):
    rng = np.random.default_rng(SEED + 7)
    bad = []
    cases = [_free(1, Interval.finite(1.0))]
    for n, L in ((2, 2.0), (4, 1.0)):
        A = _random_complex(rng, n, n)
        cases.append(DiracExpression(SignatureMatrix.canonical(n // 2),
                                     ConstantPotential((A + A.conj().T) / 2), Interval.finite(L)))
    for expr in cases:
        r = von_neumann_dimension_check(expr, settings)
        if not r.passed:
            bad.append(f"n={expr.n}: rank {r.rank}")
    return _count(bad, len(cases), "expression")


@check("defect_lab", "graph_orthogonality")
def _graph(settings):
    rng = np.random.default_rng(SEED + 8)
    expr = builtin("finite_exp_decay_n2").build_expression()
    basis = kernel_basis(expr, settings)
    L = expr.interval.length
    worst = 0.0
    for _ in range(10):
        g = kernel_element(expr, basis, _random_complex(rng, 2 * expr.n))
        a = float(rng.uniform(0.05, 0.4)) * L
        b = float(rng.uniform(0.6, 0.95)) * L
        f = VectorFunction.bump(a, b, _random_complex(rng, expr.n))
        worst = max(worst, graph_orthogonality_probe(expr, g, f, settings))
    return _below(worst, IDENTITY_TOL, "10 random kernel elements against smooth bumps")


@check("defect_lab", "finite_defect_sums")
def _defect_sums(settings):
    expr = builtin("finite_exp_decay_n2").build_expression()
    total = finite_defect_sum(expr, 1j, settings)
    block = block_defect_check(expr, settings)
    detail = f"N sum {total.total}; block rank {block.trace_rank}, n± = ({block.n_plus}, {block.n_minus})"
    passed = total.passed and block.passed
    return Outcome(float(total.total), float(2 * expr.n), passed, detail)


def run_suite(settings: Optional[Settings] = None, modules=None) -> List[Verdict]:
    """Run every registered check (or those of `modules`), in registration order."""
    settings = resolve(settings)
    verdicts = []
    for module, name, fn in SUITE:
        if modules and module not in modules:
            continue
        try:
            out = fn(settings)
        except Exception as e:
            logger.exception(f"Check {module}.{name} raised")
            out = Outcome(np.nan, np.nan, False, f"{type(e).__name__}: {e}")
        status = "PASS" if out.passed else "FAIL"
        log = logger.info if out.passed else logger.warning
        log(f"{module}.{name}: {status} (measured {out.measured:.3e}, threshold {out.threshold:.3e})")
        verdicts.append(Verdict(module, name, status, out.measured, out.threshold, out.detail))
    return verdicts


def scenario_checks(scenario: ScenarioConfig, settings: Optional[Settings] = None) -> List[Verdict]:
    """Herglotz residual and sign law on every grid point of one scenario."""
    s = scenario.settings(settings)
    expr = scenario.build_expression()
    report = classify(expr, settings=s)
    if expr.interval.kind != "half_line" or expr.p is None:
        return []
    scheme = scenario.boundary_scheme(s)
    canon = scheme.canonical_expression(expr)
    verdicts = []
    for lam in scenario.grid():
        name = f"{scenario.name}@{complex(lam)}"
        try:
            sample = weyl_solution(canon, scheme.completion, lam, settings=s, report=report)
        except UnwarrantedRegimeError as e:
            verdicts.append(Verdict("scenario", name, "PASS", 0.0, 0.0, f"refused: {e}"))
            continue
        if not sample.converged:
            verdicts.append(Verdict("scenario", name, "FAIL", np.nan, s.weyl.tol, "no convergence"))
            continue
        imag_identity = sample.identity_residuals.get("imag_identity")
        if imag_identity is not None:
            status = "PASS" if imag_identity < IDENTITY_TOL else "FAIL"
            verdicts.append(Verdict("scenario", name + ":imag_identity", status, imag_identity, IDENTITY_TOL))
        if sample.regime in ("upper", "lower"):
            sc = sign_check(sample, canon, report, s)
            ok = sc.min_eig_imM > 0 if sc.side == "upper" else sc.min_eig_imM < 0
            verdicts.append(Verdict("scenario", name + ":sign", "PASS" if ok else "FAIL",
                                    sc.min_eig_imM, 0.0, sc.side))
    return verdicts
