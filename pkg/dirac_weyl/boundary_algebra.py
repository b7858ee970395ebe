"""
Finite-dimensional boundary machinery at x = 0.

Boundary values y(0) = (y1(0), y2(0)) live in C^{2p}. An admissible pair
(C1, C2) fixes the boundary condition C1 y1(0) + C2 y2(0) = 0; a completion
(X, Y) with Y* J X = J extends it to the boundary-triple maps Γ0, Γ1.
All completions here assume the off-diagonal J = [[0, -I], [I, 0]]; other
signature matrices are first brought to that form with `canonical_frame`.
"""

from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import cosm, null_space, orth, sinm, subspace_angles, svdvals

from dirac_weyl import logger
from dirac_weyl.dirac_core import DiracExpression, SignatureMatrix, integrate, kappa
from dirac_weyl.settings import Settings, resolve
from dirac_weyl.utils import (
    AdmissibilityError,
    ContractViolation,
    UnsupportedFrameError,
    matrix_to_pairs,
    opnorm,
)


class BoundarySubspace:
    """θ ⊂ C^n given by an orthonormal basis (n×k)."""

    __slots__ = ("basis",)

    def __init__(self, basis: np.ndarray, tol: float = 1e-12):
        basis = np.array(basis, dtype=complex)
        if basis.ndim != 2:
            raise ContractViolation("BoundarySubspace", f"basis must be 2-D, got {basis.ndim}-D")
        k = basis.shape[1]
        res = opnorm(basis.conj().T @ basis - np.eye(k)) if k else 0.0
        if res > tol:
            raise ContractViolation("BoundarySubspace", f"basis is not orthonormal ({res:.3e})")
        basis.setflags(write=False)
        self.basis = basis

    @classmethod
    def span(cls, vectors: np.ndarray) -> "BoundarySubspace":
        """Orthonormalized column span; rank-deficient input is allowed."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=complex))
        if vectors.shape[1] == 0 or not np.any(vectors):
            return cls.zero(vectors.shape[0])
        return cls(orth(vectors))

    @classmethod
    def zero(cls, n: int) -> "BoundarySubspace":
        return cls(np.zeros((n, 0), dtype=complex))

    @classmethod
    def full(cls, n: int) -> "BoundarySubspace":
        return cls(np.eye(n, dtype=complex))

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def __repr__(self):
        return f"BoundarySubspace(n={self.n}, dim={self.dim})"


def principal_angles(a: BoundarySubspace, b: BoundarySubspace) -> np.ndarray:
    if a.dim == 0 or b.dim == 0:
        return np.zeros(0)
    return subspace_angles(a.basis, b.basis)


def same_subspace(a: BoundarySubspace, b: BoundarySubspace, tol: Optional[float] = None) -> bool:
    if tol is None:
        tol = resolve().boundary.subspace_angle_tol
    if a.n != b.n or a.dim != b.dim:
        return False
    angles = principal_angles(a, b)
    return bool(angles.size == 0 or angles.max() < tol)


def theta_cross(theta: BoundarySubspace, J: SignatureMatrix) -> BoundarySubspace:
    """θ^× = C^n ⊖ Jθ."""
    if theta.n != J.n:
        raise ContractViolation("theta_cross", f"θ lives in C^{theta.n}, J is {J.n}×{J.n}")
    if theta.dim == 0:
        return BoundarySubspace.full(J.n)
    if theta.dim == J.n:
        return BoundarySubspace.zero(J.n)
    image = J.matrix @ theta.basis
    return BoundarySubspace(null_space(image.conj().T))


class AdmissiblePair:
    """(C1, C2) with rank [C1 C2] = p."""

    __slots__ = ("C1", "C2")

    def __init__(self, C1, C2, settings: Optional[Settings] = None):
        C1 = np.atleast_2d(np.array(C1, dtype=complex))
        C2 = np.atleast_2d(np.array(C2, dtype=complex))
        if C1.shape != C2.shape or C1.shape[0] != C1.shape[1]:
            raise ContractViolation(
                "AdmissiblePair", f"C1, C2 must be p×p of equal size, got {C1.shape}, {C2.shape}")
        p = C1.shape[0]
        svals = svdvals(np.hstack([C1, C2]))
        thr = resolve(settings).rank.admissible_threshold * max(svals[0], np.finfo(float).tiny)
        rank = int(np.sum(svals > thr))
        if rank < p or svals[0] == 0:
            raise AdmissibilityError(rank if svals[0] else 0, p, svals)
        C1.setflags(write=False)
        C2.setflags(write=False)
        self.C1 = C1
        self.C2 = C2

    @classmethod
    def from_phi(cls, phi: "PhiParameter") -> "AdmissiblePair":
        """(cos Φ, sin Φ)"""
        return cls(cosm(phi.matrix), sinm(phi.matrix))

    @property
    def p(self) -> int:
        return self.C1.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.hstack([self.C1, self.C2])

    def __repr__(self):
        return f"AdmissiblePair(p={self.p})"


class PhiParameter:
    """Hermitian Φ of the rotated boundary condition cos Φ y1(0) + sin Φ y2(0) = 0."""

    __slots__ = ("matrix",)

    def __init__(self, phi, tol: float = 1e-12):
        phi = np.atleast_2d(np.array(phi, dtype=complex))
        if phi.shape[0] != phi.shape[1]:
            raise ContractViolation("PhiParameter", f"Φ must be square, got {phi.shape}")
        res = opnorm(phi - phi.conj().T)
        if res >= tol:
            raise ContractViolation("PhiParameter", f"Φ is not Hermitian ({res:.3e})")
        phi.setflags(write=False)
        self.matrix = phi

    @classmethod
    def scalar(cls, value: float, p: int = 1) -> "PhiParameter":
        return cls(value * np.eye(p))

    @property
    def p(self) -> int:
        return self.matrix.shape[0]


def theta_from_pair(pair: AdmissiblePair) -> BoundarySubspace:
    """θ = ker [C1 C2]."""
    theta = BoundarySubspace(null_space(pair.matrix))
    if theta.dim != pair.p:
        raise AdmissibilityError(2 * pair.p - theta.dim, pair.p)
    return theta


def pair_from_theta(theta: BoundarySubspace, settings: Optional[Settings] = None) -> AdmissiblePair:
    """(C1, C2) with θ = ker [C1 C2]; rows are an orthonormal basis of θ^⊥."""
    if theta.n % 2 or theta.dim != theta.n // 2:
        raise ContractViolation(
            "pair_from_theta", f"need dim θ = p in C^(2p), got dim {theta.dim} in C^{theta.n}")
    p = theta.dim
    rows = null_space(theta.basis.conj().T).conj().T
    return AdmissiblePair(rows[:, :p], rows[:, p:], settings)


def canonical_J(p: int) -> np.ndarray:
    eye, zero = np.eye(p), np.zeros((p, p))
    return np.block([[zero, -eye], [eye, zero]])


class Completion:
    """X, Y with Y* J X = J; the top block row of X is (C1 C2)."""

    __slots__ = ("X", "Y", "method")

    def __init__(self, X, Y, J: SignatureMatrix, method: str = "explicit",
                 settings: Optional[Settings] = None):
        settings = resolve(settings)
        X = np.array(X, dtype=complex)
        Y = np.array(Y, dtype=complex)
        if X.shape != (J.n, J.n) or Y.shape != (J.n, J.n):
            raise ContractViolation(
                "Completion", f"X, Y must be {J.n}×{J.n}, got {X.shape}, {Y.shape}")
        res = opnorm(Y.conj().T @ J.matrix @ X - J.matrix)
        if res >= settings.boundary.completion_tol:
            raise ContractViolation(
                "Completion",
                f"|Y*JX - J| = {res:.3e} exceeds {settings.boundary.completion_tol:.1e}")
        X.setflags(write=False)
        Y.setflags(write=False)
        self.X = X
        self.Y = Y
        self.method = method

    @classmethod
    def identity(cls, J: SignatureMatrix) -> "Completion":
        eye = np.eye(J.n)
        return cls(eye, eye, J, "identity")

    @classmethod
    def from_phi(cls, phi: PhiParameter, settings: Optional[Settings] = None) -> "Completion":
        """X = Y = [[cos Φ, sin Φ], [-sin Φ, cos Φ]] for the canonical J."""
        c, s = cosm(phi.matrix), sinm(phi.matrix)
        X = np.block([[c, s], [-s, c]])
        J = SignatureMatrix.canonical(phi.p)
        return cls(X, X, J, "rotation", settings)

    @property
    def p(self) -> int:
        return self.X.shape[0] // 2

    def blocks(self, side: str = "B") -> Tuple[np.ndarray, ...]:
        """(C1, C2, C3, C4) of X for side B, of Y for side A."""
        M = self.X if side == "B" else self.Y
        p = self.p
        return M[:p, :p], M[:p, p:], M[p:, :p], M[p:, p:]

    @property
    def pair(self) -> AdmissiblePair:
        C1, C2, _, _ = self.blocks("B")
        return AdmissiblePair(C1, C2)

    def residual(self, J: SignatureMatrix) -> float:
        return opnorm(self.Y.conj().T @ J.matrix @ self.X - J.matrix)

    @property
    def is_unitary_rotation(self) -> bool:
        return np.array_equal(self.X, self.Y) and opnorm(
            self.X.conj().T @ self.X - np.eye(len(self.X))) < 1e-12

    def echo(self) -> dict:
        return {"method": self.method, "X": matrix_to_pairs(self.X), "Y": matrix_to_pairs(self.Y)}

    def __repr__(self):
        return f"Completion(p={self.p}, method={self.method})"


def check_canonical(J: SignatureMatrix, operation: str, settings: Settings):
    if J.p is None:
        raise ContractViolation(operation, f"needs even n, got {J.n}")
    dist = opnorm(J.matrix - canonical_J(J.p))
    if dist >= settings.boundary.completion_tol:
        raise UnsupportedFrameError(operation, dist)


def complete_pair(
    pair: AdmissiblePair, J: SignatureMatrix, settings: Optional[Settings] = None
) -> Completion:
    """Extend (C1 C2) to X = [[C1, C2], [C3, C4]] and find Y with Y* J X = J.

    When the rows T = (C1 C2) satisfy T J T* = 0 the completion is J-unitary
    (Y = X) with bottom rows (TT*)⁻¹ T J*. Otherwise, or when that X is too
    ill-conditioned, the bottom rows span the orthogonal complement of the
    rows of T and Y = -J X^{-*} J.
    """
    settings = resolve(settings)
    check_canonical(J, "complete_pair", settings)
    if pair.p != J.p:
        raise ContractViolation("complete_pair", f"pair has p={pair.p}, J has p={J.p}")
    T = pair.matrix
    Jm = J.matrix
    gram = T @ T.conj().T
    lagrangian = opnorm(T @ Jm @ T.conj().T) <= settings.boundary.completion_tol * opnorm(gram)
    if lagrangian:
        B = np.linalg.solve(gram, T @ Jm.conj().T)
        X = np.vstack([T, B])
        cond = np.linalg.cond(X)
        if cond <= settings.boundary.symplectic_condition_limit:
            return Completion(X, X, J, "symplectic", settings)
        logger.info(f"Symplectic completion too ill-conditioned (cond {cond:.3e}), using complement")
    B = null_space(T).conj().T
    X = np.vstack([T, B])
    Y = -Jm @ np.linalg.inv(X).conj().T @ Jm
    return Completion(X, Y, J, "complement", settings)


def gamma_maps(comp: Completion, boundary_value: np.ndarray, side: str = "B"):
    """(Γ0, Γ1) of y(0); boundary_value may be a vector or a block of columns."""
    if side not in ("A", "B"):
        raise ContractViolation("gamma_maps", f"side must be 'A' or 'B', got {side!r}")
    y0 = np.asarray(boundary_value, dtype=complex)
    if y0.shape[0] != 2 * comp.p:
        raise ContractViolation(
            "gamma_maps", f"boundary value has {y0.shape[0]} rows, expected {2 * comp.p}")
    M = comp.X if side == "B" else comp.Y
    out = M @ y0
    return out[:comp.p], out[comp.p:]


def canonical_frame(J: SignatureMatrix, settings: Optional[Settings] = None) -> np.ndarray:
    """Unitary U with U* J U = [[0, -I], [I, 0]]."""
    settings = resolve(settings)
    if J.p is None:
        raise ContractViolation("canonical_frame", f"needs even n, got {J.n}")
    p = J.p
    eye = np.eye(p)
    base = np.block([[1j * eye, eye], [-1j * eye, eye]]) / np.sqrt(2)
    target = canonical_J(p)
    if opnorm(J.matrix - target) < settings.signature.tol:
        return np.eye(J.n, dtype=complex)
    if opnorm(J.matrix - SignatureMatrix.diag_minus_i(p).matrix) < settings.signature.tol:
        return base
    if opnorm(J.matrix - SignatureMatrix.diag_i(p).matrix) < settings.signature.tol:
        return base @ np.diag([1.0] * p + [-1.0] * p)
    plus, minus = kappa(J, settings)
    if plus != minus:
        raise ContractViolation(
            "canonical_frame", f"needs κ₊ = κ₋ to reach the off-diagonal form, got ({plus}, {minus})")
    # -iJ is Hermitian with eigenvalues -1 (J v = -iv) first, then +1
    _, V = np.linalg.eigh(-1j * J.matrix)
    return V @ base


class BoundaryScheme(NamedTuple):
    """Everything the boundary condition at 0 contributes to a computation."""

    pair: AdmissiblePair
    completion: Completion
    theta: BoundarySubspace
    frame: np.ndarray  # U with y = U z, z solving the canonical-frame expression

    @classmethod
    def build(
        cls,
        J: SignatureMatrix,
        pair: Optional[AdmissiblePair] = None,
        phi: Optional[PhiParameter] = None,
        completion: Optional[Completion] = None,
        settings: Optional[Settings] = None,
    ) -> "BoundaryScheme":
        """Frame plus completion; exactly one of pair, phi and completion is used."""
        settings = resolve(settings)
        U = canonical_frame(J, settings)
        Jc = SignatureMatrix.canonical(J.p)
        if completion is None:
            if phi is not None:
                completion = Completion.from_phi(phi, settings)
            elif pair is not None:
                completion = complete_pair(pair, Jc, settings)
            else:
                completion = Completion.identity(Jc)
        pair = completion.pair
        return cls(pair, completion, theta_from_pair(pair), U)

    def canonical_expression(self, expr: DiracExpression) -> DiracExpression:
        if not np.allclose(self.frame, np.eye(len(self.frame))):
            expr = expr.change_frame(self.frame)
        return expr

    def echo(self) -> dict:
        return {"completion": self.completion.echo(), "frame": matrix_to_pairs(self.frame)}


def green_identity_residual(
    comp: Completion,
    lam: complex,
    F: Callable[[np.ndarray], np.ndarray],
    mu: complex,
    G: Callable[[np.ndarray], np.ndarray],
    window: Tuple[float, float],
    settings: Optional[Settings] = None,
    breakpoints=(),
) -> float:
    """|(λ - μ)∫G*F - [(Γ0^A G)* Γ1^B F - (Γ1^A G)* Γ0^B F]|.

    F solves D(Q)F = λF and G solves D(Q*)G = μ̄G, both decaying on the window.
    F and G map abscissa arrays to (m, n, k) values.
    """

    def as_blocks(fn, xs):
        vals = np.asarray(fn(xs))
        return vals[..., None] if vals.ndim == 2 else vals

    a, _ = window
    quad = integrate(
        lambda xs: np.einsum("mik,mil->mkl", as_blocks(G, xs).conj(), as_blocks(F, xs)),
        *window,
        breakpoints,
        settings,
    )
    lhs = (lam - mu) * quad.value
    F0 = as_blocks(F, np.array([a]))[0]
    G0 = as_blocks(G, np.array([a]))[0]
    f0, f1 = gamma_maps(comp, F0, "B")
    g0, g1 = gamma_maps(comp, G0, "A")
    rhs = g0.conj().T @ f1 - g1.conj().T @ f0
    return opnorm(np.atleast_2d(lhs - rhs))
