"""Deterministic LQ mathematics for the multiplicative-noise problem.

The plant is x(k+1) = A(k)x(k) + B(k)u(k) with A(k) = A + Abar*w(k),
B(k) = B + Bbar*w(k) and scalar Gaussian w(k) ~ N(mu, sigma2). The cost is
sum_k x'Qx + u'Ru with Q > 0, R > 0.

Everything here is expressed through the (n+m)x(n+m) Q-factor G. Its Schur
complement recovers the Riccati solution (pi_map) and its blocks recover the
optimal feedback gain (gamma_map). The expectation operator closes the loop:
G* is the unique fixed point G = E[ N + Ups(k)' Pi(G) Ups(k) ] with
Ups(k) = [A(k) B(k)], and the oracle finds it by Picard iteration.

All operations are pure functions; safe to call concurrently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergenceError,
    NotStabilizingError,
    RankDeficientWarning,
    SingularInnerMatrixError,
)

# Singular values of G_uu below PINV_TOL * sigma_max are dropped by the
# pseudo-inverse.
PINV_TOL = 1e-12
# Maps symmetrize their output; this is the tolerance for *asserting* symmetry
# of inputs, where floating-point asymmetry would otherwise accumulate.
SYM_TOL = 1e-9

DEFAULT_ORACLE_TOL = 1e-12
DEFAULT_ORACLE_MAX_ITER = 100_000


def symmetrize(mat: np.ndarray) -> np.ndarray:
    """(M + M') / 2."""
    return (mat + mat.T) / 2.0


def _as_matrix(value, name: str) -> np.ndarray:
    mat = np.asarray(value, dtype=float)
    if mat.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {mat.shape}")
    return mat


def _check_spd(mat: np.ndarray, name: str) -> None:
    if not np.allclose(mat, mat.T, atol=SYM_TOL, rtol=0.0):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(mat).min() <= 0.0:
        raise ValueError(f"{name} must be positive definite")


@dataclass(frozen=True)
class SystemModel:
    """Constant plant matrices (A, Abar, B, Bbar) and cost weights (Q, R)."""

    A: np.ndarray
    A_bar: np.ndarray
    B: np.ndarray
    B_bar: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        for name in ("A", "A_bar", "B", "B_bar", "Q", "R"):
            object.__setattr__(self, name, _as_matrix(getattr(self, name), name))
        n, m = self.A.shape[0], self.B.shape[1]
        expected = {
            "A": (n, n),
            "A_bar": (n, n),
            "B": (n, m),
            "B_bar": (n, m),
            "Q": (n, n),
            "R": (m, m),
        }
        for name, shape in expected.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ValueError(f"{name} has shape {got}, expected {shape}")
        _check_spd(self.Q, "Q")
        _check_spd(self.R, "R")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def cost_block(self) -> np.ndarray:
        """diag(Q, R), the (n+m)x(n+m) stage-cost weight."""
        n, m = self.n, self.m
        out = np.zeros((n + m, n + m))
        out[:n, :n] = self.Q
        out[n:, n:] = self.R
        return out

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """([A B], [Abar Bbar]) as n x (n+m) arrays."""
        return np.hstack([self.A, self.B]), np.hstack([self.A_bar, self.B_bar])


@dataclass(frozen=True)
class NoiseModel:
    """First two moments of the scalar multiplicative noise w(k).

    The oracle only ever uses E[w] = mu and E[w^2] = mu^2 + sigma2, so any
    noise law with matching first two moments reproduces identical oracles.
    The simulator draws Gaussian N(mu, sigma2) samples.
    """

    mu: float
    sigma2: float

    def __post_init__(self):
        if self.sigma2 < 0.0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")

    @property
    def second_moment(self) -> float:
        return self.mu * self.mu + self.sigma2


@dataclass(frozen=True)
class QFactor:
    """Symmetric (n+m)x(n+m) matrix G with the state/input block partition."""

    mat: np.ndarray
    n: int
    m: int

    def __post_init__(self):
        mat = _as_matrix(self.mat, "G")
        d = self.n + self.m
        if mat.shape != (d, d):
            raise ValueError(f"G has shape {mat.shape}, expected ({d}, {d})")
        if not np.allclose(mat, mat.T, atol=SYM_TOL, rtol=0.0):
            raise ValueError("G must be symmetric within 1e-9")
        object.__setattr__(self, "mat", mat)

    @classmethod
    def symmetrized(cls, mat: np.ndarray, n: int, m: int) -> "QFactor":
        return cls(symmetrize(np.asarray(mat, dtype=float)), n, m)

    @classmethod
    def cost_diag(cls, sys: SystemModel) -> "QFactor":
        """G = diag(Q, R), the standard initial iterate."""
        return cls(sys.cost_block(), sys.n, sys.m)

    @property
    def xx(self) -> np.ndarray:
        return self.mat[: self.n, : self.n]

    @property
    def xu(self) -> np.ndarray:
        return self.mat[: self.n, self.n :]

    @property
    def ux(self) -> np.ndarray:
        return self.mat[self.n :, : self.n]

    @property
    def uu(self) -> np.ndarray:
        return self.mat[self.n :, self.n :]

    def fro_norm(self) -> float:
        return float(np.linalg.norm(self.mat))

    def norm1(self) -> float:
        """Entrywise 1-norm, the per-sensor quantity the norm plots track."""
        return float(np.abs(self.mat).sum())


@dataclass(frozen=True)
class Gain:
    """State-feedback gain, u = K x."""

    K: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "K", _as_matrix(self.K, "K"))


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    spectral_radius: float


@dataclass(frozen=True)
class OracleSolution:
    """Ground truth: fixed point G*, Riccati solution P = Pi(G*), gain K*."""

    G_star: QFactor
    P: np.ndarray
    K_star: Gain
    iterations: int
    residual: float


def _pinv_uu(G: QFactor, pinv_tol: float) -> np.ndarray:
    """Pseudo-inverse of G_uu, warning when it is rank-deficient at the cutoff."""
    uu = G.uu
    svals = np.linalg.svd(uu, compute_uv=False)
    if svals.size and svals[-1] <= pinv_tol * svals[0]:
        warnings.warn(
            f"G_uu rank-deficient at cutoff {pinv_tol:g}; "
            "pseudo-inverse drops the null directions",
            RankDeficientWarning,
            stacklevel=3,
        )
    return np.linalg.pinv(uu, rcond=pinv_tol)


def pi_map(G: QFactor, pinv_tol: float = PINV_TOL) -> np.ndarray:
    """Schur complement G_xx - G_xu G_uu^+ G_ux, recovering P from G."""
    return symmetrize(G.xx - G.xu @ _pinv_uu(G, pinv_tol) @ G.ux)


def gamma_map(G: QFactor, pinv_tol: float = PINV_TOL) -> Gain:
    """Feedback gain -G_uu^+ G_ux recovered from the Q-factor blocks."""
    return Gain(-_pinv_uu(G, pinv_tol) @ G.ux)


def expectation_map(
    G: QFactor, sys: SystemModel, noise: NoiseModel, pinv_tol: float = PINV_TOL
) -> QFactor:
    """Closed form of E[ diag(Q,R) + Ups(k)' Pi(G) Ups(k) ].

    With Ups(k) = [A(k) B(k)] = U + V*w(k), U = [A B], V = [Abar Bbar], the
    expectation expands exactly through the first two noise moments:

        E[Ups' P Ups] = U'PU + mu*(U'PV + V'PU) + (mu^2 + sigma2)*V'PV.

    Oracle-side only: requires the noise statistics the learners never see.
    """
    P = pi_map(G, pinv_tol)
    U, V = sys.stacked()
    upu = U.T @ P @ U
    upv = U.T @ P @ V
    vpv = V.T @ P @ V
    mean = sys.cost_block() + upu + noise.mu * (upv + upv.T) + noise.second_moment * vpv
    return QFactor.symmetrized(mean, sys.n, sys.m)


def solve_oracle(
    sys: SystemModel,
    noise: NoiseModel,
    oracle_tol: float = DEFAULT_ORACLE_TOL,
    max_iter: int = DEFAULT_ORACLE_MAX_ITER,
    pinv_tol: float = PINV_TOL,
) -> OracleSolution:
    """Picard iteration G <- expectation_map(G) from G0 = diag(Q, R).

    Returns G* with ||G* - expectation_map(G*)||_F <= oracle_tol, together
    with P = pi_map(G*) and K* = gamma_map(G*).

    Raises NoConvergenceError when the residual stays above oracle_tol (the
    LQ problem is then likely ill-posed) and NotStabilizingError when the
    resulting K* fails the mean-square stability check.
    """
    if oracle_tol <= 0.0:
        raise ValueError("oracle_tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    G = QFactor.cost_diag(sys)
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        G_next = expectation_map(G, sys, noise, pinv_tol)
        residual = float(np.linalg.norm(G_next.mat - G.mat))
        if residual <= oracle_tol:
            break
        G = G_next
    else:
        raise NoConvergenceError(residual, max_iter)

    P = pi_map(G, pinv_tol)
    K = gamma_map(G, pinv_tol)
    report = ms_stability_check(K, sys, noise)
    if not report.stable:
        raise NotStabilizingError(report.spectral_radius)
    return OracleSolution(
        G_star=G, P=P, K_star=K, iterations=iteration, residual=residual
    )


def optimal_gain_closed_form(
    P: np.ndarray, sys: SystemModel, noise: NoiseModel
) -> Gain:
    """Fully expanded optimal gain from a Riccati solution P.

    K = -[B'PB + mu(B'PBb + Bb'PB) + (mu^2+s2)Bb'PBb + R]^-1
         [B'PA + mu(B'PAb + Bb'PA) + (mu^2+s2)Bb'PAb]
    """
    P = symmetrize(_as_matrix(P, "P"))
    A, Ab, B, Bb = sys.A, sys.A_bar, sys.B, sys.B_bar
    mu, m2 = noise.mu, noise.second_moment
    inner = B.T @ P @ B + mu * (B.T @ P @ Bb + Bb.T @ P @ B) + m2 * (Bb.T @ P @ Bb)
    inner = inner + sys.R
    cross = B.T @ P @ A + mu * (B.T @ P @ Ab + Bb.T @ P @ A) + m2 * (Bb.T @ P @ Ab)
    try:
        K = -np.linalg.solve(inner, cross)
    except np.linalg.LinAlgError as exc:
        raise SingularInnerMatrixError(
            "inner matrix B'PB + ... + R is singular; "
            "cannot happen for R > 0 and P >= 0"
        ) from exc
    return Gain(K)


def ms_stability_check(
    K: Gain, sys: SystemModel, noise: NoiseModel
) -> StabilityReport:
    """Mean-square stability of the closed loop under u = Kx.

    The second moment of the state obeys vec(M(k+1)) = T vec(M(k)) with

        T = Acl (x) Acl + mu*(Acl (x) Abcl + Abcl (x) Acl)
            + (mu^2 + sigma2) * Abcl (x) Abcl,

    Acl = A + BK, Abcl = Abar + Bbar K. Stable iff the spectral radius of
    the n^2 x n^2 operator T is < 1.
    """
    Acl = sys.A + sys.B @ K.K
    Abcl = sys.A_bar + sys.B_bar @ K.K
    T = (
        np.kron(Acl, Acl)
        + noise.mu * (np.kron(Acl, Abcl) + np.kron(Abcl, Acl))
        + noise.second_moment * np.kron(Abcl, Abcl)
    )
    rho = float(np.abs(np.linalg.eigvals(T)).max())
    return StabilityReport(stable=rho < 1.0, spectral_radius=rho)


def riccati_residual(P: np.ndarray, sys: SystemModel, noise: NoiseModel) -> float:
    """Frobenius norm of LHS - RHS of the generalized Riccati equation.

    P = E[Q + A(k)'PA(k)] - E[A(k)'PB(k)] E[B(k)'PB(k) + R]^+ E[B(k)'PA(k)],
    expectations expanded exactly as in expectation_map. Zero iff P solves it.
    """
    P = symmetrize(_as_matrix(P, "P"))
    A, Ab, B, Bb = sys.A, sys.A_bar, sys.B, sys.B_bar
    mu, m2 = noise.mu, noise.second_moment

    def second(X, Xb, Y, Yb):
        return X.T @ P @ Y + mu * (X.T @ P @ Yb + Xb.T @ P @ Y) + m2 * (Xb.T @ P @ Yb)

    s_aa = second(A, Ab, A, Ab)
    s_ab = second(A, Ab, B, Bb)
    s_ba = second(B, Bb, A, Ab)
    s_bb = second(B, Bb, B, Bb)
    rhs = sys.Q + s_aa - s_ab @ np.linalg.pinv(s_bb + sys.R, rcond=PINV_TOL) @ s_ba
    return float(np.linalg.norm(P - rhs))
