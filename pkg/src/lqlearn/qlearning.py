"""Centralized stochastic-approximation learner.

The learner never sees the noise statistics. It observes sampled plant
matrices (A(k), B(k)) and iterates

    G(k+1) = G(k) + alpha(k) * Y(G(k)),

where Y rebuilds the sampled Bellman residual from the current Q-factor and
alpha(k) follows a Robbins-Monro power-law schedule. Under well-posedness the
iterates converge almost surely to the fixed point G* of the expectation map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergedError
from .lqcore import PINV_TOL, QFactor, SystemModel, NoiseModel, pi_map, symmetrize
from .sampling import Realization, RngStream, draw_noise, realize
from .trace import RunTrace

# Abort threshold on ||G||_F; a capped abort with diagnostics beats silent NaN
# when an adversarial seed blows up the heavy-tailed early steps.
DIVERGENCE_CAP = 1e9


@dataclass(frozen=True)
class Schedule:
    """Power-law learning rates alpha(k) = scale * (1 / (k + offset))^exponent.

    The exponent range (0.5, 1] guarantees sum(alpha) = inf and
    sum(alpha^2) < inf. scale = 0 is allowed as a degenerate diagnostic mode
    (consensus-only rounds); any positive scale must keep alpha(0) < 1.
    """

    exponent: float = 0.6
    offset: int = 2
    scale: float = 1.0

    def __post_init__(self):
        if not 0.5 < self.exponent <= 1.0:
            raise ValueError(f"exponent must be in (0.5, 1], got {self.exponent}")
        if self.offset < 1 or int(self.offset) != self.offset:
            raise ValueError(f"offset must be an integer >= 1, got {self.offset}")
        if self.scale < 0.0:
            raise ValueError(f"scale must be >= 0, got {self.scale}")
        if self.scale > 0.0 and self.alpha(0) >= 1.0:
            raise ValueError(
                "alpha(0) must be < 1; increase offset or lower scale"
            )

    def alpha(self, k: int) -> float:
        return self.scale * (1.0 / (k + self.offset)) ** self.exponent


def y_operator(
    G: QFactor,
    real: Realization,
    Q: np.ndarray,
    R: np.ndarray,
    pinv_tol: float = PINV_TOL,
) -> np.ndarray:
    """Sampled Bellman residual at G for one plant realization.

    [[Q + A_k' P A_k, A_k' P B_k], [B_k' P A_k, B_k' P B_k + R]] - G
    with P = pi_map(G); symmetrized. Its expectation under the true noise law
    vanishes exactly at G*.
    """
    P = pi_map(G, pinv_tol)
    Uk = real.stacked()
    M = Uk.T @ P @ Uk
    n = Q.shape[0]
    M[:n, :n] += Q
    M[n:, n:] += R
    return symmetrize(M - G.mat)


@dataclass(frozen=True)
class LearnerState:
    """Current iterate of the centralized learner."""

    G: QFactor
    k: int
    trace: RunTrace | None = None


def centralized_step(
    state: LearnerState,
    sys: SystemModel,
    real: Realization,
    sched: Schedule,
) -> LearnerState:
    """One update G <- G + alpha(k) Y(G); appends to the trace if present."""
    alpha = sched.alpha(state.k)
    Y = y_operator(state.G, real, sys.Q, sys.R)
    G_next = QFactor.symmetrized(state.G.mat + alpha * Y, sys.n, sys.m)
    if G_next.fro_norm() > DIVERGENCE_CAP:
        raise DivergedError(
            f"centralized iterate exceeded {DIVERGENCE_CAP:g} at step {state.k + 1}",
            step=state.k + 1,
        )
    if state.trace is not None:
        state.trace.record_round(alpha, [real.omega], [G_next.mat])
    return LearnerState(G=G_next, k=state.k + 1, trace=state.trace)


def run_centralized(
    sys: SystemModel,
    noise: NoiseModel,
    sched: Schedule,
    iters: int,
    rng: RngStream,
    oracle=None,
    G0: QFactor | None = None,
) -> RunTrace:
    """Run the stochastic approximation for a fixed iteration budget.

    Draws exactly one omega per iteration (A(k) and B(k) share it). When an
    oracle solution is supplied the trace records the Frobenius error to G*
    per step.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng.with_noise(noise)
    trace = RunTrace(
        kind="centralized",
        n_sensors=1,
        G_star=None if oracle is None else oracle.G_star.mat,
    )
    state = LearnerState(
        G=G0 if G0 is not None else QFactor.cost_diag(sys), k=0, trace=trace
    )
    for _ in range(iters):
        real = realize(sys, draw_noise(rng))
        state = centralized_step(state, sys, real, sched)
    return trace
