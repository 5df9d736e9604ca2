"""Seeded randomness and closed-loop simulation.

All randomness flows through RngStream, a counter-based Philox stream keyed
by (seed, stream_id). Gaussian draws use inverse-CDF over 53-bit uniforms, so
a (seed, stream_id) pair yields bit-identical sequences across runs and
platforms. Substreams (Monte Carlo runs, per-sensor noise) are derived
through SeedSequence spawn keys and can never collide with each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import DivergedError, NotStabilizingError
from .lqcore import Gain, NoiseModel, SystemModel, ms_stability_check

# Trajectories whose state norm exceeds this are flagged as diverging and
# truncated; far below float overflow, far above anything a stable loop does.
OVERFLOW_LIMIT = 1e12

_U53 = float(2**53)


class RngStream:
    """One logical random stream per experiment component.

    Identical (seed, stream_id) always reproduce the same draws. A NoiseModel
    may be attached so draw_noise() knows its Gaussian parameters.
    """

    def __init__(
        self,
        seed: int,
        stream_id: int = 0,
        noise: NoiseModel | None = None,
        _spawn: tuple[int, ...] = (),
    ):
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= stream_id < 2**64:
            raise ValueError("stream_id must be a 64-bit unsigned integer")
        self.seed = seed
        self.stream_id = stream_id
        self.noise = noise
        self._spawn = _spawn
        self._gen: np.random.Generator | None = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(
                self.seed, spawn_key=(self.stream_id, *self._spawn)
            )
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen

    def substream(self, *indices: int) -> "RngStream":
        """Fresh derived stream; disjoint from this one and all siblings."""
        return RngStream(
            self.seed, self.stream_id, self.noise, (*self._spawn, *indices)
        )

    def with_noise(self, noise: NoiseModel) -> "RngStream":
        self.noise = noise
        return self

    def uniform_open(self, size: int | None = None):
        """Uniforms strictly inside (0, 1): (k + 0.5) / 2^53."""
        raw = self.generator.integers(0, 2**53, size=size)
        return (raw + 0.5) / _U53

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def draw_noise(rng: RngStream, size: int | None = None):
    """Gaussian draw(s) w ~ N(mu, sigma2) via inverse CDF; advances the stream."""
    if rng.noise is None:
        raise ValueError("no NoiseModel attached to this stream")
    sigma = np.sqrt(rng.noise.sigma2)
    z = ndtri(rng.uniform_open(size))
    if size is None:
        return float(rng.noise.mu + sigma * z)
    return rng.noise.mu + sigma * z


@dataclass(frozen=True)
class Realization:
    """One sampled plant (A_k, B_k) = (A + Abar*w, B + Bbar*w)."""

    A_k: np.ndarray
    B_k: np.ndarray
    omega: float

    def stacked(self) -> np.ndarray:
        """[A_k B_k] as an n x (n+m) array."""
        return np.hstack([self.A_k, self.B_k])


def realize(sys: SystemModel, omega: float) -> Realization:
    """Exact affine combination; consumes no randomness."""
    return Realization(
        A_k=sys.A + sys.A_bar * omega,
        B_k=sys.B + sys.B_bar * omega,
        omega=float(omega),
    )


@dataclass(frozen=True)
class Trajectory:
    """Closed-loop rollout: states x(0..T), inputs u(0..T-1), stage costs.

    overflow=True means ||x|| crossed OVERFLOW_LIMIT and the rollout was
    truncated at overflow_step.
    """

    xs: np.ndarray
    us: np.ndarray
    costs: np.ndarray
    omegas: np.ndarray
    overflow: bool
    overflow_step: int | None = None

    def total_cost(self) -> float:
        return float(self.costs.sum())


def simulate_trajectory(
    sys: SystemModel,
    noise: NoiseModel,
    K: Gain,
    x0: np.ndarray,
    horizon: int,
    rng: RngStream,
) -> Trajectory:
    """Roll out x(k+1) = A(k)x(k) + B(k)u(k) under u(k) = K x(k).

    One fresh noise draw per step feeds both A(k) and B(k). Stage cost is
    x'Qx + u'Ru.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    x0 = np.asarray(x0, dtype=float).reshape(sys.n)
    rng.with_noise(noise)
    omegas = np.atleast_1d(draw_noise(rng, size=horizon))

    xs = [x0]
    us = []
    costs = []
    x = x0
    overflow = False
    overflow_step = None
    for k in range(horizon):
        u = K.K @ x
        costs.append(float(x @ sys.Q @ x + u @ sys.R @ u))
        us.append(u)
        rk = realize(sys, omegas[k])
        x = rk.A_k @ x + rk.B_k @ u
        if np.linalg.norm(x) > OVERFLOW_LIMIT:
            overflow = True
            overflow_step = k + 1
            break
        xs.append(x)
    return Trajectory(
        xs=np.array(xs),
        us=np.array(us),
        costs=np.array(costs),
        omegas=omegas[: len(costs)],
        overflow=overflow,
        overflow_step=overflow_step,
    )


@dataclass(frozen=True)
class CostEstimate:
    mean: float
    std_err: float
    n_runs: int
    horizon: int


def monte_carlo_cost(
    sys: SystemModel,
    noise: NoiseModel,
    K: Gain,
    x0: np.ndarray,
    horizon: int,
    n_runs: int,
    rng: RngStream,
) -> CostEstimate:
    """Empirical mean and standard error of the truncated cumulative cost.

    Each run owns the private substream rng.substream(run_index), so results
    do not depend on execution order; the reduction is by run index.
    Requires a mean-square stabilizing K (the infinite-horizon cost diverges
    otherwise) and raises DivergedError if any rollout overflows anyway.
    """
    if n_runs < 2:
        raise ValueError("n_runs must be >= 2")
    report = ms_stability_check(K, sys, noise)
    if not report.stable:
        raise NotStabilizingError(report.spectral_radius)

    totals = np.empty(n_runs)
    for run in range(n_runs):
        traj = simulate_trajectory(sys, noise, K, x0, horizon, rng.substream(run))
        if traj.overflow:
            raise DivergedError(
                f"Monte Carlo run {run} overflowed at step {traj.overflow_step}",
                step=traj.overflow_step,
            )
        totals[run] = traj.total_cost()
    mean = float(totals.mean())
    if np.ptp(totals) == 0.0:
        # Identical runs (deterministic plant): avoid the O(eps) artifact the
        # mean subtraction would otherwise leave behind.
        std_err = 0.0
    else:
        std_err = float(totals.std(ddof=1) / np.sqrt(n_runs))
    return CostEstimate(mean=mean, std_err=std_err, n_runs=n_runs, horizon=horizon)
