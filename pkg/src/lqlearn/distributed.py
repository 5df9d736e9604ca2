"""Distributed learner: consensus-plus-innovation rounds over a sensor graph.

Each of the N sensors keeps its own Q-factor estimate and, once per
synchronous round, computes from the pre-round estimates (Jacobi-style)

    G_i <- G_i + w * sum_{j in N_i} (G_j - G_i) + alpha(k) * L_i Y(G_i),

where w is the consensus weight, L_i the sensor's innovation gain
(sum_i L_i = N*I) and Y the sampled Bellman residual. With a single sensor
and L_1 = I this collapses exactly to the centralized iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DivergedError, SeedMismatchError
from .lqcore import QFactor, NoiseModel, SystemModel, symmetrize
from .network import ConsensusOperator, GainAllocation, Graph, consensus_operator
from .qlearning import DIVERGENCE_CAP, Schedule, y_operator
from .sampling import Realization, RngStream, draw_noise, realize
from .trace import RunTrace

# Substream namespaces under the experiment stream: spread-init jitter and
# per-sensor noise for the independent-noise mode.
_NS_JITTER = 1
_NS_SENSOR_NOISE = 2


@dataclass(frozen=True)
class SensorBank:
    """Per-sensor estimates after round k."""

    estimates: tuple
    k: int

    @property
    def n_sensors(self) -> int:
        return len(self.estimates)

    def mats(self) -> list[np.ndarray]:
        return [g.mat for g in self.estimates]


def distributed_round(
    bank: SensorBank,
    sys: SystemModel,
    cons: ConsensusOperator,
    alloc: GainAllocation,
    reals: Realization | Sequence[Realization],
    sched: Schedule,
) -> SensorBank:
    """One synchronous round from the pre-round estimates.

    reals is a single Realization shared by every sensor, or one per sensor.
    All sensors read the same pre-round neighbor values; updates commit
    together (simultaneous Jacobi sweep).
    """
    N = bank.n_sensors
    if isinstance(reals, Realization):
        reals = [reals] * N
    if len(reals) != N or alloc.n_sensors != N or cons.graph.n_sensors != N:
        raise ValueError("bank, consensus operator, gains and realizations "
                         "must agree on the sensor count")

    alpha = sched.alpha(bank.k)
    pre = bank.mats()
    uniform = alloc.mode == "uniform"
    new = []
    for i in range(N):
        update = pre[i].copy()
        for j in cons.graph.neighbors(i):
            update += cons.w * (pre[j] - pre[i])
        Y = y_operator(bank.estimates[i], reals[i], sys.Q, sys.R)
        update += alpha * (Y if uniform else alloc.matrices[i] @ Y)
        new.append(QFactor.symmetrized(update, sys.n, sys.m))

    for i, g in enumerate(new):
        if g.fro_norm() > DIVERGENCE_CAP:
            raise DivergedError(
                f"sensor {i} exceeded {DIVERGENCE_CAP:g} at round {bank.k + 1}",
                step=bank.k + 1,
            )
    return SensorBank(estimates=tuple(new), k=bank.k + 1)


def _psd_jitter(rng: RngStream, d: int, scale: float) -> np.ndarray:
    """Seeded symmetric PSD perturbation with Frobenius norm = scale."""
    from scipy.special import ndtri

    M = ndtri(rng.uniform_open(size=d * d)).reshape(d, d)
    E = symmetrize(M.T @ M)
    return scale * E / np.linalg.norm(E)


def initial_bank(
    sys: SystemModel,
    n_sensors: int,
    rng: RngStream,
    init: str = "identity",
    spread_scale: float = 0.1,
    G0: QFactor | None = None,
) -> SensorBank:
    """All sensors at diag(Q, R); "spread" adds per-sensor PSD jitter so the
    consensus dynamics are visible from round one."""
    base = (G0 if G0 is not None else QFactor.cost_diag(sys)).mat
    d = sys.n + sys.m
    if init == "identity":
        estimates = [QFactor(base.copy(), sys.n, sys.m) for _ in range(n_sensors)]
    elif init == "spread":
        estimates = [
            QFactor.symmetrized(
                base + _psd_jitter(rng.substream(_NS_JITTER, i), d, spread_scale),
                sys.n,
                sys.m,
            )
            for i in range(n_sensors)
        ]
    else:
        raise ValueError(f"unknown initialization mode {init!r}")
    return SensorBank(estimates=tuple(estimates), k=0)


def run_distributed(
    sys: SystemModel,
    noise: NoiseModel,
    graph: Graph,
    alloc: GainAllocation,
    sched: Schedule,
    rounds: int,
    rng: RngStream,
    oracle=None,
    w: float | None = None,
    shared_noise: bool = True,
    init: str = "identity",
    spread_scale: float = 0.1,
    G0: QFactor | None = None,
) -> RunTrace:
    """Execute synchronous rounds and record the full trace.

    shared_noise=True evaluates every sensor's residual on the same sampled
    plant (one draw per round, taken before the per-sensor updates, so the
    result is independent of evaluation order); otherwise each sensor owns a
    private noise substream. When an oracle is supplied the trace also
    records the error of the averaged iterate to G*.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    cons = consensus_operator(graph, w)
    rng.with_noise(noise)
    N = graph.n_sensors

    bank = initial_bank(sys, N, rng, init=init, spread_scale=spread_scale, G0=G0)
    sensor_rngs = None
    if not shared_noise:
        sensor_rngs = [
            rng.substream(_NS_SENSOR_NOISE, i).with_noise(noise) for i in range(N)
        ]

    trace = RunTrace(
        kind="distributed",
        n_sensors=N,
        G_star=None if oracle is None else oracle.G_star.mat,
    )
    for _ in range(rounds):
        alpha = sched.alpha(bank.k)
        if shared_noise:
            omega = draw_noise(rng)
            omegas = [omega] * N
            reals: Realization | list[Realization] = realize(sys, omega)
        else:
            omegas = [draw_noise(r) for r in sensor_rngs]
            reals = [realize(sys, wv) for wv in omegas]
        bank = distributed_round(bank, sys, cons, alloc, reals, sched)
        trace.record_round(alpha, omegas, bank.mats())
    return trace


@dataclass(frozen=True)
class ComparisonReport:
    """Gap Delta(k) = ||Gbar(k) - G(k)||_F between the averaged distributed
    iterate and the centralized iterate driven by the same noise."""

    gaps: np.ndarray
    final_gap: float
    max_gap: float

    @property
    def n_rounds(self) -> int:
        return len(self.gaps)


def compare_centralized(trace_d: RunTrace, trace_c: RunTrace) -> ComparisonReport:
    """Measure the distributed-to-centralized gap round by round.

    Both traces must come from the same seed with shared noise; any omega
    discrepancy raises SeedMismatchError.
    """
    if trace_d.kind != "distributed" or trace_c.kind != "centralized":
        raise ValueError("expected (distributed, centralized) traces")
    if trace_d.n_rounds != trace_c.n_rounds:
        raise ValueError(
            f"round counts differ: {trace_d.n_rounds} vs {trace_c.n_rounds}"
        )
    for r in range(trace_c.n_rounds):
        ref = trace_c.omegas[r][0]
        if any(wv != ref for wv in trace_d.omegas[r]):
            raise SeedMismatchError(
                f"noise sequences differ at round {r + 1}; traces must share "
                "a seed and use shared noise"
            )
    gaps = np.array(
        [
            np.linalg.norm(trace_d.mean_history[r] - trace_c.mean_history[r])
            for r in range(trace_c.n_rounds)
        ]
    )
    return ComparisonReport(
        gaps=gaps, final_gap=float(gaps[-1]), max_gap=float(gaps.max())
    )
