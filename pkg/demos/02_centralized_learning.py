"""Centralized Q-learning when the noise statistics are unknown.

The learner only sees sampled plant matrices (A(k), B(k)) and iterates
G <- G + alpha(k) * Y(G) under a Robbins-Monro schedule. The run is compared
against the known-statistics oracle G* it should converge to.
"""

import numpy as np

from lqlearn import (
    NoiseModel,
    RngStream,
    Schedule,
    SystemModel,
    run_centralized,
    solve_oracle,
)

system = SystemModel(
    A=[[0.2, 0.0], [0.0, 0.6]],
    A_bar=[[0.7, 0.0], [0.0, 0.8]],
    B=[[0.7], [0.3]],
    B_bar=[[0.1], [0.7]],
    Q=[[0.4, 0.0], [0.0, 0.7]],
    R=[[1.0]],
)
noise = NoiseModel(mu=1.0, sigma2=0.1)
schedule = Schedule(exponent=0.6, offset=2)   # alpha(k) = (1/(k+2))^0.6

oracle = solve_oracle(system, noise)
iters = 5000

print(f"running {iters} iterations for 5 seeds; error is ||G(k) - G*||_F\n")
print("seed |   k=50   k=500  k=5000")
for seed in range(5):
    trace = run_centralized(system, noise, schedule, iters, RngStream(seed),
                            oracle=oracle)
    e = trace.mean_err
    print(f"  {seed}  | {e[49]:6.3f}  {e[499]:6.3f}  {e[4999]:6.3f}")

trace = run_centralized(system, noise, schedule, iters, RngStream(0),
                        oracle=oracle)
print("\nmax ||G(k)||_F over the run (boundedness):",
      f"{trace.max_fro_norm:.3f}")
print("final estimate error:", f"{trace.mean_err[-1]:.4f}")
print("||G*||_F for scale  :", f"{np.linalg.norm(oracle.G_star.mat):.3f}")
