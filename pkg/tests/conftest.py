import numpy as np
import pytest

from lqlearn import NoiseModel, SystemModel, solve_oracle


@pytest.fixture(scope="session")
def bench_sys():
    """The 2-state / 1-input benchmark system used throughout."""
    return SystemModel(
        A=[[0.2, 0.0], [0.0, 0.6]],
        A_bar=[[0.7, 0.0], [0.0, 0.8]],
        B=[[0.7], [0.3]],
        B_bar=[[0.1], [0.7]],
        Q=[[0.4, 0.0], [0.0, 0.7]],
        R=[[1.0]],
    )


@pytest.fixture(scope="session")
def bench_noise():
    return NoiseModel(mu=1.0, sigma2=0.1)


@pytest.fixture(scope="session")
def bench_oracle(bench_sys, bench_noise):
    return solve_oracle(bench_sys, bench_noise, oracle_tol=1e-12)


@pytest.fixture(scope="session")
def det_sys(bench_sys):
    """Deterministic variant: same A, B, Q, R with zero noise coupling."""
    zero_n = np.zeros((2, 2))
    zero_m = np.zeros((2, 1))
    return SystemModel(
        A=bench_sys.A, A_bar=zero_n, B=bench_sys.B, B_bar=zero_m,
        Q=bench_sys.Q, R=bench_sys.R,
    )


@pytest.fixture(scope="session")
def det_noise():
    return NoiseModel(mu=0.0, sigma2=0.0)


@pytest.fixture(scope="session")
def det_oracle(det_sys, det_noise):
    return solve_oracle(det_sys, det_noise, oracle_tol=1e-12)


@pytest.fixture(scope="session")
def scalar_sys():
    """A = B = Q = R = 1, whose Riccati solution is the golden ratio."""
    one = [[1.0]]
    zero = [[0.0]]
    return SystemModel(A=one, A_bar=zero, B=one, B_bar=zero, Q=one, R=one)
