import numpy as np
import pytest

from lqlearn import (
    Graph,
    allocate_gains,
    build_graph,
    consensus_operator,
)
from lqlearn.errors import BadSpecError, DisconnectedError, NotContractiveError


class TestBuildGraph:
    def test_ring4(self):
        g = build_graph("ring:4")
        assert g.n_sensors == 4
        assert g.edges == frozenset({(0, 1), (1, 2), (2, 3), (0, 3)})

    def test_path2_single_edge(self):
        g = build_graph("path:2")
        assert g.edges == frozenset({(0, 1)})

    def test_star_and_complete(self):
        star = build_graph("star:4")
        assert star.edges == frozenset({(0, 1), (0, 2), (0, 3)})
        comp = build_graph("complete:3")
        assert comp.edges == frozenset({(0, 1), (0, 2), (1, 2)})

    def test_explicit_edges_one_based(self):
        g = build_graph("edges:1-2,2-3")
        assert g.n_sensors == 3
        assert g.edges == frozenset({(0, 1), (1, 2)})

    def test_explicit_disconnected(self):
        with pytest.raises(DisconnectedError):
            build_graph("edges:1-2,3-4")

    def test_single_sensor_degenerate(self):
        g = build_graph("single")
        assert g.n_sensors == 1
        assert g.edges == frozenset()

    @pytest.mark.parametrize("desc", ["ring:1", "path:0", "complete:1"])
    def test_small_n_rejected(self, desc):
        with pytest.raises(BadSpecError):
            build_graph(desc)

    @pytest.mark.parametrize("desc", ["blob:4", "ring:x", "edges:1+2", "ring"])
    def test_malformed_rejected(self, desc):
        with pytest.raises(BadSpecError):
            build_graph(desc)

    def test_direct_construction_checks_connectivity(self):
        with pytest.raises(DisconnectedError):
            Graph(3, frozenset({(0, 1)}))
        with pytest.raises(BadSpecError):
            Graph(2, frozenset({(0, 0)}))


class TestConsensusOperator:
    def test_complete2_half_weight(self):
        cons = consensus_operator(build_graph("complete:2"), 0.5)
        assert cons.A_mix == pytest.approx(np.array([[0.5, 0.5], [0.5, 0.5]]))
        assert cons.rho == pytest.approx(0.0, abs=1e-12)

    def test_path4_unit_weight_not_contractive(self):
        with pytest.raises(NotContractiveError):
            consensus_operator(build_graph("path:4"), 1.0)

    def test_path4_third_weight_spectrum(self):
        cons = consensus_operator(build_graph("path:4"), 1.0 / 3.0)
        # Laplacian spectrum of the 4-path: {0, 2-sqrt(2), 2, 2+sqrt(2)}.
        lam = np.array([2.0 - np.sqrt(2.0), 2.0, 2.0 + np.sqrt(2.0)])
        assert cons.rho == pytest.approx(np.abs(1.0 - lam / 3.0).max())

    def test_default_weight_from_max_degree(self):
        cons = consensus_operator(build_graph("star:5"))
        assert cons.w == pytest.approx(1.0 / 5.0)
        ring = consensus_operator(build_graph("ring:4"))
        assert ring.w == pytest.approx(1.0 / 3.0)

    def test_laplacian_structure(self):
        g = build_graph("ring:4")
        L = g.laplacian()
        assert np.array_equal(L, L.T)
        assert np.all(L.sum(axis=1) == 0.0)
        off = L[~np.eye(4, dtype=bool)]
        assert set(np.unique(off)) <= {0.0, -1.0}

    def test_mixing_doubly_stochastic(self):
        for desc in ("ring:4", "path:5", "star:6", "complete:4"):
            cons = consensus_operator(build_graph(desc))
            assert cons.A_mix.sum(axis=0) == pytest.approx(np.ones(cons.A_mix.shape[0]))
            assert cons.A_mix.sum(axis=1) == pytest.approx(np.ones(cons.A_mix.shape[0]))
            assert np.array_equal(cons.A_mix, cons.A_mix.T)

    def test_unit_eigenvalue_simple_when_connected(self):
        cons = consensus_operator(build_graph("ring:5"))
        eig = np.sort(np.linalg.eigvalsh(cons.A_mix))
        assert eig[-1] == pytest.approx(1.0)
        assert eig[-2] < 1.0 - 1e-9

    def test_rho_matches_bruteforce(self):
        for desc in ("ring:4", "path:7", "star:4", "edges:1-2,1-3,3-4,2-4"):
            cons = consensus_operator(build_graph(desc))
            N = cons.A_mix.shape[0]
            M = np.full((N, N), 1.0 / N)
            brute = np.abs(np.linalg.eigvals(cons.A_mix - M)).max()
            assert cons.rho == pytest.approx(brute, abs=1e-10)

    def test_single_sensor(self):
        cons = consensus_operator(build_graph("single"))
        assert cons.A_mix == pytest.approx(np.array([[1.0]]))
        assert cons.rho == pytest.approx(0.0)

    def test_rejects_nonpositive_weight(self):
        with pytest.raises(ValueError):
            consensus_operator(build_graph("ring:4"), 0.0)


class TestAllocateGains:
    def test_uniform_sums_to_NI(self):
        g = build_graph("ring:4")
        alloc = allocate_gains(g, (2, 1), "uniform")
        assert all(np.array_equal(L, np.eye(3)) for L in alloc.matrices)
        total = sum(alloc.matrices)
        assert np.array_equal(total, 4.0 * np.eye(3))

    def test_masked_square_case(self):
        g = build_graph("ring:3")
        alloc = allocate_gains(g, (2, 1), "masked")
        for i, L in enumerate(alloc.matrices):
            e = np.zeros(3)
            e[i] = 1.0
            assert np.array_equal(L, 3.0 * np.diag(e))

    def test_masked_round_robin(self):
        g = build_graph("path:2")
        alloc = allocate_gains(g, (2, 1), "masked")
        assert np.array_equal(alloc.matrices[0], 2.0 * np.diag([1.0, 0.0, 1.0]))
        assert np.array_equal(alloc.matrices[1], 2.0 * np.diag([0.0, 1.0, 0.0]))

    @pytest.mark.parametrize("desc,dims", [("ring:4", (2, 1)), ("star:5", (3, 2)),
                                           ("complete:7", (2, 2))])
    def test_sum_exact_for_any_shape(self, desc, dims):
        g = build_graph(desc)
        for mode in ("uniform", "masked"):
            alloc = allocate_gains(g, dims, mode)
            total = sum(alloc.matrices)
            assert np.array_equal(total, g.n_sensors * np.eye(sum(dims)))

    def test_rejects_unknown_mode(self):
        with pytest.raises(ValueError):
            allocate_gains(build_graph("ring:4"), (2, 1), "diagonal")
