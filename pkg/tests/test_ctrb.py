import numpy as np
import pytest

from netctrl.ctrb import (
    cluster_eigenvalues,
    ctrb_matrix,
    independent_row_sets,
    kalman_decompose,
    left_eigen_obstruction,
    max_independent_row_sets,
    pbh_target_check,
    selection_labels,
    target_controllable,
    target_ctrb_matrix,
    theorem2_check,
)
from netctrl.fixtures import load_fixture, random_graph
from netctrl.graph import parse_graph, system_triple
from netctrl.linalg import RatMatrix, rat_rank

EX1_W = [[0, 1, -3, 9, -27, 81, -243], [0, 1, -4, 16, -64, 256, -1024]]


@pytest.fixture(scope="module")
def ex1():
    return system_triple(load_fixture("example1"))


def test_example1_w_exact(ex1):
    w = target_ctrb_matrix(ex1)
    assert w == RatMatrix.from_rows(EX1_W)
    res = target_controllable(ex1, w)
    assert res.controllable and res.dim == 2 and res.left_null is None


def test_counterexample1_certificate():
    t = system_triple(load_fixture("counterexample1"))
    w = target_ctrb_matrix(t)
    assert w.tolist() == [[0, 2, -4, 8], [0, 2, -4, 8]]
    res = target_controllable(t, w)
    assert not res.controllable and res.dim == 1
    q = RatMatrix.from_rows([list(res.left_null)])
    assert (q @ w).is_zero() and not q.is_zero()


def test_example1_kalman(ex1):
    dec = kalman_decompose(ex1)
    assert dec.kappa == 3
    q = ctrb_matrix(ex1)
    assert dec.p1 == q.submatrix(range(7), range(3))
    sets, truncated = max_independent_row_sets(dec.p1)
    assert sets == [(1, 2, 6), (1, 2, 7), (1, 3, 6), (1, 3, 7)] and not truncated
    assert theorem2_check(ex1, dec).admissible


def test_row_sets_size_and_cap(ex1):
    p1 = kalman_decompose(ex1).p1
    assert independent_row_sets(p1, 4) == ([], False)
    assert independent_row_sets(p1, 3, cap=1) == ([(1, 2, 6)], True)
    assert independent_row_sets(p1, 0) == ([()], False)
    two, _ = independent_row_sets(p1, 2)
    assert all(rat_rank(p1.submatrix([i - 1 for i in s])) == 2 for s in two)
    with pytest.raises(ValueError):
        independent_row_sets(p1, 2, cap=0)


def test_theorem2_and_block_structure_random(rng):
    for _ in range(200):
        g = random_graph(rng, 1, 8)
        t = system_triple(g)
        dec = kalman_decompose(t)
        k, n = dec.kappa, t.n
        assert dec.a_hat.submatrix(range(k, n), range(k)).is_zero()
        assert dec.b_hat.submatrix(range(k, n)).is_zero()
        assert dec.p @ dec.p_inv == RatMatrix.identity(n)
        assert k == rat_rank(ctrb_matrix(t))
        w_rank = rat_rank(target_ctrb_matrix(t))
        res = theorem2_check(t, dec, w_rank)
        assert (res.h_c_rank == t.p) == (w_rank == t.p)
        assert res.admissible == (w_rank == t.p)


def test_selection_labels():
    t = system_triple(load_fixture("example1"))
    assert selection_labels(t.h) == [2, 6]
    assert selection_labels(RatMatrix.from_rows([[1, 1]])) is None


def test_counterexample2_pbh_passes_but_not_controllable():
    t = system_triple(load_fixture("counterexample2"))
    eig = sorted(np.linalg.eigvals(t.a.to_numpy()).real)
    assert np.allclose(eig, [-2, -2, -1, 0], atol=1e-8)
    entries = pbh_target_check(t)
    assert all(e.rank == 2 for e in entries)
    assert left_eigen_obstruction(t) is None
    assert not target_controllable(t).controllable


def test_obstruction_on_counterexample1():
    t = system_triple(load_fixture("counterexample1"))
    obs = left_eigen_obstruction(t)
    assert obs is not None
    a, b = t.a.to_numpy(), t.b.to_numpy()
    assert np.allclose(obs.theta @ a, obs.eigenvalue * obs.theta, atol=1e-8)
    assert np.allclose(obs.theta @ b, 0, atol=1e-8)
    assert obs.theta[0] == 0 and obs.theta[1] == 0
    assert not all(e.passed for e in pbh_target_check(t))


def test_pbh_necessary_and_obstruction_sound(rng):
    for _ in range(150):
        g = random_graph(rng, 1, 8)
        t = system_triple(g)
        ok = target_controllable(t).controllable
        if ok:
            assert all(e.passed for e in pbh_target_check(t))
            assert left_eigen_obstruction(t) is None
        if not all(e.passed for e in pbh_target_check(t)):
            assert not ok


def test_cluster_eigenvalues():
    out = cluster_eigenvalues([1.0, 1.0 + 1e-12, -2.0, 1j, -1j], 1e-8)
    assert [m for _, m in out] == [1, 1, 1, 2]


def test_single_node_leader_target():
    t = system_triple(parse_graph("n 1\nleaders 1\ntargets 1\n"))
    assert target_controllable(t).controllable
    assert kalman_decompose(t).kappa == 1
