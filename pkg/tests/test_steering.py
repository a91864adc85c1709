import numpy as np
import pytest

from netctrl.ctrb import target_controllable
from netctrl.fixtures import load_fixture, random_graph
from netctrl.graph import parse_graph, system_triple
from netctrl.linalg import expm
from netctrl.steering import (
    FloatTriple,
    SteeringError,
    SteeringProblem,
    lift_float,
    gramian_rank,
    output_gramian,
    simulate_high_order,
    steer,
)

SCALAR = system_triple(parse_graph("n 1\nleaders 1\ntargets 1\n"))


@pytest.fixture(scope="module")
def ex1():
    return system_triple(load_fixture("example1"))


def test_gramian_against_trapezoid(ex1):
    ft = FloatTriple.of(ex1)
    n_q = 100_000
    tf = 1.0
    ds = tf / n_q
    step = expm(ft.a * ds)
    m = ft.h.copy()  # H e^{As}, advanced one step at a time
    acc = np.zeros((ft.h.shape[0], ft.h.shape[0]))
    for k in range(n_q + 1):
        v = m @ ft.b
        term = v @ v.T
        acc += term * (0.5 if k in (0, n_q) else 1.0)
        m = m @ step
    acc *= ds
    assert np.allclose(output_gramian(ex1, tf), acc, atol=1e-6, rtol=0)


def test_gramian_symmetric_psd(ex1):
    w = output_gramian(ex1, 2.0)
    assert np.allclose(w, w.T)
    assert np.all(np.linalg.eigvalsh(w) > 0)


def test_scalar_integrator_constant_input():
    traj = steer(SteeringProblem(SCALAR, [0.0], [1.0], 1.0, 11))
    assert np.allclose(traj.inputs, 1.0)
    assert np.allclose(traj.states[:, 0], traj.times)


def test_double_integrator_analytic():
    traj = simulate_high_order(SteeringProblem(SCALAR, [0.0], [1.0], 1.0, 2001), 2)
    t = traj.times
    assert np.max(np.abs(traj.states[:, 0] - (1.5 * t**2 - 0.5 * t**3))) < 1e-8
    assert np.allclose(traj.inputs[:, 0], 3 * (1 - t), atol=1e-10)


def test_example1_orders_terminal_error(ex1):
    nrng = np.random.default_rng(3)
    for order in (1, 2):
        for _ in range(5):
            x0 = nrng.normal(size=7)
            yf = nrng.normal(size=2)
            traj = simulate_high_order(SteeringProblem(ex1, x0, yf, 1.0, 2000), order)
            assert traj.terminal_error <= 1e-6


def test_rk4_fourth_order(ex1):
    nrng = np.random.default_rng(5)
    x0, yf = nrng.normal(size=7), nrng.normal(size=2)
    errs = [steer(SteeringProblem(ex1, x0, yf, 1.0, k + 1)).terminal_error for k in (20, 40, 80)]
    for coarse, fine in zip(errs, errs[1:]):
        assert 8 <= coarse / fine <= 32


def test_not_controllable_refused():
    t = system_triple(load_fixture("counterexample1"))
    with pytest.raises(SteeringError) as info:
        steer(SteeringProblem(t, np.zeros(4), [1.0, -1.0]))
    assert info.value.rank == 1


def test_gramian_rank_matches_exact_dim(rng):
    for _ in range(50):
        t = system_triple(random_graph(rng, 1, 10))
        assert gramian_rank(t, 1.0, 1e-9) == target_controllable(t).dim


def test_problem_validation(ex1):
    with pytest.raises(ValueError):
        SteeringProblem(ex1, np.zeros(3), [0, 0])
    with pytest.raises(ValueError):
        SteeringProblem(ex1, np.zeros(7), [0])
    with pytest.raises(ValueError):
        SteeringProblem(ex1, np.zeros(7), [0, 0], tf=0)
    with pytest.raises(ValueError):
        SteeringProblem(ex1, np.zeros(7), [0, 0], steps=1)


def test_lift_float_matches_exact(ex1):
    a = lift_float(ex1, 3)
    b = lift_float(FloatTriple.of(ex1), 3)
    assert np.array_equal(a.a, b.a) and np.array_equal(a.b, b.b) and np.array_equal(a.h, b.h)


def test_csv_format():
    traj = steer(SteeringProblem(SCALAR, [0.0], [1.0], 1.0, 3))
    lines = traj.to_csv().splitlines()
    assert lines[0] == "t,x1,u1,y1"
    assert len(lines) == 1 + 3 + 2
    assert lines[-2].startswith("# terminal_error=")
    assert lines[2].split(",")[0] == "0.5"


def test_all_noise_gramian_refused():
    # exact dim 0 but the float Gramian is pure rounding noise
    g = parse_graph("n 6\nleaders 6\ntargets 3 4\nedge 1 3 1\nedge 1 5 1/2\nedge 1 6 1\n"
                    "edge 2 5 3\nedge 2 6 3\nedge 3 4 3/2\nedge 3 5 1\nedge 3 6 3/2\n"
                    "edge 4 3 1\nedge 5 1 3/2\nedge 5 3 1\nedge 5 4 3/2\n")
    t = system_triple(g)
    assert target_controllable(t).dim == 0
    assert gramian_rank(t) == 0
    with pytest.raises(SteeringError):
        steer(SteeringProblem(t, np.zeros(6), [1.0, 1.0]))
