"""Minimum-energy open-loop steering of target outputs, integrated with fixed-step RK4."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .extensions import lift_high_order
from .graph import SystemTriple
from .linalg import as_float_matrix, expm

MAX_CONDITION = 1e12


class SteeringError(ValueError):
    """The output Gramian is singular or too ill-conditioned to invert."""

    def __init__(self, message: str, condition: float, rank: int | None = None):
        super().__init__(message)
        self.condition = condition
        self.rank = rank


@dataclass(frozen=True)
class FloatTriple:
    a: np.ndarray
    b: np.ndarray
    h: np.ndarray

    @classmethod
    def of(cls, t) -> "FloatTriple":
        if isinstance(t, FloatTriple):
            return t
        if isinstance(t, SystemTriple):
            return cls(t.a.to_numpy(), t.b.to_numpy(), t.h.to_numpy())
        a, b, h = t
        return cls(as_float_matrix(a), as_float_matrix(b), as_float_matrix(h))

    @property
    def n(self) -> int:
        return self.a.shape[0]


def output_gramian(t, tf: float) -> np.ndarray:
    """``H (int_0^tf e^{As} B B^T e^{A^T s} ds) H^T`` via the Van Loan block exponential."""
    if not tf > 0:
        raise ValueError("tf must be positive")
    ft = FloatTriple.of(t)
    n = ft.n
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = -ft.a
    big[:n, n:] = ft.b @ ft.b.T
    big[n:, n:] = ft.a.T
    e = expm(big * tf)
    gram = e[n:, n:].T @ e[:n, n:]
    gram = 0.5 * (gram + gram.T)
    return ft.h @ gram @ ft.h.T


def gramian_noise_floor(t, tf: float) -> float:
    """Singular values of the output Gramian below this are rounding noise.

    The scale is ``tf |H|^2 |B|^2 max(1, |e^{A tf}|)^2``, the size of the
    integrand bound, so an exactly-zero Gramian is not mistaken for a
    well-conditioned one.
    """
    ft = FloatTriple.of(t)
    grow = max(1.0, float(np.linalg.norm(expm(ft.a * tf), 2))) if ft.n else 1.0
    scale = tf * float(np.linalg.norm(ft.h, 2)) ** 2 * float(np.linalg.norm(ft.b, 2)) ** 2 * grow**2
    return np.finfo(float).eps * max(ft.n, 1) * scale


def gramian_rank(t, tf: float = 1.0, tol: float = 1e-9) -> int:
    """Numeric rank of the output Gramian: relative cutoff ``tol`` plus the noise floor."""
    w = output_gramian(t, tf)
    if w.size == 0:
        return 0
    s = np.linalg.svd(w, compute_uv=False)
    cut = max(tol * s[0], gramian_noise_floor(t, tf))
    return int(np.count_nonzero(s > cut))


@dataclass(frozen=True)
class SteeringProblem:
    triple: object
    x0: np.ndarray
    yf: np.ndarray
    tf: float = 1.0
    steps: int = 2000

    def __post_init__(self):
        ft = FloatTriple.of(self.triple)
        x0 = np.asarray(self.x0, dtype=float).ravel()
        yf = np.asarray(self.yf, dtype=float).ravel()
        if x0.shape != (ft.n,):
            raise ValueError(f"x0 has length {x0.size}, expected {ft.n}")
        if yf.shape != (ft.h.shape[0],):
            raise ValueError(f"yf has length {yf.size}, expected {ft.h.shape[0]}")
        if not (np.isfinite(self.tf) and self.tf > 0):
            raise ValueError("tf must be finite and positive")
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "yf", yf)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    outputs: np.ndarray
    terminal_error: float
    gramian_condition: float

    def to_csv(self) -> str:
        """CSV with header ``t,x1..xn,u1..ul,y1..yp`` and a terminal-error footer."""
        n, l, p = self.states.shape[1], self.inputs.shape[1], self.outputs.shape[1]
        head = ["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"u{i}" for i in range(1, l + 1)] \
            + [f"y{i}" for i in range(1, p + 1)]
        buf = io.StringIO()
        buf.write(",".join(head) + "\n")
        for k, t in enumerate(self.times):
            row = [t, *self.states[k], *self.inputs[k], *self.outputs[k]]
            buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        buf.write(f"# terminal_error={self.terminal_error:.17g}\n")
        buf.write(f"# gramian_condition={self.gramian_condition:.17g}\n")
        return buf.getvalue()


def steer(problem: SteeringProblem) -> Trajectory:
    """Drive ``H x(tf)`` to ``yf`` with the minimum-energy input.

    ``u(t) = B^T e^{A^T (tf - t)} H^T W_o^{-1} (yf - H e^{A tf} x0)``; the
    state is integrated with classical RK4 on the uniform grid.
    """
    ft = FloatTriple.of(problem.triple)
    a, b, h = ft.a, ft.b, ft.h
    tf, steps = float(problem.tf), int(problem.steps)
    wo = output_gramian(ft, tf)
    cond = float(np.linalg.cond(wo)) if wo.size else 1.0
    s = np.linalg.svd(wo, compute_uv=False) if wo.size else np.ones(1)
    if not np.isfinite(cond) or cond > MAX_CONDITION or s[-1] <= gramian_noise_floor(ft, tf):
        rank = gramian_rank(ft, tf)
        raise SteeringError(
            f"output Gramian is singular or ill-conditioned (condition {cond:.3e}, "
            f"rank {rank} of {wo.shape[0]}); the targets cannot all be steered", cond, rank)
    drift = h @ expm(a * tf) @ problem.x0
    coeff = h.T @ np.linalg.solve(wo, problem.yf - drift)

    dt = tf / (steps - 1)
    # costates e^{A^T s} H^T w on the half-step grid, s = tf - t
    half = expm(a.T * (dt / 2))
    nhalf = 2 * (steps - 1) + 1
    costate = np.empty((nhalf, ft.n))
    costate[0] = coeff
    for j in range(1, nhalf):
        costate[j] = half @ costate[j - 1]
    inputs_half = costate[::-1] @ b  # index j <-> t = j * dt / 2

    x = problem.x0.copy()
    states = np.empty((steps, ft.n))
    states[0] = x
    for k in range(steps - 1):
        u0, um, u1 = inputs_half[2 * k], inputs_half[2 * k + 1], inputs_half[2 * k + 2]
        k1 = a @ x + b @ u0
        k2 = a @ (x + 0.5 * dt * k1) + b @ um
        k3 = a @ (x + 0.5 * dt * k2) + b @ um
        k4 = a @ (x + dt * k3) + b @ u1
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k + 1] = x
    times = tf * np.arange(steps) / (steps - 1)
    outputs = states @ h.T
    inputs = inputs_half[::2]
    err = float(np.linalg.norm(outputs[-1] - problem.yf))
    return Trajectory(times, states, inputs, outputs, err, cond)


def lift_float(t, m_order: int) -> FloatTriple:
    """Float counterpart of :func:`netctrl.extensions.lift_high_order`."""
    if isinstance(t, SystemTriple):
        lifted = lift_high_order(t, m_order)
        return FloatTriple.of(lifted)
    ft = FloatTriple.of(t)
    if m_order == 1:
        return ft
    n, m = ft.n, m_order
    a = np.zeros((n * m, n * m))
    for i in range(m - 1):
        a[i * n:(i + 1) * n, (i + 1) * n:(i + 2) * n] = np.eye(n)
    a[(m - 1) * n:, :n] = ft.a
    b = np.zeros((n * m, ft.b.shape[1]))
    b[(m - 1) * n:] = ft.b
    h = np.zeros((ft.h.shape[0], n * m))
    h[:, :n] = ft.h
    return FloatTriple(a, b, h)


def simulate_high_order(problem: SteeringProblem, m_order: int) -> Trajectory:
    """Steer the ``m_order`` version of the problem's first-order system.

    ``x0`` gives the initial positions; all derivatives start at zero.
    """
    if m_order < 1:
        raise ValueError("m_order must be >= 1")
    if m_order == 1:
        return steer(problem)
    lifted = lift_float(problem.triple, m_order)
    n = problem.x0.size
    x0 = np.concatenate([problem.x0, np.zeros(n * (m_order - 1))])
    return steer(SteeringProblem(lifted, x0, problem.yf, problem.tf, problem.steps))
