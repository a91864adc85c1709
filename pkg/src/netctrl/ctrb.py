"""Controllability matrices, exact target-controllability verdicts and certificates."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import SystemTriple
from .linalg import (
    RatMatrix,
    RowEchelon,
    float_rank,
    hstack,
    mat_mul,
    rat_inverse,
    rat_nullspace,
    rat_rank,
)
from .reachability import ConsistencyError

DEFAULT_TOL_RANK = 1e-9


def ctrb_matrix(t: SystemTriple, horizon: int | None = None) -> RatMatrix:
    """``Q = [B, AB, ..., A^(horizon-1) B]``; the horizon defaults to ``n``."""
    k = t.n if horizon is None else horizon
    blocks = [t.b]
    for _ in range(1, k):
        blocks.append(mat_mul(t.a, blocks[-1]))
    return hstack(blocks)


def target_ctrb_matrix(t: SystemTriple, horizon: int | None = None) -> RatMatrix:
    """``W = H Q``.  ``h`` may be any output matrix, not only a node selection."""
    return mat_mul(t.h, ctrb_matrix(t, horizon))


@dataclass(frozen=True)
class TargetCtrbResult:
    controllable: bool
    dim: int
    p: int
    left_null: tuple[Fraction, ...] | None = None

    def to_dict(self) -> dict:
        out = {"controllable": self.controllable, "dim": self.dim, "p": self.p}
        if self.left_null is not None:
            out["left_null_certificate"] = [str(x) for x in self.left_null]
        return out


def target_controllable(t: SystemTriple, w: RatMatrix | None = None) -> TargetCtrbResult:
    """Exact verdict ``rank W == p``.

    When the rank falls short the result carries ``q`` with ``q^T W = 0`` as
    a certificate.
    """
    if w is None:
        w = target_ctrb_matrix(t)
    dim = rat_rank(w)
    q = None
    if dim < t.p:
        q = tuple(rat_nullspace(w.T)[0])
    return TargetCtrbResult(dim == t.p, dim, t.p, q)


def selection_labels(h: RatMatrix) -> list[int] | None:
    """1-based column labels if ``h`` is a 0/1 row-selection matrix, else None."""
    labels = []
    for r in h.iter_rows():
        nz = [j for j, x in enumerate(r) if x]
        if len(nz) != 1 or r[nz[0]] != 1:
            return None
        labels.append(nz[0] + 1)
    return labels


@dataclass(frozen=True)
class KalmanDecomposition:
    kappa: int
    p1: RatMatrix
    p_inv: RatMatrix
    p: RatMatrix
    a_c: RatMatrix
    a_12: RatMatrix
    a_cbar: RatMatrix
    b_c: RatMatrix
    h_c: RatMatrix
    h_cbar: RatMatrix
    a_hat: RatMatrix
    b_hat: RatMatrix

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "p1": [[str(x) for x in r] for r in self.p1.iter_rows()],
            "h_c": [[str(x) for x in r] for r in self.h_c.iter_rows()],
        }


def kalman_decompose(t: SystemTriple) -> KalmanDecomposition:
    """Controllability decomposition with ``P^-1 = [P1, P2]``.

    ``P1`` holds the first independent columns of ``Q`` scanned left to
    right; ``P2`` completes the basis with standard vectors, lowest index
    first.  All block identities are verified exactly before returning.
    """
    n = t.n
    q = ctrb_matrix(t)
    ech = RowEchelon(n)
    p1_cols = []
    for j in range(q.cols):
        c = q.col(j)
        if ech.add(c):
            p1_cols.append(c)
            if len(p1_cols) == n:
                break
    kappa = len(p1_cols)
    p2_cols = []
    for i in range(n):
        if len(ech) == n:
            break
        e = [Fraction(int(k == i)) for k in range(n)]
        if ech.add(e):
            p2_cols.append(e)
    cols = p1_cols + p2_cols
    p_inv = RatMatrix(n, n, (cols[j][i] for i in range(n) for j in range(n)))
    p = rat_inverse(p_inv)
    a_hat = p @ t.a @ p_inv
    b_hat = p @ t.b
    h_hat = t.h @ p_inv
    top, bot = range(kappa), range(kappa, n)
    dec = KalmanDecomposition(
        kappa=kappa,
        p1=p_inv.submatrix(range(n), top),
        p_inv=p_inv,
        p=p,
        a_c=a_hat.submatrix(top, top),
        a_12=a_hat.submatrix(top, bot),
        a_cbar=a_hat.submatrix(bot, bot),
        b_c=b_hat.submatrix(top),
        h_c=h_hat.submatrix(range(t.p), top),
        h_cbar=h_hat.submatrix(range(t.p), bot),
        a_hat=a_hat,
        b_hat=b_hat,
    )
    if not (a_hat.submatrix(bot, top).is_zero() and b_hat.submatrix(bot).is_zero()):
        raise ConsistencyError("controllability decomposition left a nonzero coupling block")
    if kappa and rat_rank(ctrb_matrix(SystemTriple(dec.a_c, dec.b_c, dec.h_c), kappa)) != kappa:
        raise ConsistencyError("controllable block pair is not controllable")
    return dec


def independent_row_sets(p1: RatMatrix, size: int | None = None,
                         cap: int = 1000) -> tuple[list[tuple[int, ...]], bool]:
    """Row subsets of ``p1`` (1-based labels) of the given size with full rank.

    ``size`` defaults to the column count, which gives the maximal independent
    row groups.  Subsets come out in lexicographic order; at most ``cap`` are
    returned and the flag says whether the list was cut short.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    k = p1.cols if size is None else size
    if k > p1.cols or k > p1.rows:
        return [], False
    if k == 0:
        return [()], False
    rows = [p1.row(i) for i in range(p1.rows)]
    live = [i for i, r in enumerate(rows) if any(r)]
    limit = cap + 1
    out: list[tuple[int, ...]] = []

    def dfs(start: int, chosen: list[int], ech: RowEchelon) -> bool:
        if len(chosen) == k:
            out.append(tuple(i + 1 for i in chosen))
            return len(out) >= limit
        need = k - len(chosen)
        for pos in range(start, len(live) - need + 1):
            i = live[pos]
            nxt = ech.copy()
            if nxt.add(rows[i]):
                chosen.append(i)
                if dfs(pos + 1, chosen, nxt):
                    return True
                chosen.pop()
        return False

    dfs(0, [], RowEchelon(p1.cols))
    return out[:cap], len(out) > cap


def max_independent_row_sets(p1: RatMatrix, cap: int = 1000) -> tuple[list[tuple[int, ...]], bool]:
    return independent_row_sets(p1, None, cap)


@dataclass(frozen=True)
class Theorem2Result:
    admissible: bool
    selected_rows_rank: int
    h_c_rank: int
    kappa: int

    def to_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "selected_rows_rank": self.selected_rows_rank,
            "h_c_rank": self.h_c_rank,
            "kappa": self.kappa,
        }


def theorem2_check(t: SystemTriple, dec: KalmanDecomposition | None = None,
                   w_rank: int | None = None) -> Theorem2Result:
    """Target admissibility from the rows of ``P1`` picked by the targets.

    Cross-checks three exact routes: rank of the selected ``P1`` rows, rank of
    ``H_c`` from the transformed output matrix, and rank of ``W``.
    """
    if dec is None:
        dec = kalman_decompose(t)
    labels = selection_labels(t.h)
    if labels is not None:
        sel = dec.p1.submatrix([v - 1 for v in labels])
    else:
        sel = t.h @ dec.p1
    sel_rank = rat_rank(sel)
    hc_rank = rat_rank(dec.h_c)
    if sel_rank != hc_rank:
        raise ConsistencyError(f"rank of selected P1 rows {sel_rank} != rank H_c {hc_rank}")
    if w_rank is None:
        w_rank = rat_rank(target_ctrb_matrix(t))
    if (hc_rank == t.p) != (w_rank == t.p):
        raise ConsistencyError(f"rank H_c = {hc_rank} but rank W = {w_rank} with p = {t.p}")
    return Theorem2Result(sel_rank == t.p, sel_rank, hc_rank, dec.kappa)


def _norm_inf(a: np.ndarray) -> float:
    return float(np.abs(a).sum(axis=1).max()) if a.size else 0.0


def default_tol_eig(a: np.ndarray) -> float:
    return 1e-8 * max(1.0, _norm_inf(a))


def cluster_eigenvalues(values, tol: float) -> list[tuple[complex, int]]:
    """Group eigenvalues closer than ``tol`` (chained); returns (mean, multiplicity)."""
    vals = sorted((complex(v) for v in values), key=lambda z: (z.real, z.imag))
    clusters: list[list[complex]] = []
    for v in vals:
        for c in clusters:
            if any(abs(v - u) <= tol for u in c):
                c.append(v)
                break
        else:
            clusters.append([v])
    out = [(complex(np.mean(c)), len(c)) for c in clusters]
    return sorted(out, key=lambda x: (x[0].real, x[0].imag))


@dataclass(frozen=True)
class PbhEntry:
    eigenvalue: complex
    multiplicity: int
    rank: int
    passed: bool

    def to_dict(self) -> dict:
        return {
            "lambda": [self.eigenvalue.real, self.eigenvalue.imag],
            "multiplicity": self.multiplicity,
            "rank": self.rank,
            "pass": self.passed,
        }


def pbh_target_check(t: SystemTriple, tol: float | None = None,
                     tol_rank: float = DEFAULT_TOL_RANK) -> list[PbhEntry]:
    """Numeric rank of ``H [lambda I - A, B]`` at each distinct eigenvalue of ``A``.

    Full rank ``p`` everywhere is necessary (not sufficient) for target
    controllability.  ``tol`` clusters eigenvalues (default ``1e-8 * max(1, |A|)``);
    ``tol_rank`` is the relative singular-value cutoff.
    """
    from .linalg import eigenvalues

    a = t.a.to_numpy()
    b = t.b.to_numpy()
    h = t.h.to_numpy()
    if tol is None:
        tol = default_tol_eig(a)
    out = []
    for lam, mult in cluster_eigenvalues(eigenvalues(a), tol):
        m = h @ np.hstack([lam * np.eye(t.n) - a, b])
        r = float_rank(m, tol_rank)
        out.append(PbhEntry(lam, mult, r, r == t.p))
    return out


def _null_basis(m: np.ndarray, rtol: float) -> np.ndarray:
    """Columns spanning the numerical null space of ``m``."""
    if m.shape[0] == 0:
        return np.eye(m.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(m)
    smax = s[0] if s.size else 0.0
    cut = rtol * max(smax, 1.0)
    rank = int(np.count_nonzero(s > cut))
    return vh[rank:].conj().T


@dataclass(frozen=True)
class Obstruction:
    eigenvalue: complex
    theta: np.ndarray
    residual: float

    def to_dict(self) -> dict:
        return {
            "lambda": [self.eigenvalue.real, self.eigenvalue.imag],
            "theta": [[float(z.real), float(z.imag)] for z in self.theta],
            "residual": self.residual,
        }


def left_eigen_obstruction(t: SystemTriple, tol: float | None = None) -> Obstruction | None:
    """Search for a left eigenvector of ``A`` supported on targets with ``theta^T B = 0``.

    For each distinct eigenvalue the whole left eigenspace (null space of
    ``(A - lambda I)^T``) is searched, so a qualifying combination of
    eigenvectors of a repeated eigenvalue is found too.  Finding one proves
    the system is not target controllable.
    """
    from .linalg import eigenvalues

    a = t.a.to_numpy()
    b = t.b.to_numpy()
    if tol is None:
        tol = default_tol_eig(a)
    labels = selection_labels(t.h)
    if labels is None:
        raise ValueError("obstruction search needs a node-selection output matrix")
    nontarget = [i for i in range(t.n) if i + 1 not in set(labels)]
    scale = max(1.0, _norm_inf(a))
    for lam, _ in cluster_eigenvalues(eigenvalues(a), tol):
        basis = _null_basis((a - lam * np.eye(t.n)).T, tol / scale)
        if basis.shape[1] == 0:
            continue
        constraints = np.vstack([basis[nontarget, :], b.T @ basis])
        coeffs = _null_basis(constraints, tol / scale)
        if coeffs.shape[1] == 0:
            continue
        theta = basis @ coeffs[:, 0]
        k = int(np.argmax(np.abs(theta)))
        theta = theta / theta[k]
        residual = float(np.max(np.abs(theta @ a - lam * theta)))
        leak = float(np.max(np.abs(theta @ b))) if b.size else 0.0
        off = float(np.max(np.abs(theta[nontarget]))) if nontarget else 0.0
        if residual <= 1e-8 * scale and leak <= tol and off <= tol:
            theta = np.where(np.abs(theta) <= tol * 1e-3, 0, theta)
            return Obstruction(lam, theta, residual)
    return None
