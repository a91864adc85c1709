"""High-order lifting, Kronecker general-linear agents and SCC-based conditions."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.linalg

from .ctrb import target_ctrb_matrix
from .graph import Graph, SystemTriple, laplacian, selection_columns, system_triple
from .linalg import DimensionError, RatMatrix, block, kron, rat_rank, to_fraction
from .reachability import ConsistencyError


def lift_high_order(t: SystemTriple, m_order: int) -> SystemTriple:
    """Block-companion lift for agents integrating their consensus input ``m_order`` times.

    State is ``[x, x', ..., x^(m-1)]``; identity blocks sit on the block
    super-diagonal and ``A`` in the bottom-left block.
    """
    if m_order < 1:
        raise ValueError("m_order must be >= 1")
    if m_order == 1:
        return t
    n, m = t.n, m_order
    zero = RatMatrix.zeros(n, n)
    eye = RatMatrix.identity(n)
    grid = [[zero] * m for _ in range(m)]
    for i in range(m - 1):
        grid[i][i + 1] = eye
    grid[m - 1][0] = t.a
    big_a = block(grid)
    big_b = block([[RatMatrix.zeros(n, t.l)]] * (m - 1) + [[t.b]])
    big_h = block([[t.h] + [RatMatrix.zeros(t.p, n)] * (m - 1)])
    return SystemTriple(big_a, big_b, big_h)


@dataclass(frozen=True)
class Theorem3Result:
    rank_first: int
    rank_lifted: int
    equal: bool

    def to_dict(self) -> dict:
        return {"rank_first": self.rank_first, "rank_lifted": self.rank_lifted, "equal": self.equal}


def theorem3_check(t: SystemTriple, m_order: int) -> Theorem3Result:
    """Exact target ranks of the first-order and lifted systems; they must match."""
    first = rat_rank(target_ctrb_matrix(t))
    lifted_t = lift_high_order(t, m_order)
    lifted = rat_rank(target_ctrb_matrix(lifted_t, lifted_t.n))
    if first != lifted:
        raise ConsistencyError(f"lifted rank {lifted} differs from first-order rank {first}")
    return Theorem3Result(first, lifted, True)


def lifted_zero_columns_ok(w: RatMatrix, m_order: int, l: int) -> bool:  # noqa: E741
    """Columns ``H A^k B`` of a lifted W vanish unless ``k = m - 1 (mod m)``."""
    for k in range(w.cols // l):
        if k % m_order == m_order - 1:
            continue
        if not w.submatrix(range(w.rows), range(k * l, (k + 1) * l)).is_zero():
            return False
    return True


@dataclass(frozen=True)
class GeneralLinearSpec:
    """Identical agents ``x' = A x + M z (+ N u)``, ``z' = K sum a_ij (x_j - x_i)``."""

    a_tilde: RatMatrix
    m: RatMatrix
    n_mat: RatMatrix
    k: RatMatrix

    def __post_init__(self):
        s = self.a_tilde.rows
        if self.a_tilde.cols != s:
            raise DimensionError("A must be square")
        if self.m.rows != s or self.n_mat.rows != s:
            raise DimensionError("M and N need sigma rows")
        if self.k.rows != self.m.cols or self.k.cols != s:
            raise DimensionError("K must be sigma_z x sigma with sigma_z = columns of M")

    @property
    def sigma(self) -> int:
        return self.a_tilde.rows

    @classmethod
    def from_dict(cls, d: dict) -> "GeneralLinearSpec":
        def mat(key):
            try:
                rows = d[key]
            except KeyError:
                raise ValueError(f"general-linear spec is missing {key!r}") from None
            return RatMatrix.from_rows([[to_fraction(x) for x in r] for r in rows])

        spec = cls(mat("A"), mat("M"), mat("N"), mat("K"))
        if "sigma" in d and int(d["sigma"]) != spec.sigma:
            raise DimensionError(f"sigma={d['sigma']} but A is {spec.sigma}x{spec.sigma}")
        return spec

    @classmethod
    def from_json(cls, text: str) -> "GeneralLinearSpec":
        return cls.from_dict(json.loads(text))

    @classmethod
    def first_order(cls) -> "GeneralLinearSpec":
        one = RatMatrix.identity(1)
        return cls(RatMatrix.zeros(1, 1), one, one, one)


def general_linear_triple(g: Graph, spec: GeneralLinearSpec) -> SystemTriple:
    """``(I_n (x) A - L (x) MK, B (x) N, H (x) I_sigma)``."""
    lap = laplacian(g)
    a = kron(RatMatrix.identity(g.n), spec.a_tilde) - kron(lap, spec.m @ spec.k)
    b = kron(selection_columns(g.n, g.leaders), spec.n_mat)
    h = kron(selection_columns(g.n, g.targets).T, RatMatrix.identity(spec.sigma))
    return SystemTriple(a, b, h)


def tarjan_scc(nodes: Iterable[int], succ: dict[int, list[int]]) -> list[list[int]]:
    """Strongly connected components (iterative Tarjan), in reverse topological order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ.get(w, ()))))
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(sorted(comp))
    return comps


def _components(nodes: list[int], edges: list[tuple[int, int]]) -> tuple[list[list[int]], list[bool]]:
    succ: dict[int, list[int]] = {v: [] for v in nodes}
    for s, d in edges:
        succ[s].append(d)
    comps = sorted(tarjan_scc(nodes, succ), key=min)
    comp_of = {v: i for i, c in enumerate(comps) for v in c}
    independent = [True] * len(comps)
    for s, d in edges:
        if comp_of[s] != comp_of[d]:
            independent[comp_of[d]] = False
    return comps, independent


@dataclass(frozen=True)
class SccReport:
    components: list[list[int]]
    independent: list[bool]
    follower_components: list[list[int]]
    follower_independent: list[bool]
    target_only_independent: list[list[int]]
    leader_fed: list[bool]
    ltf_connected: bool
    reason: str

    def to_dict(self) -> dict:
        return {
            "components": self.components,
            "independent": self.independent,
            "follower_components": self.follower_components,
            "follower_independent": self.follower_independent,
            "target_only_independent": self.target_only_independent,
            "leader_fed": self.leader_fed,
            "ltf_connected": self.ltf_connected,
            "reason": self.reason,
        }


def scc_analyze(g: Graph) -> SccReport:
    """SCCs of the graph and of the follower-induced subgraph, plus the LTF test.

    ``reason`` is ``ltf-connected``, ``no-target-only-iscc`` or
    ``no-leader-edge``.
    """
    all_edges = [(s, d) for s, d, _ in g.edges]
    comps, indep = _components(list(g.nodes), all_edges)
    followers = list(g.followers)
    fset = set(followers)
    f_edges = [(s, d) for s, d in all_edges if s in fset and d in fset]
    f_comps, f_indep = _components(followers, f_edges)
    targets = set(g.targets)
    leaders = set(g.leaders)
    target_only = [c for c, ind in zip(f_comps, f_indep) if ind and set(c) <= targets]
    fed = [any(s in leaders and d in set(c) for s, d in all_edges) for c in target_only]
    if not target_only:
        connected, reason = False, "no-target-only-iscc"
    elif any(fed):
        connected, reason = True, "ltf-connected"
    else:
        connected, reason = False, "no-leader-edge"
    return SccReport(comps, indep, f_comps, f_indep, target_only, fed, connected, reason)


class Prop5Verdict(str, enum.Enum):
    NOT_TARGET_CONTROLLABLE = "NOT_TARGET_CONTROLLABLE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class Prop5Result:
    precondition_holds: bool
    ltf_connected: bool
    verdict: Prop5Verdict
    witness: list[int] | None
    exact_rank: int | None
    p: int

    def to_dict(self) -> dict:
        return {
            "precondition_holds": self.precondition_holds,
            "ltf_connected": self.ltf_connected,
            "verdict": self.verdict.value,
            "witness": self.witness,
            "exact_rank": self.exact_rank,
            "p": self.p,
        }


def prop5_check(g: Graph, spec: GeneralLinearSpec | None = None, exact: bool = True,
                scc: SccReport | None = None) -> Prop5Result:
    """Target-only independent follower SCC without a leader edge rules out control.

    The verdict covers the first-order system, or the Kronecker system when
    ``spec`` is given; a NOT verdict is confirmed by exact rank unless
    ``exact`` is off.
    """
    rep = scc_analyze(g) if scc is None else scc
    pre = bool(rep.target_only_independent)
    verdict = Prop5Verdict.INCONCLUSIVE
    witness = None
    if pre and not rep.ltf_connected:
        verdict = Prop5Verdict.NOT_TARGET_CONTROLLABLE
        witness = rep.target_only_independent[0]
    t = system_triple(g) if spec is None else general_linear_triple(g, spec)
    rank = None
    if exact and (verdict is Prop5Verdict.NOT_TARGET_CONTROLLABLE or spec is not None):
        rank = rat_rank(target_ctrb_matrix(t))
        if verdict is Prop5Verdict.NOT_TARGET_CONTROLLABLE and rank == t.p:
            raise ConsistencyError("LTF obstruction found but W has full row rank")
    return Prop5Result(pre, rep.ltf_connected, verdict, witness, rank, t.p)


@dataclass(frozen=True)
class Lemma5Certificate:
    component: list[int]
    eigenvalue: complex
    theta: np.ndarray
    residual: float
    input_leak: float


def lemma5_certificate(g: Graph, component: list[int],
                       spec: GeneralLinearSpec | None = None) -> Lemma5Certificate:
    """Left eigenvector of the Kronecker system supported on ``component``.

    Built from a left eigenvector of ``I (x) A - L_1 (x) MK`` for the
    component's Laplacian block, zero-padded to the full state.  Only
    meaningful when the component has no incoming edges at all.
    """
    spec = GeneralLinearSpec.first_order() if spec is None else spec
    t = general_linear_triple(g, spec)
    s = spec.sigma
    idx = [v - 1 for v in component]
    lap = laplacian(g).submatrix(idx, idx)
    sub = kron(RatMatrix.identity(len(idx)), spec.a_tilde) - kron(lap, spec.m @ spec.k)
    vals, left = scipy.linalg.eig(sub.to_numpy(), left=True, right=False)
    theta_sub = left[:, 0].conj()
    lam = complex(vals[0])
    theta = np.zeros(t.n, dtype=complex)
    for pos, v in enumerate(idx):
        theta[v * s:(v + 1) * s] = theta_sub[pos * s:(pos + 1) * s]
    theta /= np.max(np.abs(theta))
    a = t.a.to_numpy()
    b = t.b.to_numpy()
    residual = float(np.max(np.abs(theta @ a - lam * theta)))
    leak = float(np.max(np.abs(theta @ b)))
    return Lemma5Certificate(list(component), lam, theta, residual, leak)
