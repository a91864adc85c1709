"""Reachability from the leader set and delta-reachability layering."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .graph import Graph, system_triple
from .linalg import RatMatrix


class ConsistencyError(RuntimeError):
    """Two independent routes to the same verdict disagree.

    Raised when a graph-side answer contradicts the exact matrix answer that a
    proven equivalence says it must match.  Seeing one means a bug (or a false
    theorem), never bad input.
    """


@dataclass(frozen=True)
class ReachabilityReport:
    reachable: frozenset[int]
    unreachable: frozenset[int]
    delta_of: dict[int, int]
    classes: dict[int, frozenset[int]]
    unreachable_targets: frozenset[int]

    def to_dict(self) -> dict:
        return {
            "reachable": sorted(self.reachable),
            "unreachable": sorted(self.unreachable),
            "delta_of": {str(v): d for v, d in sorted(self.delta_of.items())},
            "classes": {str(d): sorted(c) for d, c in sorted(self.classes.items())},
            "unreachable_targets": sorted(self.unreachable_targets),
        }


def analyze_reachability(g: Graph) -> ReachabilityReport:
    """Multi-source BFS from the leaders on the unit-weight digraph.

    A follower first reached at BFS depth ``d >= 1`` has a shortest leader
    path through ``d - 1`` intermediate nodes, so its delta is ``d - 1``.
    Leaders are reachable but carry no delta.
    """
    out = {v: [] for v in g.nodes}
    for s, d, _ in g.edges:
        out[s].append(d)
    depth = {v: 0 for v in g.leaders}
    queue = deque(g.leaders)
    while queue:
        u = queue.popleft()
        for w in out[u]:
            if w not in depth:
                depth[w] = depth[u] + 1
                queue.append(w)
    leaders = set(g.leaders)
    delta_of = {v: d - 1 for v, d in depth.items() if v not in leaders}
    classes: dict[int, set[int]] = {}
    for v, d in delta_of.items():
        classes.setdefault(d, set()).add(v)
    reachable = frozenset(depth)
    unreachable = frozenset(g.nodes) - reachable
    return ReachabilityReport(
        reachable=reachable,
        unreachable=unreachable,
        delta_of=dict(sorted(delta_of.items())),
        classes={d: frozenset(c) for d, c in sorted(classes.items())},
        unreachable_targets=frozenset(t for t in g.targets if t in unreachable),
    )


def zero_rows(w: RatMatrix) -> set[int]:
    """0-based indices of the rows of ``w`` that are exactly zero."""
    return {i for i, r in enumerate(w.iter_rows()) if not any(r)}


@dataclass(frozen=True)
class Prop1Result:
    unreachable_targets: frozenset[int]
    w_zero_rows: frozenset[int]
    dim_upper_bound: int

    def to_dict(self) -> dict:
        return {
            "unreachable_targets": sorted(self.unreachable_targets),
            "w_zero_rows": sorted(self.w_zero_rows),
            "dim_upper_bound": self.dim_upper_bound,
        }


def prop1_check(g: Graph, w: RatMatrix | None = None) -> Prop1Result:
    """Unreachable targets by BFS and by zero rows of W; both must agree.

    ``w_zero_rows`` holds the target node ids (1-based) whose W row is zero.
    """
    from .ctrb import target_ctrb_matrix

    rep = analyze_reachability(g)
    if w is None:
        w = target_ctrb_matrix(system_triple(g))
    zero_targets = frozenset(g.targets[i] for i in zero_rows(w))
    if zero_targets != rep.unreachable_targets:
        raise ConsistencyError(
            f"unreachable targets {sorted(rep.unreachable_targets)} but zero rows of W "
            f"at targets {sorted(zero_targets)}")
    return Prop1Result(
        unreachable_targets=rep.unreachable_targets,
        w_zero_rows=zero_targets,
        dim_upper_bound=len(g.targets) - len(rep.unreachable_targets),
    )
