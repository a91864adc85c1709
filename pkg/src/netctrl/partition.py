"""Equitable partitions, the leader-relative partition and its target verdict.

A partition is equitable when, for every pair of cells ``C_i, C_j``, all
nodes of ``C_i`` receive the same total in-edge weight from ``C_j``.  The
leader-relative partition keeps each leader in its own singleton cell and
splits the followers by the coarsest equitable refinement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .graph import Graph, system_triple
from .linalg import rat_rank
from .reachability import ConsistencyError, ReachabilityReport, analyze_reachability


@dataclass(frozen=True)
class Partition:
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cells = tuple(tuple(sorted(c)) for c in self.cells)
        if any(not c for c in cells):
            raise ValueError("empty cell")
        flat = [v for c in cells for v in c]
        if len(flat) != len(set(flat)):
            raise ValueError("cells overlap")
        object.__setattr__(self, "cells", cells)

    @property
    def cell_of(self) -> dict[int, int]:
        return {v: i for i, c in enumerate(self.cells) for v in c}

    def covers(self, nodes: Iterable[int]) -> bool:
        return sorted(v for c in self.cells for v in c) == sorted(nodes)

    def canonical(self) -> list[list[int]]:
        """Sorted list of sorted node lists, as written into reports."""
        return sorted(list(c) for c in self.cells)

    def __len__(self) -> int:
        return len(self.cells)


def _in_weights(g: Graph) -> dict[int, list[tuple[int, Fraction]]]:
    inw = {v: [] for v in g.nodes}
    for s, d, w in g.edges:
        inw[d].append((s, w))
    return inw


def is_equitable(g: Graph, p: Partition) -> bool:
    inw = _in_weights(g)
    cell_of = p.cell_of
    for cell in p.cells:
        sigs = {_signature(inw[v], cell_of) for v in cell}
        if len(sigs) > 1:
            return False
    return True


def _signature(in_edges, cell_of) -> tuple:
    sums: dict[int, Fraction] = {}
    for s, w in in_edges:
        c = cell_of[s]
        sums[c] = sums.get(c, 0) + w
    return tuple(sorted(sums.items()))


def coarsest_ep(g: Graph, seed: Partition) -> Partition:
    """Coarsest equitable refinement of ``seed``.

    Cells are split by their exact in-weight signature toward the current
    cells until nothing splits.  Splitting never merges, so the fixpoint
    refines the seed, and every split is forced, so it is the coarsest.
    """
    if not seed.covers(g.nodes):
        raise ValueError("seed does not partition the node set")
    inw = _in_weights(g)
    cells = [list(c) for c in seed.cells]
    while True:
        cell_of = {v: i for i, c in enumerate(cells) for v in c}
        new_cells = []
        for c in cells:
            groups: dict[tuple, list[int]] = {}
            for v in c:
                groups.setdefault(_signature(inw[v], cell_of), []).append(v)
            new_cells.extend(sorted(groups.values(), key=min))
        if len(new_cells) == len(cells):
            break
        cells = new_cells
    return Partition(tuple(tuple(c) for c in cells))


def pi_0ep(g: Graph) -> Partition:
    """Leader singletons first (leader order), then follower cells by smallest node."""
    seed = [(v,) for v in g.leaders]
    if g.followers:
        seed.append(g.followers)
    ep = coarsest_ep(g, Partition(tuple(seed)))
    leaders = set(g.leaders)
    lead_cells = [(v,) for v in g.leaders]
    rest = sorted((c for c in ep.cells if not (len(c) == 1 and c[0] in leaders)), key=min)
    return Partition(tuple(lead_cells + rest))


def delta_cell_consistent(p: Partition, r: ReachabilityReport) -> bool:
    cell_of = p.cell_of
    return all(len({cell_of[v] for v in cls}) == 1 for cls in r.classes.values())


@dataclass(frozen=True)
class Theorem1Verdict:
    partition: Partition
    applicable: bool
    cell_target_counts: tuple[int, ...]
    has_unreachable_target: bool
    controllable: bool | None
    rank_cross_check: int | None

    def to_dict(self) -> dict:
        return {
            "cells": [list(c) for c in self.partition.cells],
            "applicable": self.applicable,
            "cell_target_counts": list(self.cell_target_counts),
            "has_unreachable_target": self.has_unreachable_target,
            "controllable": self.controllable,
            "rank_cross_check": self.rank_cross_check,
        }


def theorem1_check(g: Graph, exact: bool = True) -> Theorem1Verdict:
    """Partition verdict: at most one target per cell and no unreachable target.

    Only applies when every delta-class sits inside one cell; otherwise the
    verdict is ``None`` and the exact rank (still reported) decides.
    """
    from .ctrb import target_ctrb_matrix

    part = pi_0ep(g)
    reach = analyze_reachability(g)
    applicable = delta_cell_consistent(part, reach)
    cell_of = part.cell_of
    counts = [0] * len(part)
    for t in g.targets:
        counts[cell_of[t]] += 1
    has_unreach = bool(reach.unreachable_targets)
    controllable = None
    if applicable:
        controllable = max(counts) <= 1 and not has_unreach
    rank = None
    if exact:
        rank = rat_rank(target_ctrb_matrix(system_triple(g)))
        if applicable and controllable != (rank == len(g.targets)):
            raise ConsistencyError(
                f"partition verdict {controllable} but exact rank {rank} of {len(g.targets)}")
    return Theorem1Verdict(part, applicable, tuple(counts), has_unreach, controllable, rank)


@dataclass(frozen=True)
class TargetCandidate:
    targets: tuple[int, ...]
    rank: int


def suggest_targets_cor1(g: Graph, cap: int = 64) -> list[TargetCandidate]:
    """Leaders plus one representative per delta-class, kept only if W has full row rank.

    Candidates are generated in lexicographic order of representatives and at
    most ``cap`` of them are examined.
    """
    from .ctrb import target_ctrb_matrix

    reach = analyze_reachability(g)
    classes: Sequence[Sequence[int]] = [sorted(c) for _, c in sorted(reach.classes.items())]
    out = []
    for reps in itertools.islice(itertools.product(*classes), cap):
        targets = tuple(g.leaders) + tuple(reps)
        rank = rat_rank(target_ctrb_matrix(system_triple(g.with_targets(targets))))
        if rank == len(targets):
            out.append(TargetCandidate(targets, rank))
    return out
