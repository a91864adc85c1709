"""Directed weighted leader/follower graphs and the (-L, B, H) system triple.

Node ids are 1-based everywhere a user can see them (files, reports) and
0-based when indexing matrices.

Graph file format::

    # comments run to end of line
    n 7
    leaders 1
    targets 2 6
    edge 1 2 1        # from, to, weight (int, p/q or finite decimal)
    edge 4 2 2
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

from .linalg import RatMatrix, to_fraction


class GraphFormatError(ValueError):
    """Malformed graph text or an invalid graph; carries a 1-based line/column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


Edge = tuple[int, int, Fraction]


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...]
    leaders: tuple[int, ...]
    targets: tuple[int, ...]
    _weights: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.n < 1:
            raise GraphFormatError("graph needs at least one node")
        weights: dict[tuple[int, int], Fraction] = {}
        edges = []
        for src, dst, w in self.edges:
            w = to_fraction(w)
            for v in (src, dst):
                if not 1 <= v <= self.n:
                    raise GraphFormatError(f"node id {v} out of range 1..{self.n}")
            if src == dst:
                raise GraphFormatError(f"self-loop on node {src}")
            if (src, dst) in weights:
                raise GraphFormatError(f"duplicate edge {src} -> {dst}")
            if w <= 0:
                raise GraphFormatError(f"edge {src} -> {dst} has non-positive weight {w}")
            weights[(src, dst)] = w
            edges.append((src, dst, w))
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        object.__setattr__(self, "_weights", weights)
        for name in ("leaders", "targets"):
            ids = tuple(getattr(self, name))
            object.__setattr__(self, name, ids)
            if not ids:
                raise GraphFormatError(f"{name} set is empty")
            if len(set(ids)) != len(ids):
                raise GraphFormatError(f"repeated node in {name}")
            for v in ids:
                if not 1 <= v <= self.n:
                    raise GraphFormatError(f"{name[:-1]} id {v} out of range 1..{self.n}")

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    @property
    def followers(self) -> tuple[int, ...]:
        lead = set(self.leaders)
        return tuple(v for v in self.nodes if v not in lead)

    def weight(self, src: int, dst: int) -> Fraction:
        return self._weights.get((src, dst), Fraction(0))

    def out_neighbors(self, v: int) -> list[int]:
        return [d for s, d, _ in self.edges if s == v]

    def in_neighbors(self, v: int) -> list[int]:
        return [s for s, d, _ in self.edges if d == v]

    def with_targets(self, targets: Iterable[int]) -> "Graph":
        return replace(self, targets=tuple(targets))

    def with_leaders(self, leaders: Iterable[int]) -> "Graph":
        return replace(self, leaders=tuple(leaders))

    def without_edges(self, drop: Iterable[tuple[int, int]]) -> "Graph":
        drop = set(drop)
        return replace(self, edges=tuple(e for e in self.edges if (e[0], e[1]) not in drop))


def _parse_ids(tokens: list[str], lineno: int, line: str) -> list[int]:
    out = []
    for tok in tokens:
        try:
            out.append(int(tok))
        except ValueError:
            raise GraphFormatError(f"expected a node id, got {tok!r}", lineno, line.find(tok) + 1) from None
    return out


def parse_graph(text: str | bytes) -> Graph:
    """Parse the line-oriented edge-list format into a validated :class:`Graph`."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise GraphFormatError(f"input is not UTF-8: {exc}") from None
    n = None
    leaders = targets = None
    edges: list[Edge] = []
    seen: dict[tuple[int, int], int] = {}
    expected = ["n", "leaders", "targets"]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        key, args = tokens[0], tokens[1:]
        if expected:
            if key != expected[0]:
                raise GraphFormatError(f"expected '{expected[0]}' header, got {key!r}", lineno, 1)
            expected.pop(0)
            if key == "n":
                if len(args) != 1:
                    raise GraphFormatError("'n' takes exactly one count", lineno)
                (n,) = _parse_ids(args, lineno, line)
                if n < 1:
                    raise GraphFormatError("node count must be positive", lineno, line.find(args[0]) + 1)
                continue
            ids = _parse_ids(args, lineno, line)
            if not ids:
                raise GraphFormatError(f"'{key}' needs at least one node id", lineno)
            for tok, v in zip(args, ids):
                if not 1 <= v <= n:
                    raise GraphFormatError(f"node id {v} out of range 1..{n}", lineno, line.find(tok) + 1)
            if len(set(ids)) != len(ids):
                raise GraphFormatError(f"repeated node id in '{key}'", lineno)
            if key == "leaders":
                leaders = ids
            else:
                targets = ids
            continue
        if key != "edge":
            raise GraphFormatError(f"unknown directive {key!r}", lineno, 1)
        if len(args) != 3:
            raise GraphFormatError("edge needs <from> <to> <weight>", lineno)
        src, dst = _parse_ids(args[:2], lineno, line)
        col_w = line.find(args[2], line.find(args[1]) + len(args[1])) + 1
        for tok, v in zip(args[:2], (src, dst)):
            if not 1 <= v <= n:
                raise GraphFormatError(f"node id {v} out of range 1..{n}", lineno, line.find(tok) + 1)
        if src == dst:
            raise GraphFormatError(f"self-loop on node {src}", lineno)
        try:
            w = to_fraction(args[2])
        except ValueError:
            raise GraphFormatError(f"bad weight {args[2]!r}", lineno, col_w) from None
        if w <= 0:
            raise GraphFormatError(f"non-positive weight {args[2]}", lineno, col_w)
        if (src, dst) in seen:
            raise GraphFormatError(
                f"duplicate edge {src} -> {dst} (first on line {seen[(src, dst)]})", lineno)
        seen[(src, dst)] = lineno
        edges.append((src, dst, w))
    if expected:
        raise GraphFormatError(f"missing '{expected[0]}' header")
    return Graph(n, tuple(edges), tuple(leaders), tuple(targets))


def serialize_graph(g: Graph) -> str:
    """Canonical text: headers in fixed order, edges sorted by (from, to)."""
    lines = [
        f"n {g.n}",
        "leaders " + " ".join(map(str, g.leaders)),
        "targets " + " ".join(map(str, g.targets)),
    ]
    lines += [f"edge {s} {d} {w}" for s, d, w in g.edges]
    return "\n".join(lines) + "\n"


def adjacency(g: Graph) -> RatMatrix:
    """``a[i, j] = w`` for an edge ``j -> i`` (0-based indices), zero diagonal."""
    a = [[Fraction(0)] * g.n for _ in range(g.n)]
    for src, dst, w in g.edges:
        a[dst - 1][src - 1] = w
    return RatMatrix.from_rows(a)


def laplacian(g: Graph) -> RatMatrix:
    """In-degree Laplacian ``L = D - A``; every row sums to zero."""
    a = adjacency(g).tolist()
    rows = []
    for i, r in enumerate(a):
        row = [-x for x in r]
        row[i] = sum(r, Fraction(0))
        rows.append(row)
    return RatMatrix.from_rows(rows)


@dataclass(frozen=True)
class SystemTriple:
    """``x' = a x + b u``, ``y = h x`` with ``a = -L`` for a plain graph."""

    a: RatMatrix
    b: RatMatrix
    h: RatMatrix

    def __post_init__(self):
        n = self.a.rows
        if self.a.cols != n or self.b.rows != n or self.h.cols != n:
            raise ValueError(
                f"inconsistent triple shapes a={self.a.shape} b={self.b.shape} h={self.h.shape}")

    @property
    def n(self) -> int:
        return self.a.rows

    @property
    def l(self) -> int:  # noqa: E743
        return self.b.cols

    @property
    def p(self) -> int:
        return self.h.rows


def selection_columns(n: int, ids: Iterable[int]) -> RatMatrix:
    """``[e_v1, ..., e_vk]`` for 1-based ids."""
    ids = list(ids)
    return RatMatrix(n, len(ids), (1 if i + 1 == v else 0 for i in range(n) for v in ids))


def system_triple(g: Graph) -> SystemTriple:
    return SystemTriple(
        a=-laplacian(g),
        b=selection_columns(g.n, g.leaders),
        h=selection_columns(g.n, g.targets).T,
    )
