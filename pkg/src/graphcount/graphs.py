"""Labelled graphs with signals, generators, enumeration, Color Refinement and file I/O.

Vertices are dense integer ids 0..n-1.  Labels are per-vertex bit vectors of a
fixed width; a graph together with a Boolean signal and a labelled graph are
the same object here.  All values are immutable after construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

DEFAULT_ENUM_CAP = 7


class GraphFormatError(ValueError):
    """Malformed graph/signal file or invariant violation."""


class CapExceeded(RuntimeError):
    """A configured desk-scale cap was exceeded."""


@dataclass(frozen=True)
class LabelledGraph:
    n: int
    edges: frozenset[tuple[int, int]]  # (u, v) with u < v, each pair once
    labels: tuple[tuple[int, ...], ...]  # one bit vector of width label_width per vertex

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if not (0 <= u < v < self.n):
                raise GraphFormatError(f"edge ({u},{v}) out of range or not normalized")
        if len(self.labels) != self.n:
            raise GraphFormatError("label rows must cover every vertex")
        w = self.label_width
        for v, row in enumerate(self.labels):
            if len(row) != w:
                raise GraphFormatError(f"label row of vertex {v} has width {len(row)}, expected {w}")
            if any(b not in (0, 1) for b in row):
                raise GraphFormatError(f"label row of vertex {v} is not a bit vector")

    @property
    def label_width(self) -> int:
        return len(self.labels[0]) if self.labels else 0

    @property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        cached = getattr(self, "_adjacency", None)
        if cached is None:
            nbrs: list[set[int]] = [set() for _ in range(self.n)]
            for u, v in self.edges:
                nbrs[u].add(v)
                nbrs[v].add(u)
            cached = tuple(frozenset(s) for s in nbrs)
            object.__setattr__(self, "_adjacency", cached)
        return cached

    def neighbours(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u] if 0 <= u < self.n else False

    def vertices(self) -> range:
        return range(self.n)


def make_graph(n: int, edges: Sequence[tuple[int, int]], labels: Sequence[Sequence[int]] | None = None,
               label_width: int = 0) -> LabelledGraph:
    norm = set()
    for u, v in edges:
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}")
        a, b = (u, v) if u < v else (v, u)
        norm.add((a, b))
    if labels is None:
        labels = [[0] * label_width for _ in range(n)]
    return LabelledGraph(n=n, edges=frozenset(norm), labels=tuple(tuple(int(b) for b in row) for row in labels))


def make_complete_bipartite(m: int, n: int) -> LabelledGraph:
    """K_{m,n}: side U = {0..m-1}, side V = {m..m+n-1}, all cross edges, no labels."""
    if m < 0 or n < 0:
        raise ValueError("side sizes must be nonnegative")
    edges = [(u, m + v) for u in range(m) for v in range(n)]
    return make_graph(m + n, edges)


def make_cycle(n: int) -> LabelledGraph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return make_graph(n, [(i, (i + 1) % n) for i in range(n)])


def make_path(n: int) -> LabelledGraph:
    return make_graph(n, [(i, i + 1) for i in range(n - 1)])


def disjoint_union(g: LabelledGraph, h: LabelledGraph) -> LabelledGraph:
    if g.label_width != h.label_width:
        raise GraphFormatError("label widths differ")
    edges = list(g.edges) + [(u + g.n, v + g.n) for u, v in h.edges]
    return make_graph(g.n + h.n, edges, list(g.labels) + list(h.labels))


def relabel(g: LabelledGraph, perm: Sequence[int]) -> LabelledGraph:
    """Apply the vertex permutation v -> perm[v]."""
    edges = [(perm[u], perm[v]) for u, v in g.edges]
    labels: list[Sequence[int]] = [()] * g.n
    for v in range(g.n):
        labels[perm[v]] = g.labels[v]
    return make_graph(g.n, edges, labels)


@dataclass(frozen=True)
class Signal:
    dimension: int
    values: tuple[tuple[Fraction, ...], ...]  # one vector per vertex

    def __post_init__(self):
        for v, vec in enumerate(self.values):
            if len(vec) != self.dimension:
                raise GraphFormatError(f"signal vector of vertex {v} has dimension {len(vec)}")

    def __getitem__(self, v: int) -> tuple[Fraction, ...]:
        return self.values[v]

    @property
    def n(self) -> int:
        return len(self.values)


def boolean_signal(g: LabelledGraph) -> Signal:
    """The Boolean signal corresponding to the vertex labels."""
    return Signal(g.label_width, tuple(tuple(Fraction(b) for b in row) for row in g.labels))


def constant_signal(g: LabelledGraph, vec: Sequence[Fraction | int]) -> Signal:
    row = tuple(Fraction(x) for x in vec)
    return Signal(len(row), tuple(row for _ in range(g.n)))


@dataclass(frozen=True)
class Coloring:
    colors: tuple[int, ...]
    rounds: int

    def classes(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {}
        for v, c in enumerate(self.colors):
            out.setdefault(c, []).append(v)
        return {c: tuple(vs) for c, vs in out.items()}


def _refine_once(g: LabelledGraph, colors: Sequence[int]) -> list[int]:
    sigs = []
    for v in range(g.n):
        nbr = tuple(sorted(colors[w] for w in g.adjacency[v]))
        sigs.append((colors[v], nbr))
    order = sorted(set(sigs))
    rank = {s: i for i, s in enumerate(order)}
    return [rank[s] for s in sigs]


def color_refinement(g: LabelledGraph) -> Coloring:
    """Coarsest stable coloring refining the label partition (1-WL).

    Color ids are canonical within the graph: at every round colors are the
    dense ranks of (previous color, sorted neighbor-color multiset) pairs in
    lexicographic order, so reruns are reproducible across platforms.
    """
    initial = sorted(set(g.labels))
    rank = {lab: i for i, lab in enumerate(initial)}
    colors = [rank[g.labels[v]] for v in range(g.n)]
    rounds = 0
    while True:
        nxt = _refine_once(g, colors)
        if nxt == colors:
            return Coloring(tuple(colors), rounds)
        colors = nxt
        rounds += 1


def cr_histories(g: LabelledGraph, rounds: int) -> list[tuple]:
    """Per-vertex refinement histories; equal histories across graphs mean
    joint Color Refinement would assign equal colors (after `rounds` rounds)."""
    hist: list[tuple] = [(g.labels[v],) for v in range(g.n)]
    for _ in range(rounds):
        hist = [hist[v] + (tuple(sorted(hist[w] for w in g.adjacency[v])),) for v in range(g.n)]
    return hist


def cr_equivalent(g: LabelledGraph, v: int, h: LabelledGraph, w: int) -> bool:
    """True iff joint Color Refinement on the disjoint union puts v and w in
    the same stable class."""
    if g.label_width != h.label_width:
        raise GraphFormatError("label widths differ")
    u = disjoint_union(g, h)
    coloring = color_refinement(u)
    return coloring.colors[v] == coloring.colors[g.n + w]


def enumerate_graphs(n: int, label_width: int = 0, cap: int = DEFAULT_ENUM_CAP) -> Iterator[LabelledGraph]:
    """Every labelled graph on vertex set {0..n-1} with the given label width,
    exactly once (no isomorphism reduction)."""
    if n > cap:
        raise CapExceeded(f"enumeration of graphs on {n} vertices exceeds cap {cap}")
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    label_rows = list(itertools.product((0, 1), repeat=label_width))
    for mask in range(1 << len(pairs)):
        edges = [pairs[i] for i in range(len(pairs)) if mask >> i & 1]
        for labs in itertools.product(label_rows, repeat=n):
            yield make_graph(n, edges, labs)


def count_graphs(n: int, label_width: int = 0) -> int:
    return (1 << (n * (n - 1) // 2)) * (1 << (n * label_width))


def random_graph(rng, n: int, label_width: int = 0, edge_prob: float = 0.5) -> LabelledGraph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < edge_prob]
    labels = [[rng.randrange(2) for _ in range(label_width)] for _ in range(n)]
    return make_graph(n, edges, labels)


# ---------------------------------------------------------------------------
# file formats (text, one document per file)


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_fraction(tok: str) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError) as e:
        raise GraphFormatError(f"bad rational {tok!r}: {e}") from None


def write_graph_text(g: LabelledGraph) -> str:
    lines = [f"graph n={g.n} labels={g.label_width}"]
    for u, v in sorted(g.edges):
        lines.append(f"edge {u} {v}")
    if g.label_width > 0:
        for v in range(g.n):
            bits = "".join(str(b) for b in g.labels[v])
            lines.append(f"label {v} {bits}")
    return "\n".join(lines) + "\n"


def read_graph_text(text: str) -> LabelledGraph:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("graph "):
        raise GraphFormatError("missing graph header line")
    header = dict(part.split("=") for part in lines[0].split()[1:])
    try:
        n = int(header["n"])
        width = int(header["labels"])
    except (KeyError, ValueError):
        raise GraphFormatError(f"bad graph header {lines[0]!r}") from None
    edges: list[tuple[int, int]] = []
    label_rows: dict[int, tuple[int, ...]] = {}
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "edge":
            if len(parts) != 3:
                raise GraphFormatError(f"bad edge line {ln!r}")
            u, v = int(parts[1]), int(parts[2])
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if not (u < v):
                raise GraphFormatError(f"edge line must have u < v: {ln!r}")
            if not (0 <= u and v < n):
                raise GraphFormatError(f"edge ({u},{v}) out of range")
            if (u, v) in edges:
                raise GraphFormatError(f"duplicate edge ({u},{v})")
            edges.append((u, v))
        elif parts[0] == "label":
            if len(parts) != 3:
                raise GraphFormatError(f"bad label line {ln!r}")
            v = int(parts[1])
            row = tuple(int(c) for c in parts[2])
            if len(row) != width:
                raise GraphFormatError(f"label row of vertex {v} has width {len(row)}, declared {width}")
            label_rows[v] = row
        else:
            raise GraphFormatError(f"unknown line {ln!r}")
    if width > 0:
        missing = [v for v in range(n) if v not in label_rows]
        if missing:
            raise GraphFormatError(f"missing label rows for vertices {missing}")
        labels = [label_rows[v] for v in range(n)]
    else:
        labels = [() for _ in range(n)]
    return make_graph(n, edges, labels)


def write_graph(g: LabelledGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_graph_text(g))


def read_graph(path) -> LabelledGraph:
    with open(path, encoding="utf-8") as f:
        return read_graph_text(f.read())


def write_signal_text(s: Signal) -> str:
    lines = [f"signal dim={s.dimension}"]
    for v, vec in enumerate(s.values):
        lines.append(" ".join([str(v)] + [format_fraction(x) for x in vec]))
    return "\n".join(lines) + "\n"


def read_signal_text(text: str) -> Signal:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("signal "):
        raise GraphFormatError("missing signal header line")
    try:
        dim = int(lines[0].split("=", 1)[1])
    except (IndexError, ValueError):
        raise GraphFormatError(f"bad signal header {lines[0]!r}") from None
    rows: dict[int, tuple[Fraction, ...]] = {}
    for ln in lines[1:]:
        parts = ln.split()
        v = int(parts[0])
        vec = tuple(parse_fraction(tok) for tok in parts[1:])
        if len(vec) != dim:
            raise GraphFormatError(f"signal row of vertex {v} has dimension {len(vec)}, declared {dim}")
        rows[v] = vec
    n = max(rows) + 1 if rows else 0
    missing = [v for v in range(n) if v not in rows]
    if missing:
        raise GraphFormatError(f"missing signal rows for vertices {missing}")
    return Signal(dim, tuple(rows[v] for v in range(n)))


def write_signal(s: Signal, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(write_signal_text(s))


def read_signal(path) -> Signal:
    with open(path, encoding="utf-8") as f:
        return read_signal_text(f.read())
