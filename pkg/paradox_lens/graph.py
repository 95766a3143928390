import numpy as np

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, TextIO

from .logger import logger
from .models import IngestionReport

__all__ = [
    "GraphError",
    "EdgeListParseError",
    "EmptyEdgeListError",
    "AsymmetricEdgeListError",
    "NodeOutOfRangeError",
    "Graph",
    "load_edge_list",
    "write_edge_list",
    "degree_of",
]


class GraphError(Exception):
    pass


class EdgeListParseError(GraphError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class EmptyEdgeListError(GraphError):
    def __init__(self):
        super().__init__("no edges")


class AsymmetricEdgeListError(GraphError):
    pass


class NodeOutOfRangeError(GraphError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """
    Immutable undirected simple graph in compressed sparse row form. The neighbors of node v are
    indices[indptr[v]:indptr[v + 1]], sorted ascending.
    """

    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, node_count: int, u: np.ndarray, v: np.ndarray) -> "Graph":
        """
        Builds a graph from undirected edges (u[i], v[i]). The caller guarantees the edge set is already simple: no
        self-loops and no pair listed twice in either orientation.
        """
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)

        rows = np.concatenate((u, v))
        cols = np.concatenate((v, u))
        order = np.lexsort((cols, rows))

        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=node_count), out=indptr[1:])

        return cls(indptr=_frozen(indptr), indices=_frozen(cols[order]))

    @property
    def node_count(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def edge_count(self) -> int:
        return self.indices.shape[0] // 2

    @cached_property
    def degree(self) -> np.ndarray:
        return _frozen(np.diff(self.indptr))

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < nbrs.shape[0] and nbrs[i] == v)

    def incidence_owner(self) -> np.ndarray:
        """Node owning each entry of ``indices``."""
        return np.repeat(np.arange(self.node_count, dtype=np.int64), self.degree)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Each undirected edge once, as (u, v) arrays with u < v, in lexicographic order."""
        owner = self.incidence_owner()
        mask = owner < self.indices
        return owner[mask], self.indices[mask]


def degree_of(g: Graph, v: int) -> int:
    if not (0 <= v < g.node_count):
        raise NodeOutOfRangeError(f"node {v} is out of range for a graph with {g.node_count} nodes")
    return int(g.indptr[v + 1] - g.indptr[v])


def _parse_lines(lines: Iterable[str]) -> tuple[int, list[int], list[int]]:
    raw_lines = 0
    src: list[int] = []
    dst: list[int] = []

    for raw_lines, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue

        tokens = stripped.split()
        if len(tokens) != 2:
            raise EdgeListParseError(raw_lines, f"expected 2 tokens, got {len(tokens)}")

        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(raw_lines, f"non-integer node id in {stripped!r}")

        src.append(a)
        dst.append(b)

    return raw_lines, src, dst


def load_edge_list(source: TextIO, symmetrize: bool = True) -> tuple[Graph, IngestionReport]:
    """
    Reads a whitespace-separated edge list (one edge per line, '#' comment lines) into a simple undirected graph.
    Node ids are relabeled to 0..n-1 in ascending order of the input ids.
    :param source: Text stream to read from.
    :param symmetrize: If True, a directed edge u->v becomes the undirected edge {u, v}. If False, every non-loop
      edge must also be listed in the reverse direction.
    :return: The graph and a report of the cleaning steps applied.
    """

    raw_lines, src, dst = _parse_lines(source)

    if not src:
        raise EmptyEdgeListError()

    parsed = len(src)
    ids, inverse = np.unique(np.array(src + dst, dtype=np.int64), return_inverse=True)
    n = ids.shape[0]
    u, v = inverse[:parsed].astype(np.int64), inverse[parsed:].astype(np.int64)

    loops = u == v
    u, v = u[~loops], v[~loops]

    if not symmetrize:
        forward = np.unique(u * n + v)
        backward = v * n + u
        if not np.all(np.isin(backward, forward)):
            bad = int(np.argmin(np.isin(backward, forward)))
            raise AsymmetricEdgeListError(
                f"edge {int(ids[u[bad]])} -> {int(ids[v[bad]])} has no reverse edge (symmetrization disabled)"
            )

    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keys = np.unique(lo * n + hi)
    lo, hi = keys // n, keys % n

    g = Graph.from_edges(n, lo, hi)

    report = IngestionReport(
        raw_lines=raw_lines,
        parsed_edges=parsed,
        dropped_self_loops=int(loops.sum()),
        deduplicated_edges=int(u.shape[0] - keys.shape[0]),
        relabeled_ids=not np.array_equal(ids, np.arange(n)),
        isolated_nodes=int(np.count_nonzero(g.degree == 0)),
        original_ids=tuple(ids.tolist()),
    )

    logger.info(
        f"Loaded edge list: {g.node_count} nodes, {g.edge_count} edges "
        f"({report.dropped_self_loops} self-loops dropped, {report.deduplicated_edges} duplicates collapsed, "
        f"{report.isolated_nodes} isolated nodes)"
    )

    return g, report


def write_edge_list(g: Graph, sink: TextIO, header: dict[str, str] | None = None) -> None:
    """
    Writes each undirected edge once as "u v" with u < v, preceded by '# key: value' metadata lines. Isolated nodes
    cannot be represented in this format and are not written.
    """
    for key, value in (header or {}).items():
        sink.write(f"# {key}: {value}\n")
    u, v = g.edges()
    sink.writelines(f"{a} {b}\n" for a, b in zip(u.tolist(), v.tolist()))
