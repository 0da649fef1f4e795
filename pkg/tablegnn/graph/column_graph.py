"""
Complete column graphs and their disjoint-union batches.

Every table becomes a graph with one node per column and an edge between
each pair of columns. Self-loops are not stored; layers add the self term
where their update rule needs it.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError, JoinError
from .tables import LabelVocab, Table


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ColumnGraph:
    table_id: str
    neighbors: tuple[tuple[int, ...], ...]
    h0: np.ndarray
    gold: np.ndarray | None = None

    @property
    def num_nodes(self) -> int:
        return len(self.neighbors)

    @property
    def k(self) -> int:
        return self.h0.shape[1]

    def closed_neighborhood(self, u: int) -> tuple[int, ...]:
        """``u`` followed by N(u)."""
        return (u, *self.neighbors[u])

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.num_nodes, self.num_nodes), dtype=bool)
        for u, nbrs in enumerate(self.neighbors):
            adj[u, list(nbrs)] = True
        return adj


def build_graph(
    table: Table,
    logits: Sequence[Sequence[float]] | np.ndarray,
    vocab: LabelVocab,
) -> ColumnGraph:
    """Complete graph over the table's columns, nodes initialized to raw logits."""
    n = table.num_columns
    h0 = np.array(logits, dtype=np.float64)
    if h0.ndim != 2 or h0.shape[0] != n:
        raise InvalidInputError(
            f"Table {table.table_id!r} has {n} columns but {len(logits)} logits vectors",
            details={"table_id": table.table_id, "columns": n, "logits": len(logits)},
        )
    if h0.shape[1] != vocab.k:
        raise InvalidInputError(
            f"Logits width {h0.shape[1]} does not match vocabulary size {vocab.k}",
            details={"table_id": table.table_id, "k": vocab.k, "width": int(h0.shape[1])},
        )
    if not np.all(np.isfinite(h0)):
        raise InvalidInputError("Non-finite logits", details={"table_id": table.table_id})

    neighbors = tuple(tuple(v for v in range(n) if v != u) for u in range(n))

    gold = None
    if table.is_fully_labeled():
        gold = _frozen(np.array([vocab.index(c.gold_label) for c in table.columns], dtype=np.int64))
    else:
        for c in table.columns:
            if c.gold_label is not None:
                vocab.index(c.gold_label)

    return ColumnGraph(table.table_id, neighbors, _frozen(h0), gold)


def build_graphs(
    tables: Sequence[Table],
    logits_map: Mapping[tuple[str, int], Sequence[float]],
    vocab: LabelVocab,
    require_labels: bool = False,
) -> list[ColumnGraph]:
    """Join tables with per-column logits and build one graph per table."""
    graphs = []
    for table in tables:
        rows = []
        for idx in range(table.num_columns):
            key = (table.table_id, idx)
            if key not in logits_map:
                raise JoinError(
                    f"No logits for table {table.table_id!r} column {idx}",
                    details={"table_id": table.table_id, "column_index": idx},
                )
            rows.append(logits_map[key])
        graph = build_graph(table, rows, vocab)
        if require_labels and graph.gold is None:
            raise InvalidInputError(
                f"Table {table.table_id!r} has unlabeled columns",
                details={"table_id": table.table_id},
            )
        graphs.append(graph)
    return graphs


@dataclass(frozen=True, eq=False)
class GraphBatch:
    """Disjoint union of column graphs with global node numbering."""

    graphs: tuple[ColumnGraph, ...]
    offsets: tuple[int, ...]
    h0: np.ndarray
    adjacency: np.ndarray
    gold: np.ndarray | None

    @property
    def num_nodes(self) -> int:
        return self.offsets[-1]

    @property
    def k(self) -> int:
        return self.h0.shape[1]

    def node_slice(self, graph_index: int) -> slice:
        return slice(self.offsets[graph_index], self.offsets[graph_index + 1])

    def split(self, node_values: np.ndarray) -> list[np.ndarray]:
        """Route per-node rows back to their graphs."""
        return [node_values[self.node_slice(i)] for i in range(len(self.graphs))]

    def locate(self, node: int) -> tuple[str, int]:
        """(table_id, column_index) of a global node index."""
        graph_index = int(np.searchsorted(self.offsets, node, side="right")) - 1
        return self.graphs[graph_index].table_id, node - self.offsets[graph_index]


def batch_graphs(graphs: Sequence[ColumnGraph]) -> GraphBatch:
    if not graphs:
        raise InvalidInputError("Cannot batch an empty list of graphs")
    ks = {g.k for g in graphs}
    if len(ks) != 1:
        raise InvalidInputError("Graphs in a batch must share k", details={"k_values": sorted(ks)})

    offsets = [0]
    for g in graphs:
        offsets.append(offsets[-1] + g.num_nodes)
    total = offsets[-1]

    adjacency = np.zeros((total, total), dtype=bool)
    for g, start in zip(graphs, offsets):
        for u, nbrs in enumerate(g.neighbors):
            adjacency[start + u, [start + v for v in nbrs]] = True

    gold = None
    if all(g.gold is not None for g in graphs):
        gold = _frozen(np.concatenate([g.gold for g in graphs]))

    return GraphBatch(
        graphs=tuple(graphs),
        offsets=tuple(offsets),
        h0=_frozen(np.concatenate([g.h0 for g in graphs], axis=0)),
        adjacency=_frozen(adjacency),
        gold=gold,
    )


def as_batch(graph: ColumnGraph | GraphBatch) -> GraphBatch:
    return graph if isinstance(graph, GraphBatch) else batch_graphs([graph])


def iter_batches(
    graphs: Sequence[ColumnGraph],
    batch_size: int,
    rng: np.random.Generator | None = None,
) -> Iterator[GraphBatch]:
    """Fixed-size batches, shuffled by ``rng`` when given."""
    if batch_size < 1:
        raise InvalidInputError("batch_size must be positive", details={"batch_size": batch_size})
    order = rng.permutation(len(graphs)) if rng is not None else np.arange(len(graphs))
    for start in range(0, len(order), batch_size):
        yield batch_graphs([graphs[i] for i in order[start : start + batch_size]])
