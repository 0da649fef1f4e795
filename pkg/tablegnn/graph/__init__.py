from .column_graph import (
    ColumnGraph,
    GraphBatch,
    as_batch,
    batch_graphs,
    build_graph,
    build_graphs,
    iter_batches,
)
from .tables import Column, LabelVocab, Table, load_tables, save_tables

__all__ = [
    "Column",
    "ColumnGraph",
    "GraphBatch",
    "LabelVocab",
    "Table",
    "as_batch",
    "batch_graphs",
    "build_graph",
    "build_graphs",
    "iter_batches",
    "load_tables",
    "save_tables",
]
