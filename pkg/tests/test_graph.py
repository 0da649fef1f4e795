import json

import numpy as np
import pytest

from tablegnn.exceptions import DataFormatError, InvalidInputError, JoinError, VocabularyError
from tablegnn.graph import (
    Column,
    LabelVocab,
    Table,
    batch_graphs,
    build_graph,
    build_graphs,
    iter_batches,
    load_tables,
    save_tables,
)

from conftest import write_jsonl

VOCAB = LabelVocab(["a", "b"])


def table_of(n, table_id="t", labels=None):
    labels = labels or ["a"] * n
    return Table(table_id, tuple(Column((str(i),), labels[i]) for i in range(n)))


def test_vocab_bijection():
    vocab = LabelVocab(["city", "year", "email"])
    for i, name in enumerate(vocab.names):
        assert vocab.index(name) == i
        assert vocab.name(i) == name
    assert vocab.k == 3
    with pytest.raises(VocabularyError) as exc:
        vocab.index("country")
    assert exc.value.details["label"] == "country"


def test_vocab_rejects_duplicates_and_empty():
    with pytest.raises(InvalidInputError):
        LabelVocab(["a", "a"])
    with pytest.raises(InvalidInputError):
        LabelVocab([])


def test_vocab_from_tables_is_sorted(toy_tables):
    assert LabelVocab.from_tables(toy_tables).names == ("city", "email", "year")


def test_table_needs_a_column():
    with pytest.raises(InvalidInputError):
        Table("empty", ())


@pytest.mark.parametrize("n", [1, 2, 3, 6])
def test_graph_is_complete(n):
    graph = build_graph(table_of(n), np.zeros((n, 2)), VOCAB)
    assert graph.num_nodes == n
    for u in range(n):
        assert len(graph.neighbors[u]) == n - 1
        assert u not in graph.neighbors[u]
        for v in graph.neighbors[u]:
            assert u in graph.neighbors[v]


def test_single_column_graph_has_no_neighbors():
    graph = build_graph(table_of(1), [[0.3, -0.2]], VOCAB)
    assert graph.neighbors == ((),)
    assert not graph.adjacency().any()


def test_nodes_start_at_raw_logits():
    graph = build_graph(table_of(2, labels=["a", "b"]), [(1.0, 0.0), (0.0, 1.0)], VOCAB)
    assert graph.h0.tolist() == [[1.0, 0.0], [0.0, 1.0]]
    assert graph.gold.tolist() == [0, 1]


def test_build_graph_length_mismatches():
    with pytest.raises(InvalidInputError):
        build_graph(table_of(3), np.zeros((2, 2)), VOCAB)
    with pytest.raises(InvalidInputError):
        build_graph(table_of(2), np.zeros((2, 3)), VOCAB)


def test_build_graph_unknown_label_names_it():
    with pytest.raises(VocabularyError, match="zebra"):
        build_graph(table_of(2, labels=["a", "zebra"]), np.zeros((2, 2)), VOCAB)


def test_unlabeled_table_has_no_gold():
    table = Table("u", (Column(("x",)), Column(("y",))))
    assert build_graph(table, np.zeros((2, 2)), VOCAB).gold is None


def test_build_graphs_join_error_names_the_column():
    tables = [table_of(2, "t1")]
    with pytest.raises(JoinError) as exc:
        build_graphs(tables, {("t1", 0): [0.0, 1.0]}, VOCAB)
    assert exc.value.details == {"table_id": "t1", "column_index": 1}


def test_batch_is_block_diagonal(graph_factory):
    g1, g2 = graph_factory(2, k=2, table_id="x"), graph_factory(2, k=2, table_id="y")
    batch = batch_graphs([g1, g2])
    assert batch.num_nodes == 4
    expected = np.zeros((4, 4), dtype=bool)
    expected[0, 1] = expected[1, 0] = expected[2, 3] = expected[3, 2] = True
    assert (batch.adjacency == expected).all()
    assert batch.locate(3) == ("y", 1)
    assert [part.tolist() for part in batch.split(np.arange(4))] == [[0, 1], [2, 3]]


def test_batch_rejects_empty_and_mixed_k(graph_factory):
    with pytest.raises(InvalidInputError):
        batch_graphs([])
    with pytest.raises(InvalidInputError):
        batch_graphs([graph_factory(2, k=2), graph_factory(2, k=3)])


def test_iter_batches_covers_every_graph_once(graph_factory):
    graphs = [graph_factory(2, table_id=f"t{i}") for i in range(7)]
    batches = list(iter_batches(graphs, 3, np.random.default_rng(0)))
    assert [len(b.graphs) for b in batches] == [3, 3, 1]
    ids = sorted(g.table_id for b in batches for g in b.graphs)
    assert ids == sorted(g.table_id for g in graphs)


def test_dataset_round_trip(tmp_path, toy_tables):
    path = tmp_path / "data.jsonl"
    assert save_tables(toy_tables, path) == len(toy_tables)
    assert load_tables(path) == toy_tables


def test_load_tables_cites_line_number(tmp_path):
    path = write_jsonl(
        tmp_path / "bad.jsonl",
        [
            {"table_id": "t1", "columns": [{"values": ["x"], "label": "a"}]},
            {"table_id": "t2", "columns": []},
        ],
    )
    with pytest.raises(DataFormatError) as exc:
        load_tables(path)
    assert exc.value.details["line"] == 2


def test_load_tables_rejects_duplicate_ids_and_bad_json(tmp_path):
    record = {"table_id": "t1", "columns": [{"values": ["x"], "label": None}]}
    with pytest.raises(DataFormatError) as exc:
        load_tables(write_jsonl(tmp_path / "dup.jsonl", [record, record]))
    assert exc.value.details["line"] == 2

    path = tmp_path / "broken.jsonl"
    path.write_text(json.dumps(record) + "\n{not json\n", encoding="utf-8")
    with pytest.raises(DataFormatError) as exc:
        load_tables(path)
    assert exc.value.details["line"] == 2
