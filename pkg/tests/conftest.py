import json

import numpy as np
import pytest

from tablegnn.graph import Column, LabelVocab, Table, build_graph


def make_graph(rng, n, k, table_id="t0", labeled=True):
    """Random complete column graph with n nodes and k classes."""
    names = [f"c{i}" for i in range(k)]
    vocab = LabelVocab(names)
    gold = rng.integers(k, size=n)
    table = Table(
        table_id,
        tuple(Column((f"v{u}",), names[g] if labeled else None) for u, g in enumerate(gold)),
    )
    return build_graph(table, rng.uniform(-1, 1, size=(n, k)), vocab)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def graph_factory(rng):
    def factory(n, k=3, table_id="t0", labeled=True):
        return make_graph(rng, n, k, table_id, labeled)

    return factory


@pytest.fixture
def toy_tables():
    """Ten small labeled tables whose columns are easy to tell apart."""
    pools = {
        "city": ("Paris", "Lyon", "Rome", "Oslo"),
        "year": ("1999", "2004", "2017", "1985"),
        "email": ("a@x.org", "b@y.com", "c@z.net", "d@w.io"),
    }
    tables = []
    for i in range(10):
        labels = ["city", "year"] if i % 2 else ["email", "city", "year"]
        columns = tuple(
            Column(tuple(pools[label][(i + j) % 4] for j in range(3)), label) for label in labels
        )
        tables.append(Table(f"toy-{i}", columns))
    return tables


@pytest.fixture
def toy_vocab(toy_tables):
    return LabelVocab.from_tables(toy_tables)


@pytest.fixture
def dataset_file(tmp_path, toy_tables):
    path = tmp_path / "tables.jsonl"
    write_jsonl(path, [t.to_record().model_dump() for t in toy_tables])
    return path
