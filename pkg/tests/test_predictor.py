import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from tablegnn.exceptions import (
    ConfigurationError,
    DataFormatError,
    InvalidInputError,
    JoinError,
    TrainingError,
)
from tablegnn.graph import Column, LabelVocab, Table
from tablegnn.predictor import (
    PREDICTORS,
    BaselineConfig,
    HashedLinearPredictor,
    LogitsFilePredictor,
    baseline_fit,
    create_predictor,
    featurize,
    load_logits,
    predict_logits,
    save_logits,
    stacking_logits,
)

from conftest import write_jsonl

SMALL = BaselineConfig(feature_width=64, epochs=150, learning_rate=0.05)


def test_featurize_layout():
    values = ["12", "3,400", "x"]
    psi = featurize(values, width=32)
    assert psi.shape == (32,)
    assert np.linalg.norm(psi[:24]) == pytest.approx(1.0)
    assert psi[25] == pytest.approx(2 / 3)  # numeric cells
    assert psi[28] == pytest.approx(1.0)  # all distinct
    assert psi[31] == pytest.approx(np.log1p(3))
    assert np.array_equal(psi, featurize(list(values), width=32))


def test_featurize_empty_and_narrow():
    assert not featurize([], width=16).any()
    with pytest.raises(InvalidInputError):
        featurize(["a"], width=8)


def test_baseline_learns_toy_columns(toy_tables, toy_vocab):
    model = baseline_fit(toy_tables, toy_vocab, SMALL)
    correct = total = 0
    for table in toy_tables:
        for column in table.columns:
            predicted = int(np.argmax(predict_logits(model, column.values)))
            correct += predicted == toy_vocab.index(column.gold_label)
            total += 1
    assert correct / total >= 0.9


def test_baseline_with_zero_epochs_is_uniform(toy_tables, toy_vocab):
    model = baseline_fit(toy_tables, toy_vocab, BaselineConfig(feature_width=32, epochs=0))
    assert not model.predict_table(toy_tables[0]).any()


def test_baseline_strict_missing_class(toy_tables):
    vocab = LabelVocab(["city", "email", "year", "zipcode"])
    with pytest.raises(TrainingError, match="zipcode"):
        HashedLinearPredictor(vocab, SMALL).fit(toy_tables)
    HashedLinearPredictor(vocab, BaselineConfig(feature_width=32, epochs=2)).fit(toy_tables, strict=False)


def test_baseline_save_load(tmp_path, toy_tables, toy_vocab):
    model = baseline_fit(toy_tables, toy_vocab, BaselineConfig(feature_width=32, epochs=20))
    loaded = HashedLinearPredictor.load(model.save(tmp_path / "base.json"))
    assert loaded.vocab == toy_vocab
    assert loaded.config == model.config
    assert np.array_equal(loaded.predict_table(toy_tables[3]), model.predict_table(toy_tables[3]))


def test_baseline_load_errors(tmp_path):
    with pytest.raises(DataFormatError):
        HashedLinearPredictor.load(tmp_path / "missing.json")
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"kind": "other", "format_version": 1}), encoding="utf-8")
    with pytest.raises(DataFormatError):
        HashedLinearPredictor.load(wrong)
    wrong.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(DataFormatError):
        HashedLinearPredictor.load(wrong)


def test_logits_file_round_trip(tmp_path, toy_vocab):
    logits = {("t1", 0): [0.5, -1.0, 2.0], ("t1", 1): [0.0, 0.0, 0.0]}
    path = tmp_path / "logits.jsonl"
    assert save_logits(logits, path) == 2
    loaded = load_logits(path, toy_vocab)
    assert loaded.keys() == logits.keys()
    assert loaded[("t1", 0)].tolist() == [0.5, -1.0, 2.0]


@pytest.mark.parametrize(
    "records,line",
    [
        ([{"table_id": "t", "column_index": 0, "logits": [1.0, 2.0]}], 1),
        (
            [
                {"table_id": "t", "column_index": 0, "logits": [1.0, 2.0, 3.0]},
                {"table_id": "t", "column_index": 0, "logits": [1.0, 2.0, 3.0]},
            ],
            2,
        ),
        ([{"table_id": "t", "column_index": -1, "logits": [1.0, 2.0, 3.0]}], 1),
        ([{"table_id": "t", "logits": [1.0, 2.0, 3.0]}], 1),
    ],
    ids=["wrong-k", "duplicate", "negative-index", "missing-field"],
)
def test_logits_file_errors_cite_line(tmp_path, toy_vocab, records, line):
    path = write_jsonl(tmp_path / "bad.jsonl", records)
    with pytest.raises(DataFormatError) as exc:
        load_logits(path, toy_vocab)
    assert exc.value.details["line"] == line


def test_logits_file_predictor_join_error(toy_tables, toy_vocab):
    predictor = LogitsFilePredictor(toy_vocab, logits={("toy-0", 0): np.zeros(3)})
    assert predictor.predict_column(toy_tables[0], 0).tolist() == [0.0, 0.0, 0.0]
    with pytest.raises(JoinError):
        predictor.predict_table(toy_tables[0])


def test_registry(toy_vocab):
    assert {"baseline", "logits-file"} <= set(PREDICTORS)
    assert isinstance(create_predictor("baseline", toy_vocab), HashedLinearPredictor)
    with pytest.raises(ConfigurationError):
        create_predictor("oracle", toy_vocab)


def test_in_sample_stacking(toy_tables, toy_vocab):
    factory = lambda: HashedLinearPredictor(toy_vocab, BaselineConfig(feature_width=32, epochs=20))  # noqa: E731
    train_logits, other_logits, predictor = stacking_logits(factory, toy_tables[:8], toy_tables[8:])
    assert len(train_logits) == sum(t.num_columns for t in toy_tables[:8])
    assert len(other_logits) == sum(t.num_columns for t in toy_tables[8:])
    for key, row in train_logits.items():
        table = next(t for t in toy_tables if t.table_id == key[0])
        assert np.array_equal(row, predictor.predict_column(table, key[1]))


def test_out_of_fold_stacking(toy_tables, toy_vocab):
    factory = lambda: HashedLinearPredictor(toy_vocab, BaselineConfig(feature_width=32, epochs=20))  # noqa: E731
    train, test = toy_tables[:8], toy_tables[8:]
    oof, other, predictor = stacking_logits(factory, train, test, mode="out_of_fold", folds=4, seed=1)
    in_sample, other_in_sample, _ = stacking_logits(factory, train, test)
    assert list(oof) == list(in_sample)
    for key in other:
        assert np.array_equal(other[key], other_in_sample[key])
    assert any(not np.array_equal(oof[key], in_sample[key]) for key in oof)

    again, _, _ = stacking_logits(factory, train, test, mode="out_of_fold", folds=4, seed=1)
    assert all(np.array_equal(again[key], oof[key]) for key in oof)


def test_stacking_argument_errors(toy_tables, toy_vocab):
    factory = lambda: HashedLinearPredictor(toy_vocab, BaselineConfig(feature_width=32, epochs=1))  # noqa: E731
    with pytest.raises(InvalidInputError):
        stacking_logits(factory, toy_tables[:3], toy_tables[3:], mode="out_of_fold", folds=5)
    with pytest.raises(InvalidInputError):
        stacking_logits(factory, toy_tables, [], mode="bagged")


def test_predict_logits_bias_only():
    model = HashedLinearPredictor(LabelVocab(["a", "b"]), BaselineConfig(feature_width=16))
    model.bias = np.array([1.0, 2.0])
    for values in (["Paris"], ["1", "2", "3"], []):
        assert predict_logits(model, values).tolist() == [1.0, 2.0]


def _random_model(rng, width=32, k=3):
    model = HashedLinearPredictor(LabelVocab([f"c{i}" for i in range(k)]), BaselineConfig(feature_width=width))
    model.weights = rng.normal(size=(width, k))
    model.bias = rng.normal(size=k)
    return model


def test_predict_logits_translation_consistent(rng):
    model = _random_model(rng)
    before = predict_logits(model, ["alpha", "beta"])
    model.bias = model.bias + 2.5
    assert_allclose(predict_logits(model, ["alpha", "beta"]), before + 2.5, atol=1e-12)


def test_predict_logits_matches_scalar_loop(rng):
    model = _random_model(rng)
    values = ["Oslo", "1,200", "x y"]
    psi = featurize(values, 32)
    expected = [
        sum(psi[i] * model.weights[i, c] for i in range(32)) + model.bias[c] for c in range(3)
    ]
    assert np.max(np.abs(predict_logits(model, values) - expected)) < 1e-12


def test_bucket_permutation_keeps_argmax(rng):
    model = _random_model(rng)
    buckets = 32 - 8
    perm = np.concatenate([rng.permutation(buckets), np.arange(buckets, 32)])
    for values in (["Paris", "Rome"], ["1999", "2004"], ["a@x.org"]):
        psi = featurize(values, 32)
        assert np.linalg.norm(psi[perm][:buckets]) == pytest.approx(1.0, abs=1e-12)
        permuted = psi[perm] @ model.weights[perm] + model.bias
        assert int(np.argmax(permuted)) == int(np.argmax(predict_logits(model, values)))


def test_baseline_fit_is_deterministic(toy_tables, toy_vocab):
    config = BaselineConfig(feature_width=32, epochs=30)
    first = baseline_fit(toy_tables, toy_vocab, config)
    second = baseline_fit(toy_tables, toy_vocab, config)
    assert first.weights.tobytes() == second.weights.tobytes()
    assert first.bias.tobytes() == second.bias.tobytes()


def test_baseline_separates_two_classes():
    tables = [
        Table(
            f"sep-{i}",
            (
                Column(tuple(str(100 * i + j) for j in range(4)), "number"),
                Column(tuple("abcdefgh"[(i + j) % 8] * 3 for j in range(4)), "word"),
            ),
        )
        for i in range(8)
    ]
    vocab = LabelVocab(["number", "word"])
    model = baseline_fit(tables, vocab, SMALL)
    predicted = [
        vocab.name(int(np.argmax(predict_logits(model, column.values))))
        for table in tables
        for column in table.columns
    ]
    gold = [column.gold_label for table in tables for column in table.columns]
    assert predicted == gold
