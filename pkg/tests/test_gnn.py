import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from tablegnn.exceptions import DataFormatError, InvalidInputError
from tablegnn.gnn import (
    GnnConfig,
    GnnFamily,
    GnnModel,
    GruParams,
    gat_attention,
    gat_layer,
    gcn_layer,
    gcn_propagation,
    ggnn_layer,
    init_params,
    load_model,
    model_forward,
    param_shapes,
    predict,
    save_model,
)
from tablegnn.graph import Column, LabelVocab, Table, batch_graphs, build_graph
from tablegnn.numerics import (
    GradTape,
    Tensor,
    finite_diff_grad,
    identity,
    max_relative_error,
    relu,
)
from tablegnn.training import nll_loss

from conftest import make_graph


def _relu(x):
    return np.maximum(x, 0.0)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gcn_oracle(h, neighbors, W, act):
    n, out_dim = h.shape[0], W.shape[0]
    degree = [len(neighbors[u]) + 1 for u in range(n)]
    out = np.zeros((n, out_dim))
    for u in range(n):
        for v in (u, *neighbors[u]):
            norm = np.sqrt(degree[u] * degree[v])
            for i in range(out_dim):
                for j in range(h.shape[1]):
                    out[u, i] += W[i, j] * h[v, j] / norm
    return act(out)


def ggnn_oracle(h, neighbors, W, gru):
    n, k = h.shape
    out = np.zeros_like(h)
    for u in range(n):
        m = np.zeros(k)
        for v in neighbors[u]:
            for i in range(k):
                m[i] += sum(W[i, j] * h[v, j] for j in range(k))
        hu = h[u]
        z = np.array([_sigmoid(sum(gru["W_z"][i, j] * m[j] + gru["U_z"][i, j] * hu[j] for j in range(k)) + gru["b_z"][i]) for i in range(k)])
        r = np.array([_sigmoid(sum(gru["W_r"][i, j] * m[j] + gru["U_r"][i, j] * hu[j] for j in range(k)) + gru["b_r"][i]) for i in range(k)])
        cand = np.array([np.tanh(sum(gru["W_h"][i, j] * m[j] + gru["U_h"][i, j] * r[j] * hu[j] for j in range(k)) + gru["b_h"][i]) for i in range(k)])
        out[u] = (1 - z) * hu + z * cand
    return out


def attention_oracle(h, neighbors, u, W, a):
    width = W.shape[0]
    projected = [W @ h[v] for v in range(h.shape[0])]
    closed = (u, *neighbors[u])
    scores = []
    for v in closed:
        s = sum(a[i] * projected[u][i] for i in range(width))
        s += sum(a[width + i] * projected[v][i] for i in range(width))
        scores.append(max(s, 0.0))
    scores = np.array(scores)
    e = np.exp(scores - scores.max())
    return closed, e / e.sum(), projected


def gat_oracle(h, neighbors, Ws, As, act, is_final):
    heads = []
    for W, a in zip(Ws, As):
        out = np.zeros((h.shape[0], W.shape[0]))
        for u in range(h.shape[0]):
            closed, alpha, projected = attention_oracle(h, neighbors, u, W, a)
            for weight, v in zip(alpha, closed):
                out[u] += weight * projected[v]
        heads.append(out)
    if is_final:
        return act(sum(heads) / len(heads))
    return np.concatenate([act(x) for x in heads], axis=1)


def random_gru(rng, k):
    return {
        name: rng.uniform(-1, 1, size=(k,) if name.startswith("b_") else (k, k))
        for name in ("W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h")
    }


# layer oracles


def test_gcn_two_nodes_identity_averages():
    graph = make_graph(np.random.default_rng(0), 2, 2)
    out = gcn_layer(Tensor(graph.h0), graph.adjacency(), Tensor(np.eye(2)), identity).data
    mean = (graph.h0[0] + graph.h0[1]) / 2
    assert_allclose(out, [mean, mean], atol=1e-15)


def test_gcn_single_node_identity_is_identity():
    graph = make_graph(np.random.default_rng(0), 1, 3)
    out = gcn_layer(Tensor(graph.h0), graph.adjacency(), Tensor(np.eye(3))).data
    assert_allclose(out, graph.h0, atol=0)


def test_gcn_matches_scalar_loops(rng):
    for trial in range(100):
        n, k, out_dim = int(rng.integers(1, 7)), 3, int(rng.integers(1, 5))
        graph = make_graph(rng, n, k)
        W = rng.uniform(-1, 1, size=(out_dim, k))
        act = relu if trial % 2 else identity
        out = gcn_layer(Tensor(graph.h0), graph.adjacency(), Tensor(W), act).data
        expected = gcn_oracle(graph.h0, graph.neighbors, W, _relu if trial % 2 else (lambda x: x))
        assert np.max(np.abs(out - expected)) < 1e-12


def test_gcn_identity_rows_are_convex_combinations(rng):
    for n in range(1, 7):
        graph = make_graph(rng, n, 2)
        P = gcn_propagation(graph.adjacency())
        assert (P >= 0).all()
        assert (P.sum(axis=1) <= 1 + 1e-12).all()


def test_ggnn_isolated_node_with_zero_gru_halves_state():
    graph = make_graph(np.random.default_rng(3), 1, 3)
    zeros = {name: Tensor(np.zeros((3,) if name.startswith("b_") else (3, 3))) for name in GruParams.__dataclass_fields__}
    out = ggnn_layer(Tensor(graph.h0), graph.adjacency(), Tensor(np.eye(3)), GruParams(**zeros)).data
    assert_allclose(out, 0.5 * graph.h0, atol=1e-15)


def test_ggnn_zero_states_stay_zero(rng):
    gru = random_gru(rng, 3)
    for name in ("b_z", "b_r", "b_h"):
        gru[name] = np.zeros(3)
    out = ggnn_layer(
        Tensor(np.zeros((4, 3))),
        make_graph(rng, 4, 3).adjacency(),
        Tensor(rng.uniform(-1, 1, size=(3, 3))),
        GruParams(**{n: Tensor(v) for n, v in gru.items()}),
    ).data
    assert (out == 0).all()


def test_ggnn_matches_scalar_loops(rng):
    for _ in range(100):
        n, k = int(rng.integers(1, 7)), 3
        graph = make_graph(rng, n, k)
        W = rng.uniform(-1, 1, size=(k, k))
        gru = random_gru(rng, k)
        out = ggnn_layer(
            Tensor(graph.h0), graph.adjacency(), Tensor(W), GruParams(**{n: Tensor(v) for n, v in gru.items()})
        ).data
        assert np.max(np.abs(out - ggnn_oracle(graph.h0, graph.neighbors, W, gru))) < 1e-12


def test_ggnn_rejects_non_square_weight(rng):
    graph = make_graph(rng, 2, 3)
    gru = GruParams(**{n: Tensor(v) for n, v in random_gru(rng, 3).items()})
    with pytest.raises(InvalidInputError):
        ggnn_layer(Tensor(graph.h0), graph.adjacency(), Tensor(np.ones((2, 3))), gru)


def test_attention_uniform_cases(rng):
    graph = make_graph(rng, 4, 3)
    same = np.tile(rng.uniform(-1, 1, size=3), (4, 1))
    W = Tensor(rng.uniform(-1, 1, size=(3, 3)))
    a = Tensor(rng.uniform(-1, 1, size=6))
    assert_allclose(gat_attention(Tensor(same), graph, 0, W, a), [0.25] * 4, atol=1e-12)
    weights = gat_attention(Tensor(graph.h0), graph, 2, W, Tensor(np.zeros(6)))
    assert_allclose(weights, [0.25] * 4, atol=1e-12)


def test_attention_matches_scalar_loops(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        graph = make_graph(rng, n, 3)
        W = rng.uniform(-1, 1, size=(3, 3))
        a = rng.uniform(-1, 1, size=6)
        for u in range(n):
            weights = gat_attention(Tensor(graph.h0), graph, u, Tensor(W), Tensor(a))
            _, expected, _ = attention_oracle(graph.h0, graph.neighbors, u, W, a)
            assert np.max(np.abs(weights - expected)) < 1e-12
            assert abs(weights.sum() - 1.0) < 1e-12
            assert (weights >= 0).all()


def test_attention_vector_length_checked(rng):
    graph = make_graph(rng, 2, 3)
    with pytest.raises(InvalidInputError):
        gat_attention(Tensor(graph.h0), graph, 0, Tensor(np.eye(3)), Tensor(np.zeros(5)))


def test_gat_uniform_single_head_averages():
    graph = make_graph(np.random.default_rng(5), 2, 2)
    out = gat_layer(
        Tensor(graph.h0), graph.adjacency(), [Tensor(np.eye(2))], [Tensor(np.zeros(4))], identity, is_final=True
    ).data
    mean = (graph.h0[0] + graph.h0[1]) / 2
    assert_allclose(out, [mean, mean], atol=1e-15)


def test_gat_identical_heads_concatenate(rng):
    graph = make_graph(rng, 3, 3)
    W = Tensor(rng.uniform(-1, 1, size=(3, 3)))
    a = Tensor(rng.uniform(-1, 1, size=6))
    single = gat_layer(Tensor(graph.h0), graph.adjacency(), [W], [a], relu).data
    double = gat_layer(Tensor(graph.h0), graph.adjacency(), [W, W], [a, a], relu).data
    assert double.shape == (3, 6)
    assert_allclose(double, np.concatenate([single, single], axis=1), atol=0)


@pytest.mark.parametrize("is_final", [False, True])
def test_gat_layer_matches_scalar_loops(rng, is_final):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        graph = make_graph(rng, n, 3)
        Ws = [rng.uniform(-1, 1, size=(3, 3)) for _ in range(4)]
        As = [rng.uniform(-1, 1, size=6) for _ in range(4)]
        out = gat_layer(
            Tensor(graph.h0),
            graph.adjacency(),
            [Tensor(W) for W in Ws],
            [Tensor(a) for a in As],
            identity if is_final else relu,
            is_final=is_final,
        ).data
        expected = gat_oracle(graph.h0, graph.neighbors, Ws, As, (lambda x: x) if is_final else _relu, is_final)
        assert np.max(np.abs(out - expected)) < 1e-12


# model


CONFIGS = [
    GnnConfig(family="gcn", steps=2),
    GnnConfig(family="ggnn", steps=2),
    GnnConfig(family="ggnn", steps=2, share_weights=True),
    GnnConfig(family="gat", steps=2, heads=1),
    GnnConfig(family="gat", steps=2, heads=4),
]


def test_config_rules():
    with pytest.raises(ValidationError):
        GnnConfig(family="gcn", steps=2, heads=2)
    with pytest.raises(ValidationError):
        GnnConfig(family="gat", steps=0)
    with pytest.raises(ValidationError):
        GnnConfig(family="gat", steps=1, share_weights=True)
    assert GnnConfig(family="gat", steps=2, heads=4).name == "gat-S2-K4"
    assert GnnConfig(family="ggnn", steps=3, hidden_dim=7).width(5) == 5


@pytest.mark.parametrize(
    "family,steps,heads",
    [(GnnFamily.GAT, 2, 4), (GnnFamily.GGNN, 3, 1), (GnnFamily.GCN, 2, 1)],
)
def test_presets(family, steps, heads):
    config = GnnConfig.preset(family)
    assert (config.steps, config.heads, config.activation) == (steps, heads, "relu")


def test_param_shapes_follow_widths():
    shapes = param_shapes(GnnConfig(family="gat", steps=2, heads=3, hidden_dim=5), k=4)
    assert shapes["gat.0.0.W"] == (5, 4)
    assert shapes["gat.0.2.a"] == (10,)
    assert shapes["gat.1.0.W"] == (4, 15)
    assert shapes["gat.1.1.a"] == (8,)
    shared = param_shapes(GnnConfig(family="ggnn", steps=3, share_weights=True), k=4)
    assert all(name.startswith("ggnn.shared.") for name in shared)
    assert len(param_shapes(GnnConfig(family="ggnn", steps=3), k=4)) == 3 * len(shared)


def test_init_params_deterministic_and_bounded():
    config = GnnConfig(family="gat", steps=2, heads=2)
    first, second = init_params(config, 4, seed=7), init_params(config, 4, seed=7)
    other = init_params(config, 4, seed=8)
    for name, p in first.items():
        assert np.array_equal(p.data, second[name].data)
        fan_out, fan_in = p.shape if p.ndim == 2 else (1, p.shape[0])
        assert np.abs(p.data).max() <= np.sqrt(6.0 / (fan_in + fan_out))
    assert any(not np.array_equal(p.data, other[n].data) for n, p in first.items())

    ggnn = init_params(GnnConfig(family="ggnn", steps=1), 3, seed=0)
    assert not ggnn["ggnn.0.b_z"].data.any()


def test_single_step_gcn_identity_returns_input():
    graph = make_graph(np.random.default_rng(9), 1, 3)
    out = model_forward(graph, {"gcn.0.W": Tensor(np.eye(3))}, GnnConfig(family="gcn", steps=1)).data
    assert_allclose(out, graph.h0, atol=0)


def test_forward_rejects_mismatched_params(rng):
    graph = make_graph(rng, 3, 3)
    with pytest.raises(InvalidInputError):
        model_forward(graph, {"gcn.0.W": Tensor(np.eye(2))}, GnnConfig(family="gcn", steps=1))
    with pytest.raises(InvalidInputError):
        model_forward(graph, {}, GnnConfig(family="gcn", steps=1))


@pytest.mark.parametrize("config", CONFIGS, ids=lambda c: c.name)
def test_forward_shape(config, rng):
    graphs = [make_graph(rng, n, 3, f"t{n}") for n in (1, 2, 5)]
    out = model_forward(batch_graphs(graphs), init_params(config, 3), config)
    assert out.shape == (8, 3)


def test_two_step_gat_is_composition_of_layers(rng):
    config = GnnConfig(family="gat", steps=2, heads=2)
    graph = make_graph(rng, 3, 3)
    params = init_params(config, 3, seed=1)
    adj = graph.adjacency()
    hidden = gat_layer(
        Tensor(graph.h0), adj, [params["gat.0.0.W"], params["gat.0.1.W"]], [params["gat.0.0.a"], params["gat.0.1.a"]], relu
    )
    final = gat_layer(
        hidden, adj, [params["gat.1.0.W"], params["gat.1.1.W"]], [params["gat.1.0.a"], params["gat.1.1.a"]], identity, is_final=True
    )
    assert_allclose(model_forward(graph, params, config).data, final.data, atol=0)


@pytest.mark.parametrize("config", CONFIGS, ids=lambda c: c.name)
def test_permutation_equivariance(config, rng):
    names = ["c0", "c1", "c2"]
    vocab = LabelVocab(names)
    logits = rng.uniform(-1, 1, size=(5, 3))
    table = Table("p", tuple(Column((str(i),), names[i % 3]) for i in range(5)))
    params = init_params(config, 3, seed=3)
    out = model_forward(build_graph(table, logits, vocab), params, config).data

    perm = rng.permutation(5)
    permuted = Table("p", tuple(table.columns[i] for i in perm))
    out_perm = model_forward(build_graph(permuted, logits[perm], vocab), params, config).data
    assert_allclose(out_perm, out[perm], rtol=0, atol=1e-12)


@pytest.mark.parametrize("config", CONFIGS, ids=lambda c: c.name)
def test_batching_matches_per_graph_forward(config, rng):
    graphs = [make_graph(rng, n, 3, f"t{i}") for i, n in enumerate((1, 3, 4, 2))]
    params = init_params(config, 3, seed=5)
    batch = batch_graphs(graphs)
    batched = model_forward(batch, params, config).data
    for graph, part in zip(graphs, batch.split(batched)):
        assert np.max(np.abs(part - model_forward(graph, params, config).data)) < 1e-10
        single = model_forward(batch_graphs([graph]), params, config).data
        assert np.max(np.abs(single - model_forward(graph, params, config).data)) < 1e-12

    loss_batched = nll_loss(model_forward(batch, params, config), batch.gold).item()
    loss_parts = sum(nll_loss(model_forward(g, params, config), g.gold).item() for g in graphs)
    assert abs(loss_batched - loss_parts) < 1e-10


@pytest.mark.parametrize("config", CONFIGS, ids=lambda c: c.name)
def test_no_cross_graph_influence(config, rng):
    a, b = make_graph(rng, 3, 3, "a"), make_graph(rng, 2, 3, "b")
    params = init_params(config, 3, seed=2)
    out = model_forward(batch_graphs([a, b]), params, config).data

    perturbed = build_graph(
        Table("a", tuple(Column(("x",), "c0") for _ in range(3))),
        a.h0 + rng.normal(size=a.h0.shape),
        LabelVocab(["c0", "c1", "c2"]),
    )
    out2 = model_forward(batch_graphs([perturbed, b]), params, config).data
    assert np.array_equal(out[3:], out2[3:])


GRAD_CONFIGS = [
    GnnConfig(family="gcn", steps=2),
    GnnConfig(family="ggnn", steps=2),
    GnnConfig(family="gat", steps=2, heads=1),
    GnnConfig(family="gat", steps=2, heads=4),
]


@pytest.mark.parametrize("config", GRAD_CONFIGS, ids=lambda c: c.name)
def test_model_gradients_match_finite_differences(config):
    rng = np.random.default_rng(42)
    for trial in range(20):
        graph = make_graph(rng, 4, 3)
        params = init_params(config, 3, seed=trial)
        with GradTape() as tape:
            loss = nll_loss(model_forward(graph, params, config), graph.gold)
        analytic = tape.gradient(loss, params)

        def loss_fn(arrays):
            tensors = {name: Tensor(v) for name, v in arrays.items()}
            return nll_loss(model_forward(graph, tensors, config), graph.gold).item()

        numeric = finite_diff_grad(loss_fn, {name: p.data for name, p in params.items()})
        for name in params:
            assert max_relative_error(analytic[name], numeric[name]) < 1e-4, name


def test_predict_argmax_and_ties():
    vocab = LabelVocab(["x", "y", "z"])
    config = GnnConfig(family="gcn", steps=1)
    params = {"gcn.0.W": Tensor(np.eye(3))}
    table = Table("t", (Column(("v",)),))
    (p,) = predict(build_graph(table, [[2.0, -1.0, 0.0]], vocab), params, config, vocab)
    assert (p.class_index, p.label) == (0, "x")
    assert p.probabilities.sum() == pytest.approx(1.0, abs=1e-12)

    tie_vocab = LabelVocab(["x", "y"])
    tie_params = {"gcn.0.W": Tensor(np.eye(2))}
    (p,) = predict(build_graph(table, [[1.0, 1.0]], tie_vocab), tie_params, config, tie_vocab)
    assert p.class_index == 0


def test_predicted_index_is_argmax_of_raw_logits(rng):
    config = GnnConfig(family="gat", steps=2, heads=2)
    model = GnnModel.initialize(config, LabelVocab(["c0", "c1", "c2"]), seed=4)
    graph = make_graph(rng, 5, 3)
    raw = model.forward(graph).data
    for node, p in enumerate(model.predict(graph)):
        assert p.class_index == int(np.argmax(raw[node])) == int(np.argmax(p.probabilities))
        assert p.column_index == node


def test_model_file_round_trip_is_bit_exact(tmp_path, rng):
    config = GnnConfig(family="ggnn", steps=3, share_weights=True, seed=11)
    model = GnnModel.initialize(config, LabelVocab(["c0", "c1", "c2"]))
    loaded = load_model(save_model(model, tmp_path / "model.json"))
    assert loaded.vocab == model.vocab
    assert loaded.config.share_weights and loaded.config.steps == 3
    for name, p in model.params.items():
        assert loaded.params[name].data.tobytes() == p.data.tobytes()
    graph = make_graph(rng, 3, 3)
    assert np.array_equal(loaded.forward(graph).data, model.forward(graph).data)


def test_model_file_errors(tmp_path):
    with pytest.raises(DataFormatError):
        load_model(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"format_version": 99}', encoding="utf-8")
    with pytest.raises(DataFormatError):
        load_model(bad)
    for text in ("[]", '"model"', '{"format_version": 1, "vocab": ["a", "b"], "family": "gcn", "S": 1, "K": 1, "hidden_dim": null, "k": 2, "params": []}'):
        bad.write_text(text, encoding="utf-8")
        with pytest.raises(DataFormatError):
            load_model(bad)
