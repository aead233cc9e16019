"""Smoke tests for the python bindings: import, core math, generation,
graph construction, estimators and a miniature training run."""

import math

import pytest

import jamloc


def test_version_and_prng_name():
    assert jamloc.__version__
    assert "mt19937_64" in jamloc.PRNG_NAME


def test_path_loss_reference_point():
    p = jamloc.PropagationParams()
    p.pl0_db = 40.0
    p.gamma = 3.0
    assert jamloc.path_loss_ldpl(1.0, p) == pytest.approx(40.0)
    assert jamloc.path_loss_ldpl(100.0, p) == pytest.approx(100.0)
    with pytest.raises(Exception):
        jamloc.path_loss_ldpl(0.0, p)


def test_noise_floor_composition():
    assert jamloc.noise_floor(-100.0) == pytest.approx(-96.9897, abs=1e-4)
    assert jamloc.noise_floor(float("-inf")) == pytest.approx(-100.0)


def test_generation_is_deterministic_and_valid():
    a = jamloc.generate_static("random", "any", 5, 42)
    b = jamloc.generate_static("random", "any", 5, 42)
    assert len(a) == len(b) == 5
    for inst_a, inst_b in zip(a, b):
        assert inst_a.positions == inst_b.positions
        assert 3 <= len(inst_a) <= 122


def test_dataset_round_trip(tmp_path):
    data = jamloc.generate_static("circle", "inside_R", 3, 7)
    path = str(tmp_path / "ds.jsonl")
    jamloc.write_dataset(data, path)
    back = jamloc.read_dataset(path)
    assert jamloc.dataset_fingerprint(back) == jamloc.dataset_fingerprint(data)


def test_graph_features_and_supernode():
    inst = jamloc.generate_static("random", "any", 1, 3)[0]
    g = jamloc.build_graph(inst, k=3, supernode=True)
    assert g.supernode_index == len(inst)
    assert g.num_nodes == len(inst) + 1
    assert g.node_features.shape == (len(inst) + 1, 16)
    assert all(0.0 <= w <= 1.0 for w in g.edge_weights)


def test_wcl_and_downsampling():
    inst = jamloc.generate_static("random", "any", 1, 11)[0]
    r = jamloc.estimate("wcl", inst.samples)
    assert all(math.isfinite(c) for c in r.position)
    g = jamloc.build_graph(inst)
    assert r.position == pytest.approx(g.wcl_position)

    traj = jamloc.generate_dynamic(1, 5)[0]
    nodes = jamloc.spatial_bin_filter(traj.samples, 500)
    assert len(nodes) <= 500
    win = jamloc.window_average(traj.samples, 500)
    assert len(win) == 500


def test_tiny_training_run_and_checkpoint(tmp_path):
    data = jamloc.generate_static("random", "any", 40, 21)
    model = jamloc.train("gcn", data, epochs=3, seed=1, layers=2, hidden_dim=16,
                         batch_size=8)
    assert len(model.train_loss) == 3
    assert model.best_epoch >= 0

    path = str(tmp_path / "model.ckpt")
    jamloc.save_checkpoint(model, path)
    back = jamloc.load_checkpoint(path)
    est_a = model.estimate(data[0])
    est_b = back.estimate(data[0])
    assert est_a.position == pytest.approx(est_b.position)

    report = jamloc.evaluate("wcl", data)
    count, rmse, mae = report["all"]
    assert count == 40
    assert rmse >= mae > 0
