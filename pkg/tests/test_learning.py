import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trustcascade.cascade import MessageKind, ModelConfig, estimate_stats, run_cascade
from trustcascade.errors import ContractError
from trustcascade.graph import build_chain, build_star, set_limit_weights
from trustcascade.learning import (LearningConfig, has_converged,
                                   reweight_on_receipt, train)

TRUE = MessageKind.TRUE
FALSE = MessageKind.FALSE
CFG01 = LearningConfig(delta=0.01, floor=0.01)


def test_reweight_frozen_examples():
    assert reweight_on_receipt(0.5, TRUE, CFG01) == pytest.approx(0.51)
    assert reweight_on_receipt(0.995, TRUE, CFG01) == 1.0
    assert reweight_on_receipt(0.015, FALSE, CFG01) == 0.01  # 0.015 < delta + floor


def test_learning_config_validation():
    with pytest.raises(ContractError):
        LearningConfig(delta=0.0)
    with pytest.raises(ContractError):
        LearningConfig(floor=-0.1)
    with pytest.raises(ContractError):
        LearningConfig(delta=0.6, floor=0.6)
    with pytest.raises(ContractError):
        LearningConfig(max_iterations=0)


@settings(max_examples=200)
@given(w=st.floats(0.001, 1.0), kind=st.sampled_from([TRUE, FALSE]))
def test_reweight_stays_in_bounds(w, kind):
    out = reweight_on_receipt(w, kind, LearningConfig())
    assert 0.001 <= out <= 1.0


@settings(max_examples=200)
@given(w=st.floats(0.02, 0.98))
def test_reweight_interior_updates_cancel(w):
    cfg = LearningConfig(delta=0.01, floor=0.005)
    up_down = reweight_on_receipt(reweight_on_receipt(w, TRUE, cfg), FALSE, cfg)
    assert up_down == pytest.approx(w, abs=1e-12)


def test_has_converged_window_semantics():
    cfg = LearningConfig(stability_eps=1e-3, stability_window=3)
    flat = [(0.5, 0.7)] * 3
    assert has_converged(flat, cfg)
    moved = [(0.5, 0.7), (0.5, 0.7), (0.5 + 2e-3, 0.7)]
    assert not has_converged(moved, cfg)
    with pytest.raises(ContractError):
        has_converged(flat[:2], cfg)


def test_saturated_chain_is_a_fixed_point():
    # keep feeding true messages from the smart terminal: saturated forward
    # weights stay clamped at 1, nothing else is ever delivered to
    g = set_limit_weights(build_chain(6))
    cfg = LearningConfig(stability_window=3)
    rng = random.Random(0)
    snapshots = []
    edge_order = sorted(g.weights)
    for _ in range(3):
        outcome = run_cascade(g, 1, TRUE, ModelConfig(1.0), rng)
        for j, k, _ in outcome.deliveries:
            g.weights[(j, k)] = reweight_on_receipt(g.weights[(j, k)], TRUE, cfg)
        snapshots.append(tuple(g.weights[e] for e in edge_order))
    assert has_converged(snapshots, cfg)
    assert all(g.weights[(i, i + 1)] == 1.0 for i in range(1, 6))


def test_train_single_iteration_zero_eta_touches_only_source_edges():
    # eta=0 still delivers (and declines) to the source's neighbours, so those
    # link weights move by one step; everything else is untouched
    g = build_chain(5)
    report = train(g, ModelConfig(0.0), LearningConfig(max_iterations=1), random.Random(3))
    assert report.iterations_run == 1
    changed = {e for e, w in g.weights.items() if w != 0.5}
    sources = {e[0] for e in changed}
    assert len(sources) == 1
    src = sources.pop()
    assert changed <= {(src, src - 1), (src, src + 1)}
    assert all(abs(g.weights[e] - 0.5) == pytest.approx(0.001) for e in changed)


def test_train_reproducible_and_bounded():
    cfg = LearningConfig(max_iterations=5000)
    g1 = build_chain(6)
    r1 = train(g1, ModelConfig(0.7), cfg, random.Random(99))
    g2 = build_chain(6)
    r2 = train(g2, ModelConfig(0.7), cfg, random.Random(99))
    assert r1.final_weights == r2.final_weights
    assert r1.iterations_run == 5000 and not r1.converged
    assert all(0.001 <= w <= 1.0 for w in g1.weights.values())


def test_train_star_saturates_center_links():
    g = build_star(20)
    train(g, ModelConfig(0.8), LearningConfig(max_iterations=3000), random.Random(5))
    for i in range(2, 21):
        assert g.weights[(1, i)] >= 0.95


def test_train_rejects_out_of_bounds_weights():
    g = build_chain(3)
    g.weights[(1, 2)] = 0.0
    with pytest.raises(ContractError):
        train(g, ModelConfig(0.5), LearningConfig(), random.Random(0))


def test_train_trajectory_rows():
    g = build_chain(3)
    report = train(g, ModelConfig(0.9), LearningConfig(max_iterations=10),
                   random.Random(1), trajectory_stride=5)
    iterations = {row[0] for row in report.trajectory_rows()}
    assert iterations == {5, 10}
    rows = list(report.trajectory_rows())
    assert len(rows) == 2 * len(g.weights)


def test_train_early_stop_on_stable_weights():
    # eta=0 with a 2-node chain: the two link weights random-walk, but with a
    # huge eps any window counts as stable, so the loop stops at the first check
    g = build_chain(2)
    cfg = LearningConfig(stability_eps=1.0, stability_window=2, max_iterations=100_000)
    report = train(g, ModelConfig(0.0), cfg, random.Random(0), check_interval=100)
    assert report.converged
    assert report.iterations_run == 200


def test_trained_star_ifa_ignores_unread_weights():
    # leaf->center trust is never read by the smart center, so randomizing it
    # cannot change a seeded measurement at all
    g = set_limit_weights(build_star(12))
    cfg = ModelConfig(0.6)
    before = estimate_stats(g, cfg, 2000, np.random.default_rng(4))
    scramble = random.Random(8)
    for i in range(2, 13):
        g.weights[(i, 1)] = 0.001 + 0.999 * scramble.random()
    after = estimate_stats(g, cfg, 2000, np.random.default_rng(4))
    assert before == after
