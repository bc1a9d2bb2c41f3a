"""Smoke tests for the python module: end-to-end wiring, not training quality."""

import pytest

rf = pytest.importorskip("rollforge")


def test_env_determinism_and_dynamics():
    s0 = rf.reset(seed=7)
    s1 = rf.reset(seed=7)
    assert s0 == s1
    a = rf.action_index(0, 2)  # red ball, north
    nxt = rf.step(s0, a)
    moved = [i for i in range(10) if abs(nxt.p[i] - s0.p[i]) > 1e-9]
    assert moved and all(i < 2 for i in moved)
    assert rf.decode_action(a) == (0, 2)


def test_expert_collects_successful_episodes():
    eps = rf.collect_dataset(n_episodes=20, seed=3)
    assert len(eps) == 20
    assert sum(ep.success for ep in eps) >= 18
    for ep in eps:
        assert len(ep.states) == len(ep.actions) + 1
        assert len(ep.rewards) == len(ep.actions)
        assert ep.goal.text


def test_goal_corpus_counts():
    assert rf.configuration_count() == 80
    rephrase = rf.novel_goals("rephrasing", 100)
    assert len(rephrase) == 3200
    easy = rf.novel_goals("unseen_easy", 100)
    assert len(easy) == 400
    assert all(g.kind == "absolute_move" for g in easy)


def test_tokenizer_round_trip():
    ids = rf.tokenize("Move the red ball forward.")
    assert rf.detokenize(ids) == "move the red ball forward ."
    assert rf.vocab_size() > 100


def test_model_generates_schema_valid_rollouts():
    model = rf.Model(dim=16, layers=1, heads=2, ffn=32, seed=5)
    eps = rf.collect_dataset(n_episodes=6, seed=11)
    assert rf.instruction_sample_count(eps, 1) == 24
    log = model.finetune(eps, epochs=1, batch=8)
    assert log
    goal = rf.relative_goal(0, 1, "left")
    rollout = model.generate(goal, max_steps=4, temperature=0.0, seed=2)
    assert rollout.imaginary
    assert len(rollout.states) == len(rollout.actions) + 1
    assert len(rollout.actions) >= 1
    again = model.generate(goal, max_steps=4, temperature=0.0, seed=2)
    assert rollout.actions == again.actions

    nxt = model.predict_next_state(rf.reset(seed=1), 3)
    assert all(-1.0 <= v <= 1.0 for v in nxt.p)
    assert isinstance(model.explain(eps[0]), str)
    mse, copy_mse = model.dynamics_mse(eps, seed=4)
    assert mse >= 0.0 and copy_mse >= 0.0


def test_policy_trains_and_acts():
    eps = rf.collect_dataset(n_episodes=8, seed=21)
    policy = rf.Policy(algorithm="bc", goal_dim=32, seed=2)
    losses = policy.train(eps, epochs=2, steps_per_epoch=4, batch=16)
    assert len(losses) == 2
    a = policy.act(rf.reset(seed=5), "move the red ball to the left of the blue ball")
    assert 0 <= a < 40
    rate = policy.evaluate("offline", n_episodes=5, seed=1)
    assert 0.0 <= rate <= 1.0
