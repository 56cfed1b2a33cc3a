"""Search mechanics: UCT scoring, selection, expansion, backprop, episodes."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitmcts import smiles
from unitmcts.actions import successors
from unitmcts.mcts import (
    EpisodeResult,
    SearchConfig,
    SearchNode,
    Searcher,
    run_episode,
    uct_score,
)
from unitmcts.molgraph import Molecule
from unitmcts.properties import (
    NEG_INF,
    PenalizedLogPObjective,
    QedObjective,
    penalized_logp,
    qed,
)


def make_node(state, value, visits, depth=1, parent=None):
    node = SearchNode(state, depth, parent)
    node.value = value
    node.visits = visits
    return node


# --------------------------------------------------------------- uct_score


def test_uct_pure_exploitation():
    node = make_node(Molecule.single_atom("C"), value=3.0, visits=2)
    assert uct_score(node, parent_visits=5, c=0.0) == pytest.approx(1.5, abs=1e-12)


def test_uct_zero_at_unvisited_parent():
    node = make_node(Molecule.single_atom("C"), value=0.0, visits=1)
    for c in (0.0, 0.5, 10.0):
        assert uct_score(node, parent_visits=1, c=c) == pytest.approx(0.0, abs=1e-12)


def test_uct_direct_evaluation():
    node = make_node(Molecule.single_atom("C"), value=2.0, visits=4)
    expected = 0.5 + math.sqrt(math.log(10) / 4)
    assert uct_score(node, parent_visits=10, c=1.0) == pytest.approx(expected, abs=1e-12)


@given(
    st.floats(min_value=0.0, max_value=100.0),
    st.integers(min_value=1, max_value=1000),
    st.integers(min_value=1, max_value=10_000),
    st.floats(min_value=0.0, max_value=10.0),
)
@settings(max_examples=200, deadline=None)
def test_uct_formula_closed_form(value, visits, parent_visits, c):
    node = make_node(Molecule.single_atom("C"), value, visits)
    expected = value / visits + c * math.sqrt(math.log(parent_visits) / visits)
    assert uct_score(node, parent_visits, c) == pytest.approx(expected, abs=1e-12)


# --------------------------------------------------------------- selection


def make_searcher(**overrides) -> Searcher:
    cfg = SearchConfig(**{"seed": 0, "rollout_depth": 0, **overrides})
    return Searcher(QedObjective(), cfg)


def attach(parent, children):
    parent.children = children
    parent.expanded = True
    for ch in children:
        ch.parent = parent


def test_select_single_child():
    searcher = make_searcher()
    root = make_node(Molecule.empty(), 0.0, 3, depth=0)
    child = make_node(Molecule.single_atom("C"), 1.0, 1)
    attach(root, [child])
    assert searcher.select(root) == [root, child]


def test_select_argmax():
    searcher = make_searcher(c=0.0)
    root = make_node(Molecule.empty(), 0.0, 5, depth=0)
    low = make_node(smiles.parse("CC"), 0.8, 1)
    high = make_node(smiles.parse("CO"), 1.2, 1)
    attach(root, [low, high])
    assert searcher.select(root)[-1] is high


def test_select_tie_breaks_by_canonical_smiles():
    searcher = make_searcher(c=1.0)
    root = make_node(Molecule.empty(), 0.0, 5, depth=0)
    a = make_node(smiles.parse("CCO"), 1.0, 2)
    b = make_node(smiles.parse("CCN"), 1.0, 2)
    attach(root, [a, b])
    assert searcher.select(root)[-1] is b  # "CCN" < "CCO"


def test_select_respects_debug_assertions():
    searcher = make_searcher(debug_check_selection=True, c=1.3)
    rng = random.Random(7)
    mols = [smiles.parse(t) for t in ("C", "N", "O", "CC", "CO", "CN")]
    for _ in range(1000):
        root = make_node(Molecule.empty(), 0.0, rng.randint(2, 50), depth=0)
        kids = [
            make_node(m, rng.uniform(0, 5), rng.randint(1, 9))
            for m in rng.sample(mols, rng.randint(2, 6))
        ]
        attach(root, kids)
        chosen = searcher.select(root)[-1]
        top = max(uct_score(k, root.visits, searcher.cfg.c) for k in kids)
        assert uct_score(chosen, root.visits, searcher.cfg.c) == top


# --------------------------------------------------------------- expansion


def test_expand_takes_top_k_by_objective():
    cfg = SearchConfig(k=3, rollout_depth=0, seed=0)
    searcher = Searcher(PenalizedLogPObjective(), cfg)
    root = SearchNode(Molecule.single_atom("C"), depth=0)
    children = searcher.expand([root])
    assert len(children) == 3
    all_scores = sorted(
        (penalized_logp(a.result) for a in successors(Molecule.single_atom("C"))),
        reverse=True,
    )
    got = sorted((penalized_logp(ch.state) for ch in children), reverse=True)
    assert got == pytest.approx(all_scores[:3])


def test_expand_unlimited_width():
    cfg = SearchConfig(k=None, rollout_depth=0, seed=0)
    searcher = Searcher(QedObjective(), cfg)
    root = SearchNode(Molecule.single_atom("C"), depth=0)
    children = searcher.expand([root])
    assert len(children) == len(successors(Molecule.single_atom("C")))
    # children states pairwise non-isomorphic
    encodings = {ch.state.canonical_encoding() for ch in children}
    assert len(encodings) == len(children)


def test_expand_backpropagates_each_child_to_root():
    cfg = SearchConfig(k=5, rollout_depth=0, seed=0)
    searcher = Searcher(QedObjective(), cfg)
    root = SearchNode(Molecule.single_atom("C"), depth=0)
    before = root.visits
    children = searcher.expand([root])
    assert root.visits == before + len(children)
    assert all(ch.visits == 1 for ch in children)


def test_expand_filter_can_make_leaf_terminal():
    cfg = SearchConfig(k=5, rollout_depth=0, seed=0)
    searcher = Searcher(QedObjective(), cfg, expansion_filter=lambda mol: False)
    root = SearchNode(Molecule.single_atom("C"), depth=0)
    assert searcher.expand([root]) == []
    assert root.terminal


def test_depth_cap_makes_nodes_terminal():
    cfg = SearchConfig(k=5, rollout_depth=0, seed=0, max_steps=2)
    searcher = Searcher(QedObjective(), cfg)
    node = SearchNode(Molecule.single_atom("C"), depth=2)
    assert searcher.expand([node]) == []
    assert node.terminal


# ---------------------------------------------------------------- rollouts


def test_rollout_depth_zero_scores_the_node_itself():
    searcher = make_searcher(rollout_depth=0)
    mol = smiles.parse("CCO")
    node = SearchNode(mol, depth=0)
    assert searcher.simulate(node) == qed(mol)


def test_greedy_rollout_is_the_argmax_successor():
    cfg = SearchConfig(rollout_depth=1, epsilon=0.0, seed=0, max_steps=5)
    searcher = Searcher(PenalizedLogPObjective(), cfg)
    start = Molecule.single_atom("C")
    best = max(penalized_logp(a.result) for a in successors(start))
    assert searcher.simulate(SearchNode(start, depth=0)) == pytest.approx(best)


def test_full_random_rollout_is_seed_reproducible():
    results = set()
    for _ in range(3):
        cfg = SearchConfig(rollout_depth=4, epsilon=1.0, seed=42, max_steps=10)
        searcher = Searcher(QedObjective(), cfg)
        results.add(searcher.simulate(SearchNode(Molecule.single_atom("C"), depth=0)))
    assert len(results) == 1


# ----------------------------------------------------------- reward scaling


def test_alpha_zero_scales_everything_to_one():
    searcher = make_searcher(alpha=0.0)
    assert searcher.scale_reward(0.3) == 1.0
    assert searcher.scale_reward(0.9) == 1.0


def test_bounded_rewards_scale_directly():
    searcher = make_searcher(alpha=2.0)
    assert searcher.scale_reward(0.5) == pytest.approx(math.exp(1.0))
    assert searcher.scale_reward(0.0) == pytest.approx(1.0)
    assert searcher.scale_reward(1.0) == pytest.approx(math.exp(2.0))


def test_unbounded_rewards_use_running_normalization():
    cfg = SearchConfig(seed=0, alpha=1.0)
    searcher = Searcher(PenalizedLogPObjective(), cfg)
    first = searcher.scale_reward(5.0)
    assert first == pytest.approx(math.exp(0.5))  # degenerate span -> midpoint
    searcher.scale_reward(-5.0)
    assert searcher.scale_reward(5.0) == pytest.approx(math.exp(1.0))
    assert searcher.scale_reward(0.0) == pytest.approx(math.exp(0.5))


def test_sentinel_reward_scales_to_zero():
    searcher = make_searcher(alpha=1.0)
    assert searcher.scale_reward(NEG_INF) == 0.0
    assert searcher.scale_reward(float("nan")) == 0.0


@given(
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.01, max_value=5.0),
)
@settings(max_examples=100, deadline=None)
def test_scaling_preserves_reward_order(r1, r2, alpha):
    searcher = make_searcher(alpha=alpha)
    s1, s2 = searcher.scale_reward(r1), searcher.scale_reward(r2)
    if r1 > r2:
        assert s1 >= s2
        if r1 - r2 > 1e-9:
            assert s1 > s2
    elif r1 < r2:
        assert s1 <= s2
        if r2 - r1 > 1e-9:
            assert s1 < s2
    else:
        assert s1 == s2


# ------------------------------------------------------------ backpropagate


def test_backpropagate_increments_whole_path():
    searcher = make_searcher(alpha=0.0)
    nodes = [make_node(Molecule.single_atom("C"), 0.0, 1, depth=d) for d in range(3)]
    before = [(n.value, n.visits) for n in nodes]
    searcher.backpropagate(nodes, reward=0.7)
    for (v0, n0), node in zip(before, nodes):
        assert node.visits == n0 + 1
        assert node.value == pytest.approx(v0 + 1.0)  # alpha=0 -> +1 exactly


# ----------------------------------------------------------------- episodes


def test_visit_count_conservation_small():
    cfg = SearchConfig(k=4, rollout_depth=0, num_iterations=1, seed=0, max_steps=6)
    searcher = Searcher(QedObjective(), cfg)
    root = SearchNode(Molecule.empty(), depth=0)
    for _ in range(300):
        searcher.iterate(root)
    assert root.visits == 1 + searcher.backprop_events


def test_one_step_episode_finds_best_single_atom():
    cfg = SearchConfig(
        k=None, rollout_depth=0, num_iterations=20, seed=0, max_steps=1, c=1.0
    )
    result = run_episode(Molecule.empty(), cfg, QedObjective())
    expected = max(qed(Molecule.single_atom(e)) for e in ("C", "N", "O"))
    assert result.best_score == pytest.approx(expected)


def test_trajectory_best_is_non_decreasing():
    cfg = SearchConfig(k=5, rollout_depth=0, num_iterations=5, seed=3, max_steps=8)
    result = run_episode(Molecule.empty(), cfg, QedObjective())
    bests = [row[3] for row in result.trajectory]
    assert bests == sorted(bests)
    assert result.best_score == pytest.approx(bests[-1])


def test_same_seed_same_episode():
    def go():
        cfg = SearchConfig(
            k=5, rollout_depth=2, epsilon=0.3, num_iterations=5, seed=11, max_steps=5
        )
        return run_episode(Molecule.empty(), cfg, QedObjective())

    a, b = go(), go()
    assert a.best_smiles == b.best_smiles
    assert a.best_score == b.best_score
    assert a.trajectory == b.trajectory
    assert a.evaluations == b.evaluations


def test_best_result_parses_and_validates():
    cfg = SearchConfig(k=5, rollout_depth=1, num_iterations=4, seed=9, max_steps=6)
    result = run_episode(Molecule.empty(), cfg, QedObjective())
    mol = smiles.parse(result.best_smiles)
    mol.validate()
    assert result.best_score == pytest.approx(qed(mol))
    assert isinstance(result, EpisodeResult)


def test_config_validation():
    for bad in (
        {"c": -1.0},
        {"k": 0},
        {"epsilon": 1.5},
        {"rollout_depth": -1},
        {"num_iterations": 0},
        {"max_steps": 0},
    ):
        with pytest.raises(ValueError):
            SearchConfig(**bad).validate()
