"""UCT tree search over unit molecular edits.

One search iteration selects a path by the UCT rule, expands the reached
leaf with its top-k successors (each initialized from one epsilon-greedy
rollout and backpropagated to the root), runs a rollout from the leaf, and
backpropagates the exponentially scaled reward along the path.  An episode
commits one move per step to the most-visited root child, reusing the
subtree below the new root.

Rewards are scaled as ``exp(alpha * r_norm)``: ``r_norm`` is the raw reward
for bounded objectives and a running min-max normalization for unbounded
ones, so that one update is always bounded and ordering is preserved.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .actions import successors
from .molgraph import DEFAULT_ELEMENTS, Molecule
from .properties import NEG_INF, Objective
from . import smiles


class EvaluationBudgetExceeded(Exception):
    """Raised by a budgeted objective wrapper; ends the episode cleanly."""


@dataclass
class SearchConfig:
    c: float = 1.0
    k: int | None = 10  # None = unlimited expansion width
    epsilon: float = 0.1
    rollout_depth: int = 5
    alpha: float = 1.0
    num_iterations: int = 100
    max_steps: int = 38
    seed: int = 0
    k_set: tuple[str, ...] = DEFAULT_ELEMENTS
    max_atoms: int | None = None  # default: |start| + max_steps
    debug_trace: bool = False
    debug_check_selection: bool = False

    def validate(self) -> None:
        if self.c < 0:
            raise ValueError("c must be >= 0")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if self.rollout_depth < 0:
            raise ValueError("rollout_depth must be >= 0")
        if self.num_iterations < 1:
            raise ValueError("num_iterations must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


class SearchNode:
    __slots__ = ("state", "value", "visits", "depth", "parent", "children", "expanded", "terminal", "_smiles")

    def __init__(self, state: Molecule, depth: int, parent: Optional["SearchNode"] = None):
        self.state = state
        self.value = 0.0
        self.visits = 1
        self.depth = depth
        self.parent = parent
        self.children: list[SearchNode] = []
        self.expanded = False
        self.terminal = False
        self._smiles: str | None = None

    @property
    def smiles(self) -> str:
        if self._smiles is None:
            self._smiles = smiles.write_canonical(self.state)
        return self._smiles

    @property
    def mean_value(self) -> float:
        return self.value / self.visits


def uct_score(node: SearchNode, parent_visits: int, c: float) -> float:
    """Mean value plus the visit-count exploration bonus."""
    return node.value / node.visits + c * math.sqrt(math.log(parent_visits) / node.visits)


@dataclass
class EpisodeResult:
    best_smiles: str
    best_score: float
    trajectory: list[tuple[int, str, float, float]]  # (step, smiles, score, best so far)
    iterations_used: int
    evaluations: int
    wall_time: float


class Searcher:
    """Owns one search tree; not shared across threads."""

    def __init__(
        self,
        objective: Objective,
        config: SearchConfig,
        expansion_filter: Callable[[Molecule], bool] | None = None,
    ):
        config.validate()
        self.objective = objective
        self.cfg = config
        self.expansion_filter = expansion_filter
        self.rng = random.Random(config.seed)
        self.best_score = NEG_INF
        self.best_molecule: Molecule | None = None
        self.evaluations = 0
        self.backprop_events = 0
        self.iterations = 0
        self.trace: list[str] = []
        self._running_min = math.inf
        self._running_max = -math.inf
        self._score_cache: dict[Molecule, float] = {}

    # ------------------------------------------------------------- scoring

    def score(self, mol: Molecule) -> float:
        """Objective value; every call counts against the evaluation budget."""
        self.evaluations += 1
        cached = self._score_cache.get(mol)
        if cached is None:
            cached = self.objective.score(mol)
            self._score_cache[mol] = cached
        if cached > self.best_score:
            self.best_score = cached
            self.best_molecule = mol
        return cached

    def scale_reward(self, reward: float) -> float:
        if reward == NEG_INF or math.isnan(reward):
            return 0.0
        if self.objective.bounds is not None:
            lo, hi = self.objective.bounds
            norm = (reward - lo) / (hi - lo)
        else:
            self._running_min = min(self._running_min, reward)
            self._running_max = max(self._running_max, reward)
            span = self._running_max - self._running_min
            norm = (reward - self._running_min) / span if span > 0 else 0.5
        return math.exp(self.cfg.alpha * norm)

    # ----------------------------------------------------------- tree moves

    def select(self, root: SearchNode) -> list[SearchNode]:
        path = [root]
        node = root
        while node.expanded and node.children and not node.terminal:
            top = max(uct_score(ch, node.visits, self.cfg.c) for ch in node.children)
            tied = [ch for ch in node.children if uct_score(ch, node.visits, self.cfg.c) == top]
            best = min(tied, key=lambda ch: ch.smiles) if len(tied) > 1 else tied[0]
            if self.cfg.debug_check_selection:
                assert uct_score(best, node.visits, self.cfg.c) == top
            if self.cfg.debug_trace:
                self.trace.append(
                    f"{self.iterations},select,{best.smiles},{best.value:.6f},"
                    f"{best.visits},{top:.6f}"
                )
            path.append(best)
            node = best
        return path

    def _legal_actions(self, mol: Molecule):
        return successors(mol, self.cfg.k_set, self.cfg.max_atoms)

    def expand(self, path: list[SearchNode]) -> list[SearchNode]:
        leaf = path[-1]
        if leaf.terminal or leaf.expanded:
            return []
        if leaf.depth >= self.cfg.max_steps:
            leaf.terminal = True
            return []
        candidates = self._legal_actions(leaf.state)
        if self.expansion_filter is not None:
            candidates = [a for a in candidates if self.expansion_filter(a.result)]
        scored = sorted(
            ((self.score(a.result), a) for a in candidates),
            key=lambda t: (-t[0], t[1].descriptor),
        )
        if self.cfg.k is not None:
            scored = scored[: self.cfg.k]
        leaf.expanded = True
        if not scored:
            leaf.terminal = True
            return []
        children = []
        for _, action in scored:
            child = SearchNode(action.result, leaf.depth + 1, parent=leaf)
            reward = self.simulate(child)
            child.value = self.scale_reward(reward)
            for node in path:
                node.value += child.value
                node.visits += 1
            self.backprop_events += 1
            children.append(child)
            if self.cfg.debug_trace:
                self.trace.append(
                    f"{self.iterations},expand,{child.smiles},{child.value:.6f},{child.visits},"
                )
        leaf.children = children
        return children

    def simulate(self, node: SearchNode) -> float:
        """Epsilon-greedy rollout; returns the final molecule's reward."""
        state = node.state
        budget = min(self.cfg.rollout_depth, max(0, self.cfg.max_steps - node.depth))
        for _ in range(budget):
            actions = self._legal_actions(state)
            if not actions:
                break
            if self.rng.random() < self.cfg.epsilon:
                state = self.rng.choice(actions).result
            else:
                best = None
                best_key = None
                for action in actions:
                    key = (-self.score(action.result), action.descriptor)
                    if best_key is None or key < best_key:
                        best_key = key
                        best = action
                state = best.result
        return self.score(state)

    def backpropagate(self, path: list[SearchNode], reward: float) -> None:
        scaled = self.scale_reward(reward)
        for node in path:
            node.value += scaled
            node.visits += 1
        self.backprop_events += 1
        if self.cfg.debug_trace:
            leaf = path[-1]
            self.trace.append(
                f"{self.iterations},backprop,{leaf.smiles},{scaled:.6f},{leaf.visits},"
            )

    def iterate(self, root: SearchNode) -> None:
        self.iterations += 1
        path = self.select(root)
        leaf = path[-1]
        if not leaf.terminal and not leaf.expanded:
            self.expand(path)
        reward = self.simulate(leaf)
        self.backpropagate(path, reward)

    # -------------------------------------------------------------- episode

    def run_episode(self, start: Molecule) -> EpisodeResult:
        t0 = time.monotonic()
        if self.cfg.max_atoms is None:
            self.cfg.max_atoms = len(start) + self.cfg.max_steps
        root = SearchNode(start, depth=0)
        trajectory: list[tuple[int, str, float, float]] = []
        try:
            if len(start) > 0:
                self.score(start)
            for step in range(self.cfg.max_steps):
                if root.terminal:
                    break
                for _ in range(self.cfg.num_iterations):
                    self.iterate(root)
                if not root.children:
                    break
                top_visits = max(ch.visits for ch in root.children)
                tied = [ch for ch in root.children if ch.visits == top_visits]
                if len(tied) > 1:
                    top_mean = max(ch.mean_value for ch in tied)
                    tied = [ch for ch in tied if ch.mean_value == top_mean]
                root = min(tied, key=lambda ch: ch.smiles) if len(tied) > 1 else tied[0]
                root.parent = None  # subtree reuse below the committed move
                trajectory.append(
                    (step, root.smiles, self.score(root.state), self.best_score)
                )
        except EvaluationBudgetExceeded:
            pass
        best_smiles = (
            smiles.write_canonical(self.best_molecule)
            if self.best_molecule is not None
            else ""
        )
        return EpisodeResult(
            best_smiles=best_smiles,
            best_score=self.best_score,
            trajectory=trajectory,
            iterations_used=self.iterations,
            evaluations=self.evaluations,
            wall_time=time.monotonic() - t0,
        )


def run_episode(
    start: Molecule,
    config: SearchConfig,
    objective: Objective,
    expansion_filter: Callable[[Molecule], bool] | None = None,
) -> EpisodeResult:
    """Convenience wrapper: one seeded episode with a fresh tree."""
    return Searcher(objective, config, expansion_filter).run_episode(start)
