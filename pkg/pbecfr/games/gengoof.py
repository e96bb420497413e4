"""GenGoof and PrivateGenGoof generators.

K-1 rounds; in round r a chance event draws one of the K-r+1 outcomes not
yet seen, then player 1 and player 2 each pick one of K actions. Both
variants draw the same root distribution and the same reward table from a
seed, so for equal params they differ only in who observes what.
"""
from __future__ import annotations

import logging
import string
from dataclasses import dataclass
from typing import Hashable, Tuple

import numpy as np

from ..config import get_settings, rng
from ..errors import EfgError, SizeGuardError
from ..game import CHANCE, TERMINAL, Game, GameBuilder

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenGoofParams:
    k: int
    u_max: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.k < 2:
            raise EfgError(f"K must be at least 2, got {self.k}")
        if self.k > len(string.ascii_uppercase):
            raise EfgError(f"K must be at most {len(string.ascii_uppercase)}, got {self.k}")
        if not self.u_max > 0:
            raise EfgError(f"u_max must be positive, got {self.u_max}")


def gengoof_size(k: int) -> int:
    """Node count of a K-outcome instance, without building it."""
    total = 1
    breadth = 1
    for r in range(k - 1):
        remaining = k - r
        breadth *= remaining
        total += breadth
        breadth *= k
        total += breadth
        breadth *= k
        total += breadth
    return total


def draw_parameters(params: GenGoofParams) -> Tuple[np.ndarray, np.ndarray]:
    """Root outcome distribution and rewards[outcome, a1, a2, player]."""
    gen = rng(params.seed)
    dist = gen.dirichlet(np.ones(params.k))
    rewards = gen.uniform(0.0, params.u_max, size=(params.k, params.k, params.k, 2))
    return dist, rewards


def _build(params: GenGoofParams, private: bool) -> Game:
    k = params.k
    size = gengoof_size(k)
    limit = get_settings().max_nodes
    if size > limit:
        raise SizeGuardError(size, limit)

    dist, rewards = draw_parameters(params)
    outcomes = string.ascii_uppercase[:k]
    p1_actions = [f"a{i + 1}" for i in range(k)]
    p2_actions = [f"b{i + 1}" for i in range(k)]

    b = GameBuilder(players=2)
    root = b.add_node(CHANCE, label="")
    # (chance node, past rounds as (outcome, a1, a2), accumulated reward)
    frontier = [(root, (), np.zeros(2))]
    for r in range(k - 1):
        last = r == k - 2
        nxt = []
        for chance_node, past, acc in frontier:
            seen = {e for e, _, _ in past}
            left = [e for e in range(k) if e not in seen]
            mass = float(dist[left].sum())
            probs = {outcomes[e]: float(dist[e]) / mass for e in left}
            b.set_chance(chance_node, probs)
            for e in left:
                n1 = b.add_node(1, chance_node, outcomes[e])
                key1: Hashable = (1, past) if private else (1, past, e)
                b.set_infoset(n1, key1, p1_actions)
                for a1 in range(k):
                    n2 = b.add_node(2, n1, p1_actions[a1])
                    key2: Hashable = (2, past, a1) if private else (2, past, e)
                    b.set_infoset(n2, key2, p2_actions)
                    for a2 in range(k):
                        total = acc + rewards[e, a1, a2]
                        step = past + ((e, a1, a2),)
                        if last:
                            leaf = b.add_node(TERMINAL, n2, p2_actions[a2])
                            b.set_utility(leaf, total)
                        else:
                            child = b.add_node(CHANCE, n2, p2_actions[a2])
                            nxt.append((child, step, total))
        frontier = nxt

    game = b.build()
    log.debug("built %s K=%d: %d nodes, %d infosets",
              "private-gengoof" if private else "gengoof", k, game.num_nodes, len(game.infosets))
    return game


def gen_goof(params: GenGoofParams) -> Game:
    """Players observe the round outcome; player 2 does not see player 1's move."""
    return _build(params, private=False)


def private_gen_goof(params: GenGoofParams) -> Game:
    """Nobody observes the round outcome before moving; player 2 sees player 1's move."""
    return _build(params, private=True)
