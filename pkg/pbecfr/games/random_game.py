"""Seeded random perfect-recall games for property tests and benchmarks."""
from __future__ import annotations

from collections import deque
from typing import Dict, Hashable, Tuple

import numpy as np

from ..config import rng
from ..errors import EfgError
from ..game import CHANCE, TERMINAL, Game, GameBuilder


def random_game(
    seed: int,
    players: int = 2,
    max_nodes: int = 200,
    max_depth: int = 6,
    max_actions: int = 3,
    zero_sum: bool = False,
    chance_share: float = 0.2,
    tags: int = 2,
) -> Game:
    """Breadth-first random tree that never exceeds `max_nodes`.

    A decision node joins the infoset keyed by (owner, owner's own action
    sequence, random tag), so infosets respect perfect recall while their
    members may sit at different depths. The action count is fixed per key.
    """
    if max_nodes < 3 or max_actions < 2 or max_depth < 1:
        raise EfgError("random_game needs max_nodes >= 3, max_actions >= 2 and max_depth >= 1")
    if zero_sum and players != 2:
        raise EfgError("zero-sum random games need exactly two players")
    gen = rng(seed)
    b = GameBuilder(players=players)
    widths: Dict[Hashable, int] = {}
    next_sequence: Dict[Tuple, int] = {}

    # pending: (parent, edge, depth, own sequence id per player)
    pending = deque([(None, None, 0, (0,) * players)])
    count = 1
    while pending:
        parent, edge, depth, seqs = pending.popleft()
        owner, width, key = TERMINAL, 0, None
        stop = depth >= max_depth or (depth > 0 and gen.random() < 0.25)
        if not stop:
            if depth > 0 and gen.random() < chance_share:
                owner = CHANCE
                width = int(gen.integers(2, max_actions + 1))
            else:
                owner = int(gen.integers(1, players + 1))
                key = (owner, seqs[owner - 1], int(gen.integers(tags)))
                width = widths.setdefault(key, int(gen.integers(2, max_actions + 1)))
            if count + width > max_nodes:
                owner, width, key = TERMINAL, 0, None

        node = b.add_node(owner, parent, edge)
        count += width
        if owner == TERMINAL:
            u = gen.uniform(-1.0, 1.0, size=players)
            if zero_sum:
                u[1] = -u[0]
            b.set_utility(node, np.round(u, 6))
            continue
        labels = [f"{'c' if owner == CHANCE else 'a'}{i}" for i in range(width)]
        if owner == CHANCE:
            probs = gen.dirichlet(np.ones(width))
            probs = probs / probs.sum()
            b.set_chance(node, {lbl: float(p) for lbl, p in zip(labels, probs)})
            for lbl in labels:
                pending.append((node, lbl, depth + 1, seqs))
        else:
            info = b.set_infoset(node, key, labels)
            for i, lbl in enumerate(labels):
                child = list(seqs)
                child[owner - 1] = next_sequence.setdefault((owner, info, i), len(next_sequence) + 1)
                pending.append((node, lbl, depth + 1, tuple(child)))
    return b.build()
