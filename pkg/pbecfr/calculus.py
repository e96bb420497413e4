"""Reach probabilities, expected and believed utilities, best responses.

Whole-tree quantities are computed in one vectorised sweep over the depth
layers of `TreeArrays`; the single-node entry points are thin views over
those sweeps (or a path walk, for reach).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import EfgError, InvalidBeliefsError, InvalidProfileError, UnsupportedGameError
from .game import ActionRef, Assessment, Game, PureStrategy, StrategyProfile, TreeArrays


@dataclass(frozen=True)
class Reach:
    chance: float
    players: Tuple[float, ...]

    @property
    def product(self) -> float:
        out = self.chance
        for r in self.players:
            out *= r
        return out


@dataclass(frozen=True)
class RegretReport:
    per_player: Tuple[float, ...]
    total: float


# -----------------------------
# Segment helpers
# -----------------------------
def segment_sum(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    if len(offsets) <= 1:
        return np.zeros(0)
    return np.add.reduceat(values, offsets[:-1])


def segment_argmax(arrays: TreeArrays, values: np.ndarray) -> np.ndarray:
    """Per infoset, index of the largest slot value; lowest index on ties."""
    if arrays.n_infosets == 0:
        return np.zeros(0, dtype=np.int64)
    maxes = np.maximum.reduceat(values, arrays.act_offset[:-1])
    cand = np.where(values >= maxes[arrays.slot_infoset], arrays.slot_action, np.iinfo(np.int64).max)
    return np.minimum.reduceat(cand, arrays.act_offset[:-1])


def check_profile(game: Game, profile: StrategyProfile) -> TreeArrays:
    arr = game.arrays
    if profile.flat.shape != (arr.n_slots,) or len(profile) != arr.n_infosets:
        raise InvalidProfileError("profile does not cover the game's infosets")
    return arr


def check_assessment(game: Game, assessment: Assessment) -> TreeArrays:
    arr = check_profile(game, assessment.strategy)
    if assessment.beliefs.flat.shape != (arr.members.size,) or len(assessment.beliefs) != arr.n_infosets:
        raise InvalidBeliefsError("beliefs do not cover the game's infosets")
    return arr


# -----------------------------
# Reach
# -----------------------------
def reach_vectors(game: Game, profile: StrategyProfile) -> np.ndarray:
    """Factored reach of every node: column 0 is chance, column j player j."""
    arr = check_profile(game, profile)
    ep = arr.edge_probabilities(profile.flat)
    out = np.ones((arr.n_nodes, arr.players + 1))
    for layer in arr.layers:
        out[layer] = out[arr.parent[layer]]
        col = arr.parent_owner[layer]
        out[layer, col] *= ep[layer]
    return out


def reach_products(game: Game, profile: StrategyProfile) -> np.ndarray:
    arr = check_profile(game, profile)
    ep = arr.edge_probabilities(profile.flat)
    out = np.ones(arr.n_nodes)
    for layer in arr.layers:
        out[layer] = out[arr.parent[layer]] * ep[layer]
    return out


def opponent_reach(reach: np.ndarray, player: int) -> np.ndarray:
    """Chance times every player's contribution except `player`'s."""
    return np.prod(np.delete(reach, player, axis=1), axis=1)


def reach_probability(game: Game, profile: StrategyProfile, node: int) -> Reach:
    arr = check_profile(game, profile)
    cur = game.node(node)
    chance = 1.0
    players = [1.0] * game.player_count
    while cur.parent is not None:
        pid, label = cur.parent
        parent = game.nodes[pid]
        if parent.is_chance:
            chance *= game.chance[pid][label]
        else:
            players[parent.owner - 1] *= float(profile.flat[arr.slot[cur.id]])
        cur = parent
    return Reach(chance, tuple(players))


def infoset_reach(game: Game, profile: StrategyProfile, infoset: int) -> float:
    info = game.infoset(infoset)
    reach = reach_products(game, profile)
    return float(reach[list(info.members)].sum())


# -----------------------------
# Utilities
# -----------------------------
def node_values(game: Game, profile: StrategyProfile) -> np.ndarray:
    """U^E of every node for every player, shape (nodes, players)."""
    arr = check_profile(game, profile)
    return _node_values(arr, profile.flat)


def _node_values(arr: TreeArrays, flat: np.ndarray) -> np.ndarray:
    ep = arr.edge_probabilities(flat)
    values = arr.utility.copy()
    for layer in reversed(arr.layers):
        np.add.at(values, arr.parent[layer], values[layer] * ep[layer, None])
    return values


def expected_utility(game: Game, profile: StrategyProfile, from_node: Optional[int] = None) -> np.ndarray:
    node = game.root if from_node is None else game.node(from_node).id
    return node_values(game, profile)[node].copy()


def believed_action_utilities(
    game: Game,
    assessment: Assessment,
    values: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """All believed action utilities (per slot) and believed utilities (per infoset).

    Below `ha` the profile never revisits I under perfect recall, so the
    continuation value of `ha` is the same under sigma and sigma|I->a.
    """
    arr = check_assessment(game, assessment)
    if values is None:
        values = _node_values(arr, assessment.strategy.flat)
    dc = arr.decision_children
    par = arr.parent[dc]
    w = assessment.beliefs.flat[arr.mem_pos[par]] * values[dc, arr.owner[par] - 1]
    q = np.bincount(arr.slot[dc], weights=w, minlength=arr.n_slots)
    ub = segment_sum(assessment.strategy.flat * q, arr.act_offset)
    return q, ub


def believed_utility(game: Game, assessment: Assessment, infoset: int, values: Optional[np.ndarray] = None) -> float:
    arr = check_assessment(game, assessment)
    info = game.infoset(infoset)
    if values is None:
        values = _node_values(arr, assessment.strategy.flat)
    mu = assessment.beliefs.row(info.id)
    return float(np.dot(mu, values[list(info.members), info.owner - 1]))


def believed_action_utility(
    game: Game,
    assessment: Assessment,
    infoset: int,
    action: ActionRef,
    values: Optional[np.ndarray] = None,
) -> float:
    arr = check_assessment(game, assessment)
    info = game.infoset(infoset)
    a = game.action_index(info.id, action)
    if values is None:
        values = _node_values(arr, assessment.strategy.flat)
    mu = assessment.beliefs.row(info.id)
    kids = [game.nodes[h].children[info.actions[a]] for h in info.members]
    return float(np.dot(mu, values[kids, info.owner - 1]))


# -----------------------------
# Best response
# -----------------------------
def response_sweep(arr: TreeArrays, flat: np.ndarray, player: int, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Bottom-up pure best response of `player` with per-node decision weights.

    At each of the player's infosets the action maximising
    sum_h weights[h] * value(ha) is chosen; other nodes aggregate their
    children by edge probability. Returns (action per infoset, player's
    value per node); infosets of other players keep -1.
    """
    ep = arr.edge_probabilities(flat)
    values = arr.utility[:, player - 1].copy()
    choice = np.full(arr.n_infosets, -1, dtype=np.int64)
    for _, deciding, groups in arr.response_plan(player):
        if deciding.size:
            par = arr.parent[deciding]
            q = np.bincount(arr.slot[deciding], weights=weights[par] * values[deciding], minlength=arr.n_slots)
            best = segment_argmax(arr, q)
            infos = np.unique(arr.infoset[par])
            choice[infos] = best[infos]
        for kids in groups:
            par = arr.parent[kids]
            w = ep[kids]
            own = arr.owner[par] == player
            if own.any():
                w = w.copy()
                w[own] = arr.action[kids[own]] == choice[arr.infoset[par[own]]]
            np.add.at(values, par, w * values[kids])
    return choice, values


def best_response(game: Game, profile: StrategyProfile, player: int) -> Tuple[PureStrategy, float]:
    if game.player_count != 2:
        raise UnsupportedGameError(game.player_count)
    if player not in (1, 2):
        raise EfgError(f"unknown player {player}")
    arr = check_profile(game, profile)
    weights = opponent_reach(reach_vectors(game, profile), player)
    choice, values = response_sweep(arr, profile.flat, player, weights)
    return PureStrategy(player, choice), float(values[arr.root])


def regret(game: Game, profile: StrategyProfile) -> RegretReport:
    root_values = node_values(game, profile)[game.root]
    per_player = []
    for j in range(1, game.player_count + 1):
        _, value = best_response(game, profile, j)
        per_player.append(value - float(root_values[j - 1]))
    return RegretReport(tuple(per_player), float(sum(per_player)))
