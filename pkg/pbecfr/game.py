"""Extensive-form game model.

A `Game` is an immutable arena of `Node` objects with information sets,
chance distributions and terminal utility vectors. Every constructor path
(`GameBuilder.build`, `parse_game`) ends in `validate_game`, so a `Game`
instance always satisfies the tree, partition, chance and perfect-recall
invariants.

Owners are plain ints: `CHANCE` (0), strategic players 1..n and
`TERMINAL` (-1).
"""
from __future__ import annotations

import json
import math
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Hashable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import PROB_TOL, ROW_TOL
from .errors import (
    GameFormatError,
    InvalidBeliefsError,
    InvalidProfileError,
    UnknownActionError,
    UnknownInfosetError,
    UnknownEdgeError,
    UnknownNodeError,
)

CHANCE = 0
TERMINAL = -1

ActionRef = Union[int, str]


# -----------------------------
# Types
# -----------------------------
@dataclass(frozen=True)
class Node:
    id: int
    owner: int
    parent: Optional[Tuple[int, str]] = None
    children: Mapping[str, int] = field(default_factory=dict)
    infoset: Optional[int] = None
    utility: Optional[Tuple[float, ...]] = None
    label: Optional[str] = None

    @property
    def is_terminal(self) -> bool:
        return self.owner == TERMINAL

    @property
    def is_chance(self) -> bool:
        return self.owner == CHANCE

    @property
    def is_decision(self) -> bool:
        return self.owner > 0


@dataclass(frozen=True)
class InfoSet:
    id: int
    owner: int
    members: Tuple[int, ...]
    actions: Tuple[str, ...]
    name: Optional[str] = None


class Game:
    def __init__(
        self,
        player_count: int,
        nodes: Sequence[Node],
        root: int,
        infosets: Sequence[InfoSet],
        chance: Mapping[int, Mapping[str, float]],
    ):
        self.player_count = int(player_count)
        self.nodes: Tuple[Node, ...] = tuple(nodes)
        self.root = int(root)
        self.infosets: Tuple[InfoSet, ...] = tuple(infosets)
        self.chance: Dict[int, Dict[str, float]] = {int(k): dict(v) for k, v in chance.items()}
        validate_game(self)

    def __repr__(self) -> str:
        return f"Game(players={self.player_count}, nodes={len(self.nodes)}, infosets={len(self.infosets)})"

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    def node(self, node_id: int) -> Node:
        if not isinstance(node_id, (int, np.integer)) or not 0 <= node_id < len(self.nodes):
            raise UnknownNodeError(node_id)
        return self.nodes[int(node_id)]

    def infoset(self, infoset_id: int) -> InfoSet:
        if not isinstance(infoset_id, (int, np.integer)) or not 0 <= infoset_id < len(self.infosets):
            raise UnknownInfosetError(infoset_id)
        return self.infosets[int(infoset_id)]

    def action_index(self, infoset_id: int, action: ActionRef) -> int:
        info = self.infoset(infoset_id)
        if isinstance(action, str):
            try:
                return info.actions.index(action)
            except ValueError:
                raise UnknownActionError(infoset_id, action)
        if isinstance(action, (int, np.integer)) and 0 <= action < len(info.actions):
            return int(action)
        raise UnknownActionError(infoset_id, action)

    def child(self, node_id: int, edge: ActionRef) -> int:
        node = self.node(node_id)
        if node.is_decision:
            label = self.infosets[node.infoset].actions[self.action_index(node.infoset, edge)]
        elif isinstance(edge, str):
            label = edge
        elif isinstance(edge, (int, np.integer)) and 0 <= edge < len(node.children):
            label = list(node.children)[edge]
        else:
            raise UnknownEdgeError(node.id, edge)
        if label not in node.children:
            raise UnknownEdgeError(node.id, edge)
        return node.children[label]

    def node_by_label(self, label: str) -> int:
        idx = self._labels.get(label)
        if idx is None:
            raise UnknownNodeError(label)
        return idx

    @cached_property
    def _labels(self) -> Dict[str, int]:
        return {n.label: n.id for n in self.nodes if n.label is not None}

    def infosets_of(self, player: int) -> List[int]:
        return [i.id for i in self.infosets if i.owner == player]

    def utility_range(self, player: int) -> float:
        u = self.arrays.utility[self.arrays.terminal, player - 1]
        return float(u.max() - u.min()) if u.size else 0.0

    @cached_property
    def arrays(self) -> "TreeArrays":
        return TreeArrays(self)


# -----------------------------
# Validation
# -----------------------------
def validate_game(game: Game) -> None:
    n_players = game.player_count
    nodes = game.nodes
    if n_players < 1:
        raise GameFormatError(f"player count must be positive, got {n_players}")
    if not nodes:
        raise GameFormatError("game has no nodes")
    if not 0 <= game.root < len(nodes):
        raise GameFormatError(f"root {game.root} is not a node", node=game.root)

    for idx, node in enumerate(nodes):
        if node.id != idx:
            raise GameFormatError(f"node ids must be 0..N-1 in order, found {node.id} at {idx}", node=node.id)
        if node.owner != TERMINAL and node.owner != CHANCE and not 1 <= node.owner <= n_players:
            raise GameFormatError(f"node {idx} has unknown owner {node.owner}", node=idx)
        terminal = node.owner == TERMINAL
        if terminal != (len(node.children) == 0) or terminal != (node.utility is not None):
            raise GameFormatError(f"node {idx}: terminal iff no children iff utility present", node=idx)
        if terminal:
            if len(node.utility) != n_players or not all(math.isfinite(x) for x in node.utility):
                raise GameFormatError(f"node {idx}: utility must be {n_players} finite numbers", node=idx)
        if (node.owner > 0) != (node.infoset is not None):
            raise GameFormatError(f"node {idx}: decision nodes and only decision nodes carry an infoset", node=idx)
        for label, child in node.children.items():
            if not 0 <= child < len(nodes):
                raise GameFormatError(f"node {idx}: child {child} does not exist", node=idx)
            if nodes[child].parent != (idx, label):
                raise GameFormatError(f"node {child}: parent link does not match edge {label!r} of {idx}", node=child)
        if (idx == game.root) != (node.parent is None):
            raise GameFormatError(f"node {idx}: only the root may lack a parent", node=idx)

    # rooted tree: every node visited exactly once from the root
    seen = 0
    queue = deque([game.root])
    while queue:
        cur = queue.popleft()
        seen += 1
        if seen > len(nodes):
            raise GameFormatError("node graph contains a cycle")
        queue.extend(nodes[cur].children.values())
    if seen != len(nodes):
        raise GameFormatError(f"{len(nodes) - seen} nodes are not reachable from the root")

    in_infoset: Dict[int, int] = {}
    for idx, info in enumerate(game.infosets):
        if info.id != idx:
            raise GameFormatError(f"infoset ids must be 0..K-1 in order, found {info.id}", infoset=info.id)
        if not info.members:
            raise GameFormatError(f"infoset {idx} has no members", infoset=idx)
        if not info.actions or len(set(info.actions)) != len(info.actions):
            raise GameFormatError(f"infoset {idx} needs distinct actions", infoset=idx)
        if not 1 <= info.owner <= n_players:
            raise GameFormatError(f"infoset {idx} has invalid owner {info.owner}", infoset=idx)
        for m in info.members:
            if not 0 <= m < len(nodes):
                raise GameFormatError(f"infoset {idx}: member {m} does not exist", infoset=idx)
            if m in in_infoset:
                raise GameFormatError(f"node {m} is in infosets {in_infoset[m]} and {idx}", node=m, infoset=idx)
            in_infoset[m] = idx
            node = nodes[m]
            if node.owner != info.owner or node.infoset != idx:
                raise GameFormatError(f"infoset {idx}: member {m} is not a node of player {info.owner}", node=m, infoset=idx)
            if set(node.children) != set(info.actions):
                raise GameFormatError(f"infoset {idx}: member {m} has edges {sorted(node.children)}", node=m, infoset=idx)
    for node in nodes:
        if node.owner > 0 and in_infoset.get(node.id) != node.infoset:
            raise GameFormatError(f"node {node.id} is missing from its infoset", node=node.id)

    for idx, node in enumerate(nodes):
        if node.owner != CHANCE:
            if idx in game.chance:
                raise GameFormatError(f"node {idx} is not a chance node but has a distribution", node=idx)
            continue
        dist = game.chance.get(idx)
        if dist is None:
            raise GameFormatError(f"chance node {idx} has no distribution", node=idx)
        if set(dist) != set(node.children):
            raise GameFormatError(f"chance node {idx}: support differs from its edges", node=idx)
        if any(not p > 0 for p in dist.values()):
            raise GameFormatError(f"chance node {idx}: probabilities must be positive", node=idx)
        if abs(sum(dist.values()) - 1.0) > PROB_TOL:
            raise GameFormatError(f"chance node {idx}: probabilities sum to {sum(dist.values())!r}", node=idx)

    _check_perfect_recall(game)


def _check_perfect_recall(game: Game) -> None:
    # each player's own (infoset, action) sequence, interned to an int per node
    table: Dict[Tuple[int, int, int], int] = {}
    seqs = {j: {game.root: 0} for j in range(1, game.player_count + 1)}
    queue = deque([game.root])
    while queue:
        cur = queue.popleft()
        node = game.nodes[cur]
        for label, child in node.children.items():
            for j, seq in seqs.items():
                if node.owner == j:
                    key = (seq[cur], node.infoset, game.infosets[node.infoset].actions.index(label))
                    seq[child] = table.setdefault(key, len(table) + 1)
                else:
                    seq[child] = seq[cur]
            queue.append(child)
    for info in game.infosets:
        own = seqs[info.owner]
        first = own[info.members[0]]
        for m in info.members[1:]:
            if own[m] != first:
                raise GameFormatError(
                    f"infoset {info.id} violates perfect recall at node {m}", node=m, infoset=info.id
                )


# -----------------------------
# Flat arrays
# -----------------------------
class TreeArrays:
    """Game compiled into flat numpy arrays indexed by node id.

    Decision edges get a global action slot `act_offset[I] + a`, so a whole
    strategy profile is one float vector. Layers hold the non-root nodes of
    each depth, shallowest first.
    """

    def __init__(self, game: Game):
        nodes = game.nodes
        n = len(nodes)
        k = len(game.infosets)
        players = game.player_count

        self.n_nodes = n
        self.n_infosets = k
        self.players = players
        self.root = game.root

        sizes = np.array([len(i.actions) for i in game.infosets], dtype=np.int64)
        self.act_offset = np.zeros(k + 1, dtype=np.int64)
        np.cumsum(sizes, out=self.act_offset[1:])
        self.n_slots = int(self.act_offset[-1])
        self.slot_infoset = np.repeat(np.arange(k, dtype=np.int64), sizes)
        self.slot_action = np.arange(self.n_slots, dtype=np.int64) - self.act_offset[self.slot_infoset]
        self.infoset_owner = np.array([i.owner for i in game.infosets], dtype=np.int64)

        msizes = np.array([len(i.members) for i in game.infosets], dtype=np.int64)
        self.mem_offset = np.zeros(k + 1, dtype=np.int64)
        np.cumsum(msizes, out=self.mem_offset[1:])
        self.members = np.array([m for i in game.infosets for m in i.members], dtype=np.int64)
        self.member_infoset = np.repeat(np.arange(k, dtype=np.int64), msizes)
        self.mem_pos = np.full(n, -1, dtype=np.int64)
        self.mem_pos[self.members] = np.arange(self.members.size, dtype=np.int64)

        self.parent = np.full(n, -1, dtype=np.int64)
        self.depth = np.zeros(n, dtype=np.int64)
        self.owner = np.array([nd.owner for nd in nodes], dtype=np.int64)
        self.infoset = np.array([-1 if nd.infoset is None else nd.infoset for nd in nodes], dtype=np.int64)
        self.action = np.full(n, -1, dtype=np.int64)
        self.slot = np.full(n, -1, dtype=np.int64)
        self.chance_prob = np.ones(n, dtype=np.float64)
        self.utility = np.zeros((n, players), dtype=np.float64)
        self.terminal = self.owner == TERMINAL

        order = []
        queue = deque([game.root])
        while queue:
            cur = queue.popleft()
            order.append(cur)
            node = nodes[cur]
            if node.utility is not None:
                self.utility[cur] = node.utility
            if node.is_decision:
                actions = game.infosets[node.infoset].actions
                base = self.act_offset[node.infoset]
                for a, label in enumerate(actions):
                    c = node.children[label]
                    self.action[c] = a
                    self.slot[c] = base + a
            elif node.is_chance:
                dist = game.chance[cur]
                for a, (label, c) in enumerate(node.children.items()):
                    self.action[c] = a
                    self.chance_prob[c] = dist[label]
            for c in node.children.values():
                self.parent[c] = cur
                self.depth[c] = self.depth[cur] + 1
                queue.append(c)
        self.order = np.array(order, dtype=np.int64)

        non_root = self.order[1:]
        max_depth = int(self.depth.max()) if n else 0
        by_depth = self.depth[non_root]
        self.layers: Tuple[np.ndarray, ...] = tuple(non_root[by_depth == d] for d in range(1, max_depth + 1))
        self.parent_owner = np.full(n, TERMINAL - 1, dtype=np.int64)
        self.parent_owner[non_root] = self.owner[self.parent[non_root]]
        self.decision_children = non_root[self.parent_owner[non_root] > 0]

        self._ranks: Dict[int, np.ndarray] = {}
        self._plans: Dict[int, list] = {}

    def edge_probabilities(self, flat: np.ndarray) -> np.ndarray:
        """Probability of the edge entering each node (1 at the root)."""
        ep = self.chance_prob.copy()
        dc = self.decision_children
        ep[dc] = flat[self.slot[dc]]
        return ep

    def own_rank(self, player: int) -> np.ndarray:
        """Number of `player`'s decisions strictly above each node."""
        rank = self._ranks.get(player)
        if rank is None:
            rank = np.zeros(self.n_nodes, dtype=np.int64)
            for layer in self.layers:
                par = self.parent[layer]
                rank[layer] = rank[par] + (self.owner[par] == player)
            self._ranks[player] = rank
        return rank

    def response_plan(self, player: int) -> list:
        """Child groups for a best-response sweep, deepest rank first.

        Entries are `(rank, deciding, groups)`: `deciding` holds children of
        the player's own rank-`rank` nodes, `groups` the children of every
        rank-`rank` node split by parent depth, deepest first.
        """
        plan = self._plans.get(player)
        if plan is None:
            rank = self.own_rank(player)
            non_root = self.order[1:]
            par = self.parent[non_root]
            prank = rank[par]
            pdepth = self.depth[par]
            own = self.owner[par] == player
            plan = []
            for r in sorted(set(prank.tolist()), reverse=True):
                in_rank = prank == r
                deciding = non_root[in_rank & own]
                groups = []
                for d in sorted(set(pdepth[in_rank].tolist()), reverse=True):
                    groups.append(non_root[in_rank & (pdepth == d)])
                plan.append((r, deciding, groups))
            self._plans[player] = plan
        return plan


# -----------------------------
# Strategies and beliefs
# -----------------------------
def _number(value: Any, error: type, infoset: int, where: str) -> float:
    if isinstance(value, bool):
        raise error(f"infoset {infoset}: {where} has non-numeric probability {value!r}", infoset=infoset)
    try:
        return float(value)
    except (TypeError, ValueError):
        raise error(f"infoset {infoset}: {where} has non-numeric probability {value!r}", infoset=infoset)


class _Rows:
    __slots__ = ("flat", "offsets")

    def __init__(self, flat: np.ndarray, offsets: np.ndarray):
        self.flat = np.asarray(flat, dtype=np.float64)
        self.offsets = offsets

    def __len__(self) -> int:
        return len(self.offsets) - 1

    def row(self, i: int) -> np.ndarray:
        if not 0 <= i < len(self):
            raise UnknownInfosetError(i)
        return self.flat[self.offsets[i]:self.offsets[i + 1]]

    def rows(self) -> List[np.ndarray]:
        return [self.row(i) for i in range(len(self))]

    def copy(self):
        return type(self)(self.flat.copy(), self.offsets)

    def _bad_rows(self, tol: float) -> Optional[Tuple[int, str]]:
        if self.flat.size and (not np.all(np.isfinite(self.flat)) or self.flat.min() < 0):
            bad = int(np.flatnonzero(~np.isfinite(self.flat) | (self.flat < 0))[0])
            return int(np.searchsorted(self.offsets, bad, side="right") - 1), "has a negative or non-finite entry"
        sums = np.add.reduceat(self.flat, self.offsets[:-1]) if len(self) else np.zeros(0)
        off = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if off.size:
            return int(off[0]), f"sums to {sums[off[0]]!r}"
        return None


class StrategyProfile(_Rows):
    """Behavioral profile: one distribution per infoset, stored in action slots."""

    __slots__ = ()

    @classmethod
    def uniform(cls, game: Game) -> "StrategyProfile":
        arr = game.arrays
        sizes = np.diff(arr.act_offset)
        return cls(1.0 / sizes[arr.slot_infoset], arr.act_offset)

    @classmethod
    def from_rows(cls, game: Game, rows: Sequence[Sequence[float]], tol: float = ROW_TOL) -> "StrategyProfile":
        arr = game.arrays
        if len(rows) != arr.n_infosets:
            raise InvalidProfileError(f"expected {arr.n_infosets} rows, got {len(rows)}")
        for i, r in enumerate(rows):
            if len(r) != arr.act_offset[i + 1] - arr.act_offset[i]:
                raise InvalidProfileError(f"row {i} has the wrong length", infoset=i)
        flat = np.concatenate([np.asarray(r, dtype=np.float64) for r in rows]) if rows else np.zeros(0)
        prof = cls(flat, arr.act_offset)
        prof.validate(game, tol)
        return prof

    @classmethod
    def from_mapping(cls, game: Game, mapping: Mapping[Any, Mapping[str, float]], tol: float = ROW_TOL) -> "StrategyProfile":
        rows = []
        if not isinstance(mapping, Mapping):
            raise InvalidProfileError(f"strategy must be an object keyed by infoset, got {type(mapping).__name__}")
        for info in game.infosets:
            row = mapping.get(str(info.id), mapping.get(info.id))
            if row is None:
                raise InvalidProfileError(f"no strategy for infoset {info.id}", infoset=info.id)
            if not isinstance(row, Mapping):
                raise InvalidProfileError(f"infoset {info.id}: strategy must be an object keyed by action", infoset=info.id)
            extra = set(row) - set(info.actions)
            if extra:
                raise InvalidProfileError(f"infoset {info.id}: unknown actions {sorted(extra)}", infoset=info.id)
            rows.append([_number(row.get(a, 0.0), InvalidProfileError, info.id, f"action {a!r}") for a in info.actions])
        return cls.from_rows(game, rows, tol)

    def to_mapping(self, game: Game) -> Dict[str, Dict[str, float]]:
        return {
            str(info.id): {a: float(p) for a, p in zip(info.actions, self.row(info.id))}
            for info in game.infosets
        }

    def validate(self, game: Game, tol: float = ROW_TOL) -> None:
        if self.flat.shape != (game.arrays.n_slots,) or not np.array_equal(self.offsets, game.arrays.act_offset):
            raise InvalidProfileError("profile does not match the game's infosets")
        bad = self._bad_rows(tol)
        if bad is not None:
            raise InvalidProfileError(f"strategy at infoset {bad[0]} {bad[1]}", infoset=bad[0])

    def with_action(self, infoset: int, action: int) -> "StrategyProfile":
        """sigma restricted to a pure `action` at `infoset`."""
        out = self.copy()
        row = out.flat[self.offsets[infoset]:self.offsets[infoset + 1]]
        row[:] = 0.0
        row[action] = 1.0
        return out

    def with_pure(self, pure: "PureStrategy") -> "StrategyProfile":
        out = self.copy()
        for i in np.flatnonzero(pure.actions >= 0):
            row = out.flat[self.offsets[i]:self.offsets[i + 1]]
            row[:] = 0.0
            row[pure.actions[i]] = 1.0
        return out


class BeliefSystem(_Rows):
    """One distribution per infoset over its members, in member order."""

    __slots__ = ()

    @classmethod
    def uniform(cls, game: Game) -> "BeliefSystem":
        arr = game.arrays
        sizes = np.diff(arr.mem_offset)
        return cls(1.0 / sizes[arr.member_infoset], arr.mem_offset)

    @classmethod
    def from_rows(cls, game: Game, rows: Sequence[Sequence[float]], tol: float = ROW_TOL) -> "BeliefSystem":
        arr = game.arrays
        if len(rows) != arr.n_infosets:
            raise InvalidBeliefsError(f"expected {arr.n_infosets} rows, got {len(rows)}")
        for i, r in enumerate(rows):
            if len(r) != arr.mem_offset[i + 1] - arr.mem_offset[i]:
                raise InvalidBeliefsError(f"row {i} has the wrong length", infoset=i)
        flat = np.concatenate([np.asarray(r, dtype=np.float64) for r in rows]) if rows else np.zeros(0)
        beliefs = cls(flat, arr.mem_offset)
        beliefs.validate(game, tol)
        return beliefs

    @classmethod
    def from_mapping(cls, game: Game, mapping: Mapping[Any, Mapping[Any, float]], tol: float = ROW_TOL) -> "BeliefSystem":
        rows = []
        if not isinstance(mapping, Mapping):
            raise InvalidBeliefsError(f"beliefs must be an object keyed by infoset, got {type(mapping).__name__}")
        for info in game.infosets:
            row = mapping.get(str(info.id), mapping.get(info.id))
            if row is None:
                raise InvalidBeliefsError(f"no beliefs for infoset {info.id}", infoset=info.id)
            if not isinstance(row, Mapping):
                raise InvalidBeliefsError(f"infoset {info.id}: beliefs must be an object keyed by node", infoset=info.id)
            norm = {}
            for k, v in row.items():
                try:
                    node = int(k)
                except (TypeError, ValueError):
                    raise InvalidBeliefsError(f"infoset {info.id}: node key {k!r} is not an integer", infoset=info.id)
                norm[node] = _number(v, InvalidBeliefsError, info.id, f"node {node}")
            extra = set(norm) - set(info.members)
            if extra:
                raise InvalidBeliefsError(f"infoset {info.id}: {sorted(extra)} are not members", infoset=info.id)
            rows.append([norm.get(m, 0.0) for m in info.members])
        return cls.from_rows(game, rows, tol)

    def to_mapping(self, game: Game) -> Dict[str, Dict[str, float]]:
        return {
            str(info.id): {str(m): float(p) for m, p in zip(info.members, self.row(info.id))}
            for info in game.infosets
        }

    def validate(self, game: Game, tol: float = ROW_TOL) -> None:
        if self.flat.shape != (game.arrays.members.size,) or not np.array_equal(self.offsets, game.arrays.mem_offset):
            raise InvalidBeliefsError("beliefs do not match the game's infosets")
        bad = self._bad_rows(tol)
        if bad is not None:
            raise InvalidBeliefsError(f"beliefs at infoset {bad[0]} {bad[1]}", infoset=bad[0])

    def of(self, game: Game, node: int) -> float:
        pos = game.arrays.mem_pos[game.node(node).id]
        if pos < 0:
            raise UnknownNodeError(node)
        return float(self.flat[pos])


@dataclass(frozen=True)
class Assessment:
    strategy: StrategyProfile
    beliefs: BeliefSystem

    def validate(self, game: Game, tol: float = ROW_TOL) -> None:
        self.strategy.validate(game, tol)
        self.beliefs.validate(game, tol)


@dataclass(frozen=True)
class PureStrategy:
    """Action index per infoset for one player; -1 at other players' infosets."""

    player: int
    actions: np.ndarray

    def action_at(self, infoset: int) -> int:
        return int(self.actions[infoset])

    def to_mapping(self, game: Game) -> Dict[str, str]:
        return {
            str(i): game.infosets[i].actions[int(self.actions[i])]
            for i in np.flatnonzero(self.actions >= 0)
        }


# -----------------------------
# Builder
# -----------------------------
class GameBuilder:
    """Incremental construction; infosets are grouped by caller-chosen keys.

    Decision-node children may be added in any order; `build` checks that
    every member ends up with exactly the infoset's actions.
    """

    def __init__(self, players: int = 2):
        self.players = players
        self._owner: List[int] = []
        self._parent: List[Optional[Tuple[int, str]]] = []
        self._children: List[Dict[str, int]] = []
        self._label: List[Optional[str]] = []
        self._utility: Dict[int, Tuple[float, ...]] = {}
        self._chance: Dict[int, Dict[str, float]] = {}
        self._infoset_of: Dict[int, int] = {}
        self._keys: Dict[Hashable, int] = {}
        self._infosets: List[Tuple[int, Tuple[str, ...], List[int], Optional[str]]] = []

    def __len__(self) -> int:
        return len(self._owner)

    def add_node(
        self,
        owner: int,
        parent: Optional[int] = None,
        edge: Optional[str] = None,
        label: Optional[str] = None,
    ) -> int:
        idx = len(self._owner)
        if parent is None:
            if idx != 0:
                raise GameFormatError("only the first node may be added without a parent")
            self._parent.append(None)
        else:
            if edge is None or edge in self._children[parent]:
                raise GameFormatError(f"node {parent}: missing or duplicate edge {edge!r}", node=parent)
            self._children[parent][edge] = idx
            self._parent.append((parent, edge))
        self._owner.append(owner)
        self._children.append({})
        self._label.append(label)
        return idx

    def set_chance(self, node: int, dist: Mapping[str, float]) -> None:
        self._chance[node] = dict(dist)

    def set_utility(self, node: int, utility: Sequence[float]) -> None:
        self._utility[node] = tuple(float(x) for x in utility)

    def set_infoset(self, node: int, key: Hashable, actions: Sequence[str], name: Optional[str] = None) -> int:
        actions = tuple(actions)
        idx = self._keys.get(key)
        if idx is None:
            idx = len(self._infosets)
            self._keys[key] = idx
            self._infosets.append((self._owner[node], actions, [], name))
        owner, known, members, _ = self._infosets[idx]
        if known != actions or owner != self._owner[node]:
            raise GameFormatError(f"node {node} does not match infoset {idx}", node=node, infoset=idx)
        members.append(node)
        self._infoset_of[node] = idx
        return idx

    def build(self) -> Game:
        nodes = []
        for idx, owner in enumerate(self._owner):
            children = self._children[idx]
            info = self._infoset_of.get(idx)
            if info is not None:
                order = self._infosets[info][1]
                if set(children) == set(order):
                    children = {a: children[a] for a in order}
            nodes.append(Node(
                id=idx,
                owner=owner,
                parent=self._parent[idx],
                children=children,
                infoset=info,
                utility=self._utility.get(idx),
                label=self._label[idx],
            ))
        infosets = [
            InfoSet(id=i, owner=o, members=tuple(m), actions=a, name=name)
            for i, (o, a, m, name) in enumerate(self._infosets)
        ]
        return Game(self.players, nodes, 0, infosets, self._chance)


# -----------------------------
# JSON interchange
# -----------------------------
def _owner_to_json(owner: int) -> Union[str, int]:
    if owner == CHANCE:
        return "chance"
    if owner == TERMINAL:
        return "terminal"
    return owner


def _owner_from_json(value: Any, node: int) -> int:
    if value == "chance":
        return CHANCE
    if value == "terminal":
        return TERMINAL
    if isinstance(value, int) and not isinstance(value, bool) and value >= 1:
        return value
    raise GameFormatError(f"node {node}: bad owner {value!r}", node=node)


def dump_game(game: Game) -> str:
    """One JSON element per line, so loader errors can point at a line."""
    out = ["{", f'  "players": {game.player_count},', f'  "root": {game.root},', '  "nodes": [']
    for i, node in enumerate(game.nodes):
        obj: Dict[str, Any] = {
            "id": node.id,
            "owner": _owner_to_json(node.owner),
            "infoset": node.infoset,
            "children": dict(node.children),
            "utility": list(node.utility) if node.utility is not None else None,
        }
        if node.label is not None:
            obj["label"] = node.label
        out.append("    " + json.dumps(obj) + ("," if i < len(game.nodes) - 1 else ""))
    out.append("  ],")
    out.append('  "infosets": [')
    for i, info in enumerate(game.infosets):
        obj = {"id": info.id, "owner": info.owner, "members": list(info.members), "actions": list(info.actions)}
        if info.name is not None:
            obj["name"] = info.name
        out.append("    " + json.dumps(obj) + ("," if i < len(game.infosets) - 1 else ""))
    out.append("  ],")
    out.append('  "chance": {')
    keys = sorted(game.chance)
    for i, k in enumerate(keys):
        out.append(f'    "{k}": ' + json.dumps(game.chance[k]) + ("," if i < len(keys) - 1 else ""))
    out.append("  }")
    out.append("}")
    return "\n".join(out) + "\n"


def save_game(game: Game, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_game(game), encoding="utf-8")


def load_game(path: Union[str, Path]) -> Game:
    return parse_game(Path(path).read_text(encoding="utf-8"))


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos] in " \t\r\n":
        pos += 1
    return pos


def _element_lines(text: str, key: str) -> List[int]:
    """1-based line of each element of the top-level array/object `key`."""
    m = re.search(r'"%s"\s*:\s*([\[{])' % re.escape(key), text)
    if not m:
        return []
    decoder = json.JSONDecoder()
    is_obj = m.group(1) == "{"
    pos = m.end()
    lines = []
    try:
        while True:
            pos = _skip_ws(text, pos)
            if pos >= len(text) or text[pos] in "]}":
                break
            if text[pos] == ",":
                pos += 1
                continue
            start = pos
            if is_obj:
                _, pos = decoder.raw_decode(text, pos)
                pos = _skip_ws(text, pos) + 1
                pos = _skip_ws(text, pos)
            _, pos = decoder.raw_decode(text, pos)
            lines.append(text.count("\n", 0, start) + 1)
    except (ValueError, IndexError):
        return lines
    return lines


def parse_game(text: str) -> Game:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise GameFormatError(e.msg, line=e.lineno)
    try:
        return _game_from_dict(data)
    except GameFormatError as e:
        if e.line is not None:
            raise
        line = None
        if e.node is not None:
            node_lines = _element_lines(text, "nodes")
            pos = _node_positions(data).get(e.node)
            if pos is not None and pos < len(node_lines):
                line = node_lines[pos]
        if line is None and e.infoset is not None:
            info_lines = _element_lines(text, "infosets")
            if 0 <= e.infoset < len(info_lines):
                line = info_lines[e.infoset]
        raise GameFormatError(e.detail, line=line, node=e.node, infoset=e.infoset)


def _node_positions(data: Any) -> Dict[int, int]:
    out: Dict[int, int] = {}
    if isinstance(data, dict) and isinstance(data.get("nodes"), list):
        for i, entry in enumerate(data["nodes"]):
            if isinstance(entry, dict) and isinstance(entry.get("id"), int):
                out.setdefault(entry["id"], i)
    return out


def _game_from_dict(data: Any) -> Game:
    if not isinstance(data, dict):
        raise GameFormatError("top level must be an object")
    for key in ("players", "root", "nodes", "infosets", "chance"):
        if key not in data:
            raise GameFormatError(f"missing field {key!r}")
    players = data["players"]
    if not isinstance(players, int) or players < 1:
        raise GameFormatError(f"bad player count {players!r}")
    raw_nodes = data["nodes"]
    if not isinstance(raw_nodes, list):
        raise GameFormatError("nodes must be an array")

    positions: Dict[int, int] = {}
    for i, entry in enumerate(raw_nodes):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), int):
            raise GameFormatError(f"node entry {i} needs an integer id")
        if entry["id"] in positions:
            raise GameFormatError(f"duplicate node id {entry['id']}", node=entry["id"])
        positions[entry["id"]] = i
    if set(positions) != set(range(len(raw_nodes))):
        raise GameFormatError("node ids must be exactly 0..N-1")

    parents: Dict[int, Tuple[int, str]] = {}
    for entry in raw_nodes:
        nid = entry["id"]
        children = entry.get("children") or {}
        if not isinstance(children, dict):
            raise GameFormatError(f"node {nid}: children must be an object", node=nid)
        for label, child in children.items():
            if not isinstance(child, int) or child not in positions:
                raise GameFormatError(f"node {nid}: child {child!r} does not exist", node=nid)
            if child in parents:
                raise GameFormatError(f"node {child} has two parents", node=child)
            parents[child] = (nid, label)

    nodes = []
    for nid in range(len(raw_nodes)):
        entry = raw_nodes[positions[nid]]
        owner = _owner_from_json(entry.get("owner"), nid)
        utility = entry.get("utility")
        if utility is not None:
            if not isinstance(utility, list) or not all(isinstance(x, (int, float)) for x in utility):
                raise GameFormatError(f"node {nid}: utility must be a list of numbers", node=nid)
            utility = tuple(float(x) for x in utility)
        infoset = entry.get("infoset")
        if infoset is not None and not isinstance(infoset, int):
            raise GameFormatError(f"node {nid}: infoset must be an integer", node=nid)
        nodes.append(Node(
            id=nid,
            owner=owner,
            parent=parents.get(nid),
            children={str(k): v for k, v in (entry.get("children") or {}).items()},
            infoset=infoset,
            utility=utility,
            label=entry.get("label"),
        ))

    raw_infosets = data["infosets"]
    if not isinstance(raw_infosets, list):
        raise GameFormatError("infosets must be an array")
    infosets = []
    for i, entry in enumerate(raw_infosets):
        if not isinstance(entry, dict):
            raise GameFormatError(f"infoset entry {i} must be an object", infoset=i)
        try:
            infosets.append(InfoSet(
                id=int(entry["id"]),
                owner=int(entry["owner"]),
                members=tuple(int(m) for m in entry["members"]),
                actions=tuple(str(a) for a in entry["actions"]),
                name=entry.get("name"),
            ))
        except (KeyError, TypeError, ValueError):
            raise GameFormatError(f"infoset entry {i} is malformed", infoset=i)
    infosets.sort(key=lambda x: x.id)

    raw_chance = data["chance"]
    if not isinstance(raw_chance, dict):
        raise GameFormatError("chance must be an object")
    chance: Dict[int, Dict[str, float]] = {}
    for key, dist in raw_chance.items():
        try:
            nid = int(key)
            chance[nid] = {str(lbl): float(p) for lbl, p in dist.items()}
        except (TypeError, ValueError, AttributeError):
            raise GameFormatError(f"chance entry {key!r} is malformed")

    root = data["root"]
    if not isinstance(root, int):
        raise GameFormatError(f"bad root {root!r}")
    return Game(players, nodes, root, infosets, chance)


def dump_assessment(game: Game, assessment: Assessment) -> str:
    data = {
        "strategy": assessment.strategy.to_mapping(game),
        "beliefs": assessment.beliefs.to_mapping(game),
    }
    return json.dumps(data, indent=2) + "\n"


def save_assessment(game: Game, assessment: Assessment, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_assessment(game, assessment), encoding="utf-8")


def parse_assessment(game: Game, text: str, tol: float = ROW_TOL) -> Assessment:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise GameFormatError(e.msg, line=e.lineno)
    if not isinstance(data, dict) or "strategy" not in data or "beliefs" not in data:
        raise GameFormatError("assessment needs 'strategy' and 'beliefs'")
    return Assessment(
        strategy=StrategyProfile.from_mapping(game, data["strategy"], tol),
        beliefs=BeliefSystem.from_mapping(game, data["beliefs"], tol),
    )


def load_assessment(game: Game, path: Union[str, Path], tol: float = ROW_TOL) -> Assessment:
    return parse_assessment(game, Path(path).read_text(encoding="utf-8"), tol)
