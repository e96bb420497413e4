"""Plausibility orders over game nodes.

Relations live in a networkx DiGraph: `h ~ g` is a pair of non-strict
edges, `h < g` ("h strictly more plausible") a single strict edge from h to
g. h is at least as plausible as g iff g is reachable from h, so derived
comparisons are transitive by construction. A strongly connected component
holding a strict edge is a contradiction.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Set, Tuple, Union

import networkx as nx
import numpy as np

from .calculus import check_profile
from .errors import UnknownNodeError
from .game import BeliefSystem, Game, StrategyProfile


class Relation(enum.Enum):
    EQUAL = "equal"
    FIRST_MORE_PLAUSIBLE = "first_more_plausible"
    SECOND_MORE_PLAUSIBLE = "second_more_plausible"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class Contradiction:
    """First requirement that conflicts with the order, plus a path proving it.

    `required` is "equal" (pair must be ~) or "strict" (pair[0] < pair[1]);
    `witness` is a chain of nodes along which the opposite relation holds.
    """

    infoset: int
    pair: Tuple[int, int]
    required: str
    witness: Tuple[int, ...]

    def __str__(self) -> str:
        a, b = self.pair
        rel = "~" if self.required == "equal" else "<"
        chain = " -> ".join(str(n) for n in self.witness)
        return f"infoset {self.infoset}: cannot require {a} {rel} {b}; derived along {chain}"

    def to_json(self) -> Dict[str, object]:
        return {
            "infoset": self.infoset,
            "pair": list(self.pair),
            "required": self.required,
            "witness": list(self.witness),
        }


class PlausibilityOrder:
    def __init__(self, game: Game):
        self.game = game
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(range(game.num_nodes))
        self.equal_pairs: Set[FrozenSet[int]] = set()
        self.strict_pairs: Set[Tuple[int, int]] = set()

    def copy(self) -> "PlausibilityOrder":
        out = PlausibilityOrder.__new__(PlausibilityOrder)
        out.game = self.game
        out.graph = self.graph.copy()
        out.equal_pairs = set(self.equal_pairs)
        out.strict_pairs = set(self.strict_pairs)
        return out

    def _edge(self, a: int, b: int, strict: bool) -> None:
        if self.graph.has_edge(a, b):
            self.graph[a][b]["strict"] = self.graph[a][b]["strict"] or strict
        else:
            self.graph.add_edge(a, b, strict=strict)

    def add_equal(self, a: int, b: int) -> None:
        if a == b:
            return
        self.equal_pairs.add(frozenset((a, b)))
        self._edge(a, b, False)
        self._edge(b, a, False)

    def add_strict(self, a: int, b: int) -> None:
        self.strict_pairs.add((a, b))
        self._edge(a, b, True)

    def _check(self, node: int) -> int:
        if not isinstance(node, (int, np.integer)) or not 0 <= node < self.game.num_nodes:
            raise UnknownNodeError(node)
        return int(node)

    def reaches(self, a: int, b: int) -> bool:
        a, b = self._check(a), self._check(b)
        return a == b or nx.has_path(self.graph, a, b)

    def compare(self, a: int, b: int) -> Relation:
        ab = self.reaches(a, b)
        ba = self.reaches(b, a)
        if ab and ba:
            return Relation.EQUAL
        if ab:
            return Relation.FIRST_MORE_PLAUSIBLE
        if ba:
            return Relation.SECOND_MORE_PLAUSIBLE
        return Relation.INCOMPARABLE

    def witness(self, a: int, b: int) -> Tuple[int, ...]:
        return tuple(nx.shortest_path(self.graph, a, b))

    def most_plausible_members(self, infoset: int) -> Tuple[int, ...]:
        members = self.game.infoset(infoset).members
        out = []
        for h in members:
            beaten = any(
                self.compare(g, h) is Relation.FIRST_MORE_PLAUSIBLE for g in members if g != h
            )
            if not beaten:
                out.append(h)
        return tuple(out)

    def has_contradiction(self) -> Optional[Tuple[int, int]]:
        """A strict edge inside a strongly connected component, if any."""
        for comp in nx.strongly_connected_components(self.graph):
            if len(comp) < 2:
                continue
            for a, b, strict in self.graph.subgraph(comp).edges(data="strict"):
                if strict:
                    return a, b
        return None

    def to_json(self) -> Dict[str, List[List[int]]]:
        return {
            "equal": sorted(sorted(p) for p in self.equal_pairs),
            "strict": sorted([a, b] for a, b in self.strict_pairs),
        }


# -----------------------------
# Construction
# -----------------------------
def construct_order_given_profile(game: Game, profile: StrategyProfile) -> PlausibilityOrder:
    arr = check_profile(game, profile)
    order = PlausibilityOrder(game)
    for node in game.nodes:
        if node.is_chance:
            for child in node.children.values():
                order.add_equal(node.id, child)
        elif node.is_decision:
            likely, unlikely = [], []
            for child in node.children.values():
                (likely if profile.flat[arr.slot[child]] > 0 else unlikely).append(child)
            for child in likely:
                order.add_equal(node.id, child)
            for child in unlikely:
                order.add_strict(node.id, child)
            for v in likely:
                for w in unlikely:
                    order.add_strict(v, w)
    return order


def update_order_given_belief(
    order: PlausibilityOrder,
    game: Game,
    beliefs: BeliefSystem,
) -> Union[PlausibilityOrder, Contradiction]:
    beliefs.validate(game)
    out = order.copy()
    for info in game.infosets:
        if len(info.members) < 2:
            continue
        mu = beliefs.row(info.id)
        likely = [h for h, p in zip(info.members, mu) if p > 0]
        unlikely = [h for h, p in zip(info.members, mu) if not p > 0]
        for a, b in combinations(likely, 2):
            rel = out.compare(a, b)
            if rel is Relation.FIRST_MORE_PLAUSIBLE:
                return Contradiction(info.id, (a, b), "equal", out.witness(a, b))
            if rel is Relation.SECOND_MORE_PLAUSIBLE:
                return Contradiction(info.id, (a, b), "equal", out.witness(b, a))
            out.add_equal(a, b)
        for v in likely:
            for w in unlikely:
                if out.reaches(w, v):
                    return Contradiction(info.id, (v, w), "strict", out.witness(w, v))
                out.add_strict(v, w)
    return out


def compare(order: PlausibilityOrder, h1: int, h2: int) -> Relation:
    return order.compare(h1, h2)


def most_plausible_members(order: PlausibilityOrder, infoset: int) -> Tuple[int, ...]:
    return order.most_plausible_members(infoset)


def surprise_ranks(game: Game, profile: StrategyProfile) -> np.ndarray:
    """Zero-probability strategy edges on each node's root path.

    Ranking nodes by this count is a total preorder extending the order
    built by `construct_order_given_profile`: positive edges keep the rank,
    zero edges raise it, chance edges keep it.
    """
    arr = check_profile(game, profile)
    ep = arr.edge_probabilities(profile.flat)
    ranks = np.zeros(arr.n_nodes, dtype=np.int64)
    for layer in arr.layers:
        zero = (arr.parent_owner[layer] > 0) & (ep[layer] == 0)
        ranks[layer] = ranks[arr.parent[layer]] + zero
    return ranks


def surprise_weights(game: Game, profile: StrategyProfile) -> np.ndarray:
    """Reach of every node with each zero-probability strategy edge counted as 1.

    Among nodes of equal surprise rank these are the relative weights Bayes'
    rule assigns in the limit where every unused action is trembled to with
    the same vanishing probability.
    """
    arr = check_profile(game, profile)
    ep = arr.edge_probabilities(profile.flat)
    ep = np.where(ep > 0, ep, 1.0)
    out = np.ones(arr.n_nodes)
    for layer in arr.layers:
        out[layer] = out[arr.parent[layer]] * ep[layer]
    return out
