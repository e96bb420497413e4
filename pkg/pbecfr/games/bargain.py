"""Alternating-offer bargaining over a public item pool, with outside offers.

`BargainSimulator` plays single episodes as a black box. `bargain_game`
drives the simulator through every chance outcome and action to export a
small instance as an explicit `Game`, keying infosets by each player's
observation.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..config import get_settings, rng
from ..errors import BudgetExhaustedError, EfgError, IllegalActionError, SizeGuardError
from ..game import CHANCE, TERMINAL, Game, GameBuilder

log = logging.getLogger(__name__)

Bundle = Tuple[int, ...]

DEAL = "deal"
WALK = "walk"

STANDARD_POOLS: Tuple[Bundle, ...] = ((2, 0, 3), (3, 1, 2), (1, 2, 2), (1, 4, 2), (0, 0, 5))

EXPORT_MAX_ROUNDS = 2
EXPORT_MAX_OFFERS = 6


@dataclass(frozen=True)
class BargainParams:
    pool: Bundle
    total_value: int = 10
    threshold: float = 5.0
    discount: float = 0.99
    rounds: int = 5
    # uniform over bundles bounded by the pool when None
    outside_support: Optional[Tuple[Bundle, ...]] = None
    seed: int = 0

    def __post_init__(self):
        pool = tuple(int(x) for x in self.pool)
        object.__setattr__(self, "pool", pool)
        if not pool or min(pool) < 0 or sum(pool) == 0:
            raise EfgError(f"pool must be non-negative with at least one item, got {pool}")
        if self.total_value < 1:
            raise EfgError(f"total value must be positive, got {self.total_value}")
        if not 1 < self.threshold < self.total_value:
            raise EfgError(f"threshold must lie strictly between 1 and {self.total_value}")
        if not 0 < self.discount <= 1:
            raise EfgError(f"discount must be in (0, 1], got {self.discount}")
        if self.rounds < 1:
            raise EfgError(f"rounds must be >= 1, got {self.rounds}")
        if self.outside_support is not None:
            support = tuple(tuple(int(x) for x in o) for o in self.outside_support)
            if not support or any(len(o) != len(pool) or min(o) < 0 for o in support):
                raise EfgError("outside offers must be non-negative bundles over the pool's item types")
            object.__setattr__(self, "outside_support", support)

    @property
    def types(self) -> int:
        return len(self.pool)

    @property
    def items(self) -> int:
        return sum(self.pool)

    def offers(self) -> List[Bundle]:
        """Player 1's share of every partition of the pool."""
        return [tuple(b) for b in itertools.product(*(range(p + 1) for p in self.pool))]

    def outside_offers(self) -> Tuple[Bundle, ...]:
        if self.outside_support is not None:
            return self.outside_support
        return tuple(self.offers())


def standard_preset(seed: int = 0, pool_index: Optional[int] = None) -> BargainParams:
    """Three item types, total value 10, threshold 5, discount 0.99, five rounds."""
    idx = seed % len(STANDARD_POOLS) if pool_index is None else pool_index
    return BargainParams(pool=STANDARD_POOLS[idx], total_value=10, threshold=5.0, discount=0.99, rounds=5, seed=seed)


def tiny_preset(seed: int = 0) -> BargainParams:
    """Two single items and one round; small enough to export as an explicit tree."""
    return BargainParams(pool=(1, 1), total_value=3, threshold=2.0, discount=0.9, rounds=1, seed=seed)


# "paper" names the same 2-3 item, 5-round setup as "standard".
PRESETS = {"standard": standard_preset, "paper": standard_preset, "tiny": tiny_preset}


# -----------------------------
# Valuations
# -----------------------------
def _value_box(params: BargainParams) -> List[range]:
    return [range(params.total_value // p + 1) if p > 0 else range(params.total_value + 1) for p in params.pool]


def _jointly_valid(v1: Bundle, v2: Bundle) -> bool:
    every_type_valued = all(a + b > 0 for a, b in zip(v1, v2))
    shared_type = any(a * b > 0 for a, b in zip(v1, v2))
    return every_type_valued and shared_type


def player_valuations(params: BargainParams) -> List[Bundle]:
    """Integer valuations worth exactly `total_value` on the pool."""
    pool = np.array(params.pool)
    return [tuple(v) for v in itertools.product(*_value_box(params)) if int(np.dot(v, pool)) == params.total_value]


def valuation_pairs(params: BargainParams) -> List[Tuple[Bundle, Bundle]]:
    single = player_valuations(params)
    return [(v1, v2) for v1 in single for v2 in single if _jointly_valid(v1, v2)]


def sample_valuations(params: BargainParams, gen: np.random.Generator, max_draws: Optional[int] = None) -> Tuple[Bundle, Bundle]:
    """Uniform draw from the valid pairs by rejection from the value box."""
    limit = get_settings().bargain_max_draws if max_draws is None else max_draws
    box = _value_box(params)
    highs = np.array([len(r) for r in box])
    pool = np.array(params.pool)
    draws = 0

    def one() -> Bundle:
        nonlocal draws
        while draws < limit:
            draws += 1
            v = gen.integers(0, highs)
            if int(np.dot(v, pool)) == params.total_value:
                return tuple(int(x) for x in v)
        raise BudgetExhaustedError("valuation rejection sampling", limit)

    while True:
        v1, v2 = one(), one()
        if _jointly_valid(v1, v2):
            return v1, v2


# -----------------------------
# Actions
# -----------------------------
def offer_label(bundle: Sequence[int], reveal: bool) -> str:
    return "offer:" + ",".join(str(x) for x in bundle) + (":T" if reveal else ":F")


def parse_offer(label: str) -> Tuple[Bundle, bool]:
    _, bundle, flag = label.split(":")
    return tuple(int(x) for x in bundle.split(",")), flag == "T"


def signal(outside: Bundle, valuation: Bundle, threshold: float) -> str:
    return "H" if float(np.dot(outside, valuation)) > threshold else "L"


@dataclass(frozen=True)
class BargainState:
    valuations: Tuple[Bundle, Bundle]
    outside: Tuple[Bundle, Bundle]
    turn: int = 0
    standing: Optional[Bundle] = None
    # public record: (mover, action label, disclosed signal or None)
    history: Tuple[Tuple[int, str, Optional[str]], ...] = ()
    outcome: Optional[str] = None
    payoffs: Optional[Tuple[float, float]] = None

    @property
    def round(self) -> int:
        return self.turn // 2 + 1


class BargainSimulator:
    """One episode at a time; `snapshot`/`restore` expose the immutable state."""

    def __init__(self, params: BargainParams, seed: Optional[int] = None, episode_budget: Optional[int] = None):
        self.params = params
        self._gen = rng(params.seed if seed is None else seed)
        self._offers = params.offers()
        self._outside = params.outside_offers()
        self.episode_budget = episode_budget
        self.episodes = 0
        self.state: Optional[BargainState] = None

    def reset(self) -> BargainState:
        if self.episode_budget is not None and self.episodes >= self.episode_budget:
            raise BudgetExhaustedError("simulator episodes", self.episode_budget)
        self.episodes += 1
        valuations = sample_valuations(self.params, self._gen)
        o1 = self._outside[int(self._gen.integers(len(self._outside)))]
        o2 = self._outside[int(self._gen.integers(len(self._outside)))]
        return self.start(valuations, (o1, o2))

    def start(self, valuations: Tuple[Bundle, Bundle], outside: Tuple[Bundle, Bundle]) -> BargainState:
        self.state = BargainState(valuations=tuple(valuations), outside=tuple(outside))
        return self.state

    def snapshot(self) -> BargainState:
        return self._require()

    def restore(self, state: BargainState) -> None:
        self.state = state

    def _require(self) -> BargainState:
        if self.state is None:
            raise EfgError("simulator has no episode; call reset() first")
        return self.state

    @property
    def is_terminal(self) -> bool:
        return self._require().outcome is not None

    @property
    def current_player(self) -> Optional[int]:
        s = self._require()
        return None if s.outcome is not None else s.turn % 2 + 1

    def legal_actions(self) -> List[str]:
        s = self._require()
        if s.outcome is not None:
            return []
        actions = [DEAL] if s.standing is not None else []
        actions.append(WALK)
        actions.extend(offer_label(b, r) for b in self._offers for r in (False, True))
        return actions

    def step(self, action: str) -> BargainState:
        s = self._require()
        legal = self.legal_actions()
        if action not in legal:
            raise IllegalActionError(action, legal)
        p = self.params
        mover = s.turn % 2 + 1
        rho = s.round
        if action == DEAL:
            share1 = s.standing
            share2 = tuple(a - b for a, b in zip(p.pool, share1))
            scale = p.discount ** (rho - 1)
            pay = (scale * float(np.dot(share1, s.valuations[0])), scale * float(np.dot(share2, s.valuations[1])))
            self.state = replace(s, history=s.history + ((mover, action, None),), outcome="deal", payoffs=pay)
            return self.state
        if action == WALK:
            self.state = self._fail(replace(s, history=s.history + ((mover, action, None),)), "walk", rho)
            return self.state

        bundle, reveal = parse_offer(action)
        disclosed = signal(s.outside[mover - 1], s.valuations[mover - 1], p.threshold) if reveal else None
        nxt = replace(s, turn=s.turn + 1, standing=bundle, history=s.history + ((mover, action, disclosed),))
        if nxt.turn >= 2 * p.rounds:
            nxt = self._fail(nxt, "timeout", p.rounds)
        self.state = nxt
        return nxt

    def _fail(self, s: BargainState, outcome: str, rho: int) -> BargainState:
        scale = self.params.discount ** rho
        pay = tuple(scale * float(np.dot(s.outside[j], s.valuations[j])) for j in (0, 1))
        return replace(s, outcome=outcome, payoffs=pay)

    def observation(self, player: int) -> tuple:
        """Own valuation, outside offer and signal plus the public history."""
        s = self._require()
        j = player - 1
        own = signal(s.outside[j], s.valuations[j], self.params.threshold)
        return (player, s.valuations[j], s.outside[j], own, s.history)

    def payoffs(self) -> Tuple[float, float]:
        s = self._require()
        if s.payoffs is None:
            raise EfgError("episode is not over")
        return s.payoffs


# -----------------------------
# Explicit export
# -----------------------------
def bargain_game(params: BargainParams) -> Game:
    offers = params.offers()
    if params.rounds > EXPORT_MAX_ROUNDS or len(offers) > EXPORT_MAX_OFFERS:
        raise EfgError(
            f"explicit export needs rounds <= {EXPORT_MAX_ROUNDS} and at most {EXPORT_MAX_OFFERS} offers, "
            f"got {params.rounds} rounds and {len(offers)} offers"
        )
    limit = get_settings().max_nodes
    sim = BargainSimulator(params)
    pairs = valuation_pairs(params)
    outside = params.outside_offers()

    b = GameBuilder(players=2)
    root = b.add_node(CHANCE, label="")
    b.set_chance(root, {f"v={v1}|{v2}": 1.0 / len(pairs) for v1, v2 in pairs})
    o_prob = 1.0 / len(outside)

    starts = []
    for v1, v2 in pairs:
        nv = b.add_node(CHANCE, root, f"v={v1}|{v2}")
        b.set_chance(nv, {f"o1={o}": o_prob for o in outside})
        for o1 in outside:
            n1 = b.add_node(CHANCE, nv, f"o1={o1}")
            b.set_chance(n1, {f"o2={o}": o_prob for o in outside})
            for o2 in outside:
                starts.append((n1, f"o2={o2}", sim.start((v1, v2), (o1, o2))))

    stack = list(reversed(starts))
    while stack:
        parent, edge, state = stack.pop()
        if len(b) >= limit:
            raise SizeGuardError(len(b) + len(stack), limit)
        sim.restore(state)
        if sim.is_terminal:
            leaf = b.add_node(TERMINAL, parent, edge)
            b.set_utility(leaf, sim.payoffs())
            continue
        player = sim.current_player
        node = b.add_node(player, parent, edge)
        actions = sim.legal_actions()
        b.set_infoset(node, ("bargain", sim.observation(player)), actions)
        children = []
        for a in actions:
            sim.restore(state)
            children.append((node, a, sim.step(a)))
        stack.extend(reversed(children))

    game = b.build()
    log.debug("exported bargain game: %d nodes, %d infosets", game.num_nodes, len(game.infosets))
    return game
