"""Tree-exploiting PSRO with an exact best-response oracle.

The empirical game is the true game with each infoset's actions cut down
to an allowed set that grows over epochs. Every epoch solves the empirical
game with the meta-strategy solver, computes exact best responses in the
true game, adds best-response actions at up to M sampled infosets per
player, and scores a CFR solution of the grown game by its regret in the
true game.
"""
from __future__ import annotations

import csv
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from .calculus import believed_action_utilities, best_response, reach_products, regret, segment_sum
from .config import get_settings, rng
from .errors import EfgError, SizeGuardError
from .game import Assessment, Game, GameBuilder, StrategyProfile
from .solvers import SolveConfig, cfr, pbe_cfr, update_beliefs

log = logging.getLogger(__name__)

MSS_CHOICES = ("ne", "pbe")

Allowed = Dict[int, FrozenSet[int]]


# -----------------------------
# Config and records
# -----------------------------
@dataclass
class PsroConfig:
    true_game: Game
    mss: str = "pbe"
    growth: int = 2
    epochs: int = 30
    iterations: int = 500
    seed: int = 0
    payoffs: str = "exact"
    temperature: float = 1.0
    progress: bool = False

    def __post_init__(self):
        if self.mss not in MSS_CHOICES:
            raise EfgError(f"unknown meta-strategy solver {self.mss!r}, expected one of {MSS_CHOICES}")
        if self.growth < 1:
            raise EfgError(f"growth must be >= 1, got {self.growth}")
        if self.epochs < 1:
            raise EfgError(f"epochs must be >= 1, got {self.epochs}")
        if self.iterations < 1:
            raise EfgError(f"iterations must be >= 1, got {self.iterations}")
        if self.temperature < 0:
            raise EfgError(f"temperature must be >= 0, got {self.temperature}")
        parse_payoff_mode(self.payoffs)

    @property
    def mc_samples(self) -> Optional[int]:
        return parse_payoff_mode(self.payoffs)


def parse_payoff_mode(text: str) -> Optional[int]:
    """Draws per chance node for 'mc:N', None for 'exact'."""
    if text == "exact":
        return None
    kind, _, n = text.partition(":")
    if kind == "mc" and n.isdigit() and int(n) > 0:
        return int(n)
    raise EfgError(f"payoff mode must be 'exact' or 'mc:N', got {text!r}")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    empirical_nodes: int
    empirical_infosets: int
    eval_regret: float
    added: int


EPOCH_COLUMNS = ("epoch", "empirical_nodes", "eval_regret", "empirical_infosets", "added")


def write_epochs(records: Sequence[EpochRecord], path: Union[str, Path]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(EPOCH_COLUMNS)
        for r in records:
            w.writerow([r.epoch, r.empirical_nodes, repr(r.eval_regret), r.empirical_infosets, r.added])


def read_epochs(path: Union[str, Path]) -> List[EpochRecord]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    return [
        EpochRecord(
            epoch=int(r["epoch"]),
            empirical_nodes=int(r["empirical_nodes"]),
            empirical_infosets=int(r["empirical_infosets"]),
            eval_regret=float(r["eval_regret"]),
            added=int(r["added"]),
        )
        for r in rows
    ]


# -----------------------------
# Empirical game
# -----------------------------
@dataclass(frozen=True)
class EmpiricalMaps:
    """Empirical node/infoset ids to true ids, and empirical action order per infoset."""

    nodes: Tuple[int, ...]
    infosets: Tuple[int, ...]
    actions: Tuple[Tuple[int, ...], ...]


def estimate_chance(game: Game, node: int, samples: int, seed: int) -> Dict[str, float]:
    """Empirical outcome frequencies from `samples` draws; unseen outcomes are dropped."""
    dist = game.chance[node]
    labels = list(dist)
    counts = rng([seed, node]).multinomial(samples, [dist[a] for a in labels])
    seen = {a: int(c) for a, c in zip(labels, counts) if c > 0}
    total = sum(seen.values())
    return {a: c / total for a, c in seen.items()}


def restrict_game(
    true_game: Game,
    allowed: Mapping[int, FrozenSet[int]],
    mc_samples: Optional[int] = None,
    seed: int = 0,
) -> Tuple[Game, EmpiricalMaps]:
    """The subtree reachable through allowed actions and (observed) chance outcomes."""
    limit = get_settings().max_nodes
    b = GameBuilder(players=true_game.player_count)
    node_map: List[int] = []
    info_map: Dict[int, int] = {}
    info_actions: Dict[int, Tuple[int, ...]] = {}

    queue = deque([(true_game.root, None, None)])
    while queue:
        true_id, parent, edge = queue.popleft()
        node = true_game.nodes[true_id]
        emp = b.add_node(node.owner, parent, edge, node.label)
        node_map.append(true_id)
        if len(node_map) > limit:
            raise SizeGuardError(len(node_map), limit)
        if node.is_terminal:
            b.set_utility(emp, node.utility)
        elif node.is_chance:
            if mc_samples is None:
                dist = true_game.chance[true_id]
            else:
                dist = estimate_chance(true_game, true_id, mc_samples, seed)
            b.set_chance(emp, dist)
            for label in dist:
                queue.append((node.children[label], emp, label))
        else:
            info = true_game.infosets[node.infoset]
            keep = tuple(sorted(allowed[info.id]))
            labels = [info.actions[a] for a in keep]
            eid = b.set_infoset(emp, info.id, labels, info.name)
            info_map[eid] = info.id
            info_actions[eid] = keep
            for label in labels:
                queue.append((node.children[label], emp, label))

    game = b.build()
    maps = EmpiricalMaps(
        nodes=tuple(node_map),
        infosets=tuple(info_map[i] for i in range(len(game.infosets))),
        actions=tuple(info_actions[i] for i in range(len(game.infosets))),
    )
    return game, maps


def lift_profile(
    true_game: Game,
    maps: EmpiricalMaps,
    profile: StrategyProfile,
    allowed: Mapping[int, FrozenSet[int]],
) -> StrategyProfile:
    """Empirical profile as a true-game profile; uniform over allowed actions elsewhere."""
    arr = true_game.arrays
    flat = np.zeros(arr.n_slots)
    for info in true_game.infosets:
        acts = sorted(allowed[info.id])
        flat[arr.act_offset[info.id] + np.array(acts)] = 1.0 / len(acts)
    for eid, tid in enumerate(maps.infosets):
        row = flat[arr.act_offset[tid]:arr.act_offset[tid + 1]]
        row[:] = 0.0
        row[list(maps.actions[eid])] = profile.row(eid)
    return StrategyProfile(flat, arr.act_offset)


def initial_allowed(true_game: Game, seed: int) -> Allowed:
    """One seeded pure action per infoset."""
    gen = rng([seed, 0])
    return {
        info.id: frozenset({int(gen.integers(len(info.actions)))})
        for info in true_game.infosets
    }


# -----------------------------
# Growth heuristic
# -----------------------------
def softmax_infoset_sampler(
    gains: Mapping[int, float],
    m: int,
    temperature: float = 1.0,
    seed: Union[int, Sequence[int], np.random.Generator, None] = None,
) -> Tuple[int, ...]:
    """Draw up to `m` infosets without replacement from softmax(gain / temperature).

    Perturbing each scaled gain with Gumbel noise and keeping the top `m`
    is the same as sequential sampling without replacement. Temperature 0
    keeps the `m` largest gains, lowest infoset id first on ties.
    """
    if temperature < 0 or not np.isfinite(temperature):
        raise EfgError(f"temperature must be finite and >= 0, got {temperature}")
    if m < 1 or not gains:
        return ()
    keys = sorted(gains)
    values = np.array([gains[k] for k in keys], dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise EfgError("gains must be finite")
    take = min(m, len(keys))
    if temperature == 0:
        order = np.argsort(-values, kind="stable")
    else:
        gen = seed if isinstance(seed, np.random.Generator) else rng(seed)
        # shifted so the best gain scores 0; tiny temperatures send the rest to -inf, never nan
        with np.errstate(over="ignore"):
            scores = (values - values.max()) / temperature + gen.gumbel(size=values.size)
        order = np.argsort(-scores, kind="stable")
    return tuple(keys[i] for i in order[:take])


def br_gains(
    true_game: Game,
    target: StrategyProfile,
    allowed: Mapping[int, FrozenSet[int]],
    player: int,
) -> Tuple[Dict[int, float], Dict[int, int]]:
    """Believed gain of the best-response action at each candidate infoset.

    Candidates are the player's infosets whose best-response action is not
    yet allowed and that are reached when the player switches to the best
    response. Gains are believed utility differences under the target and
    its plausibility-based beliefs.
    """
    br, _ = best_response(true_game, target, player)
    arr = true_game.arrays
    reach = reach_products(true_game, target.with_pure(br))[arr.members]
    infoset_reach = segment_sum(reach, arr.mem_offset)
    q, ub = believed_action_utilities(true_game, Assessment(target, update_beliefs(true_game, target)))

    gains: Dict[int, float] = {}
    actions: Dict[int, int] = {}
    for i in true_game.infosets_of(player):
        a = br.action_at(i)
        if a in allowed[i] or not infoset_reach[i] > 0:
            continue
        gains[i] = float(q[arr.act_offset[i] + a] - ub[i])
        actions[i] = a
    return gains, actions


# -----------------------------
# Loop
# -----------------------------
def _solve_meta(empirical: Game, config: PsroConfig, mss: str) -> StrategyProfile:
    solve_config = SolveConfig(iterations=config.iterations, seed=config.seed, algorithm="cfr" if mss == "ne" else "pbe-cfr")
    if mss == "ne":
        return cfr(empirical, solve_config)
    assessment, _ = pbe_cfr(empirical, solve_config)
    return assessment.strategy


def _evaluate(config: PsroConfig, allowed: Allowed, epoch: int, added: int) -> Tuple[EpochRecord, Game, EmpiricalMaps]:
    """Build the empirical game and score its CFR solution in the true game."""
    true_game = config.true_game
    empirical, maps = restrict_game(true_game, allowed, config.mc_samples, config.seed)
    solution = _solve_meta(empirical, config, "ne")
    lifted = lift_profile(true_game, maps, solution, allowed)
    eval_regret = max(0.0, regret(true_game, lifted).total)
    record = EpochRecord(epoch, empirical.num_nodes, len(empirical.infosets), eval_regret, added)
    return record, empirical, maps


def run_psro(config: PsroConfig) -> List[EpochRecord]:
    """Record 0 is the initial empirical game; records 1..E follow each growth step."""
    true_game = config.true_game
    if true_game.player_count != 2:
        raise EfgError(f"PSRO needs a two-player game, got {true_game.player_count} players")
    allowed = initial_allowed(true_game, config.seed)
    first, empirical, maps = _evaluate(config, allowed, 0, 0)
    records = [first]
    log.info("psro epoch 0: %d nodes, eval regret %.6g", first.empirical_nodes, first.eval_regret)

    epochs = tqdm(range(1, config.epochs + 1), desc=f"psro-{config.mss}", leave=False, disable=not config.progress)
    for epoch in epochs:
        target = lift_profile(true_game, maps, _solve_meta(empirical, config, config.mss), allowed)

        gen = rng([config.seed, epoch])
        grown = dict(allowed)
        added = 0
        for player in (1, 2):
            gains, actions = br_gains(true_game, target, allowed, player)
            for i in softmax_infoset_sampler(gains, config.growth, config.temperature, gen):
                grown[i] = allowed[i] | {actions[i]}
                added += 1
        allowed = grown

        record, empirical, maps = _evaluate(config, allowed, epoch, added)
        records.append(record)
        log.info("psro epoch %d: %d nodes, %d added, eval regret %.6g",
                 epoch, record.empirical_nodes, added, record.eval_regret)
    return records
