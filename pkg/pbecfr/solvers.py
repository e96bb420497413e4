"""CFR baseline and PBE-CFR.

Both solvers run simultaneous full-tree updates with regret matching. One
iteration is a handful of vectorised sweeps over `TreeArrays`, so cost is
linear in T and in the number of nodes.
"""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from .calculus import (
    _node_values,
    check_profile,
    opponent_reach,
    reach_products,
    reach_vectors,
    regret,
    segment_sum,
)
from .errors import EfgError, UnsupportedGameError
from .game import Assessment, BeliefSystem, Game, StrategyProfile, TreeArrays
from .plausibility import surprise_ranks, surprise_weights
from .verify import worst_case_local_regret

log = logging.getLogger(__name__)

ALGORITHMS = ("cfr", "pbe-cfr")


# -----------------------------
# Config and logs
# -----------------------------
@dataclass
class SolveConfig:
    iterations: int
    seed: int = 0
    checkpoint_every: Optional[int] = None
    algorithm: str = "pbe-cfr"
    progress: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise EfgError(f"iterations must be >= 1, got {self.iterations}")
        if self.algorithm not in ALGORITHMS:
            raise EfgError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")
        if self.checkpoint_every is not None and self.checkpoint_every < 1:
            raise EfgError(f"checkpoint_every must be >= 1, got {self.checkpoint_every}")


@dataclass(frozen=True)
class Checkpoint:
    t: int
    wall_ms: float
    regret: float
    lemma2_bound: float
    max_immediate_regret: float
    lemma2_violations: int


LOG_COLUMNS = ("t", "wall_ms", "{metric}", "lemma2_bound", "max_immediate_regret", "lemma2_violations")


@dataclass
class IterationLog:
    algorithm: str
    metric: str
    utility_range: Tuple[float, ...] = ()
    checkpoints: List[Checkpoint] = field(default_factory=list)

    def append(self, cp: Checkpoint) -> None:
        if self.checkpoints and cp.t <= self.checkpoints[-1].t:
            raise EfgError(f"checkpoint {cp.t} is not after {self.checkpoints[-1].t}")
        self.checkpoints.append(cp)

    @property
    def final(self) -> Optional[Checkpoint]:
        return self.checkpoints[-1] if self.checkpoints else None

    def header(self) -> List[str]:
        return [c.format(metric=self.metric) for c in LOG_COLUMNS]

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(self.header())
            for cp in self.checkpoints:
                w.writerow([cp.t, f"{cp.wall_ms:.3f}", repr(cp.regret), repr(cp.lemma2_bound),
                            repr(cp.max_immediate_regret), cp.lemma2_violations])

    @classmethod
    def from_csv(cls, path: Union[str, Path], algorithm: str = "") -> "IterationLog":
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        if not rows:
            raise EfgError(f"{path}: empty log")
        metric = rows[0][2]
        out = cls(algorithm=algorithm or ("cfr" if metric == "exploitability" else "pbe-cfr"), metric=metric)
        for r in rows[1:]:
            out.append(Checkpoint(int(r[0]), float(r[1]), float(r[2]), float(r[3]), float(r[4]), int(r[5])))
        return out


# -----------------------------
# Regret state
# -----------------------------
@dataclass
class RegretState:
    regrets: np.ndarray
    strategy_sum: np.ndarray
    strategy: StrategyProfile
    beliefs: BeliefSystem
    values: np.ndarray
    action_utilities: np.ndarray
    infoset_utilities: np.ndarray
    iteration: int = 0

    @classmethod
    def initial(cls, game: Game) -> "RegretState":
        arr = game.arrays
        return cls(
            regrets=np.zeros(arr.n_slots),
            strategy_sum=np.zeros(arr.n_slots),
            strategy=StrategyProfile.uniform(game),
            beliefs=BeliefSystem.uniform(game),
            values=np.zeros((arr.n_nodes, arr.players)),
            action_utilities=np.zeros(arr.n_slots),
            infoset_utilities=np.zeros(arr.n_infosets),
        )

    def average(self, game: Game) -> StrategyProfile:
        arr = game.arrays
        totals = segment_sum(self.strategy_sum, arr.act_offset)[arr.slot_infoset]
        sizes = np.diff(arr.act_offset)[arr.slot_infoset]
        flat = np.where(totals > 0, self.strategy_sum / np.where(totals > 0, totals, 1.0), 1.0 / sizes)
        return StrategyProfile(flat, arr.act_offset)


def regret_matching(row) -> np.ndarray:
    """Distribution proportional to positive regrets; uniform if none is positive."""
    row = np.asarray(row, dtype=np.float64)
    pos = np.maximum(row, 0.0)
    total = pos.sum()
    if total > 0:
        return pos / total
    return np.full(row.shape, 1.0 / row.size)


def _regret_matching_all(arr: TreeArrays, regrets: np.ndarray) -> np.ndarray:
    pos = np.maximum(regrets, 0.0)
    totals = segment_sum(pos, arr.act_offset)[arr.slot_infoset]
    sizes = np.diff(arr.act_offset)[arr.slot_infoset]
    return np.where(totals > 0, pos / np.where(totals > 0, totals, 1.0), 1.0 / sizes)


def immediate_regrets(game: Game, state: RegretState) -> np.ndarray:
    """max_a R(I, a) / t per infoset after `state.iteration` iterations."""
    arr = game.arrays
    if state.iteration == 0 or arr.n_infosets == 0:
        return np.zeros(arr.n_infosets)
    return np.maximum.reduceat(state.regrets, arr.act_offset[:-1]) / state.iteration


def lemma2_bounds(game: Game, t: int) -> np.ndarray:
    """Delta_u(owner) * |A(I)| / sqrt(t) per infoset."""
    arr = game.arrays
    ranges = np.array([game.utility_range(j) for j in range(1, game.player_count + 1)])
    return ranges[arr.infoset_owner - 1] * np.diff(arr.act_offset) / np.sqrt(t)


def _require_two_players(game: Game) -> None:
    if game.player_count != 2:
        raise UnsupportedGameError(game.player_count)


# -----------------------------
# PBE-CFR
# -----------------------------
def traverse_with_beliefs(game: Game, state: RegretState) -> np.ndarray:
    """One belief-weighted regret update from the root; returns U^E(root).

    Believed action utilities are sum_h mu(h|I) * U^E(ha); the regret of
    action a is its believed utility minus the sigma-weighted one, with no
    opponent-reach factor. The next strategy comes from regret matching
    and the strategy used in this pass is added to the running sum.
    """
    arr = game.arrays
    flat = state.strategy.flat
    state.strategy_sum += flat
    values = _node_values(arr, flat)
    dc = arr.decision_children
    par = arr.parent[dc]
    w = state.beliefs.flat[arr.mem_pos[par]] * values[dc, arr.owner[par] - 1]
    q = np.bincount(arr.slot[dc], weights=w, minlength=arr.n_slots)
    ub = segment_sum(flat * q, arr.act_offset)
    state.regrets += q - ub[arr.slot_infoset]
    state.values = values
    state.action_utilities = q
    state.infoset_utilities = ub
    state.strategy = StrategyProfile(_regret_matching_all(arr, state.regrets), arr.act_offset)
    state.iteration += 1
    return values[arr.root].copy()


def update_beliefs(game: Game, profile: StrategyProfile) -> BeliefSystem:
    """Bayes' rule where the infoset is reachable, plausibility elsewhere.

    Off the path, mass goes to the members with the fewest zero-probability
    edges above them. That set is never empty, and the zero-edge count is a
    total preorder rationalising every row at once, so the result is
    AGM-consistent. Ranking by that count instead of taking every member
    the plausibility order leaves undominated is deliberate: the latter
    can pick incomparable members no single preorder rationalises.

    Within the chosen members, mass follows `surprise_weights` rather than
    a flat split, so an infoset reached with vanishing probability gets
    the beliefs it would get once unreached.
    """
    arr = check_profile(game, profile)
    members = arr.members
    owner_of = arr.member_infoset
    reach = reach_products(game, profile)[members]
    total = segment_sum(reach, arr.mem_offset)
    mu = np.zeros(members.size)
    on = total[owner_of] > 0
    mu[on] = reach[on] / total[owner_of][on]

    off = ~on
    if off.any():
        ranks = surprise_ranks(game, profile)[members]
        least = np.minimum.reduceat(ranks, arr.mem_offset[:-1])
        top = off & (ranks == least[owner_of])
        weights = surprise_weights(game, profile)[members]
        norm = np.bincount(owner_of[top], weights=weights[top], minlength=arr.n_infosets)
        mu[top] = weights[top] / norm[owner_of[top]]
    return BeliefSystem(mu, arr.mem_offset)


def _checkpoint_due(config: SolveConfig, t: int) -> bool:
    if t == config.iterations:
        return True
    return config.checkpoint_every is not None and t % config.checkpoint_every == 0


def _bound_stats(game: Game, state: RegretState, t: int) -> Tuple[float, float, int]:
    bounds = lemma2_bounds(game, t)
    imm = immediate_regrets(game, state)
    if bounds.size == 0:
        return 0.0, 0.0, 0
    return float(bounds.max()), float(imm.max()), int(np.count_nonzero(imm > bounds + 1e-12))


def pbe_cfr(game: Game, config: SolveConfig) -> Tuple[Assessment, IterationLog]:
    _require_two_players(game)
    state = RegretState.initial(game)
    ranges = tuple(game.utility_range(j) for j in (1, 2))
    run_log = IterationLog("pbe-cfr", "worst_case_local_regret", ranges)

    spent = 0.0
    started = time.perf_counter()
    steps = tqdm(range(1, config.iterations + 1), desc="pbe-cfr", leave=False, disable=not config.progress)
    for t in steps:
        traverse_with_beliefs(game, state)
        if t < config.iterations:
            state.beliefs = update_beliefs(game, state.strategy)
        if _checkpoint_due(config, t):
            spent += time.perf_counter() - started
            avg = state.average(game)
            wcl = worst_case_local_regret(game, Assessment(avg, update_beliefs(game, avg)))
            bound, imm, bad = _bound_stats(game, state, t)
            run_log.append(Checkpoint(t, spent * 1000.0, wcl, bound, imm, bad))
            log.info("pbe-cfr t=%d worst_case_local_regret=%.6g lemma2_bound=%.4g", t, wcl, bound)
            started = time.perf_counter()

    strategy = state.average(game)
    return Assessment(strategy, update_beliefs(game, strategy)), run_log


# -----------------------------
# CFR
# -----------------------------
def cfr_iteration(game: Game, state: RegretState) -> np.ndarray:
    """Counterfactual regrets weighted by opponent-and-chance reach."""
    arr = game.arrays
    flat = state.strategy.flat
    reach = reach_vectors(game, state.strategy)
    values = _node_values(arr, flat)
    opp = np.stack([opponent_reach(reach, j) for j in range(1, arr.players + 1)])

    first = arr.members[arr.mem_offset[:-1]]
    own = reach[first, arr.infoset_owner]
    state.strategy_sum += own[arr.slot_infoset] * flat

    dc = arr.decision_children
    par = arr.parent[dc]
    mover = arr.owner[par] - 1
    cf_action = np.bincount(arr.slot[dc], weights=opp[mover, par] * values[dc, mover], minlength=arr.n_slots)
    mem_owner = arr.infoset_owner[arr.member_infoset] - 1
    cf_infoset = np.bincount(
        arr.member_infoset,
        weights=opp[mem_owner, arr.members] * values[arr.members, mem_owner],
        minlength=arr.n_infosets,
    )
    state.regrets += cf_action - cf_infoset[arr.slot_infoset]
    state.values = values
    state.action_utilities = cf_action
    state.infoset_utilities = cf_infoset
    state.strategy = StrategyProfile(_regret_matching_all(arr, state.regrets), arr.act_offset)
    state.iteration += 1
    return values[arr.root].copy()


def cfr_with_log(game: Game, config: SolveConfig) -> Tuple[StrategyProfile, IterationLog]:
    _require_two_players(game)
    state = RegretState.initial(game)
    ranges = tuple(game.utility_range(j) for j in (1, 2))
    run_log = IterationLog("cfr", "exploitability", ranges)

    spent = 0.0
    started = time.perf_counter()
    steps = tqdm(range(1, config.iterations + 1), desc="cfr", leave=False, disable=not config.progress)
    for t in steps:
        cfr_iteration(game, state)
        if _checkpoint_due(config, t):
            spent += time.perf_counter() - started
            avg = state.average(game)
            expl = regret(game, avg).total
            bound, imm, bad = _bound_stats(game, state, t)
            run_log.append(Checkpoint(t, spent * 1000.0, expl, bound, imm, bad))
            log.info("cfr t=%d exploitability=%.6g", t, expl)
            started = time.perf_counter()
    return state.average(game), run_log


def cfr(game: Game, config: SolveConfig) -> StrategyProfile:
    profile, _ = cfr_with_log(game, config)
    return profile


@dataclass(frozen=True)
class SolveResult:
    assessment: Assessment
    log: IterationLog

    @property
    def profile(self) -> StrategyProfile:
        return self.assessment.strategy


def solve(game: Game, config: SolveConfig) -> SolveResult:
    if config.algorithm == "cfr":
        profile, run_log = cfr_with_log(game, config)
        return SolveResult(Assessment(profile, update_beliefs(game, profile)), run_log)
    assessment, run_log = pbe_cfr(game, config)
    return SolveResult(assessment, run_log)
