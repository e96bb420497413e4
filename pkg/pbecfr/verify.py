"""Checks for the three PBE conditions plus the regret diagnostics."""
from __future__ import annotations

from typing import Any, Dict, NamedTuple, Optional, Tuple

import numpy as np

from .calculus import (
    believed_action_utilities,
    believed_utility,
    check_assessment,
    reach_products,
    response_sweep,
    segment_sum,
)
from .config import get_settings
from .game import Assessment, Game
from .plausibility import Contradiction, construct_order_given_profile, update_order_given_belief


class RationalityCheck(NamedTuple):
    passed: bool
    max_violation: float
    witness: Optional[Tuple[int, str]]


class BayesCheck(NamedTuple):
    passed: bool
    max_deviation: float


class AgmCheck(NamedTuple):
    passed: bool
    certificate: Optional[Contradiction]


class PbeReport(NamedTuple):
    sequential_rationality: RationalityCheck
    bayes: BayesCheck
    agm: AgmCheck

    @property
    def passed(self) -> bool:
        return self.sequential_rationality.passed and self.bayes.passed and self.agm.passed

    def failures(self) -> Tuple[str, ...]:
        names = []
        if not self.sequential_rationality.passed:
            names.append("sequential_rationality")
        if not self.bayes.passed:
            names.append("bayes")
        if not self.agm.passed:
            names.append("agm")
        return tuple(names)

    def to_json(self) -> Dict[str, Any]:
        sr = self.sequential_rationality
        witness = None if sr.witness is None else {"infoset": sr.witness[0], "action": sr.witness[1]}
        cert = self.agm.certificate
        return {
            "sequential_rationality": {"pass": sr.passed, "max_violation": sr.max_violation, "witness": witness},
            "bayes": {"pass": self.bayes.passed, "max_deviation": self.bayes.max_deviation},
            "agm": {"pass": self.agm.passed, "certificate": None if cert is None else cert.to_json()},
        }


def _local_gains(game: Game, assessment: Assessment) -> np.ndarray:
    arr = check_assessment(game, assessment)
    q, ub = believed_action_utilities(game, assessment)
    return q - ub[arr.slot_infoset]


def is_sequentially_rational(game: Game, assessment: Assessment, tol: Optional[float] = None) -> RationalityCheck:
    """Single-infoset pure deviations, scored by believed utility."""
    tol = get_settings().tol if tol is None else tol
    gains = _local_gains(game, assessment)
    if gains.size == 0:
        return RationalityCheck(True, 0.0, None)
    slot = int(np.argmax(gains))
    arr = game.arrays
    infoset = int(arr.slot_infoset[slot])
    witness = (infoset, game.infosets[infoset].actions[int(arr.slot_action[slot])])
    worst = max(0.0, float(gains[slot]))
    return RationalityCheck(worst <= tol, worst, witness)


def worst_case_local_regret(game: Game, assessment: Assessment) -> float:
    gains = _local_gains(game, assessment)
    return max(0.0, float(gains.max())) if gains.size else 0.0


def satisfies_bayes(game: Game, assessment: Assessment, tol: Optional[float] = None) -> BayesCheck:
    tol = get_settings().tol if tol is None else tol
    arr = check_assessment(game, assessment)
    mu = assessment.beliefs.flat
    if arr.n_infosets == 0:
        return BayesCheck(True, 0.0)

    sums = segment_sum(mu, arr.mem_offset)
    worst = float(np.max(np.abs(sums - 1.0)))
    if mu.size:
        worst = max(worst, float(-min(0.0, mu.min())))

    reach = reach_products(game, assessment.strategy)[arr.members]
    total = segment_sum(reach, arr.mem_offset)
    reachable = total[arr.member_infoset] > 0
    if reachable.any():
        bayes = reach[reachable] / total[arr.member_infoset][reachable]
        worst = max(worst, float(np.max(np.abs(mu[reachable] - bayes))))
    return BayesCheck(worst <= tol, worst)


def is_agm_consistent(game: Game, assessment: Assessment) -> AgmCheck:
    order = construct_order_given_profile(game, assessment.strategy)
    result = update_order_given_belief(order, game, assessment.beliefs)
    if isinstance(result, Contradiction):
        return AgmCheck(False, result)
    return AgmCheck(True, None)


def is_pbe(game: Game, assessment: Assessment, tol: Optional[float] = None) -> PbeReport:
    return PbeReport(
        sequential_rationality=is_sequentially_rational(game, assessment, tol),
        bayes=satisfies_bayes(game, assessment, tol),
        agm=is_agm_consistent(game, assessment),
    )


def full_believed_regret(game: Game, assessment: Assessment, infoset: int) -> float:
    """Gain of the best pure continuation from `infoset` down, under its beliefs.

    Decision weights below a member h are mu(h) times the chance and
    opponent probabilities between h and the node; the owner's own edges
    carry weight 1 because the continuation strategy picks them.
    """
    arr = check_assessment(game, assessment)
    info = game.infoset(infoset)
    owner = info.owner
    flat = assessment.strategy.flat
    ep = arr.edge_probabilities(flat)

    weights = np.zeros(arr.n_nodes)
    members = np.asarray(info.members, dtype=np.int64)
    mu = assessment.beliefs.row(info.id)
    weights[members] = mu
    factor = np.where(arr.parent_owner == owner, 1.0, ep)
    for layer in arr.layers:
        weights[layer] += weights[arr.parent[layer]] * factor[layer]

    _, values = response_sweep(arr, flat, owner, weights)
    best = float(np.dot(mu, values[members]))
    return max(0.0, best - believed_utility(game, assessment, info.id))
