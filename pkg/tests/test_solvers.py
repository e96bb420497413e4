"""Tests for pbecfr.solvers: regret matching, belief updates, PBE-CFR and the CFR baseline."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import pytest

from oracles import random_assessment
from pbecfr.calculus import expected_utility, regret
from pbecfr.errors import EfgError, UnsupportedGameError
from pbecfr.game import TERMINAL, Assessment, GameBuilder, StrategyProfile
from pbecfr.games import GenGoofParams, fixtures, gen_goof, private_gen_goof, random_game
from pbecfr.solvers import (
    Checkpoint,
    IterationLog,
    RegretState,
    SolveConfig,
    cfr,
    cfr_with_log,
    immediate_regrets,
    lemma2_bounds,
    pbe_cfr,
    regret_matching,
    solve,
    traverse_with_beliefs,
    update_beliefs,
)
from pbecfr.verify import is_agm_consistent, satisfies_bayes, worst_case_local_regret


def _one_choice():
    """Player 1 picks x (worth 1) or y (worth 0); player 2 never moves."""
    b = GameBuilder(players=2)
    root = b.add_node(1, label="")
    b.set_infoset(root, "root", ["x", "y"])
    for edge, u in (("x", 1.0), ("y", 0.0)):
        leaf = b.add_node(TERMINAL, root, edge, edge)
        b.set_utility(leaf, (u, 0.0))
    return b.build()


@lru_cache(maxsize=1)
def _solver_suite():
    games = [random_game(seed, max_nodes=120) for seed in range(12)]
    games.append(gen_goof(GenGoofParams(k=3, seed=1)))
    games.append(private_gen_goof(GenGoofParams(k=3, seed=1)))
    return games


class TestRegretMatching:
    def test_proportional_to_positive_regret(self) -> None:
        np.testing.assert_allclose(regret_matching([1.0, 3.0, -2.0]), [0.25, 0.75, 0.0])

    def test_uniform_without_positive_regret(self) -> None:
        np.testing.assert_allclose(regret_matching([0.0, -1.0]), [0.5, 0.5])


class TestConfig:
    def test_rejects_bad_values(self) -> None:
        with pytest.raises(EfgError):
            SolveConfig(iterations=0)
        with pytest.raises(EfgError):
            SolveConfig(iterations=5, algorithm="cfr+")
        with pytest.raises(EfgError):
            SolveConfig(iterations=5, checkpoint_every=0)

    def test_log_rejects_out_of_order_checkpoints(self) -> None:
        run_log = IterationLog("cfr", "exploitability")
        run_log.append(Checkpoint(10, 1.0, 0.1, 1.0, 0.0, 0))
        with pytest.raises(EfgError):
            run_log.append(Checkpoint(10, 2.0, 0.1, 1.0, 0.0, 0))


class TestUpdateBeliefs:
    def test_off_path_spreads_over_least_surprising(self, figure1) -> None:
        sigma = fixtures.figure1_assessment(figure1).strategy
        np.testing.assert_allclose(update_beliefs(figure1, sigma).row(1), [0.5, 0.5])

    def test_off_path_prefers_fewer_zero_edges(self, figure3) -> None:
        sigma = fixtures.figure3_assessment(figure3).strategy
        mu = update_beliefs(figure3, sigma)
        info = figure3.nodes[figure3.node_by_label("bd")].infoset
        np.testing.assert_allclose(mu.row(info), [1.0, 0.0])

    def test_on_path_is_bayes(self, figure1) -> None:
        sigma = StrategyProfile.from_mapping(figure1, {"0": {"b": 0.2, "c": 0.6, "d": 0.2}, "1": {"e": 1.0}})
        np.testing.assert_allclose(update_beliefs(figure1, sigma).row(1), [0.25, 0.75])

    @pytest.mark.parametrize("p_in", [0.0, 1e-12, 1e-9, 0.5])
    def test_off_path_keeps_chance_odds(self, hidden_draw, p_in) -> None:
        p1 = hidden_draw.nodes[hidden_draw.node_by_label("L")].infoset
        p2 = hidden_draw.nodes[hidden_draw.node_by_label("Lin")].infoset
        sigma = StrategyProfile.from_mapping(hidden_draw, {str(p1): {"in": p_in, "out": 1.0 - p_in}, str(p2): {"y": 1.0}})
        mu = update_beliefs(hidden_draw, sigma)
        assert hidden_draw.infosets[p2].members == (hidden_draw.node_by_label("Lin"), hidden_draw.node_by_label("Rin"))
        np.testing.assert_allclose(mu.row(p2), [0.8, 0.2], atol=1e-12)
        assert is_agm_consistent(hidden_draw, Assessment(sigma, mu)).passed

    @pytest.mark.parametrize("seed", range(3))
    def test_hidden_outcome_beliefs_ignore_the_profile(self, seed) -> None:
        game = private_gen_goof(GenGoofParams(k=3, seed=seed))
        expected = update_beliefs(game, StrategyProfile.uniform(game))
        sigma = random_assessment(game, seed, zero_share=0.5).strategy
        np.testing.assert_allclose(update_beliefs(game, sigma).flat, expected.flat, atol=1e-12)


class TestTraversal:
    @pytest.mark.parametrize("seed", range(3))
    def test_root_value_matches_expected_utility(self, seed) -> None:
        game = random_game(seed, max_nodes=80)
        state = RegretState.initial(game)
        value = traverse_with_beliefs(game, state)
        np.testing.assert_allclose(value, expected_utility(game, StrategyProfile.uniform(game)), atol=1e-12)
        assert state.iteration == 1
        np.testing.assert_allclose(state.strategy_sum, StrategyProfile.uniform(game).flat)

    def test_bounds_and_immediate_regret(self, pennies) -> None:
        np.testing.assert_allclose(lemma2_bounds(pennies, 4), [2.0, 2.0])
        state = RegretState.initial(pennies)
        np.testing.assert_array_equal(immediate_regrets(pennies, state), [0.0, 0.0])


class TestPbeCfr:
    def test_single_decision_converges_exactly(self) -> None:
        game = _one_choice()
        assessment, run_log = pbe_cfr(game, SolveConfig(iterations=100))
        np.testing.assert_allclose(assessment.strategy.row(0), [0.995, 0.005])
        assert run_log.final.regret == pytest.approx(0.005)
        assert run_log.final.t == 100

    def test_pennies_stays_uniform(self, pennies) -> None:
        assessment, run_log = pbe_cfr(pennies, SolveConfig(iterations=500))
        np.testing.assert_array_equal(assessment.strategy.flat, [0.5, 0.5, 0.5, 0.5])
        assert worst_case_local_regret(pennies, assessment) == 0.0
        assert run_log.final.lemma2_violations == 0

    def test_checkpoint_log(self, pennies, tmp_path) -> None:
        _, run_log = pbe_cfr(pennies, SolveConfig(iterations=50, checkpoint_every=10))
        assert [cp.t for cp in run_log.checkpoints] == [10, 20, 30, 40, 50]
        assert run_log.metric == "worst_case_local_regret"
        assert all(cp.wall_ms >= 0 for cp in run_log.checkpoints)
        path = tmp_path / "log.csv"
        run_log.to_csv(path)
        assert path.read_text().splitlines()[0] == (
            "t,wall_ms,worst_case_local_regret,lemma2_bound,max_immediate_regret,lemma2_violations"
        )
        back = IterationLog.from_csv(path)
        assert back.algorithm == "pbe-cfr"
        assert [cp.t for cp in back.checkpoints] == [10, 20, 30, 40, 50]
        assert back.final.lemma2_bound == run_log.final.lemma2_bound

    def test_needs_two_players(self, figure3) -> None:
        with pytest.raises(UnsupportedGameError):
            pbe_cfr(figure3, SolveConfig(iterations=5))

    @pytest.mark.parametrize("index", range(14))
    def test_output_is_consistent(self, index) -> None:
        game = _solver_suite()[index]
        assessment, _ = pbe_cfr(game, SolveConfig(iterations=200))
        assert satisfies_bayes(game, assessment, tol=1e-9).passed
        assert is_agm_consistent(game, assessment).passed

    @pytest.mark.parametrize("index", range(14))
    def test_immediate_regret_within_bound(self, index) -> None:
        game = _solver_suite()[index]
        _, run_log = pbe_cfr(game, SolveConfig(iterations=200, checkpoint_every=20))
        assert len(run_log.checkpoints) == 10
        for cp in run_log.checkpoints:
            assert cp.lemma2_violations == 0
            assert cp.max_immediate_regret <= cp.lemma2_bound + 1e-12

    def test_hidden_outcome_game_settles(self) -> None:
        game = private_gen_goof(GenGoofParams(k=3, seed=0))
        assessment, run_log = pbe_cfr(game, SolveConfig(iterations=500))
        assert worst_case_local_regret(game, assessment) < 1.0
        assert run_log.final.regret == pytest.approx(worst_case_local_regret(game, assessment))

    def test_deterministic(self) -> None:
        game = random_game(3, max_nodes=100)
        first, _ = pbe_cfr(game, SolveConfig(iterations=50, seed=4))
        second, _ = pbe_cfr(game, SolveConfig(iterations=50, seed=4))
        np.testing.assert_array_equal(first.strategy.flat, second.strategy.flat)
        np.testing.assert_array_equal(first.beliefs.flat, second.beliefs.flat)


class TestCfr:
    def test_single_decision(self) -> None:
        profile, run_log = cfr_with_log(_one_choice(), SolveConfig(iterations=100, algorithm="cfr"))
        np.testing.assert_allclose(profile.row(0), [0.995, 0.005])
        assert run_log.metric == "exploitability"
        assert run_log.final.regret == pytest.approx(0.005)

    def test_pennies_stays_uniform(self, pennies) -> None:
        profile = cfr(pennies, SolveConfig(iterations=500, algorithm="cfr"))
        np.testing.assert_array_equal(profile.flat, [0.5, 0.5, 0.5, 0.5])
        assert regret(pennies, profile).total == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_zero_sum_exploitability_bound(self, seed) -> None:
        game = random_game(seed, max_nodes=80, zero_sum=True)
        t = 300
        profile = cfr(game, SolveConfig(iterations=t, algorithm="cfr"))
        arr = game.arrays
        a_max = int(np.diff(arr.act_offset).max())
        bound = sum(
            game.utility_range(j) * len(game.infosets_of(j)) * np.sqrt(a_max) / np.sqrt(t) for j in (1, 2)
        )
        total = regret(game, profile).total
        assert -1e-9 <= total <= bound + 1e-9

    def test_solve_dispatch(self, pennies) -> None:
        result = solve(pennies, SolveConfig(iterations=20, algorithm="cfr"))
        assert result.log.algorithm == "cfr"
        assert result.profile is result.assessment.strategy
        assert satisfies_bayes(pennies, result.assessment).passed
        assert solve(pennies, SolveConfig(iterations=20)).log.algorithm == "pbe-cfr"


@pytest.mark.slow
class TestAcceptanceScale:
    def test_pennies_ten_thousand_iterations(self, pennies) -> None:
        for alg in ("cfr", "pbe-cfr"):
            result = solve(pennies, SolveConfig(iterations=10_000, algorithm=alg))
            assert np.max(np.abs(result.profile.flat - 0.5)) <= 0.02
            assert worst_case_local_regret(pennies, result.assessment) <= 0.02

    @pytest.mark.parametrize("seed", range(100))
    def test_consistency_over_random_suite(self, seed) -> None:
        game = random_game(seed, max_nodes=500)
        assessment, run_log = pbe_cfr(game, SolveConfig(iterations=2000, checkpoint_every=100))
        assert satisfies_bayes(game, assessment, tol=1e-9).passed
        assert is_agm_consistent(game, assessment).passed
        assert all(cp.lemma2_violations == 0 for cp in run_log.checkpoints)
