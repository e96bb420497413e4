"""Tests for pbecfr.calculus against path walks, leaf enumeration and brute-force best responses."""
from __future__ import annotations

import numpy as np
import pytest

from oracles import best_response_value_by_enumeration, pure_strategies, random_assessment, with_reversed_actions
from pbecfr.calculus import (
    believed_action_utilities,
    believed_action_utility,
    believed_utility,
    best_response,
    expected_utility,
    infoset_reach,
    node_values,
    reach_probability,
    reach_products,
    reach_vectors,
    regret,
    segment_argmax,
)
from pbecfr.errors import InvalidProfileError, UnsupportedGameError
from pbecfr.game import StrategyProfile
from pbecfr.games import fixtures, random_game


def _leaf_enumeration(game, profile):
    total = np.zeros(game.player_count)
    for node in game.nodes:
        if node.is_terminal:
            total += reach_probability(game, profile, node.id).product * np.array(node.utility)
    return total


class TestReach:
    def test_path_walk_factors(self, figure1) -> None:
        sigma = StrategyProfile.uniform(figure1)
        r = reach_probability(figure1, sigma, figure1.node_by_label("ce"))
        assert r.chance == 1.0
        assert r.players == (0.25, 0.5)
        assert r.product == pytest.approx(0.125)

    def test_chance_factor(self) -> None:
        game = fixtures.coin_chance()
        sigma = StrategyProfile.uniform(game)
        r = reach_probability(game, sigma, game.node_by_label("Tt"))
        assert r.chance == pytest.approx(0.375)

    @pytest.mark.parametrize("seed", range(5))
    def test_products_match_path_walk(self, seed) -> None:
        game = random_game(seed, max_nodes=50)
        sigma = random_assessment(game, seed).strategy
        products = reach_products(game, sigma)
        vectors = reach_vectors(game, sigma)
        for node in range(game.num_nodes):
            walk = reach_probability(game, sigma, node)
            assert products[node] == pytest.approx(walk.product, abs=1e-12)
            np.testing.assert_allclose(vectors[node], (walk.chance,) + walk.players, atol=1e-12)

    def test_infoset_reach_sums_members(self, figure1) -> None:
        a = fixtures.figure1_assessment(figure1)
        assert infoset_reach(figure1, a.strategy, 1) == 0.0
        assert infoset_reach(figure1, StrategyProfile.uniform(figure1), 1) == pytest.approx(0.5)

    def test_profile_shape_checked(self, figure1, pennies) -> None:
        with pytest.raises(InvalidProfileError):
            reach_products(figure1, StrategyProfile.uniform(pennies))


class TestUtilities:
    def test_figure1_values(self, figure1) -> None:
        a = fixtures.figure1_assessment(figure1)
        np.testing.assert_allclose(expected_utility(figure1, a.strategy), [3.0, 1.0])
        np.testing.assert_allclose(expected_utility(figure1, a.strategy, figure1.node_by_label("b")), [2.0, 0.0])

    @pytest.mark.parametrize("seed", range(5))
    def test_root_value_matches_leaf_enumeration(self, seed) -> None:
        game = random_game(seed, players=3, max_nodes=60)
        sigma = random_assessment(game, seed).strategy
        np.testing.assert_allclose(expected_utility(game, sigma), _leaf_enumeration(game, sigma), atol=1e-10)

    def test_believed_action_utilities(self, figure1) -> None:
        a = fixtures.figure1_assessment(figure1)
        q, ub = believed_action_utilities(figure1, a)
        np.testing.assert_allclose(q, [3.0, 2.0, 1.0, 0.0, 2.0, 1.0])
        np.testing.assert_allclose(ub, [3.0, 2.0])
        assert believed_utility(figure1, a, 1) == 2.0
        assert believed_action_utility(figure1, a, 1, "f") == 1.0
        assert believed_action_utility(figure1, a, 0, 1) == 2.0

    @pytest.mark.parametrize("seed", range(4))
    def test_vectorised_matches_single_infoset(self, seed) -> None:
        game = random_game(seed, max_nodes=80)
        a = random_assessment(game, seed)
        q, ub = believed_action_utilities(game, a)
        arr = game.arrays
        for info in game.infosets:
            assert ub[info.id] == pytest.approx(believed_utility(game, a, info.id), abs=1e-12)
            for k in range(len(info.actions)):
                expect = believed_action_utility(game, a, info.id, k)
                assert q[arr.act_offset[info.id] + k] == pytest.approx(expect, abs=1e-12)


class TestBestResponse:
    def test_segment_argmax_prefers_lowest_index(self, figure1) -> None:
        values = np.array([1.0, 3.0, 3.0, 0.0, 2.0, 2.0])
        np.testing.assert_array_equal(segment_argmax(figure1.arrays, values), [1, 0])

    def test_pennies_against_pure(self, pennies) -> None:
        sigma = StrategyProfile.uniform(pennies).with_action(1, 0)
        br, value = best_response(pennies, sigma, 1)
        assert br.action_at(0) == 0
        assert br.action_at(1) == -1
        assert value == 1.0
        report = regret(pennies, sigma)
        assert report.per_player == (1.0, 0.0)
        assert report.total == 1.0

    def test_uniform_pennies_is_equilibrium(self, pennies) -> None:
        report = regret(pennies, StrategyProfile.uniform(pennies))
        assert report.total == 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_enumeration(self, seed) -> None:
        game = random_game(seed, max_nodes=30, max_actions=2)
        sigma = random_assessment(game, seed + 100).strategy
        for player in (1, 2):
            if len(pure_strategies(game, player)) > 256:
                continue
            br, value = best_response(game, sigma, player)
            assert value == pytest.approx(best_response_value_by_enumeration(game, sigma, player), abs=1e-10)
            achieved = node_values(game, sigma.with_pure(br))[game.root, player - 1]
            assert achieved == pytest.approx(value, abs=1e-10)

    def test_needs_two_players(self, figure3) -> None:
        with pytest.raises(UnsupportedGameError):
            best_response(figure3, StrategyProfile.uniform(figure3), 1)


class TestInvariance:
    @pytest.mark.parametrize("seed", range(8))
    def test_best_response_ignores_action_order(self, seed) -> None:
        game = random_game(seed, max_nodes=60)
        other = with_reversed_actions(game)
        sigma = random_assessment(game, seed).strategy
        flipped = StrategyProfile.from_rows(other, [row[::-1] for row in sigma.rows()])
        for player in (1, 2):
            assert best_response(other, flipped, player)[1] == pytest.approx(best_response(game, sigma, player)[1], abs=1e-10)
        np.testing.assert_allclose(expected_utility(other, flipped), expected_utility(game, sigma), atol=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_leaf_reach_sums_to_one(self, seed) -> None:
        game = random_game(seed, max_nodes=80)
        for sigma in (StrategyProfile.uniform(game), random_assessment(game, seed, zero_share=0.5).strategy):
            reach = reach_products(game, sigma)
            assert reach[game.arrays.terminal].sum() == pytest.approx(1.0, abs=1e-12)
