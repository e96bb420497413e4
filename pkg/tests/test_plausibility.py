"""Tests for pbecfr.plausibility: order construction, belief updates, contradiction certificates."""
from __future__ import annotations

import numpy as np
import pytest

from oracles import random_assessment
from pbecfr.calculus import reach_products
from pbecfr.errors import UnknownNodeError
from pbecfr.game import StrategyProfile
from pbecfr.games import fixtures, random_game
from pbecfr.plausibility import (
    Contradiction,
    PlausibilityOrder,
    Relation,
    compare,
    construct_order_given_profile,
    most_plausible_members,
    surprise_ranks,
    surprise_weights,
    update_order_given_belief,
)


class TestConstruct:
    def test_figure1_relations(self, figure1) -> None:
        a = fixtures.figure1_assessment(figure1)
        order = construct_order_given_profile(figure1, a.strategy)
        n = figure1.node_by_label
        assert compare(order, figure1.root, n("a")) is Relation.EQUAL
        assert compare(order, figure1.root, n("b")) is Relation.FIRST_MORE_PLAUSIBLE
        assert compare(order, n("b"), figure1.root) is Relation.SECOND_MORE_PLAUSIBLE
        assert compare(order, n("a"), n("c")) is Relation.FIRST_MORE_PLAUSIBLE
        assert compare(order, n("be"), n("bf")) is Relation.FIRST_MORE_PLAUSIBLE
        assert compare(order, n("b"), n("c")) is Relation.INCOMPARABLE
        assert compare(order, n("be"), n("ce")) is Relation.INCOMPARABLE

    def test_transitive_through_chains(self, figure1) -> None:
        a = fixtures.figure1_assessment(figure1)
        order = construct_order_given_profile(figure1, a.strategy)
        # root ~ a < b ~ be < bf, so root < bf without a stored pair
        n = figure1.node_by_label
        assert frozenset((figure1.root, n("bf"))) not in order.equal_pairs
        assert compare(order, figure1.root, n("bf")) is Relation.FIRST_MORE_PLAUSIBLE
        assert order.witness(figure1.root, n("bf"))[0] == figure1.root

    def test_chance_edges_are_equal(self) -> None:
        game = fixtures.coin_chance()
        order = construct_order_given_profile(game, StrategyProfile.uniform(game))
        for node in range(game.num_nodes):
            assert compare(order, game.root, node) is Relation.EQUAL

    @pytest.mark.parametrize("seed", range(3))
    def test_fully_mixed_profile_makes_everything_equal(self, seed) -> None:
        game = random_game(seed, max_nodes=60)
        order = construct_order_given_profile(game, StrategyProfile.uniform(game))
        assert all(compare(order, game.root, h) is Relation.EQUAL for h in range(game.num_nodes))
        assert order.has_contradiction() is None

    def test_unknown_node(self, figure1) -> None:
        order = construct_order_given_profile(figure1, StrategyProfile.uniform(figure1))
        with pytest.raises(UnknownNodeError):
            compare(order, 0, 99)


class TestUpdate:
    def test_figure1_belief_adds_strict_pair(self, figure1) -> None:
        a = fixtures.figure1_assessment(figure1)
        base = construct_order_given_profile(figure1, a.strategy)
        updated = update_order_given_belief(base, figure1, a.beliefs)
        assert isinstance(updated, PlausibilityOrder)
        b, c = figure1.node_by_label("b"), figure1.node_by_label("c")
        assert compare(updated, c, b) is Relation.FIRST_MORE_PLAUSIBLE
        assert most_plausible_members(updated, 1) == (c,)
        # the input order is left alone
        assert compare(base, b, c) is Relation.INCOMPARABLE
        assert most_plausible_members(base, 1) == (b, c)

    def test_figure3_strict_contradiction(self, figure3) -> None:
        a = fixtures.figure3_assessment(figure3, belief_be=1.0)
        order = construct_order_given_profile(figure3, a.strategy)
        result = update_order_given_belief(order, figure3, a.beliefs)
        bd, be = figure3.node_by_label("bd"), figure3.node_by_label("be")
        assert isinstance(result, Contradiction)
        assert result.required == "strict"
        assert result.pair == (be, bd)
        assert result.witness == (bd, be)
        assert result.to_json()["witness"] == [bd, be]
        assert f"{bd} -> {be}" in str(result)

    def test_figure3_equal_contradiction(self, figure3) -> None:
        a = fixtures.figure3_assessment(figure3, belief_be=0.5)
        order = construct_order_given_profile(figure3, a.strategy)
        result = update_order_given_belief(order, figure3, a.beliefs)
        bd, be = figure3.node_by_label("bd"), figure3.node_by_label("be")
        assert isinstance(result, Contradiction)
        assert result.required == "equal"
        assert result.witness == (bd, be)

    def test_figure3_belief_on_bd_is_consistent(self, figure3) -> None:
        a = fixtures.figure3_assessment(figure3, belief_be=0.0)
        order = construct_order_given_profile(figure3, a.strategy)
        result = update_order_given_belief(order, figure3, a.beliefs)
        assert isinstance(result, PlausibilityOrder)
        assert result.has_contradiction() is None

    def test_has_contradiction_detects_strict_cycle(self, figure1) -> None:
        order = PlausibilityOrder(figure1)
        order.add_strict(1, 2)
        order.add_equal(2, 3)
        assert order.has_contradiction() is None
        order.add_equal(3, 1)
        assert order.has_contradiction() == (1, 2)

    def test_to_json_lists_pairs(self, figure1) -> None:
        order = PlausibilityOrder(figure1)
        order.add_equal(3, 1)
        order.add_strict(1, 2)
        assert order.to_json() == {"equal": [[1, 3]], "strict": [[1, 2]]}


class TestSurpriseRanks:
    def test_figure1(self, figure1) -> None:
        a = fixtures.figure1_assessment(figure1)
        ranks = surprise_ranks(figure1, a.strategy)
        expect = {"": 0, "a": 0, "b": 1, "c": 1, "d": 1, "be": 1, "bf": 2, "ce": 1, "cf": 2}
        for label, r in expect.items():
            assert ranks[figure1.node_by_label(label)] == r

    @pytest.mark.parametrize("seed", range(3))
    def test_rank_extends_constructed_order(self, seed) -> None:
        game = random_game(seed, max_nodes=60)
        sigma = random_assessment(game, seed).strategy
        order = construct_order_given_profile(game, sigma)
        ranks = surprise_ranks(game, sigma)
        for a, b in order.strict_pairs:
            assert ranks[a] < ranks[b]
        for pair in order.equal_pairs:
            a, b = tuple(pair)
            assert ranks[a] == ranks[b]
        assert np.all(ranks >= 0)


class TestSurpriseWeights:
    def _sigma(self, game, p_in):
        p1 = game.nodes[game.node_by_label("L")].infoset
        p2 = game.nodes[game.node_by_label("Lin")].infoset
        return StrategyProfile.from_mapping(game, {str(p1): {"in": p_in, "out": 1.0 - p_in}, str(p2): {"x": 1.0}})

    def test_unused_action_counts_as_one(self, hidden_draw) -> None:
        weights = surprise_weights(hidden_draw, self._sigma(hidden_draw, 0.0))
        n = hidden_draw.node_by_label
        assert weights[n("Lin")] == pytest.approx(0.8)
        assert weights[n("Rin")] == pytest.approx(0.2)
        assert weights[n("Linx")] == pytest.approx(0.8)
        assert weights[n("Liny")] == pytest.approx(0.8)
        assert surprise_ranks(hidden_draw, self._sigma(hidden_draw, 0.0))[n("Liny")] == 2

    def test_matches_reach_when_nothing_is_unused(self, hidden_draw) -> None:
        sigma = StrategyProfile.uniform(hidden_draw)
        np.testing.assert_allclose(surprise_weights(hidden_draw, sigma), reach_products(hidden_draw, sigma))

    @pytest.mark.parametrize("seed", range(3))
    def test_always_positive(self, seed) -> None:
        game = random_game(seed, max_nodes=60)
        assert np.all(surprise_weights(game, random_assessment(game, seed).strategy) > 0)
