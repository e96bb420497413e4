"""Small hand-built games used as worked examples and test fixtures.

Node labels are history strings ("" for the root, "be" for b then e) so
tests can address nodes with `game.node_by_label`.
"""
from __future__ import annotations

from typing import Callable, Dict, Sequence

from ..game import CHANCE, TERMINAL, Assessment, BeliefSystem, Game, GameBuilder, StrategyProfile


def _leaf(b: GameBuilder, parent: int, edge: str, label: str, utility: Sequence[float]) -> int:
    node = b.add_node(TERMINAL, parent, edge, label)
    b.set_utility(node, utility)
    return node


def figure1() -> Game:
    """Player 1 picks a/b/c/d; player 2 sees only that b or c was picked.

    Utilities are chosen so that (a, e) with belief 1 on c is sequentially
    rational: a gives player 1 the most, and e beats f for player 2 at c.
    """
    b = GameBuilder(players=2)
    root = b.add_node(1, label="")
    b.set_infoset(root, "root", ["a", "b", "c", "d"])
    _leaf(b, root, "a", "a", (3.0, 1.0))
    nb = b.add_node(2, root, "b", "b")
    nc = b.add_node(2, root, "c", "c")
    _leaf(b, root, "d", "d", (0.0, 0.0))
    b.set_infoset(nb, "bc", ["e", "f"])
    b.set_infoset(nc, "bc", ["e", "f"])
    _leaf(b, nb, "e", "be", (2.0, 0.0))
    _leaf(b, nb, "f", "bf", (0.0, 3.0))
    _leaf(b, nc, "e", "ce", (1.0, 2.0))
    _leaf(b, nc, "f", "cf", (4.0, 1.0))
    return b.build()


def figure1_assessment(game: Game) -> Assessment:
    strategy = StrategyProfile.from_mapping(game, {"0": {"a": 1.0}, "1": {"e": 1.0}})
    c = game.node_by_label("c")
    beliefs = BeliefSystem.from_mapping(game, {"0": {"0": 1.0}, "1": {str(c): 1.0}})
    return Assessment(strategy, beliefs)


def figure3() -> Game:
    """Three players; player 3 cannot tell bd from be."""
    b = GameBuilder(players=3)
    root = b.add_node(1, label="")
    b.set_infoset(root, "root", ["a", "b", "c"])
    _leaf(b, root, "a", "a", (1.0, 1.0, 1.0))
    nb = b.add_node(2, root, "b", "b")
    nc = b.add_node(3, root, "c", "c")
    b.set_infoset(nb, "b", ["d", "e"])
    b.set_infoset(nc, "c", ["f", "g"])
    nbd = b.add_node(3, nb, "d", "bd")
    nbe = b.add_node(3, nb, "e", "be")
    b.set_infoset(nbd, "bd-be", ["h", "k"])
    b.set_infoset(nbe, "bd-be", ["h", "k"])
    _leaf(b, nbd, "h", "bdh", (0.0, 2.0, 1.0))
    _leaf(b, nbd, "k", "bdk", (2.0, 0.0, 0.0))
    _leaf(b, nbe, "h", "beh", (0.0, 1.0, 0.0))
    _leaf(b, nbe, "k", "bek", (1.0, 1.0, 2.0))
    _leaf(b, nc, "f", "cf", (2.0, 2.0, 2.0))
    _leaf(b, nc, "g", "cg", (0.0, 0.0, 0.0))
    return b.build()


def figure3_assessment(game: Game, belief_be: float = 1.0) -> Assessment:
    """sigma = (c; d; f, h) with belief `belief_be` on be at player 3's pair."""
    info = game.infosets[game.nodes[game.node_by_label("bd")].infoset]
    bd, be = game.node_by_label("bd"), game.node_by_label("be")
    strategy = {}
    beliefs = {}
    for i in game.infosets:
        beliefs[str(i.id)] = {str(i.members[0]): 1.0}
    strategy[str(game.nodes[game.root].infoset)] = {"c": 1.0}
    strategy[str(game.nodes[game.node_by_label("b")].infoset)] = {"d": 1.0}
    strategy[str(game.nodes[game.node_by_label("c")].infoset)] = {"f": 1.0}
    strategy[str(info.id)] = {"h": 1.0}
    beliefs[str(info.id)] = {str(bd): 1.0 - belief_be, str(be): belief_be}
    return Assessment(
        StrategyProfile.from_mapping(game, strategy),
        BeliefSystem.from_mapping(game, beliefs),
    )


def matching_pennies() -> Game:
    """Player 2 moves without seeing player 1's coin; +1 to player 1 on a match."""
    b = GameBuilder(players=2)
    root = b.add_node(1, label="")
    b.set_infoset(root, "p1", ["H", "T"])
    for first in ("H", "T"):
        node = b.add_node(2, root, first, first)
        b.set_infoset(node, "p2", ["H", "T"])
        for second in ("H", "T"):
            u = 1.0 if first == second else -1.0
            _leaf(b, node, second, first + second, (u, -u))
    return b.build()


def assessments_example() -> Game:
    """Three players: 1 moves U/D, 2 answers at U or D, then 3 after U or 1 again after D."""
    b = GameBuilder(players=3)
    root = b.add_node(1, label="")
    b.set_infoset(root, "1-root", ["U", "D"])
    nu = b.add_node(2, root, "U", "U")
    nd = b.add_node(2, root, "D", "D")
    b.set_infoset(nu, "2-U", ["L", "R"])
    b.set_infoset(nd, "2-D", ["A", "B"])
    payoff = {
        "ULX": (1.0, 2.0, 0.0), "ULY": (0.0, 1.0, 3.0),
        "URX": (2.0, 0.0, 1.0), "URY": (1.0, 1.0, 2.0),
        "DAP": (3.0, 0.0, 0.0), "DAQ": (0.0, 2.0, 1.0),
        "DBP": (2.0, 2.0, 1.0), "DBQ": (1.0, 3.0, 0.0),
    }
    for second in ("L", "R"):
        node = b.add_node(3, nu, second, "U" + second)
        b.set_infoset(node, "3", ["X", "Y"])
        for third in ("X", "Y"):
            _leaf(b, node, third, "U" + second + third, payoff["U" + second + third])
    for second in ("A", "B"):
        node = b.add_node(1, nd, second, "D" + second)
        b.set_infoset(node, "1-D", ["P", "Q"])
        for third in ("P", "Q"):
            _leaf(b, node, third, "D" + second + third, payoff["D" + second + third])
    return b.build()


def assessments_example_assessment(game: Game) -> Assessment:
    def info_of(label: str) -> str:
        return str(game.nodes[game.node_by_label(label)].infoset)

    strategy = {
        info_of(""): {"U": 1.0 / 3.0, "D": 2.0 / 3.0},
        info_of("DA"): {"P": 1.0},
        info_of("U"): {"L": 0.5, "R": 0.5},
        info_of("D"): {"B": 1.0},
        info_of("UL"): {"Y": 1.0},
    }
    beliefs = {
        info_of(""): {str(game.root): 1.0},
        info_of("DA"): {str(game.node_by_label("DB")): 1.0},
        info_of("U"): {str(game.node_by_label("U")): 1.0},
        info_of("D"): {str(game.node_by_label("D")): 1.0},
        info_of("UL"): {str(game.node_by_label("UL")): 0.5, str(game.node_by_label("UR")): 0.5},
    }
    return Assessment(
        StrategyProfile.from_mapping(game, strategy),
        BeliefSystem.from_mapping(game, beliefs),
    )


def coin_chance() -> Game:
    """Pure chance tree: a fair coin, then a biased one."""
    b = GameBuilder(players=2)
    root = b.add_node(CHANCE, label="")
    b.set_chance(root, {"H": 0.5, "T": 0.5})
    for first in ("H", "T"):
        node = b.add_node(CHANCE, root, first, first)
        b.set_chance(node, {"h": 0.25, "t": 0.75})
        for second in ("h", "t"):
            _leaf(b, node, second, first + second, (1.0 if second == "h" else 0.0, 0.0))
    return b.build()


def hidden_draw(p_left: float = 0.8) -> Game:
    """Chance draws L or R unseen; player 1 stays out or lets player 2 move, still blind to the draw."""
    b = GameBuilder(players=2)
    root = b.add_node(CHANCE, label="")
    b.set_chance(root, {"L": p_left, "R": 1.0 - p_left})
    for draw, pay in (("L", 1.0), ("R", -1.0)):
        node = b.add_node(1, root, draw, draw)
        b.set_infoset(node, "1", ["in", "out"])
        _leaf(b, node, "out", draw + "out", (0.0, 0.0))
        inner = b.add_node(2, node, "in", draw + "in")
        b.set_infoset(inner, "2", ["x", "y"])
        _leaf(b, inner, "x", draw + "inx", (pay, -pay))
        _leaf(b, inner, "y", draw + "iny", (-pay, pay))
    return b.build()


FIXTURES: Dict[str, Callable[[], Game]] = {
    "figure1": figure1,
    "figure3": figure3,
    "matching_pennies": matching_pennies,
    "assessments_example": assessments_example,
}

ASSESSMENTS: Dict[str, Callable[[Game], Assessment]] = {
    "figure1": figure1_assessment,
    "figure3": figure3_assessment,
    "assessments_example": assessments_example_assessment,
}


def fixture_games() -> Dict[str, Game]:
    return {name: make() for name, make in FIXTURES.items()}
