"""Game generators and fixtures, plus `resolve_game` for CLI game specs."""
from __future__ import annotations

from pathlib import Path

from ..errors import EfgError
from ..game import Game, load_game
from .bargain import (
    PRESETS,
    BargainParams,
    BargainSimulator,
    bargain_game,
    standard_preset,
    tiny_preset,
)
from .fixtures import ASSESSMENTS, FIXTURES, fixture_games
from .gengoof import GenGoofParams, gen_goof, gengoof_size, private_gen_goof
from .random_game import random_game

__all__ = [
    "ASSESSMENTS",
    "FIXTURES",
    "PRESETS",
    "BargainParams",
    "BargainSimulator",
    "GenGoofParams",
    "bargain_game",
    "fixture_games",
    "gen_goof",
    "gengoof_size",
    "private_gen_goof",
    "random_game",
    "resolve_game",
    "standard_preset",
    "tiny_preset",
]

GAME_SPECS = (
    "gengoof:K[:seed]",
    "private-gengoof:K[:seed]",
    "bargain:tiny[:seed]",
    "bargain:standard|paper[:seed] (summary via gen --preset only)",
    "fixture:NAME",
    "random:NODES[:seed]",
    "<path to game JSON>",
)


def _int(text: str, spec: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise EfgError(f"bad game spec {spec!r}: {text!r} is not an integer")


def resolve_game(spec: str, u_max: float = 10.0) -> Game:
    """Build or load the game named by `spec`; see GAME_SPECS for the forms."""
    kind, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    if kind in ("gengoof", "private-gengoof") and 1 <= len(parts) <= 2:
        seed = _int(parts[1], spec) if len(parts) == 2 else 0
        params = GenGoofParams(k=_int(parts[0], spec), u_max=u_max, seed=seed)
        return gen_goof(params) if kind == "gengoof" else private_gen_goof(params)
    if kind == "bargain" and 1 <= len(parts) <= 2:
        if parts[0] not in PRESETS:
            raise EfgError(f"unknown bargain preset {parts[0]!r}, expected one of {sorted(PRESETS)}")
        if parts[0] != "tiny":
            raise EfgError(f"only the tiny bargain preset can be built as an explicit game, got {parts[0]!r}")
        seed = _int(parts[1], spec) if len(parts) == 2 else 0
        return bargain_game(tiny_preset(seed))
    if kind == "fixture" and len(parts) == 1:
        make = FIXTURES.get(parts[0])
        if make is None:
            raise EfgError(f"unknown fixture {parts[0]!r}, expected one of {sorted(FIXTURES)}")
        return make()
    if kind == "random" and 1 <= len(parts) <= 2:
        seed = _int(parts[1], spec) if len(parts) == 2 else 0
        return random_game(seed, max_nodes=_int(parts[0], spec))
    path = Path(spec)
    if path.exists():
        return load_game(path)
    raise EfgError(f"cannot resolve game {spec!r}; expected one of {', '.join(GAME_SPECS)}")
