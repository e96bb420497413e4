from typing import Any, Optional, Sequence


class EfgError(Exception):
    """Base class for every error raised by pbecfr."""


class ConfigError(EfgError):
    def __init__(self, variable: str, value: Any):
        super().__init__(f"invalid value for {variable}: {value!r}")
        self.variable = variable
        self.value = value


class GameFormatError(EfgError):
    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        node: Optional[int] = None,
        infoset: Optional[int] = None,
    ):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.detail = message
        self.line = line
        self.node = node
        self.infoset = infoset


class InvalidProfileError(EfgError):
    def __init__(self, message: str, infoset: Optional[int] = None):
        super().__init__(message)
        self.infoset = infoset


class InvalidBeliefsError(EfgError):
    def __init__(self, message: str, infoset: Optional[int] = None):
        super().__init__(message)
        self.infoset = infoset


class UnknownNodeError(EfgError):
    def __init__(self, node: Any):
        super().__init__(f"unknown node: {node!r}")
        self.node = node


class UnknownInfosetError(EfgError):
    def __init__(self, infoset: Any):
        super().__init__(f"unknown infoset: {infoset!r}")
        self.infoset = infoset


class UnknownActionError(EfgError):
    def __init__(self, infoset: int, action: Any):
        super().__init__(f"action {action!r} is not available at infoset {infoset}")
        self.infoset = infoset
        self.action = action


class UnknownEdgeError(EfgError):
    def __init__(self, node: int, edge: Any):
        super().__init__(f"node {node} has no edge {edge!r}")
        self.node = node
        self.edge = edge


class UnsupportedGameError(EfgError):
    def __init__(self, player_count: int):
        super().__init__(f"expected a two-player game, got {player_count} players")
        self.player_count = player_count


class SizeGuardError(EfgError):
    def __init__(self, nodes: int, limit: int):
        super().__init__(f"game would have {nodes} nodes, limit is {limit}")
        self.nodes = nodes
        self.limit = limit


class IllegalActionError(EfgError):
    def __init__(self, action: Any, legal: Sequence[Any]):
        super().__init__(f"illegal action {action!r}")
        self.action = action
        self.legal = list(legal)


class BudgetExhaustedError(EfgError):
    def __init__(self, what: str, limit: int):
        super().__init__(f"{what}: budget of {limit} exhausted")
        self.what = what
        self.limit = limit
