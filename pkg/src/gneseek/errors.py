"""Exception types shared across the package."""


class ShapeError(ValueError):
    """A vector or matrix does not have the shape the game requires."""


class GameDefinitionError(ValueError):
    """A player or game specification is internally inconsistent."""


class PlayerEvaluationError(RuntimeError):
    """A per-player callback raised; carries the player index."""

    def __init__(self, player_index: int, message: str):
        self.player_index = player_index
        super().__init__(f"player {player_index}: {message}")


class SimulationDiverged(RuntimeError):
    """State became non-finite during integration; carries a snapshot."""

    def __init__(self, message: str, snapshot=None):
        self.snapshot = snapshot
        super().__init__(message)


class ConfigError(ValueError):
    """A run configuration failed to parse or validate."""
