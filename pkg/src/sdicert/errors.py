"""Exception types shared across the package.

The CLI maps these onto its stable exit codes: ScenarioError -> 2,
StrategyError -> 3, DistributionError -> 4, SizeLimitError -> 5.
"""


class StrategyError(ValueError):
    """A strategy component violates a structural invariant."""


class DistributionError(ValueError):
    """An externally supplied conditional distribution is malformed."""


class ScenarioError(ValueError):
    """A scenario or sweep document failed to parse or validate."""


class SizeLimitError(ValueError):
    """A requested problem size exceeds the documented guard."""
