"""Semi-device-independent certification of multipartite entangled states
and joint measurements, built around a cooperative guessing game played
through dimension-bounded channels.
"""

from .catalog import (
    clock_shift_channels,
    coloured_noise_bsm,
    dicke_state,
    ghz_basis_measurement,
    ghz_game_strategy,
    ghz_state,
    hybrid_basis_measurement,
    max_entangled_state,
    noisy_bsm,
    noisy_ghz,
    twisted_clock_shift_channels,
    w_state,
)
from .certify import (
    CertificationReport,
    biseparable_bound,
    certify,
    count_npt_operators,
    extractable_ghz_fraction,
    ghz_fraction,
    ghz_visibility_threshold,
    separable_measurement_bound,
)
from .errors import DistributionError, ScenarioError, SizeLimitError, StrategyError
from .game import (
    ChannelFamily,
    GameParams,
    ScoreReport,
    Strategy,
    score,
    score_from_distribution,
    win_target,
)
from .optimize import (
    ConjectureProbe,
    SeesawConfig,
    SeesawResult,
    compression_oracle,
    conjecture_probe,
    maximize_weighted_povm,
    optimal_povm_step,
    random_strategy,
    seesaw,
)

__version__ = "0.1.0"
