"""Covert multi-user communication performance model.

Closed-form detection error and reliable transmission probabilities for
a slot-hopping covert link under a wideband energy detector, Monte
Carlo oracles for every closed form, feasible-power and user-capacity
solvers, and a desk-scale dynamic spectrum-occupation scheduler.
"""

from .analytic import (
    covert_rate,
    dep,
    false_alarm_prob,
    miss_detection_conditional,
    miss_detection_prob,
    rtp,
)
from .montecarlo import (
    EstimateWithError,
    RngSpec,
    detector_statistic_samples,
    simulate_detector,
    simulate_rate,
    simulate_rtp,
)
from .optimizer import (
    CapacityResult,
    InfeasibleError,
    MonotonicityError,
    OptimalPowerResult,
    PowerBounds,
    max_users,
    optimal_power,
    power_lower_bound,
    power_upper_bound,
)
from .params import SystemParams, power_from_snr_db, snr_db_from_power
from .scheduler import (
    GREEDY_BELIEF,
    POLICIES,
    RANDOM_HOP,
    BeliefState,
    EpisodeStats,
    GridConfig,
    OccupancyGrid,
    OverloadError,
    decide,
    run_episode,
    run_episode_trace,
    sense,
    update_beliefs,
)
from .specfun import ConvergenceError, SeriesControl

__version__ = "0.1.0"

__all__ = [
    "BeliefState",
    "CapacityResult",
    "ConvergenceError",
    "EpisodeStats",
    "EstimateWithError",
    "GREEDY_BELIEF",
    "GridConfig",
    "InfeasibleError",
    "MonotonicityError",
    "OccupancyGrid",
    "OptimalPowerResult",
    "OverloadError",
    "POLICIES",
    "PowerBounds",
    "RANDOM_HOP",
    "RngSpec",
    "SeriesControl",
    "SystemParams",
    "covert_rate",
    "decide",
    "dep",
    "detector_statistic_samples",
    "false_alarm_prob",
    "max_users",
    "miss_detection_conditional",
    "miss_detection_prob",
    "optimal_power",
    "power_from_snr_db",
    "power_lower_bound",
    "power_upper_bound",
    "rtp",
    "run_episode",
    "run_episode_trace",
    "sense",
    "simulate_detector",
    "simulate_rate",
    "simulate_rtp",
    "snr_db_from_power",
    "update_beliefs",
]
