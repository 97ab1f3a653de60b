"""Risk-sensitive abstention for two-action contextual bandits with unbounded losses."""

from .agents import AbstentionAgent, AgentConfig, AgentSpec, confidence_radius, make_baseline
from .analysis import default_schedules, explicit_bound, fit_scaling_exponent, sigma_w, tail_term
from .environments import (
    EnvSpec,
    InputDistribution,
    NoiseModel,
    RewardFunction,
    bin_mean_oracle,
    observe,
    reward_eval,
    sample_input,
    survival,
    validate_env,
)
from .geometry import (
    TrustedRegion,
    bin_key,
    enumerate_trusted_bins,
    is_trusted,
    nearest_point_to_origin,
    unit_ball_volume,
)
from .simulator import audit_good_event, count_precert_commits, monte_carlo, run_episode

__version__ = "0.1.0"

__all__ = [
    "AbstentionAgent", "AgentConfig", "AgentSpec", "confidence_radius", "make_baseline",
    "default_schedules", "explicit_bound", "fit_scaling_exponent", "sigma_w", "tail_term",
    "EnvSpec", "InputDistribution", "NoiseModel", "RewardFunction", "bin_mean_oracle",
    "observe", "reward_eval", "sample_input", "survival", "validate_env",
    "TrustedRegion", "bin_key", "enumerate_trusted_bins", "is_trusted",
    "nearest_point_to_origin", "unit_ball_volume",
    "audit_good_event", "count_precert_commits", "monte_carlo", "run_episode",
]
