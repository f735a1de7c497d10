"""Network MIMO with distributed CSIT: precoders, schemes and DoF analysis."""

from .analysis import (
    dof_achievable_k3,
    dof_baseline,
    dof_centralized_bound,
    dof_weak,
    figure_curves,
    fit_dof_slope,
    fit_exponent,
    is_weak_regime,
)
from .config import ConfigError, ExperimentConfig
from .model import CsitScalingVector, draw_channel, draw_estimates
from .precoding import ApZfPartition, PassiveSeed, composite_apzf, leakage, perfect_apzf
from .quantization import QuantizerConfig, quantize
from .schemes import run_arbitrary_k3, run_baseline_zf, run_toy, run_weak

__version__ = "0.1.0"
