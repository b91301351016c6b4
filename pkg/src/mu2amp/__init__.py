"""Simulation and benchmarking of mu^2-amplifiers acting on coherent states.

A mu^2-amplifier is a probabilistic number-cutoff amplifier followed by a
phase-insensitive linear amplifier.  The package provides truncated
Fock-space numerics, the two stages as quantum channels, a brute-force
two-mode reference, closed-form figures of merit, Q-function tools and a
CLI that writes the resulting datasets.
"""

from .channels import (
    RunRecord,
    amplified_cutoff,
    first_stage,
    immaculate_apply,
    linear_amp_channel,
    mu2_amplify,
    pure_loss,
)
from .design import AmplifierSpec, StageDesign, design_stages
from .errors import CutoffInsufficient, InvalidSpec, Mu2AmpError, SingularOrdering, SuboptimalSpec
from .fock import (
    DensityOperator,
    FockVector,
    QuadratureStats,
    antinormal_moment,
    coherent_density,
    coherent_state,
    density_from_vector,
    fidelity_coherent,
    normal_moment,
    number_state,
    quadrature_stats,
    trace_distance,
)
from .metrics import (
    BumpReport,
    Regime,
    alpha0,
    bump_report,
    e_trunc,
    fidelity_exact,
    noise_figure,
    p_success_exact,
    p_success_region,
    pfp_bound,
    pfp_exact,
    pfp_region,
    regime_classify,
    spec_metrics,
)
from .oracle import thermal_state, two_mode_amplify
from .quasiprob import (
    GridSpec,
    QGrid,
    amplified_q,
    q_evaluator,
    q_function,
    q_grid,
    q_rescale,
    snr_number,
    snr_quadratures_antinormal,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
