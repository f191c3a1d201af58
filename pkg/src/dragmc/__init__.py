"""Metropolis sampling with dragged fast variables.

The expensive part of many posteriors depends on a few slow variables;
the rest is cheap.  The dragging kernel proposes a large move of the slow
block, then pulls the fast block across through a ladder of bridging
distributions using only cheap evaluations, paying for a single slow
preparation per proposal.  Plain joint, single-variable and marginal
Metropolis kernels are included as baselines, along with autocorrelation
diagnostics and an experiment harness.
"""

from .diagnostics import (
    AcfTable,
    ChainSummary,
    autocorrelation,
    integrated_autocorr_time,
    rejection_rate,
    summarize_chain,
)
from .errors import ConfigurationError, DegenerateChainError
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    RunResult,
    db_check,
    emit_acf_comparison,
    emit_figure1,
    run_chain,
    run_experiment,
)
from .kernels import (
    DragConfig,
    GaussianWalkProposal,
    KernelStats,
    drag_log_accept_ratio,
    drag_step,
    inner_transition,
    joint_step,
    log_rho_i,
    marginal_step,
    metropolis_accept,
    propose_walk,
    single_var_step,
)
from .models import ChainState, EnergyModel, EvalCounts, SlowContext, initial_state
from .testbed import (
    PROBLEMS,
    DiscreteModel,
    Test1Model,
    Test2Model,
    discrete_drag_transition_matrix,
    discrete_target,
    make_discrete_model,
    test1_conditional_sample,
    test1_energy,
    test1_marginal_energy,
    test2_energy,
)

__version__ = "0.1.0"

__all__ = [
    "AcfTable",
    "ChainState",
    "ChainSummary",
    "ConfigurationError",
    "DegenerateChainError",
    "DiscreteModel",
    "DragConfig",
    "EnergyModel",
    "EvalCounts",
    "ExperimentConfig",
    "ExperimentReport",
    "GaussianWalkProposal",
    "KernelStats",
    "PROBLEMS",
    "RunResult",
    "SlowContext",
    "Test1Model",
    "Test2Model",
    "autocorrelation",
    "db_check",
    "discrete_drag_transition_matrix",
    "discrete_target",
    "drag_log_accept_ratio",
    "drag_step",
    "emit_acf_comparison",
    "emit_figure1",
    "initial_state",
    "inner_transition",
    "integrated_autocorr_time",
    "joint_step",
    "log_rho_i",
    "make_discrete_model",
    "marginal_step",
    "metropolis_accept",
    "propose_walk",
    "rejection_rate",
    "run_chain",
    "run_experiment",
    "single_var_step",
    "summarize_chain",
    "test1_conditional_sample",
    "test1_energy",
    "test1_marginal_energy",
    "test2_energy",
]
