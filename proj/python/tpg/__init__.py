"""Threshold public goods mechanisms and Monte Carlo sweeps."""

from ._core import (
    AssignmentPlan,
    CellStats,
    ConfigError,
    CostDistribution,
    CutoffSearch,
    CutoffSolution,
    Infeasible,
    InvalidCutoff,
    MechanismOutcome,
    MechStats,
    Params,
    PivotalMode,
    PlanKind,
    Protocol,
    ProtocolOutcome,
    SweepConfig,
    build_pool,
    floor_contribution,
    g_tilde,
    gamma_star,
    golden_report,
    max_fill,
    noisy_plan_outcome,
    phi,
    pivotal_prob_q,
    play_c,
    protocol_outcome,
    reaches_threshold,
    run_cell,
    run_cli,
    select_cutoff,
    social_welfare,
    sweep,
    water_fill,
)

__version__ = "0.3.0"


def s_outcome(costs, params):
    return protocol_outcome(Protocol.S, costs, params)


def m_outcome(costs, params):
    return protocol_outcome(Protocol.M, costs, params)


def l_outcome(costs, params):
    return protocol_outcome(Protocol.L, costs, params)
