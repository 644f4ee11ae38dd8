"""Trust-weighted true/false message cascades with a self-learning
re-weighting loop, closed-form spread metrics on chain/star/bridged-chain
networks, and Monte Carlo estimators cross-validated against exact oracles."""

from .cascade import (CascadeOutcome, Delivery, MeasuredStratification,
                      MessageKind, ModelConfig, SpreadStats, estimate_stats,
                      run_cascade, sample_spread_counts, stratification_mc)
from .formulas import (ChainMetrics, CrossoverMetrics, StarMetrics,
                       StratificationProfile, SumMode, chain_ifa_scaling,
                       chain_metrics, crossover_metrics, geometric_sum,
                       relative_improvement, star_metrics,
                       stratification_profile)
from .graph import (NodeKind, TopologySpec, TrustGraph, build, build_bridged_chains,
                    build_chain, build_star, set_limit_weights)
from .learning import (LearningConfig, TrainingReport, has_converged,
                       reweight_on_receipt, train)
from .oracle import ExpectedSpread, enumerate_expected_spread, tree_expected_spread

__all__ = [
    "CascadeOutcome", "Delivery", "MeasuredStratification", "MessageKind",
    "ModelConfig", "SpreadStats", "estimate_stats", "run_cascade",
    "sample_spread_counts", "stratification_mc",
    "ChainMetrics", "CrossoverMetrics", "StarMetrics", "StratificationProfile",
    "SumMode", "chain_ifa_scaling", "chain_metrics", "crossover_metrics",
    "geometric_sum", "relative_improvement", "star_metrics", "stratification_profile",
    "NodeKind", "TopologySpec", "TrustGraph", "build", "build_bridged_chains",
    "build_chain", "build_star", "set_limit_weights",
    "LearningConfig", "TrainingReport", "has_converged", "reweight_on_receipt", "train",
    "ExpectedSpread", "enumerate_expected_spread", "tree_expected_spread",
]
