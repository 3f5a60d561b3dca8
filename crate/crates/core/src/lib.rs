//! Polarization analysis for two-sided discussion graphs.
//!
//! The library measures how polarized a follow graph is with the random-walk
//! controversy score (RWC) and plans which external high-popularity,
//! high-neutrality accounts to add to the graph so that the score drops the
//! most. It also ships the synthetic-graph generators and robustness
//! simulations used to study those plans.
//!
//! The building blocks:
//!
//! - [`graph`]: directed follow graphs, partition labels, candidate pools,
//!   file ingestion and mutation (node addition, edge removal).
//! - [`rwc`]: the controversy score, estimated by seeded Monte Carlo walks or
//!   solved exactly as an absorbing Markov chain on small graphs.
//! - [`selection`]: popularity/neutrality scoring, Fagin top-k ranking, and
//!   greedy per-candidate selection of the best additions.
//! - [`sim`]: two-block synthetic graphs, candidate-pool generation, baseline
//!   strategy sweeps, and the unfollow robustness simulation.
//!
//! All score math is generic over the floating-point type via [`num::Real`];
//! the `*64` aliases at the crate root pin `f64`, which is what the CLI uses.

pub mod error;
pub mod graph;
pub mod num;
pub mod rwc;
pub mod seed;
pub mod selection;
pub mod sim;

pub use error::{Error, Result};
pub use graph::{
    Candidate, CandidateId, CandidatePool, DirectedGraph, GraphBuilder, Label, NodeId,
    PartitionLabeling, Side,
};
pub use rwc::{
    estimate_rwc, exact_rwc, exact_rwc_with_hubs, run_walk, select_hubs, EdgeMode, EvalMode,
    HubSet, RwcEstimate, RwcEvaluator, WalkConfig, WalkOutcome, EXACT_NODE_GUARD,
};
pub use selection::{
    evaluate_candidates, fagin_top_c, neutrality_score, score_pool, select_addition_plan,
    AdditionPlan, CandidateScore, SelectedNode,
};
pub use sim::{
    generate_candidate_pool, generate_polarized_graph, run_baseline_comparison,
    run_unfollow_simulation, BaselineRow, BaselineTable, CandidatePoolParams, DegreeDist,
    NeutralityDist, PolarizedGraphParams, Strategy, UnfollowCurve,
};

/// `f64` instantiations of the generic score types.
pub type RwcEstimate64 = rwc::RwcEstimate<f64>;
pub type CandidateScore64 = selection::CandidateScore<f64>;
pub type AdditionPlan64 = selection::AdditionPlan<f64>;
pub type BaselineTable64 = sim::BaselineTable<f64>;
pub type UnfollowCurve64 = sim::UnfollowCurve<f64>;
