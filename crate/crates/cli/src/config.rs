//! Declarative experiment configuration: a TOML document merged with
//! command-line overrides, then materialized into a graph, labeling and
//! candidate pool.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use depolar_core::graph::io::{load_candidate_pool, load_edge_list, load_partition};
use depolar_core::seed::derive_seed_str;
use depolar_core::sim::{
    CandidatePoolParams, DegreeDist, NeutralityDist, PolarizedGraphParams, Strategy,
};
use depolar_core::{CandidatePool, DirectedGraph, Error, PartitionLabeling, Result, WalkConfig};

/// File-based input: a follow graph plus its partition, and optionally a
/// candidate pool (required by `select` and `simulate`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilesInput {
    pub edges: PathBuf,
    pub partition: PathBuf,
    #[serde(default)]
    pub pool: Option<PathBuf>,
}

/// Synthetic input: the two-block generator plus a candidate-pool sampler.
/// Seeds are not configured here — they derive from the global seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticInput {
    pub nodes_per_side: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub hub_count: usize,
    pub hub_in_degree_boost: usize,
    pub pool_size: usize,
    pub degree: DegreeDist,
    pub neutrality: NeutralityDist,
}

impl Default for SyntheticInput {
    fn default() -> Self {
        let graph = PolarizedGraphParams::default();
        let pool = CandidatePoolParams::default();
        SyntheticInput {
            nodes_per_side: graph.nodes_per_side,
            p_in: graph.p_in,
            p_out: graph.p_out,
            hub_count: graph.hub_count,
            hub_in_degree_boost: graph.hub_in_degree_boost,
            pool_size: pool.pool_size,
            degree: pool.degree_distribution,
            neutrality: pool.neutrality_distribution,
        }
    }
}

/// Exactly one of `files` / `synthetic`; leaving the whole section out
/// selects the default synthetic setup.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub files: Option<FilesInput>,
    pub synthetic: Option<SyntheticInput>,
}

/// The whole experiment: one input, one walk configuration, the selection
/// and simulation parameters, and the global seed every stage derives from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    /// Number of nodes to add.
    pub k: usize,
    /// Fagin shortlist size as a multiple of `k`.
    pub candidate_multiplier: f64,
    /// Removal fractions for the unfollow simulation.
    pub fractions: Vec<f64>,
    /// Trials per removal fraction.
    pub trials: usize,
    /// Strategies in the baseline comparison.
    pub strategies: Vec<Strategy>,
    pub input: InputSection,
    pub walk: WalkConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            out_dir: PathBuf::from("out"),
            threads: None,
            k: 30,
            candidate_multiplier: 3.0,
            fractions: (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            trials: 5,
            strategies: Strategy::ALL.to_vec(),
            input: InputSection::default(),
            walk: WalkConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        let config: ExperimentConfig = toml::from_str(&text).map_err(|e| {
            Error::InvalidParameter(format!("config {}: {e}", path.display()))
        })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.files.is_some() && self.input.synthetic.is_some() {
            return Err(Error::InvalidParameter(
                "config sets both input.files and input.synthetic; choose one".into(),
            ));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be ≥ 1".into()));
        }
        if !(1.0..).contains(&self.candidate_multiplier) {
            return Err(Error::InvalidParameter(format!(
                "candidate_multiplier must be ≥ 1 (got {})",
                self.candidate_multiplier
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be ≥ 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidParameter("strategies must not be empty".into()));
        }
        if let Some(s) = self.synthetic_input() {
            self.graph_params(&s).validate()?;
            self.pool_params(&s).validate()?;
        }
        self.walk.validate()?;
        Ok(())
    }

    fn synthetic_input(&self) -> Option<SyntheticInput> {
        if self.input.files.is_some() {
            None
        } else {
            Some(self.input.synthetic.unwrap_or_default())
        }
    }

    /// The walk configuration with its seed derived from the global seed.
    /// Every command uses the same derivation so that scores computed in one
    /// stage are bit-reproducible in another.
    pub fn walk_config(&self) -> WalkConfig {
        self.walk.with_seed(derive_seed_str(self.seed, "walk"))
    }

    fn graph_params(&self, s: &SyntheticInput) -> PolarizedGraphParams {
        PolarizedGraphParams {
            nodes_per_side: s.nodes_per_side,
            p_in: s.p_in,
            p_out: s.p_out,
            hub_count: s.hub_count,
            hub_in_degree_boost: s.hub_in_degree_boost,
            seed: derive_seed_str(self.seed, "generate.graph"),
        }
    }

    fn pool_params(&self, s: &SyntheticInput) -> CandidatePoolParams {
        CandidatePoolParams {
            pool_size: s.pool_size,
            degree_distribution: s.degree,
            neutrality_distribution: s.neutrality,
            seed: derive_seed_str(self.seed, "generate.pool"),
        }
    }

    /// Resolved generator parameters, or an error under file input.
    pub fn generator_params(&self) -> Result<(PolarizedGraphParams, CandidatePoolParams)> {
        let s = self.synthetic_input().ok_or_else(|| {
            Error::InvalidParameter("this command requires synthetic input, not files".into())
        })?;
        Ok((self.graph_params(&s), self.pool_params(&s)))
    }
}

/// A loaded or generated experiment input.
pub struct Materialized {
    pub graph: DirectedGraph,
    pub labeling: PartitionLabeling,
    pub pool: Option<CandidatePool>,
    /// Files read, for manifest hashing (empty under synthetic input).
    pub input_files: Vec<PathBuf>,
}

/// Builds the input graph/labeling/pool from the configured source.
/// `need_pool` makes a missing pool an error instead of `None`.
pub fn materialize(config: &ExperimentConfig, need_pool: bool) -> Result<Materialized> {
    if let Some(files) = &config.input.files {
        let (graph, warnings) = load_edge_list(&files.edges)?;
        if warnings.self_loops_dropped > 0 || warnings.duplicate_edges_collapsed > 0 {
            eprintln!(
                "note: dropped {} self-loop(s), collapsed {} duplicate edge(s)",
                warnings.self_loops_dropped, warnings.duplicate_edges_collapsed
            );
        }
        let labeling = load_partition(&files.partition, &graph)?;
        let pool = match &files.pool {
            Some(path) => Some(load_candidate_pool(path, &graph, &labeling)?),
            None if need_pool => {
                return Err(Error::InvalidParameter(
                    "this command needs a candidate pool; set input.files.pool".into(),
                ))
            }
            None => None,
        };
        let mut input_files = vec![files.edges.clone(), files.partition.clone()];
        input_files.extend(files.pool.clone());
        Ok(Materialized { graph, labeling, pool, input_files })
    } else {
        let (graph_params, pool_params) = config.generator_params()?;
        let (graph, labeling) = depolar_core::sim::generate_polarized_graph(&graph_params)?;
        let pool = if need_pool {
            Some(depolar_core::sim::generate_candidate_pool(&graph, &labeling, &pool_params)?)
        } else {
            None
        };
        Ok(Materialized { graph, labeling, pool, input_files: Vec::new() })
    }
}
