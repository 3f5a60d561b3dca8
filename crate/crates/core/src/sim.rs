//! Synthetic polarized graphs, candidate pools, and the two headline
//! experiments: the strategy baseline comparison (score vs. number of added
//! nodes) and the unfollow-robustness simulation (score vs. fraction of
//! removed celebrity followers).
//!
//! Everything here is a pure function of its parameters and seed.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    add_candidate, round_half_up, remove_in_edges, Candidate, CandidateId, CandidatePool,
    DirectedGraph, GraphBuilder, Label, NodeId, PartitionLabeling, Side,
};
use crate::num::Real;
use crate::rwc::RwcEvaluator;
use crate::seed::{derive_seed, derive_seed_str};
use crate::selection::select_addition_plan;
pub use crate::selection::AdditionPlan;

/// Parameters of the planted two-block follow graph.
///
/// Each ordered same-side pair is an edge with probability `p_in`, each
/// cross-side pair with `p_out`; the first `hub_count` nodes of each side
/// are planted hubs and receive `hub_in_degree_boost` extra distinct
/// same-side followers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolarizedGraphParams {
    pub nodes_per_side: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub hub_count: usize,
    pub hub_in_degree_boost: usize,
    pub seed: u64,
}

impl Default for PolarizedGraphParams {
    fn default() -> Self {
        PolarizedGraphParams {
            nodes_per_side: 500,
            p_in: 0.02,
            p_out: 0.001,
            hub_count: 10,
            hub_in_degree_boost: 200,
            seed: 0,
        }
    }
}

impl PolarizedGraphParams {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_side == 0 {
            return Err(Error::InvalidParameter("nodes_per_side must be ≥ 1".into()));
        }
        if self.nodes_per_side <= self.hub_count {
            return Err(Error::InvalidParameter(format!(
                "nodes_per_side ({}) must exceed hub_count ({})",
                self.nodes_per_side, self.hub_count
            )));
        }
        if !(0.0..=1.0).contains(&self.p_in) || !(0.0..=1.0).contains(&self.p_out) {
            return Err(Error::InvalidParameter("edge probabilities must lie in [0, 1]".into()));
        }
        if self.p_out > self.p_in {
            return Err(Error::InvalidParameter(format!(
                "p_out ({}) must not exceed p_in ({})",
                self.p_out, self.p_in
            )));
        }
        if self.hub_in_degree_boost >= self.nodes_per_side {
            return Err(Error::InvalidParameter(format!(
                "hub_in_degree_boost ({}) must leave room among {} same-side nodes",
                self.hub_in_degree_boost, self.nodes_per_side
            )));
        }
        Ok(())
    }
}

/// Calls `emit` for each index in `0..total` kept with probability `p`,
/// skipping the gaps geometrically so the cost is linear in the number of
/// kept indices rather than in `total`.
fn sample_indices<R: Rng>(rng: &mut R, total: u64, p: f64, mut emit: impl FnMut(u64)) {
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for idx in 0..total {
            emit(idx);
        }
        return;
    }
    let ln_keep_out = (1.0 - p).ln();
    let mut idx: u64 = 0;
    while idx < total {
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / ln_keep_out).floor();
        idx = idx.saturating_add(skip as u64);
        if idx >= total {
            break;
        }
        emit(idx);
        idx += 1;
    }
}

/// Generates the two-block graph. Nodes are `x0..x{n-1}` (side X, ids
/// `0..n`) then `y0..y{n-1}` (side Y, ids `n..2n`).
pub fn generate_polarized_graph(
    params: &PolarizedGraphParams,
) -> Result<(DirectedGraph, PartitionLabeling)> {
    params.validate()?;
    let n = params.nodes_per_side;
    let mut builder = GraphBuilder::new();
    for i in 0..n {
        builder.intern(&format!("x{i}"));
    }
    for i in 0..n {
        builder.intern(&format!("y{i}"));
    }

    // Track the same-side followers of each planted hub so the boost below
    // can pick among non-followers only.
    let mut hub_followers: Vec<Vec<bool>> = vec![vec![false; n]; 2 * params.hub_count];
    let hub_slot = |side: Side, v: usize, hub_count: usize| -> Option<usize> {
        (v < hub_count).then(|| match side {
            Side::X => v,
            Side::Y => hub_count + v,
        })
    };

    // Intra-side blocks: ordered pairs without the diagonal.
    for (side, base) in [(Side::X, 0), (Side::Y, n)] {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_str(
            params.seed,
            &format!("gen.intra.{side}"),
        ));
        let total = (n as u64) * (n as u64 - 1);
        sample_indices(&mut rng, total, params.p_in, |idx| {
            let u = (idx / (n as u64 - 1)) as usize;
            let r = (idx % (n as u64 - 1)) as usize;
            let v = r + usize::from(r >= u);
            builder.add_edge(NodeId::from_index(base + u), NodeId::from_index(base + v));
            if let Some(slot) = hub_slot(side, v, params.hub_count) {
                hub_followers[slot][u] = true;
            }
        });
    }
    // Cross-side blocks: full rectangles.
    for (tag, from_base, to_base) in [("xy", 0, n), ("yx", n, 0)] {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_str(
            params.seed,
            &format!("gen.cross.{tag}"),
        ));
        sample_indices(&mut rng, (n as u64) * (n as u64), params.p_out, |idx| {
            let u = (idx / n as u64) as usize;
            let v = (idx % n as u64) as usize;
            builder.add_edge(NodeId::from_index(from_base + u), NodeId::from_index(to_base + v));
        });
    }

    // Planted-hub boost: extra distinct same-side followers.
    if params.hub_in_degree_boost > 0 {
        for (side, base) in [(Side::X, 0), (Side::Y, n)] {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed_str(
                params.seed,
                &format!("gen.boost.{side}"),
            ));
            for hub in 0..params.hub_count {
                let slot = hub_slot(side, hub, params.hub_count).unwrap();
                let mut available: Vec<usize> = (0..n)
                    .filter(|&u| u != hub && !hub_followers[slot][u])
                    .collect();
                if available.len() < params.hub_in_degree_boost {
                    return Err(Error::InvalidParameter(format!(
                        "hub boost {} exceeds the {} remaining same-side non-followers",
                        params.hub_in_degree_boost,
                        available.len()
                    )));
                }
                let (chosen, _) =
                    available.partial_shuffle(&mut rng, params.hub_in_degree_boost);
                for &u in chosen.iter() {
                    builder.add_edge(NodeId::from_index(base + u), NodeId::from_index(base + hub));
                }
            }
        }
    }

    let (graph, warnings) = builder.build();
    debug_assert_eq!(warnings.duplicate_edges_collapsed, 0);
    debug_assert_eq!(warnings.self_loops_dropped, 0);
    let labels = (0..2 * n).map(|i| if i < n { Label::X } else { Label::Y }).collect();
    Ok((graph, PartitionLabeling::new(labels)))
}

/// In-degree distribution of generated candidates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeDist {
    Fixed(usize),
    /// Uniform over the inclusive range.
    Uniform(usize, usize),
}

/// Neutrality distribution of generated candidates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeutralityDist {
    /// Every candidate splits `round(ν·d)` / rest.
    Fixed(f64),
    /// ν uniform over [0, 0.5].
    Uniform,
}

/// Parameters of the synthetic candidate pool (the stand-in for the
/// potential graph's outside nodes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CandidatePoolParams {
    pub pool_size: usize,
    pub degree_distribution: DegreeDist,
    pub neutrality_distribution: NeutralityDist,
    pub seed: u64,
}

impl Default for CandidatePoolParams {
    fn default() -> Self {
        CandidatePoolParams {
            pool_size: 200,
            degree_distribution: DegreeDist::Uniform(10, 100),
            neutrality_distribution: NeutralityDist::Uniform,
            seed: 0,
        }
    }
}

impl CandidatePoolParams {
    pub fn validate(&self) -> Result<()> {
        match self.degree_distribution {
            DegreeDist::Fixed(0) => {
                return Err(Error::InvalidParameter("candidate degree must be ≥ 1".into()))
            }
            DegreeDist::Uniform(lo, hi) if lo == 0 || lo > hi => {
                return Err(Error::InvalidParameter(format!(
                    "degree range [{lo}, {hi}] must satisfy 1 ≤ lo ≤ hi"
                )))
            }
            _ => {}
        }
        if let NeutralityDist::Fixed(v) = self.neutrality_distribution {
            if !(0.0..=0.5).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "fixed neutrality {v} outside [0, 0.5]"
                )));
            }
        }
        Ok(())
    }
}

/// Generates `pool_size` external candidates with followers drawn from the
/// graph without replacement: the minority side receives `round(ν·d)`
/// followers (capped at `d/2`, side chosen by fair coin), the other side the
/// rest. Candidate ids are `c0..`.
pub fn generate_candidate_pool(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    params: &CandidatePoolParams,
) -> Result<CandidatePool> {
    generate_candidates(graph, labeling, params, "c")
}

fn generate_candidates(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    params: &CandidatePoolParams,
    id_prefix: &str,
) -> Result<CandidatePool> {
    params.validate()?;
    labeling.require_both_sides()?;
    let side_x = labeling.side_nodes(Side::X);
    let side_y = labeling.side_nodes(Side::Y);

    let mut candidates = Vec::with_capacity(params.pool_size);
    for i in 0..params.pool_size {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, &[i as u64]));
        let degree = match params.degree_distribution {
            DegreeDist::Fixed(d) => d,
            DegreeDist::Uniform(lo, hi) => rng.random_range(lo..=hi),
        };
        let neutrality = match params.neutrality_distribution {
            NeutralityDist::Fixed(v) => v,
            NeutralityDist::Uniform => rng.random::<f64>() * 0.5,
        };
        let minority = round_half_up(neutrality * degree as f64).min(degree / 2);
        let majority = degree - minority;
        let minority_is_x = rng.random::<bool>();
        let (in_x, in_y) = if minority_is_x { (minority, majority) } else { (majority, minority) };
        for (need, side, side_len) in
            [(in_x, Side::X, side_x.len()), (in_y, Side::Y, side_y.len())]
        {
            if need > side_len {
                return Err(Error::InvalidParameter(format!(
                    "candidate degree needs {need} followers in side {side} but it has {side_len}"
                )));
            }
        }
        let mut followers = Vec::with_capacity(degree);
        for (need, nodes) in [(in_x, &side_x), (in_y, &side_y)] {
            let mut from = nodes.clone();
            let (chosen, _) = from.partial_shuffle(&mut rng, need);
            followers.extend_from_slice(chosen);
        }
        candidates.push(Candidate::new(
            format!("{id_prefix}{i}"),
            followers,
            graph,
            labeling,
        )?);
    }
    Ok(CandidatePool::new(candidates))
}

/// A node-addition strategy of the baseline comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// The full pipeline: Fagin ranking plus per-candidate ΔRWC selection.
    PopularAndNeutral,
    /// Rank the pool purely by in-degree.
    PopularOnly,
    /// Ignore the pool; inject synthetic degree-50 candidates with 25
    /// followers per side.
    RandomFixed,
}

impl Strategy {
    pub const ALL: [Strategy; 3] =
        [Strategy::PopularAndNeutral, Strategy::PopularOnly, Strategy::RandomFixed];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::PopularAndNeutral => "popular_and_neutral",
            Strategy::PopularOnly => "popular_only",
            Strategy::RandomFixed => "random_fixed",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        match s {
            "popular_and_neutral" => Ok(Strategy::PopularAndNeutral),
            "popular_only" => Ok(Strategy::PopularOnly),
            "random_fixed" => Ok(Strategy::RandomFixed),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy `{other}` (expected popular_and_neutral, popular_only or random_fixed)"
            ))),
        }
    }
}

/// One cell of the baseline comparison: the score after `k` additions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow<F> {
    pub strategy: Strategy,
    pub k: usize,
    pub rwc: F,
}

/// The score-vs-k table across strategies, including the `k = 0` rows
/// (the unmodified graph's score).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineTable<F> {
    pub rows: Vec<BaselineRow<F>>,
}

impl<F: Copy> BaselineTable<F> {
    /// The `(k, rwc)` curve of one strategy, ascending in `k`.
    pub fn curve(&self, strategy: Strategy) -> Vec<(usize, F)> {
        self.rows
            .iter()
            .filter(|r| r.strategy == strategy)
            .map(|r| (r.k, r.rwc))
            .collect()
    }
}

/// Pool order for the popular-only strategy: in-degree descending, ties by
/// candidate id.
pub(crate) fn rank_by_popularity(pool: &CandidatePool) -> Vec<CandidateId> {
    let mut ids: Vec<CandidateId> = pool.iter().map(|(id, _)| id).collect();
    ids.sort_by_key(|&id| (std::cmp::Reverse(pool.get(id).in_degree()), id));
    ids
}

/// Adds candidates one at a time in the given order, recording the score
/// after each addition.
fn joint_addition_curve<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    pool: &CandidatePool,
    order: &[CandidateId],
    evaluator: &RwcEvaluator,
) -> Result<Vec<F>> {
    let mut current = graph.clone();
    let mut labels = labeling.clone();
    let mut curve = Vec::with_capacity(order.len());
    for &id in order {
        let (next, next_labels) = add_candidate(&current, &labels, pool.get(id))?;
        current = next;
        labels = next_labels;
        curve.push(evaluator.evaluate::<F>(&current, &labels)?.rwc);
    }
    Ok(curve)
}

/// Runs each strategy for `k = 0..=k_max` additions under one evaluator.
///
/// `popular_and_neutral` reuses the full selection pipeline (its cumulative
/// curve *is* the strategy's score-vs-k curve); `popular_only` takes the
/// pool's top in-degree candidates in rank order; `random_fixed` ignores the
/// pool and injects synthetic degree-50, 25/25 candidates seeded from the
/// evaluator's walk seed.
pub fn run_baseline_comparison<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    pool: &CandidatePool,
    k_max: usize,
    strategies: &[Strategy],
    evaluator: &RwcEvaluator,
) -> Result<BaselineTable<F>> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("baseline comparison requires k_max ≥ 1".into()));
    }
    if strategies.is_empty() {
        return Err(Error::InvalidParameter("no strategies requested".into()));
    }
    let baseline = evaluator.evaluate::<F>(graph, labeling)?.rwc;
    let mut rows = Vec::new();
    for &strategy in strategies {
        let curve: Vec<F> = match strategy {
            Strategy::PopularAndNeutral => {
                let plan = select_addition_plan::<F>(graph, labeling, pool, k_max, 3.0, evaluator)?;
                plan.cumulative_rwc
            }
            Strategy::PopularOnly => {
                let order = rank_by_popularity(pool);
                let take = k_max.min(order.len());
                joint_addition_curve(graph, labeling, pool, &order[..take], evaluator)?
            }
            Strategy::RandomFixed => {
                let params = CandidatePoolParams {
                    pool_size: k_max,
                    degree_distribution: DegreeDist::Fixed(50),
                    neutrality_distribution: NeutralityDist::Fixed(0.5),
                    seed: derive_seed_str(evaluator.config.seed, "baseline.random_fixed"),
                };
                let synthetic = generate_candidates(graph, labeling, &params, "rf")?;
                let order: Vec<CandidateId> = synthetic.iter().map(|(id, _)| id).collect();
                joint_addition_curve(graph, labeling, &synthetic, &order, evaluator)?
            }
        };
        rows.push(BaselineRow { strategy, k: 0, rwc: baseline });
        rows.extend(
            curve.into_iter().enumerate().map(|(i, rwc)| BaselineRow { strategy, k: i + 1, rwc }),
        );
    }
    Ok(BaselineTable { rows })
}

/// Score of the augmented graph as the added nodes lose followers.
///
/// `mean/min/max_rwc[i]` aggregate the trials at `removal_fractions[i]`;
/// the fraction-0 entry equals `augmented_rwc` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfollowCurve<F> {
    pub removal_fractions: Vec<f64>,
    pub mean_rwc: Vec<F>,
    pub min_rwc: Vec<F>,
    pub max_rwc: Vec<F>,
    /// Score of the graph without any additions.
    pub baseline_rwc: F,
    /// Score with the full plan added and no edges removed.
    pub augmented_rwc: F,
}

/// Re-runs the augmented graph while each added node independently loses
/// `round(f × in_degree)` incoming edges, for every fraction `f`, averaged
/// over `trials` seeded trials.
///
/// Fractions are sorted and deduplicated and must include 0 and lie in
/// [0, 1]; the plan's nodes are re-added in plan order.
pub fn run_unfollow_simulation<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    pool: &CandidatePool,
    plan: &AdditionPlan<F>,
    fractions: &[f64],
    trials: usize,
    evaluator: &RwcEvaluator,
) -> Result<UnfollowCurve<F>> {
    if plan.selected.is_empty() {
        return Err(Error::InvalidParameter("unfollow simulation needs a non-empty plan".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("unfollow simulation needs trials ≥ 1".into()));
    }
    let mut fractions: Vec<f64> = fractions.to_vec();
    fractions.sort_by(|a, b| a.partial_cmp(b).expect("fractions must not be NaN"));
    fractions.dedup();
    if fractions.first() != Some(&0.0) {
        return Err(Error::InvalidParameter(
            "removal fractions must include 0 (the intact augmented graph)".into(),
        ));
    }
    if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::InvalidParameter("removal fractions must lie in [0, 1]".into()));
    }

    let baseline_rwc = evaluator.evaluate::<F>(graph, labeling)?.rwc;
    let mut augmented = graph.clone();
    let mut aug_labels = labeling.clone();
    let mut added = Vec::with_capacity(plan.selected.len());
    for node in &plan.selected {
        let (next, next_labels) =
            add_candidate(&augmented, &aug_labels, pool.get(node.candidate))?;
        augmented = next;
        aug_labels = next_labels;
        added.push(NodeId::from_index(augmented.node_count() - 1));
    }
    let augmented_rwc = evaluator.evaluate::<F>(&augmented, &aug_labels)?.rwc;

    let sim_seed = derive_seed_str(evaluator.config.seed, "unfollow");
    let mut mean_rwc = Vec::with_capacity(fractions.len());
    let mut min_rwc = Vec::with_capacity(fractions.len());
    let mut max_rwc = Vec::with_capacity(fractions.len());
    for (f_idx, &fraction) in fractions.iter().enumerate() {
        let mut values = Vec::with_capacity(trials);
        for trial in 0..trials {
            let mut g = augmented.clone();
            for (j, &node) in added.iter().enumerate() {
                let seed = derive_seed(sim_seed, &[f_idx as u64, trial as u64, j as u64]);
                g = remove_in_edges(&g, node, fraction, seed)?;
            }
            values.push(evaluator.evaluate::<F>(&g, &aug_labels)?.rwc);
        }
        let lo = values.iter().copied().fold(F::infinity(), F::min);
        let hi = values.iter().copied().fold(F::neg_infinity(), F::max);
        // Identical trials (e.g. fraction 0) keep the exact value instead of
        // picking up a rounding wobble from the division.
        let mean = if lo == hi {
            lo
        } else {
            values.iter().copied().sum::<F>() / crate::num::from_usize(values.len())
        };
        mean_rwc.push(mean);
        min_rwc.push(lo);
        max_rwc.push(hi);
    }
    Ok(UnfollowCurve {
        removal_fractions: fractions,
        mean_rwc,
        min_rwc,
        max_rwc,
        baseline_rwc,
        augmented_rwc,
    })
}
