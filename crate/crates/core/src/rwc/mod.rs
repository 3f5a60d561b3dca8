//! Random Walk Controversy score.
//!
//! A walk starts at a uniformly random node of one side and steps to uniform
//! random neighbors until it reaches a *hub* — one of the top in-degree nodes
//! of either side — which absorbs it. With `P_AB` the probability that a walk
//! starting in side `A` is absorbed by a hub of side `B` (conditioned on the
//! walk terminating at all),
//!
//! ```text
//! RWC = P_XX · P_YY − P_XY · P_YX
//! ```
//!
//! which is near 1 when the sides are echo chambers and near 0 when they mix
//! freely. [`estimate_rwc`] measures it by seeded Monte Carlo; [`exact_rwc`]
//! solves the absorbing Markov chain directly on small graphs and serves as
//! the oracle for the estimator.

use std::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId, PartitionLabeling, Side};
use crate::num::{from_u64, Real};
use crate::seed::derive_seed;

mod exact;

pub use exact::{exact_rwc, exact_rwc_with_hubs};

/// Largest node count the dense exact solver accepts.
pub const EXACT_NODE_GUARD: usize = 2000;

/// Which neighbor set a walk steps over.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeMode {
    /// Union of out- and in-neighbors. The default: follow edges carry
    /// influence both ways, and nodes added with only in-edges stay
    /// reachable *and* leavable.
    #[default]
    Symmetrized,
    /// Out-neighbors only (walks move with the follow direction).
    DirectedOut,
}

/// Parameters of the walk process and its Monte Carlo estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    /// Number of walks started from each side.
    pub walks_per_side: usize,
    /// Hubs per side (`k_hub`): walks are absorbed by the top
    /// `hub_count_per_side` in-degree nodes of each side.
    pub hub_count_per_side: usize,
    /// Steps after which a walk is discarded. `None` means 10 × node count.
    pub max_steps: Option<usize>,
    /// Base seed; every walk derives its own RNG stream from it.
    pub seed: u64,
    pub edge_mode: EdgeMode,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_side: 10_000,
            hub_count_per_side: 10,
            max_steps: None,
            seed: 0,
            edge_mode: EdgeMode::Symmetrized,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walks_per_side == 0 {
            return Err(Error::InvalidParameter("walks_per_side must be ≥ 1".into()));
        }
        if self.hub_count_per_side == 0 {
            return Err(Error::InvalidParameter("hub_count_per_side must be ≥ 1".into()));
        }
        if self.max_steps == Some(0) {
            return Err(Error::InvalidParameter("max_steps must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Effective step bound for a graph of `node_count` nodes.
    pub fn max_steps_for(&self, node_count: usize) -> usize {
        self.max_steps.unwrap_or(10 * node_count.max(1))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_walks(mut self, walks_per_side: usize) -> Self {
        self.walks_per_side = walks_per_side;
        self
    }

    pub fn with_hub_count(mut self, hub_count_per_side: usize) -> Self {
        self.hub_count_per_side = hub_count_per_side;
        self
    }
}

/// The absorbing nodes of the walk process: per side, the top in-degree
/// nodes, ties broken by ascending id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HubSet {
    hubs_x: Vec<NodeId>,
    hubs_y: Vec<NodeId>,
    side_of: Vec<Option<Side>>,
}

impl HubSet {
    /// Builds a hub set from explicit node lists (validated for range and
    /// disjointness). Mostly useful for tests with hand-placed hubs;
    /// production callers use [`select_hubs`].
    pub fn new(mut hubs_x: Vec<NodeId>, mut hubs_y: Vec<NodeId>, node_count: usize) -> Result<Self> {
        hubs_x.sort_unstable();
        hubs_x.dedup();
        hubs_y.sort_unstable();
        hubs_y.dedup();
        let mut side_of = vec![None; node_count];
        for (nodes, side) in [(&hubs_x, Side::X), (&hubs_y, Side::Y)] {
            for &v in nodes {
                if v.index() >= node_count {
                    return Err(Error::UnknownNode(v.to_string()));
                }
                if side_of[v.index()].is_some() {
                    return Err(Error::InvalidParameter(format!(
                        "node {v} appears in both hub sets"
                    )));
                }
                side_of[v.index()] = Some(side);
            }
        }
        Ok(HubSet { hubs_x, hubs_y, side_of })
    }

    pub fn hubs_x(&self) -> &[NodeId] {
        &self.hubs_x
    }

    pub fn hubs_y(&self) -> &[NodeId] {
        &self.hubs_y
    }

    /// The side whose hub set contains `v`, if any.
    pub fn hub_side(&self, v: NodeId) -> Option<Side> {
        self.side_of[v.index()]
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.hub_side(v).is_some()
    }
}

/// Picks the top-`k_hub` in-degree nodes of each side as absorbing hubs.
///
/// Ties break toward the lower node id; Unassigned nodes are never hubs. A
/// side smaller than `k_hub` contributes all its nodes.
pub fn select_hubs(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    k_hub: usize,
) -> Result<HubSet> {
    if k_hub == 0 {
        return Err(Error::InvalidParameter("k_hub must be ≥ 1".into()));
    }
    check_labeling(graph, labeling)?;
    labeling.require_both_sides()?;
    let top = |side: Side| {
        let mut nodes = labeling.side_nodes(side);
        nodes.sort_by_key(|&v| (Reverse(graph.in_degree(v)), v));
        nodes.truncate(k_hub.min(nodes.len()));
        nodes
    };
    HubSet::new(top(Side::X), top(Side::Y), graph.node_count())
}

/// How one walk ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkOutcome {
    EndedInX,
    EndedInY,
    /// Hit a dead end or exceeded the step bound.
    Discarded,
}

/// Flattened neighbor lists of one edge mode, built once per estimation so
/// the walk inner loop is two array reads per step.
pub(crate) struct NeighborView {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl NeighborView {
    pub(crate) fn build(graph: &DirectedGraph, mode: EdgeMode) -> Self {
        let n = graph.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for v in graph.nodes() {
            match mode {
                EdgeMode::DirectedOut => targets.extend_from_slice(graph.out_neighbors(v)),
                EdgeMode::Symmetrized => {
                    // Merge the two sorted lists, dropping duplicates.
                    let (out, inc) = (graph.out_neighbors(v), graph.in_neighbors(v));
                    let (mut i, mut j) = (0, 0);
                    while i < out.len() || j < inc.len() {
                        let next = match (out.get(i), inc.get(j)) {
                            (Some(&a), Some(&b)) if a == b => {
                                i += 1;
                                j += 1;
                                a
                            }
                            (Some(&a), Some(&b)) if a < b => {
                                i += 1;
                                a
                            }
                            (Some(_), Some(&b)) => {
                                j += 1;
                                b
                            }
                            (Some(&a), None) => {
                                i += 1;
                                a
                            }
                            (None, Some(&b)) => {
                                j += 1;
                                b
                            }
                            (None, None) => unreachable!(),
                        };
                        targets.push(next);
                    }
                }
            }
            offsets.push(targets.len());
        }
        NeighborView { offsets, targets }
    }

    pub(crate) fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v.index()]..self.offsets[v.index() + 1]]
    }
}

/// Advances a walk to absorption using the given RNG.
fn step_walk<R: Rng>(
    view: &NeighborView,
    hubs: &HubSet,
    start: NodeId,
    max_steps: usize,
    rng: &mut R,
) -> WalkOutcome {
    let mut current = start;
    let mut steps = 0;
    loop {
        match hubs.hub_side(current) {
            Some(Side::X) => return WalkOutcome::EndedInX,
            Some(Side::Y) => return WalkOutcome::EndedInY,
            None => {}
        }
        let neighbors = view.neighbors(current);
        if neighbors.is_empty() || steps == max_steps {
            return WalkOutcome::Discarded;
        }
        current = neighbors[rng.random_range(0..neighbors.len())];
        steps += 1;
    }
}

/// Runs a single walk from `start`, seeded by `walk_seed`.
///
/// Terminates on first arrival at any hub (a hub start terminates
/// immediately, in zero steps); discards on dead ends and after
/// `config.max_steps`.
pub fn run_walk(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    hubs: &HubSet,
    start: NodeId,
    config: &WalkConfig,
    walk_seed: u64,
) -> WalkOutcome {
    debug_assert!(labeling.label(start).side().is_some(), "walk start must be on a side");
    let view = NeighborView::build(graph, config.edge_mode);
    let mut rng = ChaCha8Rng::seed_from_u64(walk_seed);
    step_walk(&view, hubs, start, config.max_steps_for(graph.node_count()), &mut rng)
}

/// The four conditional termination probabilities, the score, and the walk
/// accounting behind them.
///
/// Rows are conditioned on completed walks per start side, so
/// `p_xx + p_xy = 1` and `p_yx + p_yy = 1` hold exactly. For exact solver
/// outputs, the walk counts carry the number of start states per side and
/// `stderr_rwc` is 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RwcEstimate<F> {
    pub p_xx: F,
    pub p_xy: F,
    pub p_yx: F,
    pub p_yy: F,
    /// `p_xx · p_yy − p_xy · p_yx`, in [−1, 1].
    pub rwc: F,
    pub stderr_rwc: F,
    pub completed_walks_x: u64,
    pub completed_walks_y: u64,
    pub discarded_walks: u64,
}

/// Turns per-side absorption masses into the probability table and score.
///
/// `x_to_x` is the mass (walk count or summed absorption probability) of
/// side-X starts terminating at X hubs, and so on. Each side renormalizes
/// over its non-discarded mass; a side with no completed mass cannot be
/// conditioned on and errors.
pub(crate) fn combine_sides<F: Real>(
    x_to_x: F,
    x_to_y: F,
    y_to_x: F,
    y_to_y: F,
) -> Result<(F, F, F, F, F)> {
    let x_total = x_to_x + x_to_y;
    let y_total = y_to_x + y_to_y;
    if !x_total.is_finite() || x_total <= F::zero() {
        return Err(Error::EstimationFailed(Side::X));
    }
    if !y_total.is_finite() || y_total <= F::zero() {
        return Err(Error::EstimationFailed(Side::Y));
    }
    // Deriving the off-diagonal as 1 − p keeps the row sums exactly 1.
    let p_xx = x_to_x / x_total;
    let p_xy = F::one() - p_xx;
    let p_yy = y_to_y / y_total;
    let p_yx = F::one() - p_yy;
    let rwc = p_xx * p_yy - p_xy * p_yx;
    Ok((p_xx, p_xy, p_yx, p_yy, rwc))
}

#[derive(Debug, Default, Clone, Copy)]
struct SideTally {
    to_x: u64,
    to_y: u64,
    discarded: u64,
}

impl SideTally {
    fn merge(self, o: SideTally) -> SideTally {
        SideTally {
            to_x: self.to_x + o.to_x,
            to_y: self.to_y + o.to_y,
            discarded: self.discarded + o.discarded,
        }
    }

    fn record(outcome: WalkOutcome) -> SideTally {
        let mut t = SideTally::default();
        match outcome {
            WalkOutcome::EndedInX => t.to_x = 1,
            WalkOutcome::EndedInY => t.to_y = 1,
            WalkOutcome::Discarded => t.discarded = 1,
        }
        t
    }
}

fn check_labeling(graph: &DirectedGraph, labeling: &PartitionLabeling) -> Result<()> {
    if labeling.len() != graph.node_count() {
        return Err(Error::InvalidParameter(format!(
            "labeling covers {} nodes but the graph has {}",
            labeling.len(),
            graph.node_count()
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of the RWC score.
///
/// Starts `walks_per_side` walks per side from uniformly random starts (with
/// replacement). Walk `i` of a side runs on its own RNG stream derived from
/// `(config.seed, side, i)`, so results are bit-identical regardless of how
/// the walks are scheduled across threads. `stderr_rwc` propagates the two
/// per-side binomial errors through the score formula (whose partial
/// derivatives are 1 once rows are conditioned).
pub fn estimate_rwc<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    config: &WalkConfig,
) -> Result<RwcEstimate<F>> {
    config.validate()?;
    if graph.node_count() == 0 {
        return Err(Error::EmptyGraph("estimation requires a non-empty graph".into()));
    }
    check_labeling(graph, labeling)?;
    let hubs = select_hubs(graph, labeling, config.hub_count_per_side)?;
    let view = NeighborView::build(graph, config.edge_mode);
    let max_steps = config.max_steps_for(graph.node_count());

    let mut tallies = [SideTally::default(); 2];
    for (slot, side) in [Side::X, Side::Y].into_iter().enumerate() {
        let starts = labeling.side_nodes(side);
        tallies[slot] = (0..config.walks_per_side as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[side.tag(), i]));
                let start = starts[rng.random_range(0..starts.len())];
                SideTally::record(step_walk(&view, &hubs, start, max_steps, &mut rng))
            })
            .reduce(SideTally::default, SideTally::merge);
    }
    let [tx, ty] = tallies;
    let (p_xx, p_xy, p_yx, p_yy, rwc) = combine_sides(
        from_u64::<F>(tx.to_x),
        from_u64::<F>(tx.to_y),
        from_u64::<F>(ty.to_x),
        from_u64::<F>(ty.to_y),
    )?;
    let completed_x = tx.to_x + tx.to_y;
    let completed_y = ty.to_x + ty.to_y;
    let var = p_xx * (F::one() - p_xx) / from_u64::<F>(completed_x)
        + p_yy * (F::one() - p_yy) / from_u64::<F>(completed_y);
    Ok(RwcEstimate {
        p_xx,
        p_xy,
        p_yx,
        p_yy,
        rwc,
        stderr_rwc: var.sqrt(),
        completed_walks_x: completed_x,
        completed_walks_y: completed_y,
        discarded_walks: tx.discarded + ty.discarded,
    })
}

/// Which solver an [`RwcEvaluator`] uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Exact solver when the graph fits under [`EXACT_NODE_GUARD`], Monte
    /// Carlo otherwise.
    #[default]
    Auto,
    MonteCarlo,
    Exact,
}

/// A walk configuration bound to a solver choice; the one-call evaluation
/// entry point used by selection and simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwcEvaluator {
    pub config: WalkConfig,
    pub mode: EvalMode,
}

impl RwcEvaluator {
    pub fn new(config: WalkConfig, mode: EvalMode) -> Self {
        RwcEvaluator { config, mode }
    }

    pub fn use_exact(&self, graph: &DirectedGraph) -> bool {
        match self.mode {
            EvalMode::Exact => true,
            EvalMode::MonteCarlo => false,
            EvalMode::Auto => graph.node_count() <= EXACT_NODE_GUARD,
        }
    }

    pub fn evaluate<F: Real>(
        &self,
        graph: &DirectedGraph,
        labeling: &PartitionLabeling,
    ) -> Result<RwcEstimate<F>> {
        if self.use_exact(graph) {
            exact_rwc(graph, labeling, self.config.hub_count_per_side, self.config.edge_mode)
        } else {
            estimate_rwc(graph, labeling, &self.config)
        }
    }
}
