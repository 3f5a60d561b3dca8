//! The Node Addition Problem: which external candidates, once added to the
//! graph, reduce the controversy score the most.
//!
//! The pipeline is: score every candidate by popularity (in-degree) and
//! neutrality, rank them with Fagin's algorithm over the two criteria, walk
//! the short-listed candidates through a per-candidate ΔRWC evaluation, and
//! keep the `k` best. Selection assumes per-candidate deltas compose — the
//! plan therefore records both the individual deltas and the jointly
//! re-evaluated cumulative curve, so any divergence between the two is
//! visible in the output.

use std::cmp::Reverse;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{add_candidate, CandidateId, CandidatePool, DirectedGraph, PartitionLabeling};
use crate::num::{ratio, Real};
use crate::rwc::RwcEvaluator;

/// How evenly a candidate's followers split across the two sides:
/// `min(x, y) / (x + y)`, in `[0, 0.5]`, and 0 for a follower-less node.
pub fn neutrality_score<F: Real>(followers_in_x: usize, followers_in_y: usize) -> F {
    let total = followers_in_x + followers_in_y;
    if total == 0 {
        return F::zero();
    }
    ratio(followers_in_x.min(followers_in_y) as u64, total as u64)
}

/// A candidate's ranking inputs and their aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore<F> {
    pub candidate: CandidateId,
    /// Followers inside the graph: the node's in-degree once added.
    pub in_degree: usize,
    pub neutrality: F,
    /// `(in_degree / max_in_degree_in_pool) × (2 × neutrality)` — a monotone
    /// product of the two criteria, 0 for fully one-sided nodes.
    pub aggregate: F,
}

/// Scores every pool candidate. Popularity is normalized by the pool's
/// maximum in-degree (all aggregates are 0 if no candidate has followers).
pub fn score_pool<F: Real>(pool: &CandidatePool) -> Vec<CandidateScore<F>> {
    let max_degree = pool.iter().map(|(_, c)| c.in_degree()).max().unwrap_or(0);
    pool.iter()
        .map(|(id, c)| {
            let neutrality = neutrality_score::<F>(c.followers_in_x(), c.followers_in_y());
            let popularity = if max_degree == 0 {
                F::zero()
            } else {
                ratio::<F>(c.in_degree() as u64, max_degree as u64)
            };
            CandidateScore {
                candidate: id,
                in_degree: c.in_degree(),
                neutrality,
                aggregate: popularity * (F::one() + F::one()) * neutrality,
            }
        })
        .collect()
}

/// Total order used everywhere a ranking is produced: aggregate descending,
/// then candidate id ascending. Scores are never NaN.
fn by_aggregate_desc<F: Real>(a: &CandidateScore<F>, b: &CandidateScore<F>) -> std::cmp::Ordering {
    b.aggregate
        .partial_cmp(&a.aggregate)
        .expect("aggregate is never NaN")
        .then(a.candidate.cmp(&b.candidate))
}

/// Top-`c` candidates by aggregate score via Fagin's algorithm.
///
/// Alternates sorted access over the in-degree-ranked and neutrality-ranked
/// lists until `c` objects have been seen in both, then keeps scanning while
/// the aggregate upper bound of any unseen object (built from the two list
/// frontiers) could still reach the current `c`-th best — that extra stretch
/// makes the result identical to brute force even through score ties.
/// Random access then fills in the missing component of every seen object.
///
/// Output is ordered by aggregate descending, ties by candidate id. `c`
/// larger than the pool returns the whole pool ranked.
pub fn fagin_top_c<F: Real>(pool: &CandidatePool, c: usize) -> Result<Vec<CandidateScore<F>>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool("cannot rank an empty candidate pool".into()));
    }
    if c == 0 {
        return Err(Error::InvalidParameter("fagin_top_c requires c ≥ 1".into()));
    }
    let scores = score_pool::<F>(pool);
    let n = scores.len();
    let c = c.min(n);
    let max_degree = scores.iter().map(|s| s.in_degree).max().unwrap_or(0);
    let two = F::one() + F::one();

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (Reverse(scores[i].in_degree), i));
    let mut by_neutrality: Vec<usize> = (0..n).collect();
    by_neutrality.sort_by(|&a, &b| {
        scores[b]
            .neutrality
            .partial_cmp(&scores[a].neutrality)
            .expect("neutrality is never NaN")
            .then(a.cmp(&b))
    });

    let mut seen_degree = vec![false; n];
    let mut seen_neutrality = vec![false; n];
    let mut seen_both = 0usize;
    let mut depth = 0usize;
    while depth < n {
        let d = by_degree[depth];
        seen_degree[d] = true;
        if seen_neutrality[d] {
            seen_both += 1;
        }
        let m = by_neutrality[depth];
        seen_neutrality[m] = true;
        if seen_degree[m] && m != d {
            seen_both += 1;
        }
        depth += 1;

        if seen_both >= c && depth < n {
            // τ: c-th best aggregate among everything already seen (random
            // access gives us the full score). Any unseen object is bounded
            // by the product of the two next frontier values; once that
            // bound drops strictly below τ no unseen object can tie in.
            let mut seen_aggs: Vec<F> = (0..n)
                .filter(|&i| seen_degree[i] || seen_neutrality[i])
                .map(|i| scores[i].aggregate)
                .collect();
            seen_aggs.sort_by(|a, b| b.partial_cmp(a).expect("aggregate is never NaN"));
            let tau = seen_aggs[c - 1];
            let frontier_popularity = if max_degree == 0 {
                F::zero()
            } else {
                ratio::<F>(scores[by_degree[depth]].in_degree as u64, max_degree as u64)
            };
            let bound = frontier_popularity * two * scores[by_neutrality[depth]].neutrality;
            if bound < tau {
                break;
            }
        }
    }

    let mut result: Vec<CandidateScore<F>> = (0..n)
        .filter(|&i| seen_degree[i] || seen_neutrality[i])
        .map(|i| scores[i])
        .collect();
    result.sort_by(by_aggregate_desc);
    result.truncate(c);
    Ok(result)
}

/// `RWC(G) − RWC(G + candidate)` for every given candidate, evaluated
/// independently (hubs reselected on each augmented graph) with the same
/// evaluator. Positive delta means the addition depolarizes.
pub fn evaluate_candidates<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    pool: &CandidatePool,
    candidates: &[CandidateScore<F>],
    evaluator: &RwcEvaluator,
) -> Result<Vec<(CandidateId, F)>> {
    let base = evaluator.evaluate::<F>(graph, labeling)?.rwc;
    deltas_against(graph, labeling, pool, candidates, evaluator, base)
}

fn deltas_against<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    pool: &CandidatePool,
    candidates: &[CandidateScore<F>],
    evaluator: &RwcEvaluator,
    base: F,
) -> Result<Vec<(CandidateId, F)>> {
    candidates
        .par_iter()
        .map(|score| {
            let (augmented, aug_labels) = add_candidate(graph, labeling, pool.get(score.candidate))?;
            let est = evaluator.evaluate::<F>(&augmented, &aug_labels)?;
            Ok((score.candidate, base - est.rwc))
        })
        .collect()
}

/// One selected addition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedNode<F> {
    pub candidate: CandidateId,
    pub external_id: String,
    /// Individually measured `RWC(G) − RWC(G + this node)`.
    pub delta_rwc: F,
}

/// The outcome of [`select_addition_plan`]: the chosen nodes in descending
/// individual-delta order and the jointly re-evaluated score curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditionPlan<F> {
    /// RWC of the unmodified graph.
    pub baseline_rwc: F,
    pub selected: Vec<SelectedNode<F>>,
    /// `cumulative_rwc[i]` is the RWC of the graph after adding the first
    /// `i + 1` selected nodes jointly, in `selected` order.
    pub cumulative_rwc: Vec<F>,
    /// True when the pool had fewer than the requested `k` candidates.
    pub truncated: bool,
}

/// Solves the Node Addition Problem greedily: Fagin-rank the pool, evaluate
/// the top `ceil(candidate_multiplier × k)` candidates individually, keep
/// the `k` with the largest deltas (ties by candidate id), and re-evaluate
/// the joint additions one node at a time for the cumulative curve.
pub fn select_addition_plan<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    pool: &CandidatePool,
    k: usize,
    candidate_multiplier: f64,
    evaluator: &RwcEvaluator,
) -> Result<AdditionPlan<F>> {
    if k == 0 {
        return Err(Error::InvalidParameter("selection requires k ≥ 1".into()));
    }
    if !(1.0..).contains(&candidate_multiplier) {
        return Err(Error::InvalidParameter(format!(
            "candidate_multiplier must be ≥ 1, got {candidate_multiplier}"
        )));
    }
    if pool.is_empty() {
        return Err(Error::EmptyPool("cannot select from an empty candidate pool".into()));
    }
    let shortlist_size = (candidate_multiplier * k as f64).ceil() as usize;
    let shortlist = fagin_top_c::<F>(pool, shortlist_size)?;

    let base = evaluator.evaluate::<F>(graph, labeling)?.rwc;
    let mut deltas = deltas_against(graph, labeling, pool, &shortlist, evaluator, base)?;
    deltas.sort_by(|a, b| {
        b.1.partial_cmp(&a.1).expect("delta is never NaN").then(a.0.cmp(&b.0))
    });
    let take = k.min(deltas.len());
    let truncated = take < k;
    let selected: Vec<SelectedNode<F>> = deltas[..take]
        .iter()
        .map(|&(id, delta)| SelectedNode {
            candidate: id,
            external_id: pool.get(id).external_id().to_owned(),
            delta_rwc: delta,
        })
        .collect();

    let mut cumulative_rwc = Vec::with_capacity(selected.len());
    let mut current = graph.clone();
    let mut current_labels = labeling.clone();
    for node in &selected {
        let (next, next_labels) = add_candidate(&current, &current_labels, pool.get(node.candidate))?;
        current = next;
        current_labels = next_labels;
        cumulative_rwc.push(evaluator.evaluate::<F>(&current, &current_labels)?.rwc);
    }
    Ok(AdditionPlan { baseline_rwc: base, selected, cumulative_rwc, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Candidate, GraphBuilder, Label, NodeId};
    use crate::rwc::{EvalMode, WalkConfig};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `n` isolated nodes per side, labeled by id: first `n` are X.
    fn follower_bed(n: usize) -> (DirectedGraph, PartitionLabeling) {
        let mut b = GraphBuilder::new();
        for i in 0..n {
            b.intern(&format!("x{i}"));
        }
        for i in 0..n {
            b.intern(&format!("y{i}"));
        }
        let g = b.build().0;
        let labels = (0..2 * n).map(|i| if i < n { Label::X } else { Label::Y }).collect();
        (g, PartitionLabeling::new(labels))
    }

    /// Pool from per-candidate `(followers_in_x, followers_in_y)` counts,
    /// using the first nodes of each side of `bed` as followers.
    fn pool_from_counts(
        bed: &(DirectedGraph, PartitionLabeling),
        counts: &[(usize, usize)],
    ) -> CandidatePool {
        let (g, lab) = bed;
        let n = lab.count(Label::X);
        let cands = counts
            .iter()
            .enumerate()
            .map(|(i, &(fx, fy))| {
                let followers: Vec<NodeId> = (0..fx)
                    .map(NodeId::from_index)
                    .chain((0..fy).map(|j| NodeId::from_index(n + j)))
                    .collect();
                Candidate::new(format!("c{i}"), followers, g, lab).unwrap()
            })
            .collect();
        CandidatePool::new(cands)
    }

    fn brute_force_top_c(pool: &CandidatePool, c: usize) -> Vec<CandidateScore<f64>> {
        let mut all = score_pool::<f64>(pool);
        all.sort_by(by_aggregate_desc);
        all.truncate(c.min(all.len()));
        all
    }

    #[test]
    fn neutrality_examples() {
        assert_eq!(neutrality_score::<f64>(25, 25), 0.5);
        assert_eq!(neutrality_score::<f64>(10, 0), 0.0);
        assert_eq!(neutrality_score::<f64>(3, 7), 0.3);
        assert_eq!(neutrality_score::<f64>(0, 0), 0.0);
    }

    proptest! {
        #[test]
        fn neutrality_is_symmetric_and_peaks_at_balance(a in 0usize..500, b in 0usize..500) {
            let n: f64 = neutrality_score(a, b);
            prop_assert_eq!(n, neutrality_score::<f64>(b, a));
            prop_assert!((0.0..=0.5).contains(&n));
            if a + b > 0 {
                prop_assert_eq!(n == 0.5, a == b);
            }
        }
    }

    #[test]
    fn fagin_picks_double_dominator() {
        let bed = follower_bed(120);
        // A dominates both lists; B is popular but one-sided; C is neutral
        // but unpopular.
        let pool = pool_from_counts(&bed, &[(50, 50), (100, 0), (1, 1)]);
        let top = fagin_top_c::<f64>(&pool, 1).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].candidate, CandidateId(0));
        assert_eq!(top[0].neutrality, 0.5);
    }

    #[test]
    fn fagin_breaks_full_ties_by_id() {
        let bed = follower_bed(50);
        let pool = pool_from_counts(&bed, &[(10, 10); 7]);
        let top = fagin_top_c::<f64>(&pool, 3).unwrap();
        let ids: Vec<CandidateId> = top.iter().map(|s| s.candidate).collect();
        assert_eq!(ids, vec![CandidateId(0), CandidateId(1), CandidateId(2)]);
    }

    #[test]
    fn fagin_handles_all_zero_aggregates() {
        let bed = follower_bed(50);
        // Every candidate one-sided: all aggregates are 0, so the threshold
        // never prunes and the scan must fall back to the full ranking.
        let pool = pool_from_counts(&bed, &[(9, 0), (0, 7), (5, 0), (0, 3)]);
        let top = fagin_top_c::<f64>(&pool, 2).unwrap();
        assert_eq!(top, brute_force_top_c(&pool, 2));
        assert_eq!(top[0].candidate, CandidateId(0));
        assert_eq!(top[1].candidate, CandidateId(1));
    }

    #[test]
    fn fagin_oversized_c_returns_whole_pool() {
        let bed = follower_bed(30);
        let pool = pool_from_counts(&bed, &[(4, 4), (8, 0), (2, 6)]);
        let top = fagin_top_c::<f64>(&pool, 99).unwrap();
        assert_eq!(top.len(), 3);
        assert_eq!(top, brute_force_top_c(&pool, 99));
    }

    #[test]
    fn fagin_rejects_degenerate_inputs() {
        let bed = follower_bed(10);
        let pool = pool_from_counts(&bed, &[(2, 2)]);
        assert!(matches!(fagin_top_c::<f64>(&pool, 0).unwrap_err(), Error::InvalidParameter(_)));
        let empty = CandidatePool::new(vec![]);
        assert!(matches!(fagin_top_c::<f64>(&empty, 3).unwrap_err(), Error::EmptyPool(_)));
    }

    #[test]
    fn fagin_matches_brute_force_on_seeded_random_pools() {
        let bed = follower_bed(200);
        for seed in 0..25u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1..=60);
            let counts: Vec<(usize, usize)> = (0..n)
                .map(|_| {
                    // Mix heavy ties and zeros in with generic values.
                    let fx = [0, 1, 5, 5, 20, rng.random_range(0..150)][rng.random_range(0..6)];
                    let fy = [0, 1, 5, 20, rng.random_range(0..150)][rng.random_range(0..5)];
                    (fx, fy)
                })
                .collect();
            let pool = pool_from_counts(&bed, &counts);
            let c = rng.random_range(1..=n + 2);
            assert_eq!(
                fagin_top_c::<f64>(&pool, c).unwrap(),
                brute_force_top_c(&pool, c),
                "seed {seed}, c {c}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn fagin_equals_brute_force(
            counts in prop::collection::vec((0usize..120, 0usize..120), 1..40),
            c in 1usize..50,
        ) {
            let bed = follower_bed(120);
            let pool = pool_from_counts(&bed, &counts);
            prop_assert_eq!(fagin_top_c::<f64>(&pool, c).unwrap(), brute_force_top_c(&pool, c));
        }
    }

    /// Small polarized two-block graph: two dense directed cycles bridged by
    /// a single cross edge, hubs made explicit through extra followers.
    fn polarized_bed() -> (DirectedGraph, PartitionLabeling) {
        let mut b = GraphBuilder::new();
        let xs: Vec<NodeId> = (0..15).map(|i| b.intern(&format!("x{i}"))).collect();
        let ys: Vec<NodeId> = (0..15).map(|i| b.intern(&format!("y{i}"))).collect();
        for side in [&xs, &ys] {
            for i in 0..15 {
                // Everyone follows the side's first two nodes, plus a ring.
                b.add_edge(side[i], side[(i + 1) % 15]);
                if i > 1 {
                    b.add_edge(side[i], side[0]);
                    b.add_edge(side[i], side[1]);
                }
            }
        }
        b.add_edge(xs[7], ys[7]);
        let g = b.build().0;
        let labels = (0..30).map(|i| if i < 15 { Label::X } else { Label::Y }).collect();
        (g, PartitionLabeling::new(labels))
    }

    fn exact_evaluator(k_hub: usize) -> RwcEvaluator {
        RwcEvaluator::new(
            WalkConfig::default().with_hub_count(k_hub),
            EvalMode::Exact,
        )
    }

    #[test]
    fn zero_follower_candidate_has_exactly_zero_delta() {
        let bed = polarized_bed();
        let pool = CandidatePool::new(vec![
            Candidate::new("c0", vec![], &bed.0, &bed.1).unwrap(),
        ]);
        let scores = score_pool::<f64>(&pool);
        let deltas =
            evaluate_candidates(&bed.0, &bed.1, &pool, &scores, &exact_evaluator(2)).unwrap();
        assert_eq!(deltas, vec![(CandidateId(0), 0.0)]);
    }

    #[test]
    fn neutral_candidate_beats_one_sided_of_same_degree() {
        let (g, lab) = polarized_bed();
        let xs: Vec<NodeId> = lab.side_nodes(crate::graph::Side::X);
        let ys: Vec<NodeId> = lab.side_nodes(crate::graph::Side::Y);
        let balanced: Vec<NodeId> =
            xs[2..7].iter().chain(&ys[2..7]).copied().collect();
        let one_sided: Vec<NodeId> = xs[2..12].to_vec();
        let pool = CandidatePool::new(vec![
            Candidate::new("balanced", balanced, &g, &lab).unwrap(),
            Candidate::new("onesided", one_sided, &g, &lab).unwrap(),
        ]);
        let scores = score_pool::<f64>(&pool);
        let deltas = evaluate_candidates(&g, &lab, &pool, &scores, &exact_evaluator(2)).unwrap();
        let balanced_delta = deltas[0].1;
        let one_sided_delta = deltas[1].1;
        assert!(
            balanced_delta > 0.0,
            "a balanced celebrity should depolarize, got {balanced_delta}"
        );
        assert!(
            one_sided_delta.abs() < balanced_delta,
            "one-sided {one_sided_delta} vs balanced {balanced_delta}"
        );
    }

    #[test]
    fn plan_selects_best_candidate_for_k1() {
        let (g, lab) = polarized_bed();
        let xs = lab.side_nodes(crate::graph::Side::X);
        let ys = lab.side_nodes(crate::graph::Side::Y);
        let star: Vec<NodeId> = xs[..7].iter().chain(&ys[..7]).copied().collect();
        let dud: Vec<NodeId> = xs[..3].to_vec();
        let pool = CandidatePool::new(vec![
            Candidate::new("dud", dud, &g, &lab).unwrap(),
            Candidate::new("star", star, &g, &lab).unwrap(),
        ]);
        let plan =
            select_addition_plan::<f64>(&g, &lab, &pool, 1, 3.0, &exact_evaluator(2)).unwrap();
        assert_eq!(plan.selected.len(), 1);
        assert_eq!(plan.selected[0].external_id, "star");
        assert!(!plan.truncated);
        assert_eq!(plan.cumulative_rwc.len(), 1);
        assert!(plan.cumulative_rwc[0] < plan.baseline_rwc);
    }

    #[test]
    fn plan_takes_whole_pool_when_k_exceeds_it() {
        let (g, lab) = polarized_bed();
        let xs = lab.side_nodes(crate::graph::Side::X);
        let ys = lab.side_nodes(crate::graph::Side::Y);
        let pool = CandidatePool::new(vec![
            Candidate::new("a", vec![xs[2], ys[2]], &g, &lab).unwrap(),
            Candidate::new("b", vec![xs[3], ys[3]], &g, &lab).unwrap(),
        ]);
        let plan =
            select_addition_plan::<f64>(&g, &lab, &pool, 5, 3.0, &exact_evaluator(2)).unwrap();
        assert_eq!(plan.selected.len(), 2);
        assert!(plan.truncated);
        assert_eq!(plan.cumulative_rwc.len(), 2);
    }

    #[test]
    fn plan_is_deterministic() {
        let (g, lab) = polarized_bed();
        let xs = lab.side_nodes(crate::graph::Side::X);
        let ys = lab.side_nodes(crate::graph::Side::Y);
        let counts: Vec<Vec<NodeId>> = (0..6)
            .map(|i| xs[1..2 + i].iter().chain(&ys[1..3]).copied().collect())
            .collect();
        let pool = CandidatePool::new(
            counts
                .into_iter()
                .enumerate()
                .map(|(i, f)| Candidate::new(format!("c{i}"), f, &g, &lab).unwrap())
                .collect(),
        );
        let a = select_addition_plan::<f64>(&g, &lab, &pool, 3, 1.5, &exact_evaluator(2)).unwrap();
        let b = select_addition_plan::<f64>(&g, &lab, &pool, 3, 1.5, &exact_evaluator(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plan_rejects_bad_parameters() {
        let (g, lab) = polarized_bed();
        let pool = CandidatePool::new(vec![Candidate::new("c", vec![], &g, &lab).unwrap()]);
        let ev = exact_evaluator(2);
        assert!(select_addition_plan::<f64>(&g, &lab, &pool, 0, 3.0, &ev).is_err());
        assert!(select_addition_plan::<f64>(&g, &lab, &pool, 1, 0.5, &ev).is_err());
        let empty = CandidatePool::new(vec![]);
        assert!(matches!(
            select_addition_plan::<f64>(&g, &lab, &empty, 1, 3.0, &ev).unwrap_err(),
            Error::EmptyPool(_)
        ));
    }
}
