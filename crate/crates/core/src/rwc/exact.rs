//! Exact RWC via the absorbing Markov chain of the walk process.
//!
//! Hubs are absorbing states. For every transient node the absorption
//! probabilities into the X-hub set and the Y-hub set satisfy a linear
//! system `(I − Q)a = b`, solved densely with Gaussian elimination; nodes
//! that cannot reach any hub (dead ends and the components behind them)
//! absorb into a synthetic Discard state instead, which both keeps the
//! system nonsingular and mirrors the estimator's walk-discarding.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId, PartitionLabeling, Side};
use crate::num::{from_usize, Real};
use crate::rwc::{
    combine_sides, select_hubs, EdgeMode, HubSet, NeighborView, RwcEstimate, EXACT_NODE_GUARD,
};

/// Exact RWC with hubs chosen by [`select_hubs`]; the oracle counterpart of
/// [`estimate_rwc`](crate::rwc::estimate_rwc).
///
/// Guarded to [`EXACT_NODE_GUARD`] nodes — the solve is cubic in the number
/// of transient nodes. Standard errors are 0; the walk-count fields carry
/// the number of start states per side.
pub fn exact_rwc<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    k_hub: usize,
    edge_mode: EdgeMode,
) -> Result<RwcEstimate<F>> {
    let hubs = select_hubs(graph, labeling, k_hub)?;
    exact_rwc_with_hubs(graph, labeling, &hubs, edge_mode)
}

/// Exact RWC with an explicit absorbing hub set.
pub fn exact_rwc_with_hubs<F: Real>(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    hubs: &HubSet,
    edge_mode: EdgeMode,
) -> Result<RwcEstimate<F>> {
    if graph.node_count() > EXACT_NODE_GUARD {
        return Err(Error::GraphTooLarge {
            nodes: graph.node_count(),
            guard: EXACT_NODE_GUARD,
        });
    }
    if graph.node_count() == 0 {
        return Err(Error::EmptyGraph("exact solve requires a non-empty graph".into()));
    }
    if labeling.len() != graph.node_count() {
        return Err(Error::InvalidParameter(format!(
            "labeling covers {} nodes but the graph has {}",
            labeling.len(),
            graph.node_count()
        )));
    }
    labeling.require_both_sides()?;

    let (to_x, to_y) = absorption_probabilities::<F>(graph, hubs, edge_mode)?;
    let side_mass = |side: Side| {
        let mut mass_x = F::zero();
        let mut mass_y = F::zero();
        for v in labeling.side_nodes(side) {
            mass_x += to_x[v.index()];
            mass_y += to_y[v.index()];
        }
        (mass_x, mass_y)
    };
    let (xx, xy) = side_mass(Side::X);
    let (yx, yy) = side_mass(Side::Y);
    let (p_xx, p_xy, p_yx, p_yy, rwc) = combine_sides(xx, xy, yx, yy)?;
    Ok(RwcEstimate {
        p_xx,
        p_xy,
        p_yx,
        p_yy,
        rwc,
        stderr_rwc: F::zero(),
        completed_walks_x: labeling.side_nodes(Side::X).len() as u64,
        completed_walks_y: labeling.side_nodes(Side::Y).len() as u64,
        discarded_walks: 0,
    })
}

/// Per-node absorption probabilities into the X hubs and the Y hubs.
/// Residual mass (1 − x − y) is the Discard probability.
fn absorption_probabilities<F: Real>(
    graph: &DirectedGraph,
    hubs: &HubSet,
    edge_mode: EdgeMode,
) -> Result<(Vec<F>, Vec<F>)> {
    let n = graph.node_count();
    let view = NeighborView::build(graph, edge_mode);

    // A node whose walks can never arrive at a hub is "doomed": all its mass
    // discards. Reverse reachability from the hub set finds the rest.
    let mut reaches_hub = vec![false; n];
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for &h in hubs.hubs_x().iter().chain(hubs.hubs_y()) {
        reaches_hub[h.index()] = true;
        queue.push_back(h);
    }
    while let Some(v) = queue.pop_front() {
        let predecessors = match edge_mode {
            // The symmetrized view is its own reverse.
            EdgeMode::Symmetrized => view.neighbors(v),
            // A directed-out walk enters v from v's followers.
            EdgeMode::DirectedOut => graph.in_neighbors(v),
        };
        for &u in predecessors {
            if !reaches_hub[u.index()] {
                reaches_hub[u.index()] = true;
                queue.push_back(u);
            }
        }
    }

    let transient: Vec<NodeId> = graph
        .nodes()
        .filter(|&v| reaches_hub[v.index()] && !hubs.contains(v))
        .collect();
    let mut row_of = vec![usize::MAX; n];
    for (row, &v) in transient.iter().enumerate() {
        row_of[v.index()] = row;
    }

    // Assemble I − Q row by row, with the one-step hub-absorption masses as
    // the two right-hand sides. Every transient node has at least one
    // neighbor, or it could not reach a hub.
    let t = transient.len();
    let mut m = vec![F::zero(); t * t];
    let mut bx = vec![F::zero(); t];
    let mut by = vec![F::zero(); t];
    for (row, &u) in transient.iter().enumerate() {
        m[row * t + row] = F::one();
        let neighbors = view.neighbors(u);
        let step = F::one() / from_usize::<F>(neighbors.len());
        for &v in neighbors {
            match hubs.hub_side(v) {
                Some(Side::X) => bx[row] += step,
                Some(Side::Y) => by[row] += step,
                None if reaches_hub[v.index()] => {
                    let col = row_of[v.index()];
                    m[row * t + col] = m[row * t + col] - step;
                }
                // Doomed neighbor: that step's mass discards.
                None => {}
            }
        }
    }
    solve_two(&mut m, t, &mut bx, &mut by)?;

    let mut ax = vec![F::zero(); n];
    let mut ay = vec![F::zero(); n];
    for &h in hubs.hubs_x() {
        ax[h.index()] = F::one();
    }
    for &h in hubs.hubs_y() {
        ay[h.index()] = F::one();
    }
    for (row, &v) in transient.iter().enumerate() {
        ax[v.index()] = bx[row];
        ay[v.index()] = by[row];
    }
    Ok((ax, ay))
}

/// Solves the t×t system for both right-hand sides in place: Gaussian
/// elimination with partial pivoting, then back substitution. `m` is
/// row-major and consumed as scratch.
fn solve_two<F: Real>(m: &mut [F], t: usize, bx: &mut [F], by: &mut [F]) -> Result<()> {
    for col in 0..t {
        let mut pivot = col;
        let mut best = m[col * t + col].abs();
        for row in (col + 1)..t {
            let a = m[row * t + col].abs();
            if a > best {
                best = a;
                pivot = row;
            }
        }
        if best == F::zero() {
            return Err(Error::Internal(
                "singular absorbing-chain system despite discard state".into(),
            ));
        }
        if pivot != col {
            for k in col..t {
                m.swap(col * t + k, pivot * t + k);
            }
            bx.swap(col, pivot);
            by.swap(col, pivot);
        }
        let (upper, lower) = m.split_at_mut((col + 1) * t);
        let pivot_row = &upper[col * t..(col + 1) * t];
        let diag = pivot_row[col];
        for (offset, row_slice) in lower.chunks_exact_mut(t).enumerate() {
            let factor = row_slice[col] / diag;
            if factor == F::zero() {
                continue;
            }
            row_slice[col] = F::zero();
            for (x, &p) in row_slice[col + 1..].iter_mut().zip(&pivot_row[col + 1..]) {
                *x = *x - factor * p;
            }
            let row = col + 1 + offset;
            bx[row] = bx[row] - factor * bx[col];
            by[row] = by[row] - factor * by[col];
        }
    }
    for col in (0..t).rev() {
        let row = &m[col * t..(col + 1) * t];
        let (bx_head, bx_tail) = bx.split_at_mut(col + 1);
        let (by_head, by_tail) = by.split_at_mut(col + 1);
        let mut x = bx_head[col];
        let mut y = by_head[col];
        for ((&a, &vx), &vy) in row[col + 1..].iter().zip(bx_tail.iter()).zip(by_tail.iter()) {
            x = x - a * vx;
            y = y - a * vy;
        }
        bx_head[col] = x / row[col];
        by_head[col] = y / row[col];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, Label};
    use crate::rwc::WalkConfig;

    #[test]
    fn solve_two_known_system() {
        // [2 1; 1 3] x = (3, 4) and (1, 0) → x = (1, 1) and (0.6, -0.2).
        let mut m: Vec<f64> = vec![2.0, 1.0, 1.0, 3.0];
        let mut bx = vec![3.0, 4.0];
        let mut by = vec![1.0, 0.0];
        solve_two(&mut m, 2, &mut bx, &mut by).unwrap();
        assert!((bx[0] - 1.0).abs() < 1e-12 && (bx[1] - 1.0).abs() < 1e-12);
        assert!((by[0] - 0.6).abs() < 1e-12 && (by[1] + 0.2).abs() < 1e-12);
    }

    #[test]
    fn solve_two_reports_singular() {
        let mut m = vec![1.0, 1.0, 1.0, 1.0];
        let mut bx = vec![1.0, 1.0];
        let mut by = vec![0.0, 0.0];
        assert!(matches!(
            solve_two(&mut m, 2, &mut bx, &mut by).unwrap_err(),
            Error::Internal(_)
        ));
    }

    #[test]
    fn doomed_component_discards_instead_of_breaking_the_solve() {
        // Side X: a 2-cycle {x0, x1} plus a separate pair x2→x3; side Y:
        // y0→y1. In-degree ties put the X hub at x0, so {x2, x3} is a closed
        // transient pair that can never reach a hub. Left in the linear
        // system its block of I − Q would be singular; the doomed-node pass
        // must route that mass to Discard and renormalize the rest.
        let mut b = GraphBuilder::new();
        let x0 = b.intern("x0");
        let x1 = b.intern("x1");
        b.add_edge(x0, x1);
        b.add_edge(x1, x0);
        let x2 = b.intern("x2");
        let x3 = b.intern("x3");
        b.add_edge(x2, x3);
        let y0 = b.intern("y0");
        let y1 = b.intern("y1");
        b.add_edge(y0, y1);
        let g = b.build().0;
        let lab = PartitionLabeling::new(vec![
            Label::X,
            Label::X,
            Label::X,
            Label::X,
            Label::Y,
            Label::Y,
        ]);
        let est = exact_rwc::<f64>(&g, &lab, 1, EdgeMode::Symmetrized).unwrap();
        // x0 and x1 always absorb at x0; x2 and x3 always discard. The
        // renormalized side-X row is still all own-side.
        assert_eq!(est.p_xx, 1.0);
        assert_eq!(est.p_yy, 1.0);
        assert_eq!(est.rwc, 1.0);
    }

    #[test]
    fn exact_has_no_sampling_noise_and_matches_walk_limit() {
        // Cross-check the solver against a large Monte Carlo run on a small
        // asymmetric graph.
        let mut b = GraphBuilder::new();
        let xs: Vec<_> = (0..6).map(|i| b.intern(&format!("x{i}"))).collect();
        let ys: Vec<_> = (0..5).map(|i| b.intern(&format!("y{i}"))).collect();
        for i in 0..5 {
            b.add_edge(xs[i], xs[i + 1]);
        }
        for i in 0..4 {
            b.add_edge(ys[i], ys[i + 1]);
        }
        b.add_edge(xs[2], ys[1]);
        b.add_edge(ys[3], xs[4]);
        b.add_edge(xs[0], ys[4]);
        let g = b.build().0;
        let lab = PartitionLabeling::new(
            (0..11).map(|i| if i < 6 { Label::X } else { Label::Y }).collect(),
        );
        let exact = exact_rwc::<f64>(&g, &lab, 2, EdgeMode::Symmetrized).unwrap();
        let config = WalkConfig::default().with_hub_count(2).with_walks(40_000).with_seed(5);
        let mc = crate::rwc::estimate_rwc::<f64>(&g, &lab, &config).unwrap();
        assert!(
            (mc.rwc - exact.rwc).abs() <= 3.0 * mc.stderr_rwc,
            "mc {} vs exact {} (stderr {})",
            mc.rwc,
            exact.rwc,
            mc.stderr_rwc
        );
    }
}
