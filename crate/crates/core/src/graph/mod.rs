//! Directed follow graphs, partition labels and candidate pools.
//!
//! Graphs are simple (no self-loops, no parallel edges) and immutable after
//! construction: mutation operations return new graph values, so a graph can
//! be shared freely across concurrent walkers. An edge `u -> v` means
//! "u follows v"; `in_degree(v)` is v's follower count.

use std::collections::HashMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod io;

/// Dense index of a node within one graph instance.
///
/// Ids are assigned contiguously from 0 and stay stable across mutations of
/// the same graph value; nodes added by augmentation take the next free index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index fits in u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// One side of the discussion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Y,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::X => Side::Y,
            Side::Y => Side::X,
        }
    }

    /// Stable tag used in seed derivation.
    pub(crate) fn tag(self) -> u64 {
        match self {
            Side::X => 0,
            Side::Y => 1,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::X => write!(f, "X"),
            Side::Y => write!(f, "Y"),
        }
    }
}

/// Partition label of a node. Nodes of the original graph are always `X` or
/// `Y`; only nodes introduced by node addition may be `Unassigned`, and they
/// belong to neither side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    X,
    Y,
    Unassigned,
}

impl Label {
    pub fn side(self) -> Option<Side> {
        match self {
            Label::X => Some(Side::X),
            Label::Y => Some(Side::Y),
            Label::Unassigned => None,
        }
    }
}

impl From<Side> for Label {
    fn from(s: Side) -> Label {
        match s {
            Side::X => Label::X,
            Side::Y => Label::Y,
        }
    }
}

/// Immutable directed graph with mirrored out- and in-adjacency.
///
/// Both adjacency lists are kept sorted by id, which makes edge lookups
/// binary searches and keeps every downstream iteration order deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    external_ids: Option<Vec<String>>,
    id_lookup: Option<HashMap<String, NodeId>>,
    edge_count: usize,
}

impl DirectedGraph {
    pub fn node_count(&self) -> usize {
        self.out_adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.out_adj.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from_index)
    }

    /// Nodes this node follows.
    pub fn out_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.out_adj[v.index()]
    }

    /// Followers of this node.
    pub fn in_neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.in_adj[v.index()]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.out_adj[v.index()].len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.in_adj[v.index()].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj[u.index()].binary_search(&v).is_ok()
    }

    /// All edges in (source id, target id) order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_adj
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (NodeId::from_index(u), v)))
    }

    /// Original string identifier of a node, when the graph carries them.
    pub fn external_id(&self, v: NodeId) -> Option<&str> {
        self.external_ids
            .as_ref()
            .map(|ids| ids[v.index()].as_str())
    }

    /// Display form of a node: its external id when present, else its index.
    pub fn node_name(&self, v: NodeId) -> String {
        match self.external_id(v) {
            Some(s) => s.to_owned(),
            None => v.to_string(),
        }
    }

    pub fn node_by_external_id(&self, id: &str) -> Option<NodeId> {
        self.id_lookup.as_ref().and_then(|m| m.get(id).copied())
    }

    fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    /// Full-scan structural check: adjacency mirror consistency, sortedness,
    /// no self-loops, no parallel edges, edge count. Used by tests after
    /// every mutating operation.
    pub fn check_consistency(&self) -> Result<()> {
        let n = self.node_count();
        if self.in_adj.len() != n {
            return Err(Error::Internal("in/out table length mismatch".into()));
        }
        let mut seen_edges = 0usize;
        for u in 0..n {
            let out = &self.out_adj[u];
            if !out.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Internal(format!("out_adj[{u}] not strictly sorted")));
            }
            for &v in out {
                if v.index() >= n {
                    return Err(Error::Internal(format!("edge {u}->{v} out of range")));
                }
                if v.index() == u {
                    return Err(Error::Internal(format!("self-loop at {u}")));
                }
                if self.in_adj[v.index()].binary_search(&NodeId::from_index(u)).is_err() {
                    return Err(Error::Internal(format!("edge {u}->{v} missing in in_adj")));
                }
                seen_edges += 1;
            }
            if !self.in_adj[u].windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Internal(format!("in_adj[{u}] not strictly sorted")));
            }
        }
        let in_edges: usize = self.in_adj.iter().map(Vec::len).sum();
        if seen_edges != self.edge_count || in_edges != self.edge_count {
            return Err(Error::Internal(format!(
                "edge count mismatch: out={seen_edges} in={in_edges} recorded={}",
                self.edge_count
            )));
        }
        Ok(())
    }
}

/// Counters for input rows that were silently repaired during construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildWarnings {
    pub self_loops_dropped: usize,
    pub duplicate_edges_collapsed: usize,
}

/// Accumulates nodes and raw edges, then produces a simple [`DirectedGraph`].
///
/// Self-loops are dropped and parallel edges collapsed at `build` time; the
/// counts of both repairs are reported back to the caller.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    external_ids: Vec<String>,
    lookup: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the node for `id`, creating it on first sight.
    pub fn intern(&mut self, id: &str) -> NodeId {
        if let Some(&v) = self.lookup.get(id) {
            return v;
        }
        let v = NodeId::from_index(self.external_ids.len());
        self.external_ids.push(id.to_owned());
        self.lookup.insert(id.to_owned(), v);
        v
    }

    pub fn node_count(&self) -> usize {
        self.external_ids.len()
    }

    pub fn add_edge(&mut self, source: NodeId, target: NodeId) {
        self.edges.push((source, target));
    }

    pub fn build(self) -> (DirectedGraph, BuildWarnings) {
        let n = self.external_ids.len();
        let mut warnings = BuildWarnings::default();
        let mut edges = self.edges;
        let before = edges.len();
        edges.retain(|(u, v)| u != v);
        warnings.self_loops_dropped = before - edges.len();
        edges.sort_unstable();
        edges.dedup();
        warnings.duplicate_edges_collapsed = before - warnings.self_loops_dropped - edges.len();

        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            out_adj[u.index()].push(v);
            in_adj[v.index()].push(u);
        }
        for list in &mut in_adj {
            list.sort_unstable();
        }
        let graph = DirectedGraph {
            out_adj,
            in_adj,
            edge_count: edges.len(),
            external_ids: Some(self.external_ids),
            id_lookup: Some(self.lookup),
        };
        (graph, warnings)
    }
}

/// Per-node partition labels, index-aligned with a graph's node table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionLabeling {
    labels: Vec<Label>,
}

impl PartitionLabeling {
    pub fn new(labels: Vec<Label>) -> Self {
        PartitionLabeling { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, v: NodeId) -> Label {
        self.labels[v.index()]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Nodes carrying the given label, ascending by id.
    pub fn nodes_with(&self, label: Label) -> Vec<NodeId> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| NodeId::from_index(i))
            .collect()
    }

    /// Nodes belonging to a side, ascending by id.
    pub fn side_nodes(&self, side: Side) -> Vec<NodeId> {
        self.nodes_with(Label::from(side))
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    /// Errors unless both sides have at least one member.
    pub fn require_both_sides(&self) -> Result<()> {
        for side in [Side::X, Side::Y] {
            if self.count(Label::from(side)) == 0 {
                return Err(Error::DegeneratePartition(side));
            }
        }
        Ok(())
    }

    /// Labeling with X and Y exchanged; Unassigned stays Unassigned.
    pub fn swapped(&self) -> Self {
        PartitionLabeling {
            labels: self
                .labels
                .iter()
                .map(|l| match l {
                    Label::X => Label::Y,
                    Label::Y => Label::X,
                    Label::Unassigned => Label::Unassigned,
                })
                .collect(),
        }
    }
}

/// Stable identity of a candidate: its position in the pool, i.e. its index
/// in the potential graph's numbering after the base graph's nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CandidateId(pub usize);

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An external node that could be added to the graph: known by its string id
/// and by the set of graph nodes that already follow it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    external_id: String,
    followers: Vec<NodeId>,
    followers_in_x: usize,
    followers_in_y: usize,
}

impl Candidate {
    /// Builds a candidate, normalizing the follower list (sorted, deduped)
    /// and splitting it by the followers' partition labels.
    pub fn new(
        external_id: impl Into<String>,
        mut followers: Vec<NodeId>,
        graph: &DirectedGraph,
        labeling: &PartitionLabeling,
    ) -> Result<Self> {
        followers.sort_unstable();
        followers.dedup();
        let mut in_x = 0;
        let mut in_y = 0;
        for &f in &followers {
            if !graph.contains(f) {
                return Err(Error::UnknownNode(f.to_string()));
            }
            match labeling.label(f) {
                Label::X => in_x += 1,
                Label::Y => in_y += 1,
                Label::Unassigned => {
                    return Err(Error::InvalidParameter(format!(
                        "candidate follower {f} is unassigned; followers must belong to a side"
                    )))
                }
            }
        }
        Ok(Candidate {
            external_id: external_id.into(),
            followers,
            followers_in_x: in_x,
            followers_in_y: in_y,
        })
    }

    pub fn external_id(&self) -> &str {
        &self.external_id
    }

    /// Nodes of the base graph that follow this candidate, ascending by id.
    pub fn followers(&self) -> &[NodeId] {
        &self.followers
    }

    /// Follower count inside the graph; the candidate's in-degree once added.
    pub fn in_degree(&self) -> usize {
        self.followers.len()
    }

    pub fn followers_in_x(&self) -> usize {
        self.followers_in_x
    }

    pub fn followers_in_y(&self) -> usize {
        self.followers_in_y
    }
}

/// The candidates of the potential graph that are not yet in the base graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidatePool {
    candidates: Vec<Candidate>,
}

impl CandidatePool {
    pub fn new(candidates: Vec<Candidate>) -> Self {
        CandidatePool { candidates }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, id: CandidateId) -> &Candidate {
        &self.candidates[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (CandidateId, &Candidate)> {
        self.candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (CandidateId(i), c))
    }
}

/// Adds one candidate to the graph: a new node that receives exactly the
/// in-edges from its followers and no out-edges, labeled `Unassigned`.
///
/// The inputs are untouched; augmented copies are returned.
pub fn add_candidate(
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
    candidate: &Candidate,
) -> Result<(DirectedGraph, PartitionLabeling)> {
    if graph.node_by_external_id(&candidate.external_id).is_some() {
        return Err(Error::DuplicateNode(candidate.external_id.clone()));
    }
    for &f in &candidate.followers {
        if !graph.contains(f) {
            return Err(Error::UnknownNode(f.to_string()));
        }
    }

    let mut g = graph.clone();
    let new = NodeId::from_index(g.node_count());
    // The new id is larger than every existing id, so pushing it keeps the
    // followers' out-lists sorted.
    for &f in &candidate.followers {
        g.out_adj[f.index()].push(new);
    }
    g.out_adj.push(Vec::new());
    g.in_adj.push(candidate.followers.clone());
    g.edge_count += candidate.followers.len();
    if let Some(ids) = &mut g.external_ids {
        ids.push(candidate.external_id.clone());
    }
    if let Some(lookup) = &mut g.id_lookup {
        lookup.insert(candidate.external_id.clone(), new);
    }

    let mut labels = labeling.labels.clone();
    labels.push(Label::Unassigned);
    Ok((g, PartitionLabeling::new(labels)))
}

/// Rounds half away from zero; arguments here are always non-negative.
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Removes `round(fraction * in_degree(node))` incoming edges of `node`,
/// chosen uniformly without replacement under `seed`. Returns a new graph.
pub fn remove_in_edges(
    graph: &DirectedGraph,
    node: NodeId,
    fraction: f64,
    seed: u64,
) -> Result<DirectedGraph> {
    if !graph.contains(node) {
        return Err(Error::UnknownNode(node.to_string()));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "removal fraction {fraction} outside [0, 1]"
        )));
    }
    let in_list = &graph.in_adj[node.index()];
    let remove_count = round_half_up(fraction * in_list.len() as f64).min(in_list.len());
    if remove_count == 0 {
        return Ok(graph.clone());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = in_list.clone();
    let (removed, _) = shuffled.partial_shuffle(&mut rng, remove_count);
    let mut removed: Vec<NodeId> = removed.to_vec();
    removed.sort_unstable();

    let mut g = graph.clone();
    g.in_adj[node.index()].retain(|f| removed.binary_search(f).is_err());
    for f in &removed {
        let out = &mut g.out_adj[f.index()];
        if let Ok(pos) = out.binary_search(&node) {
            out.remove(pos);
        }
    }
    g.edge_count -= removed.len();
    Ok(g)
}
