//! Plain-text readers and writers for graphs, partitions and candidate pools.
//!
//! All files are line-oriented UTF-8. Blank lines and lines starting with `#`
//! are skipped. Fields are separated by a tab or, as a fallback, a comma —
//! whichever appears first on the line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{
    BuildWarnings, Candidate, CandidatePool, DirectedGraph, GraphBuilder, Label, NodeId,
    PartitionLabeling,
};

/// Splits a data line into exactly two fields at the first tab (preferred)
/// or first comma.
fn split_fields(line: &str) -> Option<(&str, &str)> {
    let sep = line.find('\t').or_else(|| line.find(','))?;
    let (a, b) = line.split_at(sep);
    let (a, b) = (a.trim(), b[1..].trim());
    if a.is_empty() || b.is_empty() {
        return None;
    }
    Some((a, b))
}

fn data_lines(path: &Path) -> Result<impl Iterator<Item = (usize, String)>> {
    let file = File::open(path)?;
    Ok(BufReader::new(file)
        .lines()
        .map_while(|l| l.ok())
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        }))
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a `source <tab> target` edge list into a simple directed graph.
///
/// Nodes are numbered in order of first appearance. Self-loops and duplicate
/// edges are repaired, with counts reported in the returned warnings.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(DirectedGraph, BuildWarnings)> {
    let path = path.as_ref();
    let mut builder = GraphBuilder::new();
    for (line_no, line) in data_lines(path)? {
        let (s, t) = split_fields(&line)
            .ok_or_else(|| Error::parse(path_str(path), line_no, "expected `source<TAB>target`"))?;
        let u = builder.intern(s);
        let v = builder.intern(t);
        builder.add_edge(u, v);
    }
    if builder.node_count() == 0 {
        return Err(Error::EmptyGraph(path_str(path)));
    }
    Ok(builder.build())
}

/// Reads a `node <tab> X|Y` partition file for `graph`.
///
/// Every node of the graph must be assigned exactly one side; unknown nodes,
/// conflicting duplicate assignments and missing nodes are errors.
pub fn load_partition(path: impl AsRef<Path>, graph: &DirectedGraph) -> Result<PartitionLabeling> {
    let path = path.as_ref();
    let mut labels: Vec<Option<Label>> = vec![None; graph.node_count()];
    for (line_no, line) in data_lines(path)? {
        let (name, side) = split_fields(&line)
            .ok_or_else(|| Error::parse(path_str(path), line_no, "expected `node<TAB>X|Y`"))?;
        let label = match side {
            "X" => Label::X,
            "Y" => Label::Y,
            other => {
                return Err(Error::parse(
                    path_str(path),
                    line_no,
                    format!("unknown side `{other}` (expected X or Y)"),
                ))
            }
        };
        let v = graph
            .node_by_external_id(name)
            .ok_or_else(|| Error::UnknownNode(name.to_owned()))?;
        match labels[v.index()] {
            None => labels[v.index()] = Some(label),
            Some(prev) if prev == label => {}
            Some(_) => {
                return Err(Error::parse(
                    path_str(path),
                    line_no,
                    format!("node `{name}` assigned to both sides"),
                ))
            }
        }
    }
    let missing: Vec<String> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_none())
        .map(|(i, _)| graph.node_name(NodeId::from_index(i)))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompletePartition { missing });
    }
    Ok(PartitionLabeling::new(
        labels.into_iter().map(|l| l.unwrap()).collect(),
    ))
}

/// Reads a candidate pool: `follower <tab> candidate` lines where followers
/// are nodes of `graph` and candidates are ids *not* present in `graph`.
///
/// Candidates are ordered by first appearance in the file. Duplicate
/// follower lines collapse; a candidate id that exists in the graph is an
/// error.
pub fn load_candidate_pool(
    path: impl AsRef<Path>,
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
) -> Result<CandidatePool> {
    let path = path.as_ref();
    let mut order: Vec<String> = Vec::new();
    let mut followers: HashMap<String, Vec<NodeId>> = HashMap::new();
    for (line_no, line) in data_lines(path)? {
        let (f, c) = split_fields(&line).ok_or_else(|| {
            Error::parse(path_str(path), line_no, "expected `follower<TAB>candidate`")
        })?;
        if graph.node_by_external_id(c).is_some() {
            return Err(Error::parse(
                path_str(path),
                line_no,
                format!("candidate `{c}` already exists in the graph"),
            ));
        }
        let fv = graph
            .node_by_external_id(f)
            .ok_or_else(|| Error::UnknownNode(f.to_owned()))?;
        followers
            .entry(c.to_owned())
            .or_insert_with(|| {
                order.push(c.to_owned());
                Vec::new()
            })
            .push(fv);
    }
    if order.is_empty() {
        return Err(Error::EmptyPool(path_str(path)));
    }
    let mut cands = Vec::with_capacity(order.len());
    for name in order {
        let fs = followers.remove(&name).unwrap();
        cands.push(Candidate::new(name, fs, graph, labeling)?);
    }
    Ok(CandidatePool::new(cands))
}

/// Writes the graph as a `source <tab> target` edge list, edges sorted by
/// (source, target) id. Isolated nodes do not appear; writing and re-loading
/// therefore only round-trips graphs without isolated nodes, which
/// [`write_partition`] compensates for by listing every node.
pub fn write_edge_list(path: impl AsRef<Path>, graph: &DirectedGraph) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    for (u, v) in graph.edges() {
        writeln!(w, "{}\t{}", graph.node_name(u), graph.node_name(v))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `node <tab> X|Y` lines for every side-labeled node, ascending by
/// id. Unassigned nodes are listed in a trailing comment block so the file
/// stays loadable while still recording them.
pub fn write_partition(
    path: impl AsRef<Path>,
    graph: &DirectedGraph,
    labeling: &PartitionLabeling,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    for v in graph.nodes() {
        match labeling.label(v) {
            Label::X => writeln!(w, "{}\tX", graph.node_name(v))?,
            Label::Y => writeln!(w, "{}\tY", graph.node_name(v))?,
            Label::Unassigned => {}
        }
    }
    for v in graph.nodes() {
        if labeling.label(v) == Label::Unassigned {
            writeln!(w, "# unassigned\t{}", graph.node_name(v))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes a candidate pool as `follower <tab> candidate` lines, candidates
/// in pool order and followers ascending by id.
pub fn write_candidate_pool(
    path: impl AsRef<Path>,
    graph: &DirectedGraph,
    pool: &CandidatePool,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    for (_, cand) in pool.iter() {
        for &f in cand.followers() {
            writeln!(w, "{}\t{}", graph.node_name(f), cand.external_id())?;
        }
    }
    w.flush()?;
    Ok(())
}
