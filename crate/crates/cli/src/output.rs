//! Artifact writers: the CSV tables and their JSON mirrors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use depolar_core::sim::{BaselineTable, UnfollowCurve};
use depolar_core::{AdditionPlan64, Result};

use crate::manifest::RunManifest;

/// Serializes `value` as pretty JSON into `dir/name` and records its hash.
pub fn write_json<T: Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
    manifest: &mut RunManifest,
) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).expect("artifact serialization cannot fail");
    text.push('\n');
    std::fs::write(&path, text)?;
    manifest.record_output(&path)?;
    Ok(path)
}

fn write_csv(dir: &Path, name: &str, text: String, manifest: &mut RunManifest) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    manifest.record_output(&path)?;
    Ok(path)
}

/// `i,node,delta_rwc,cumulative_rwc` — row `i` is the i-th addition
/// (1-based), with the score after the first `i` nodes are in place.
pub fn write_plan_csv(
    dir: &Path,
    plan: &AdditionPlan64,
    manifest: &mut RunManifest,
) -> Result<PathBuf> {
    let mut text = String::from("i,node,delta_rwc,cumulative_rwc\n");
    for (i, node) in plan.selected.iter().enumerate() {
        writeln!(
            text,
            "{},{},{},{}",
            i + 1,
            node.external_id,
            node.delta_rwc,
            plan.cumulative_rwc[i]
        )
        .expect("writing to a String cannot fail");
    }
    write_csv(dir, "plan.csv", text, manifest)
}

/// `strategy,k,rwc`, grouped by strategy, ascending in `k`.
pub fn write_baseline_csv(
    dir: &Path,
    table: &BaselineTable<f64>,
    manifest: &mut RunManifest,
) -> Result<PathBuf> {
    let mut text = String::from("strategy,k,rwc\n");
    for row in &table.rows {
        writeln!(text, "{},{},{}", row.strategy, row.k, row.rwc)
            .expect("writing to a String cannot fail");
    }
    write_csv(dir, "baseline.csv", text, manifest)
}

/// `fraction,mean_rwc,min_rwc,max_rwc`, ascending in fraction.
pub fn write_unfollow_csv(
    dir: &Path,
    curve: &UnfollowCurve<f64>,
    manifest: &mut RunManifest,
) -> Result<PathBuf> {
    let mut text = String::from("fraction,mean_rwc,min_rwc,max_rwc\n");
    for (i, f) in curve.removal_fractions.iter().enumerate() {
        writeln!(
            text,
            "{},{},{},{}",
            f, curve.mean_rwc[i], curve.min_rwc[i], curve.max_rwc[i]
        )
        .expect("writing to a String cannot fail");
    }
    write_csv(dir, "unfollow.csv", text, manifest)
}
