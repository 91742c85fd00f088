//! Deterministic artifact writers: key=value summaries and CSV files with
//! 17 significant digits, comma separators, `.` decimal points, a header
//! row and LF line endings. Two runs with identical inputs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use condenser::model::WeightedGraph;
use condenser::solver::ScalarField;
use condenser::{Error, Result};

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_g17(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Rejection(format!("cannot create output directory: {e}")))?;
    std::fs::write(dir.join(name), contents)
        .map_err(|e| Error::Rejection(format!("cannot write {name}: {e}")))
}

/// Sorted key=value lines.
pub fn summary(pairs: &[(&str, String)]) -> String {
    let mut sorted: Vec<_> = pairs.to_vec();
    sorted.sort_by_key(|(k, _)| *k);
    let mut out = String::new();
    for (k, v) in sorted {
        let _ = writeln!(out, "{k}={v}");
    }
    out
}

pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", header.join(","));
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Node-indexed field CSV: index, one column per coordinate, value.
pub fn field_csv(graph: &WeightedGraph, field: &ScalarField) -> String {
    let dim = graph
        .positions()
        .map(|p| p.first().map(|x| x.len()).unwrap_or(0))
        .unwrap_or(0);
    let mut header: Vec<String> = vec!["index".into()];
    for ax in 0..dim {
        header.push(format!("x{ax}"));
    }
    header.push("value".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let rows: Vec<Vec<String>> = (0..graph.node_count())
        .map(|i| {
            let mut row = vec![i.to_string()];
            if dim > 0 {
                for c in graph.position(i).unwrap() {
                    row.push(fmt_g17(*c));
                }
            }
            row.push(fmt_g17(field.get(i)));
            row
        })
        .collect();
    csv(&header_refs, &rows)
}

/// Radial profile: mean field value binned by distance from a base node.
pub fn radial_profile_csv(
    graph: &WeightedGraph,
    field: &ScalarField,
    base: usize,
    bin: f64,
) -> Result<String> {
    let mut bins: std::collections::BTreeMap<i64, (f64, usize)> = Default::default();
    for i in 0..graph.node_count() {
        let d = graph.distance(i, base)?;
        let key = (d / bin).round() as i64;
        let e = bins.entry(key).or_insert((0.0, 0));
        e.0 += field.get(i);
        e.1 += 1;
    }
    let rows: Vec<Vec<String>> = bins
        .into_iter()
        .map(|(k, (sum, n))| {
            vec![fmt_g17(k as f64 * bin), fmt_g17(sum / n as f64)]
        })
        .collect();
    Ok(csv(&["distance", "mean_value"], &rows))
}

/// Stage-index / radius / value CSV for exhaustion histories.
pub fn stages_csv(radii: &[f64], values: &[f64]) -> String {
    let rows: Vec<Vec<String>> = radii
        .iter()
        .zip(values)
        .enumerate()
        .map(|(j, (r, v))| vec![j.to_string(), fmt_g17(*r), fmt_g17(*v)])
        .collect();
    csv(&["stage", "radius", "value"], &rows)
}
