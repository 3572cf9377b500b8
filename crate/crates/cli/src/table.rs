use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::config::Method;
use crate::output::ResultFile;
use crate::pipeline::{ProblemKind, ResultRow};

/// Reads every `*.json` result file in `dir`, sorted by file name.
pub fn load_results(dir: &Path) -> Result<Vec<(PathBuf, ResultFile)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text =
                std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let r: ResultFile = serde_json::from_str(&text)
                .with_context(|| format!("corrupted result file {}", p.display()))?;
            Ok((p, r))
        })
        .collect()
}

/// One aggregated cell group: the best of all runs sharing a key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub problem: String,
    pub method: Method,
    pub ansatz: String,
    pub steps: usize,
    pub error_seq: Option<f64>,
    pub error: f64,
    pub overlap_seq: Option<f64>,
    pub overlap: f64,
    pub error_mha: Option<f64>,
    pub runs: usize,
    pub best: String,
}

pub struct Table {
    pub kind: Option<ProblemKind>,
    pub rows: Vec<TableRow>,
}

/// Groups rows by `(problem, method, ansatz, S)`, keeping the lowest
/// final error of each group.
pub fn aggregate(results: &[(PathBuf, ResultFile)]) -> Result<Table> {
    let mut by_kind: BTreeMap<ProblemKind, Vec<&Path>> = BTreeMap::new();
    for (p, r) in results {
        by_kind.entry(r.row.kind).or_default().push(p);
    }
    if by_kind.len() > 1 {
        let (majority, _) = by_kind
            .iter()
            .max_by_key(|(_, v)| v.len())
            .expect("nonempty");
        let offenders: Vec<String> = by_kind
            .iter()
            .filter(|(k, _)| *k != majority)
            .flat_map(|(_, v)| v.iter().map(|p| p.display().to_string()))
            .collect();
        bail!(
            "results mix Hubbard and chemistry rows; offending files: {}",
            offenders.join(", ")
        );
    }
    let mut groups: BTreeMap<(usize, String, Method, String, usize), Vec<&ResultRow>> =
        BTreeMap::new();
    for (_, r) in results {
        let row = &r.row;
        groups
            .entry((
                row.sites,
                row.problem.clone(),
                row.method,
                row.ansatz.clone(),
                row.steps,
            ))
            .or_default()
            .push(row);
    }
    let rows = groups
        .into_values()
        .map(|rows| {
            let best = rows
                .iter()
                .min_by(|a, b| a.error.total_cmp(&b.error))
                .expect("nonempty group");
            TableRow {
                problem: best.problem.clone(),
                method: best.method,
                ansatz: best.ansatz.clone(),
                steps: best.steps,
                error_seq: best.error_seq,
                error: best.error,
                overlap_seq: best.overlap_seq,
                overlap: best.overlap,
                error_mha: best.error_mha,
                runs: rows.len(),
                best: best.name.clone(),
            }
        })
        .collect();
    Ok(Table {
        kind: by_kind.into_keys().next(),
        rows,
    })
}

fn cell(x: Option<f64>, f: impl Fn(f64) -> String) -> String {
    x.map_or_else(|| "-".into(), f)
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

fn prob(x: f64) -> String {
    format!("{x:.5}")
}

impl Table {
    /// Fixed-width text, one block per problem and method.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut last: Option<(&str, Method)> = None;
        for r in &self.rows {
            if last != Some((r.problem.as_str(), r.method)) {
                if last.is_some() {
                    out.push('\n');
                }
                let _ = writeln!(out, "{} ({})", r.problem, r.method.as_str());
                match self.kind {
                    Some(ProblemKind::Chemistry) => {
                        let _ = writeln!(
                            out,
                            "{:<14} {:>4} {:>12} {:>9}",
                            "ansatz", "S", "ΔE (mHa)", "P"
                        );
                    }
                    _ => {
                        let _ = writeln!(
                            out,
                            "{:>4} {:>11} {:>11} {:>9} {:>9}",
                            "S", "ΔE^s", "ΔE^f", "P^s", "P^f"
                        );
                    }
                }
                last = Some((r.problem.as_str(), r.method));
            }
            match self.kind {
                Some(ProblemKind::Chemistry) => {
                    let _ = writeln!(
                        out,
                        "{:<14} {:>4} {:>12} {:>9}",
                        r.ansatz,
                        r.steps,
                        cell(r.error_mha, |x| format!("{x:.4}")),
                        prob(r.overlap)
                    );
                }
                _ => {
                    let _ = writeln!(
                        out,
                        "{:>4} {:>11} {:>11} {:>9} {:>9}",
                        r.steps,
                        cell(r.error_seq, sci),
                        sci(r.error),
                        cell(r.overlap_seq, prob),
                        prob(r.overlap)
                    );
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        if self.rows.is_empty() {
            w.write_record([
                "problem",
                "method",
                "ansatz",
                "steps",
                "error_seq",
                "error",
                "overlap_seq",
                "overlap",
                "error_mha",
                "runs",
                "best",
            ])?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
