use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fadeopt::marl::Solution;
use fadeopt::numfmt;
use serde::{Deserialize, Serialize};

pub const SUMMARY: &str = "best.json";

/// What every command leaves behind in its output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub method: String,
    pub seed: u64,
    pub variables: Vec<String>,
    pub objectives: Vec<String>,
    pub targets: Vec<f64>,
    /// Model evaluations (baselines, brute force) or environment steps (training).
    pub evaluations: usize,
    pub best: Solution,
}

impl RunSummary {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("no finished run at {}", dir.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))
    }

    /// Human-readable listing of the best state and its objectives.
    pub fn describe(&self) -> String {
        let mut s = format!(
            "{}: best state {} with summed error {:.6}\n",
            self.method, self.best.state, self.best.summed_error
        );
        for (k, name) in self.objectives.iter().enumerate() {
            let _ = writeln!(
                s,
                "  {name:>12}  predicted {:>12.6}  target {:>12.6}  error {:>10.6}",
                self.best.predictions[k], self.targets[k], self.best.errors[k]
            );
        }
        s
    }
}

/// Comparison with one row per method.
pub struct Comparison {
    pub labels: Vec<String>,
    pub runs: Vec<RunSummary>,
}

impl Comparison {
    pub fn new(runs: Vec<(String, RunSummary)>) -> Result<Self> {
        let first = &runs[0].1;
        for (label, r) in &runs[1..] {
            if r.variables != first.variables
                || r.objectives != first.objectives
                || r.targets != first.targets
            {
                bail!(
                    "run {label} has different variables, objectives or targets than {}",
                    runs[0].0
                );
            }
        }
        let (labels, runs) = runs.into_iter().unzip();
        Ok(Comparison { labels, runs })
    }

    pub fn header(&self) -> Vec<String> {
        let r = &self.runs[0];
        let mut h = vec!["run".to_string(), "method".to_string()];
        h.extend(r.variables.iter().map(|v| format!("state_{v}")));
        h.extend(r.objectives.iter().map(|o| format!("value_{o}")));
        h.extend(r.objectives.iter().map(|o| format!("target_{o}")));
        h.push("summed_error".into());
        h
    }

    pub fn rows(&self) -> Vec<Vec<String>> {
        self.labels
            .iter()
            .zip(&self.runs)
            .map(|(label, r)| {
                let mut row = vec![label.clone(), r.method.clone()];
                row.extend(r.best.state.values().iter().map(|&v| numfmt::real(v)));
                row.extend(r.best.predictions.iter().map(|&v| numfmt::real(v)));
                row.extend(r.targets.iter().map(|&v| numfmt::real(v)));
                row.push(numfmt::real(r.best.summed_error));
                row
            })
            .collect()
    }

    /// Objectives down the side, a target column, then one column per run.
    pub fn render(&self) -> String {
        let first = &self.runs[0];
        let mut table: Vec<Vec<String>> = Vec::new();
        let mut head = vec![String::new(), "target".to_string()];
        head.extend(self.labels.iter().cloned());
        table.push(head);
        for (j, v) in first.variables.iter().enumerate() {
            let mut row = vec![v.clone(), "-".into()];
            row.extend(
                self.runs
                    .iter()
                    .map(|r| format!("{}", r.best.state.values()[j])),
            );
            table.push(row);
        }
        for (k, o) in first.objectives.iter().enumerate() {
            let mut row = vec![o.clone(), format!("{:.2}", first.targets[k])];
            row.extend(
                self.runs
                    .iter()
                    .map(|r| format!("{:.2}", r.best.predictions[k])),
            );
            table.push(row);
        }
        let mut last = vec!["summed error".to_string(), "-".into()];
        last.extend(
            self.runs
                .iter()
                .map(|r| format!("{:.4}", r.best.summed_error)),
        );
        table.push(last);

        let widths: Vec<usize> = (0..table[0].len())
            .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &table {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, &w))| {
                    if c == 0 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("cannot write {}", path.display()))?;
        w.write_record(self.header())?;
        for row in self.rows() {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}
