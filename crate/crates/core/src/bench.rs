//! Benchmark harness: every instance under every strategy, with
//! 1-shifted geometric-mean aggregates.

use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bnb::{solve_with, Limits, SolveOptions, Strategy, GAP_SENTINEL};
use crate::milp::Milp;

/// `(Π (v_i + 1))^(1/n) − 1`, computed in log space.
pub fn shifted_geomean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "shifted_geomean of an empty list");
    let mean = values.iter().map(|v| v.ln_1p()).sum::<f64>() / values.len() as f64;
    mean.exp() - 1.0
}

/// `exp` of the sample standard deviation of `ln(v_i + 1)`. A single value
/// has no spread and yields 1.
pub fn geo_stddev(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "geo_stddev of an empty list");
    let n = values.len();
    if n == 1 {
        return 1.0;
    }
    // Centred on the first value so equal inputs give exactly zero spread.
    let first = values[0].ln_1p();
    let logs: Vec<f64> = values.iter().map(|v| v.ln_1p() - first).collect();
    let mean = logs.iter().sum::<f64>() / n as f64;
    let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    var.sqrt().exp()
}

/// The per-instance quantity aggregated in the summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Measure {
    /// Wall-clock seconds.
    Time,
    #[default]
    Nodes,
    /// Optimality gap, over instances where every strategy found a solution.
    Gap,
}

impl FromStr for Measure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time" => Ok(Measure::Time),
            "nodes" => Ok(Measure::Nodes),
            "gap" => Ok(Measure::Gap),
            _ => Err(format!("unknown measure `{s}` (expected time, nodes or gap)")),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Time => "time",
            Measure::Nodes => "nodes",
            Measure::Gap => "gap",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub limits: Limits,
    pub measure: Measure,
    /// Worker threads for per-cell solves.
    pub jobs: usize,
    /// When false, wall times are recorded as 0 so reports are reproducible.
    pub timing: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            limits: Limits::default(),
            measure: Measure::default(),
            jobs: 1,
            timing: true,
        }
    }
}

/// One `report.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCell {
    pub instance: String,
    pub strategy: String,
    /// A solve status, or `Error` when the solve failed.
    pub status: String,
    pub objective: f64,
    pub best_lb: f64,
    pub gap: f64,
    pub nodes: u64,
    pub wall_time_s: f64,
}

impl BenchCell {
    pub fn has_incumbent(&self) -> bool {
        self.objective.is_finite()
    }
}

/// One `summary.csv` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub strategy: String,
    /// NaN when the measure's instance set is empty.
    pub measure_geomean: f64,
    pub geo_stddev: f64,
    pub inf_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub measure: Measure,
    /// Instance-major, strategies in the given order.
    pub cells: Vec<BenchCell>,
    pub summary: Vec<StrategySummary>,
}

pub fn run_bench(
    instances: &[Milp],
    strategies: &[(String, Strategy)],
    opts: &BenchOptions,
) -> BenchReport {
    assert!(!instances.is_empty() && !strategies.is_empty(), "empty benchmark");
    let pairs: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..strategies.len()).map(move |s| (i, s)))
        .collect();
    let solve_opts = SolveOptions {
        limits: opts.limits,
        ..SolveOptions::default()
    };
    let run = |&(i, s): &(usize, usize)| {
        let (label, strategy) = &strategies[s];
        let m = &instances[i];
        let mut cell = match solve_with(m, strategy, &solve_opts) {
            Ok(o) => BenchCell {
                instance: m.name.clone(),
                strategy: label.clone(),
                status: o.status.to_string(),
                objective: o.objective,
                best_lb: o.best_lb,
                gap: o.gap,
                nodes: o.nodes_explored,
                wall_time_s: o.wall_time.as_secs_f64(),
            },
            Err(_) => BenchCell {
                instance: m.name.clone(),
                strategy: label.clone(),
                status: "Error".into(),
                objective: f64::INFINITY,
                best_lb: f64::NEG_INFINITY,
                gap: GAP_SENTINEL,
                nodes: 0,
                wall_time_s: 0.0,
            },
        };
        if !opts.timing {
            cell.wall_time_s = 0.0;
        }
        cell
    };
    let cells: Vec<BenchCell> = if opts.jobs > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("thread pool")
            .install(|| pairs.par_iter().map(run).collect())
    } else {
        pairs.iter().map(run).collect()
    };
    let summary = summarize(&cells, strategies.len(), opts.measure);
    BenchReport {
        measure: opts.measure,
        cells,
        summary,
    }
}

/// Aggregates instance-major `cells` with `k` strategies per instance.
pub fn summarize(cells: &[BenchCell], k: usize, measure: Measure) -> Vec<StrategySummary> {
    let rows: Vec<&[BenchCell]> = cells.chunks(k).collect();
    let all_solved: Vec<bool> = rows
        .iter()
        .map(|r| r.iter().all(BenchCell::has_incumbent))
        .collect();
    (0..k)
        .map(|s| {
            let values: Vec<f64> = rows
                .iter()
                .zip(&all_solved)
                .filter(|(_, ok)| measure != Measure::Gap || **ok)
                .map(|(r, _)| match measure {
                    Measure::Time => r[s].wall_time_s,
                    Measure::Nodes => r[s].nodes as f64,
                    Measure::Gap => r[s].gap,
                })
                .collect();
            let (g, sd) = if values.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (shifted_geomean(&values), geo_stddev(&values))
            };
            StrategySummary {
                strategy: rows[0][s].strategy.clone(),
                measure_geomean: g,
                geo_stddev: sd,
                inf_count: rows.iter().filter(|r| !r[s].has_incumbent()).count(),
            }
        })
        .collect()
}

impl BenchReport {
    /// Writes `report.csv` and `summary.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<(), csv::Error> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_writer(File::create(dir.join("report.csv"))?);
        for c in &self.cells {
            w.serialize(c)?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_writer(File::create(dir.join("summary.csv"))?);
        for s in &self.summary {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Column-aligned summary table.
    pub fn format_table(&self) -> String {
        let header = [
            "strategy".to_string(),
            format!("{} geomean", self.measure),
            "geo stddev".into(),
            "inf".into(),
        ];
        let rows: Vec<[String; 4]> = self
            .summary
            .iter()
            .map(|s| {
                [
                    s.strategy.clone(),
                    format!("{:.4}", s.measure_geomean),
                    format!("{:.4}", s.geo_stddev),
                    s.inf_count.to_string(),
                ]
            })
            .collect();
        let mut width = header.clone().map(|h| h.len());
        for r in &rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        for r in std::iter::once(&header).chain(&rows) {
            let line: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        format!("{c:<w$}", w = width[i])
                    } else {
                        format!("{c:>w$}", w = width[i])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
