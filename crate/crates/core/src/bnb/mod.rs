//! Branch and bound with pluggable node selection.
//!
//! Every strategy *minimizes* its node score. A child's LP relaxation is
//! solved as soon as the child is created, so open nodes always carry their
//! own bound `z_i`, fractional set and best estimate `BE_i`.

mod pool;
mod pseudocost;

pub use pool::{NodePool, ScoreEnv};
pub use pseudocost::{best_estimate, update_pseudocosts, Direction, PseudocostTable};

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde_json::json;
use thiserror::Error;

use crate::expr::{ScoreExpr, DEFAULT_BIG_M};
use crate::lp::{solve_lp_with_bounds, LpError, LpStatus};
use crate::milp::Milp;

/// A value within this distance of an integer counts as integral.
pub const INT_TOL: f64 = 1e-6;
/// Nodes with `z_i >= z* - PRUNE_TOL` are pruned.
pub const PRUNE_TOL: f64 = 1e-9;
/// Reported gap when no incumbent exists.
pub const GAP_SENTINEL: f64 = 1e20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BnbError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP relaxation is unbounded")]
    UnboundedRelaxation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Best-first on a scoring expression.
    ScoreBfs(ScoreExpr),
    /// Best-first on the LP bound.
    LbBfs,
    /// Best-first on the best estimate.
    BeBfs,
    /// Dive into the best-estimate child, else best-first on the estimate.
    BeDfs,
}

impl Strategy {
    pub fn label(&self) -> String {
        match self {
            Strategy::ScoreBfs(e) => format!("score:{e}"),
            Strategy::LbBfs => "lb-bfs".into(),
            Strategy::BeBfs => "be-bfs".into(),
            Strategy::BeDfs => "be-dfs".into(),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Accepts `lb-bfs`, `be-bfs`, `be-dfs` and `score:<expression>`.
impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lb-bfs" => Ok(Strategy::LbBfs),
            "be-bfs" => Ok(Strategy::BeBfs),
            "be-dfs" => Ok(Strategy::BeDfs),
            _ => match s.strip_prefix("score:") {
                Some(src) => crate::expr::parse(src)
                    .map(Strategy::ScoreBfs)
                    .map_err(|e| e.to_string()),
                None => Err(format!("unknown strategy `{s}`")),
            },
        }
    }
}

/// Resource limits; `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub time: Option<Duration>,
    /// Maximum number of LP relaxations solved.
    pub nodes: Option<u64>,
}

impl Limits {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn nodes(n: u64) -> Self {
        Limits {
            time: None,
            nodes: Some(n),
        }
    }

    pub fn time_secs(secs: f64) -> Self {
        Limits {
            time: Some(Duration::from_secs_f64(secs)),
            nodes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub limits: Limits,
    pub big_m: f64,
    /// Record incumbent and prune events in [`SolveOutcome::trace`].
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            limits: Limits::default(),
            big_m: DEFAULT_BIG_M,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    /// The relaxation search proved there is no integer-feasible point.
    Infeasible,
    TimeLimit,
    NodeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Infeasible => "Infeasible",
            SolveStatus::TimeLimit => "TimeLimit",
            SolveStatus::NodeLimit => "NodeLimit",
        }
    }

    pub fn hit_limit(self) -> bool {
        matches!(self, SolveStatus::TimeLimit | SolveStatus::NodeLimit)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceEvent {
    Incumbent { node: usize, value: f64 },
    PruneBound { node: usize, z: f64, incumbent: f64 },
    PruneInfeasible { node: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Incumbent value `z*`, `+inf` without one.
    pub objective: f64,
    pub best_lb: f64,
    pub gap: f64,
    pub nodes_explored: u64,
    pub wall_time: Duration,
    pub incumbent_solution: Option<Vec<f64>>,
    pub strategy: String,
    pub trace: Vec<TraceEvent>,
}

impl SolveOutcome {
    /// Report with keys status, objective, best_lb, gap, nodes, wall_time_s,
    /// strategy. Infinite values become `null`.
    pub fn to_json(&self) -> serde_json::Value {
        let finite = |v: f64| v.is_finite().then_some(v);
        json!({
            "status": self.status.as_str(),
            "objective": finite(self.objective),
            "best_lb": finite(self.best_lb),
            "gap": self.gap,
            "nodes": self.nodes_explored,
            "wall_time_s": self.wall_time.as_secs_f64(),
            "strategy": self.strategy,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbNode {
    pub id: usize,
    pub depth: usize,
    /// `(variable, lo, hi)` applied on top of the model bounds, in order.
    pub bound_changes: Vec<(usize, f64, f64)>,
    pub lower_bound: f64,
    /// Fractional integer variables and their fractional parts, by index.
    pub frac: Vec<(usize, f64)>,
    pub best_estimate: f64,
    /// LP relaxation optimum at this node.
    pub x: Vec<f64>,
}

/// `|(z* − lb) / min(z*, lb)|`, with the sentinel for a missing incumbent or
/// a zero denominator.
pub fn compute_gap(z_star: f64, best_lb: f64) -> f64 {
    if !z_star.is_finite() {
        return GAP_SENTINEL;
    }
    let diff = z_star - best_lb;
    if diff.abs() <= 1e-9 {
        return 0.0;
    }
    let denom = z_star.min(best_lb);
    if denom == 0.0 {
        return GAP_SENTINEL;
    }
    (diff / denom).abs()
}

/// Integer variables whose LP value is more than [`INT_TOL`] from an
/// integer, with fractional parts in `(0, 1)`.
pub fn fractional_parts(x: &[f64], integer_mask: &[bool]) -> Vec<(usize, f64)> {
    x.iter()
        .zip(integer_mask)
        .enumerate()
        .filter(|(_, (_, int))| **int)
        .filter_map(|(j, (&v, _))| {
            let f = v - v.floor();
            (f.min(1.0 - f) > INT_TOL).then_some((j, f))
        })
        .collect()
}

/// Most fractional variable; ties go to the smallest index.
pub fn branch_variable(frac: &[(usize, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &(j, f) in frac {
        let d = f.min(1.0 - f);
        if best.is_none_or(|(bj, bd)| d > bd + 1e-12 || (d >= bd - 1e-12 && j < bj)) {
            best = Some((j, d));
        }
    }
    best.map(|(j, _)| j)
}

pub fn solve(m: &Milp, s: &Strategy, limits: Limits) -> Result<SolveOutcome, BnbError> {
    solve_with(
        m,
        s,
        &SolveOptions {
            limits,
            ..SolveOptions::default()
        },
    )
}

struct Search<'a> {
    m: &'a Milp,
    opts: &'a SolveOptions,
    pseudo: PseudocostTable,
    incumbent: f64,
    solution: Option<Vec<f64>>,
    nodes: u64,
    next_id: usize,
    trace: Vec<TraceEvent>,
}

enum Evaluated {
    Open(BnbNode),
    Closed,
}

impl<'a> Search<'a> {
    fn bounds(&self, changes: &[(usize, f64, f64)]) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.m.lp.lower.clone();
        let mut hi = self.m.lp.upper.clone();
        for &(j, l, h) in changes {
            lo[j] = l;
            hi[j] = h;
        }
        (lo, hi)
    }

    fn record(&mut self, e: TraceEvent) {
        if self.opts.trace {
            self.trace.push(e);
        }
    }

    fn prunable(&self, z: f64) -> bool {
        z >= self.incumbent - PRUNE_TOL
    }

    /// Solves a node's relaxation. Integral or infeasible nodes update the
    /// incumbent or are dropped; the rest come back open, without a
    /// best estimate yet.
    fn evaluate(
        &mut self,
        depth: usize,
        bound_changes: Vec<(usize, f64, f64)>,
    ) -> Result<(Evaluated, f64), BnbError> {
        let id = self.next_id;
        self.next_id += 1;
        let (lo, hi) = self.bounds(&bound_changes);
        let r = solve_lp_with_bounds(&self.m.lp, &lo, &hi)?;
        self.nodes += 1;
        match r.status {
            LpStatus::Infeasible => {
                self.record(TraceEvent::PruneInfeasible { node: id });
                return Ok((Evaluated::Closed, f64::INFINITY));
            }
            LpStatus::Unbounded => return Err(BnbError::UnboundedRelaxation),
            LpStatus::Optimal => {}
        }
        let z = r.objective;
        let frac = fractional_parts(&r.x, &self.m.integer_mask);
        if self.prunable(z) {
            self.record(TraceEvent::PruneBound {
                node: id,
                z,
                incumbent: self.incumbent,
            });
            return Ok((Evaluated::Closed, z));
        }
        if frac.is_empty() {
            self.incumbent = z;
            self.solution = Some(r.x);
            self.record(TraceEvent::Incumbent { node: id, value: z });
            return Ok((Evaluated::Closed, z));
        }
        let node = BnbNode {
            id,
            depth,
            bound_changes,
            lower_bound: z,
            frac,
            best_estimate: z,
            x: r.x,
        };
        Ok((Evaluated::Open(node), z))
    }
}

pub fn solve_with(m: &Milp, s: &Strategy, opts: &SolveOptions) -> Result<SolveOutcome, BnbError> {
    let start = Instant::now();
    let mut search = Search {
        m,
        opts,
        pseudo: PseudocostTable::new(m.num_vars()),
        incumbent: f64::INFINITY,
        solution: None,
        nodes: 0,
        next_id: 0,
        trace: Vec::new(),
    };
    let node_limit = opts.limits.nodes.unwrap_or(u64::MAX);

    let (root, z0) = search.evaluate(0, Vec::new())?;
    let env = ScoreEnv {
        root_dual_bound: if z0.is_finite() { z0 } else { 0.0 },
        num_constraints: m.num_rows(),
        num_variables: m.num_vars(),
        big_m: opts.big_m,
    };
    let mut pool = NodePool::new(s.clone(), env);
    if let Evaluated::Open(mut n) = root {
        n.best_estimate = best_estimate(n.lower_bound, &n.frac, &search.pseudo);
        pool.push(n);
    }

    let mut status = SolveStatus::Optimal;
    while let Some(node) = pool.next_node() {
        if search.prunable(node.lower_bound) {
            search.record(TraceEvent::PruneBound {
                node: node.id,
                z: node.lower_bound,
                incumbent: search.incumbent,
            });
            continue;
        }
        if opts.limits.time.is_some_and(|t| start.elapsed() >= t) {
            pool.push(node);
            status = SolveStatus::TimeLimit;
            break;
        }
        if search.nodes.saturating_add(2) > node_limit {
            pool.push(node);
            status = SolveStatus::NodeLimit;
            break;
        }

        let j = branch_variable(&node.frac).expect("open nodes are fractional");
        let v = node.x[j];
        let f = v - v.floor();
        let (lo, hi) = search.bounds(&node.bound_changes);
        let mut children = Vec::with_capacity(2);
        for dir in [Direction::Down, Direction::Up] {
            let mut changes = node.bound_changes.clone();
            match dir {
                Direction::Down => changes.push((j, lo[j], v.floor())),
                Direction::Up => changes.push((j, v.floor() + 1.0, hi[j])),
            }
            let (child, z) = search.evaluate(node.depth + 1, changes)?;
            if z.is_finite() {
                search.pseudo.update(j, dir, node.lower_bound, z, f);
            }
            children.push(child);
        }
        let mut open = Vec::with_capacity(2);
        for child in children {
            if let Evaluated::Open(mut c) = child {
                // An integral sibling may have improved the incumbent.
                if search.prunable(c.lower_bound) {
                    search.record(TraceEvent::PruneBound {
                        node: c.id,
                        z: c.lower_bound,
                        incumbent: search.incumbent,
                    });
                    continue;
                }
                c.best_estimate = best_estimate(c.lower_bound, &c.frac, &search.pseudo);
                open.push(c);
            }
        }
        pool.set_recent_children(&open.iter().collect::<Vec<_>>());
        for c in open {
            pool.push(c);
        }
    }

    let z_star = search.incumbent;
    let (best_lb, gap) = if status == SolveStatus::Optimal {
        if z_star.is_finite() {
            (z_star, 0.0)
        } else {
            status = SolveStatus::Infeasible;
            (f64::INFINITY, GAP_SENTINEL)
        }
    } else {
        let open_min = pool.min_lower_bound().unwrap_or(f64::INFINITY);
        let lb = open_min.min(z_star);
        (lb, compute_gap(z_star, lb))
    };
    Ok(SolveOutcome {
        status,
        objective: z_star,
        best_lb,
        gap,
        nodes_explored: search.nodes,
        wall_time: start.elapsed(),
        incumbent_solution: search.solution,
        strategy: s.label(),
        trace: search.trace,
    })
}
