//! Genetic programming over scoring expressions.

mod operators;

pub use operators::{
    crossover, crossover_at, double_tournament, fitness_tournament, mutate, mutate_traced, size_playoff,
};

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bench::shifted_geomean;
use crate::bnb::{solve_with, Limits, SolveOptions, Strategy, GAP_SENTINEL};
use crate::expr::{random_tree, ScoreExpr, DEFAULT_BIG_M};
use crate::milp::Milp;

#[derive(Debug, Error)]
pub enum GpError {
    #[error("invalid GP configuration: {0}")]
    Config(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// What a solve contributes to an individual's fitness (lower is better).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FitnessKind {
    /// Wall-clock seconds; not reproducible.
    Time,
    /// LP relaxations solved.
    #[default]
    NodeCount,
    /// Optimality gap at the limit, 1e20 without an incumbent.
    Gap,
}

impl FromStr for FitnessKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time" => Ok(FitnessKind::Time),
            "nodes" => Ok(FitnessKind::NodeCount),
            "gap" => Ok(FitnessKind::Gap),
            _ => Err(format!("unknown fitness kind `{s}` (expected time, nodes or gap)")),
        }
    }
}

impl fmt::Display for FitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitnessKind::Time => "time",
            FitnessKind::NodeCount => "nodes",
            FitnessKind::Gap => "gap",
        })
    }
}

impl FitnessKind {
    /// Per-instance limits used when none are configured.
    pub fn default_limits(self) -> Limits {
        match self {
            FitnessKind::Time | FitnessKind::NodeCount => Limits::nodes(50_000),
            FitnessKind::Gap => Limits::time_secs(10.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub p_mate: f64,
    pub p_mutate: f64,
    pub d_init_min: usize,
    pub d_init_max: usize,
    pub d_mut_min: usize,
    pub d_mut_max: usize,
    pub tournament_size: usize,
    pub p_size: f64,
    pub fitness_kind: FitnessKind,
    pub limits: Limits,
    pub big_m: f64,
    pub seed: u64,
    /// Worker threads for fitness evaluation.
    pub jobs: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            pop_size: 50,
            generations: 50,
            p_mate: 0.9,
            p_mutate: 0.1,
            d_init_min: 1,
            d_init_max: 17,
            d_mut_min: 1,
            d_mut_max: 5,
            tournament_size: 5,
            p_size: 1.2,
            fitness_kind: FitnessKind::NodeCount,
            limits: FitnessKind::NodeCount.default_limits(),
            big_m: DEFAULT_BIG_M,
            seed: 0,
            jobs: 1,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<(), GpError> {
        let bad = |m: String| Err(GpError::Config(m));
        if self.pop_size == 0 {
            return bad("population size must be positive".into());
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be positive".into());
        }
        for (name, p) in [("p_mate", self.p_mate), ("p_mutate", self.p_mutate)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is outside [0, 1]"));
            }
        }
        if !(1.0..=2.0).contains(&self.p_size) {
            return bad(format!("p_size = {} is outside [1, 2]", self.p_size));
        }
        if self.d_init_min > self.d_init_max || self.d_mut_min > self.d_mut_max {
            return bad("depth range has min > max".into());
        }
        if !(self.big_m.is_finite() && self.big_m > 0.0) {
            return bad(format!("big_m = {} must be positive", self.big_m));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub expr: ScoreExpr,
    /// `None` until evaluated.
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(expr: ScoreExpr) -> Self {
        Individual { expr, fitness: None }
    }

    pub fn size(&self) -> usize {
        self.expr.size()
    }

    pub(crate) fn fitness_or_inf(&self) -> f64 {
        self.fitness.unwrap_or(f64::INFINITY)
    }
}

/// The per-instance measure for one solve of `expr`.
pub fn instance_measure(expr: &ScoreExpr, m: &Milp, cfg: &GpConfig) -> f64 {
    let opts = SolveOptions {
        limits: cfg.limits,
        big_m: cfg.big_m,
        trace: false,
    };
    let outcome = solve_with(m, &Strategy::ScoreBfs(expr.clone()), &opts);
    match (cfg.fitness_kind, outcome) {
        (FitnessKind::Time, Ok(o)) => o.wall_time.as_secs_f64(),
        (FitnessKind::NodeCount, Ok(o)) => o.nodes_explored as f64,
        (FitnessKind::Gap, Ok(o)) => o.gap,
        (FitnessKind::Time, Err(_)) => cfg.limits.time.map_or(f64::MAX, |t: Duration| t.as_secs_f64()),
        (FitnessKind::NodeCount, Err(_)) => cfg.limits.nodes.map_or(f64::MAX, |n| n as f64),
        (FitnessKind::Gap, Err(_)) => GAP_SENTINEL,
    }
}

/// 1-shifted geometric mean of the per-instance measures.
pub fn evaluate_fitness(expr: &ScoreExpr, training: &[Milp], cfg: &GpConfig) -> f64 {
    assert!(!training.is_empty(), "empty training set");
    let measures: Vec<f64> = training.iter().map(|m| instance_measure(expr, m, cfg)).collect();
    shifted_geomean(&measures)
}

/// Fitness of several expressions; solves run in parallel but are reduced
/// in (expression, instance) order.
fn evaluate_batch(exprs: &[ScoreExpr], training: &[Milp], cfg: &GpConfig) -> Vec<f64> {
    let pairs: Vec<(usize, usize)> = (0..exprs.len())
        .flat_map(|e| (0..training.len()).map(move |i| (e, i)))
        .collect();
    let run = |&(e, i): &(usize, usize)| instance_measure(&exprs[e], &training[i], cfg);
    let measures: Vec<f64> = if cfg.jobs > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .expect("thread pool")
            .install(|| pairs.par_iter().map(run).collect())
    } else {
        pairs.iter().map(run).collect()
    };
    measures.chunks(training.len()).map(shifted_geomean).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_so_far_fitness: f64,
    pub population_best_fitness: f64,
    pub mean_size: f64,
    #[serde(skip)]
    pub population_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveResult {
    pub best: Individual,
    pub trace: Vec<GenerationRecord>,
    /// Distinct expressions evaluated.
    pub evaluations: usize,
}

impl EvolveResult {
    /// Writes `best.ssx` and `convergence.csv` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), GpError> {
        std::fs::create_dir_all(dir)?;
        let mut f = File::create(dir.join("best.ssx"))?;
        writeln!(f, "# fitness: {}", self.best.fitness_or_inf())?;
        writeln!(f, "# size: {}", self.best.size())?;
        writeln!(f, "{}", self.best.expr)?;
        let mut w = csv::Writer::from_writer(File::create(dir.join("convergence.csv"))?);
        for r in &self.trace {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Evolution<'a> {
    training: &'a [Milp],
    cfg: &'a GpConfig,
    cache: HashMap<String, f64>,
    best: Option<Individual>,
}

impl Evolution<'_> {
    /// Fills in missing fitness values, evaluating each new expression once.
    fn evaluate(&mut self, pop: &mut [Individual]) {
        let mut pending: Vec<ScoreExpr> = Vec::new();
        let mut pending_keys = HashSet::new();
        for ind in pop.iter().filter(|i| i.fitness.is_none()) {
            let key = ind.expr.to_string();
            if !self.cache.contains_key(&key) && pending_keys.insert(key) {
                pending.push(ind.expr.clone());
            }
        }
        let values = evaluate_batch(&pending, self.training, self.cfg);
        for (e, v) in pending.iter().zip(values) {
            self.cache.insert(e.to_string(), v);
        }
        for ind in pop.iter_mut() {
            if ind.fitness.is_none() {
                ind.fitness = Some(self.cache[&ind.expr.to_string()]);
            }
        }
    }

    /// Updates the hall of fame: lower fitness, then smaller size, then
    /// earlier discovery.
    fn record(&mut self, generation: usize, pop: &[Individual]) -> GenerationRecord {
        for ind in pop {
            let better = match &self.best {
                None => true,
                Some(b) => {
                    let (f, bf) = (ind.fitness_or_inf(), b.fitness_or_inf());
                    f < bf || (f == bf && ind.size() < b.size())
                }
            };
            if better {
                self.best = Some(ind.clone());
            }
        }
        let population_best = pop
            .iter()
            .map(Individual::fitness_or_inf)
            .fold(f64::INFINITY, f64::min);
        GenerationRecord {
            generation,
            best_so_far_fitness: self.best.as_ref().map_or(f64::INFINITY, |b| b.fitness_or_inf()),
            population_best_fitness: population_best,
            mean_size: pop.iter().map(|i| i.size() as f64).sum::<f64>() / pop.len() as f64,
            population_size: pop.len(),
        }
    }
}

/// Runs the generational loop and returns the best individual ever seen.
pub fn evolve(training: &[Milp], cfg: &GpConfig) -> Result<EvolveResult, GpError> {
    evolve_with_progress(training, cfg, |_| {})
}

/// [`evolve`], calling `progress` after each generation.
pub fn evolve_with_progress(
    training: &[Milp],
    cfg: &GpConfig,
    mut progress: impl FnMut(&GenerationRecord),
) -> Result<EvolveResult, GpError> {
    cfg.validate()?;
    if training.is_empty() {
        return Err(GpError::EmptyTrainingSet);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ev = Evolution {
        training,
        cfg,
        cache: HashMap::new(),
        best: None,
    };

    let mut pop: Vec<Individual> = (0..cfg.pop_size)
        .map(|_| Individual::new(random_tree(&mut rng, cfg.d_init_min, cfg.d_init_max)))
        .collect();
    ev.evaluate(&mut pop);
    let mut trace = vec![ev.record(0, &pop)];
    progress(&trace[0]);

    for generation in 1..=cfg.generations {
        let mut next: Vec<Individual> = (0..cfg.pop_size)
            .map(|_| double_tournament(&pop, &mut rng, cfg.tournament_size, cfg.p_size))
            .collect();
        for pair in next.chunks_mut(2) {
            if let [a, b] = pair {
                if rng.gen::<f64>() < cfg.p_mate {
                    let (c1, c2) = crossover(a, b, &mut rng);
                    *a = c1;
                    *b = c2;
                }
            }
        }
        for ind in next.iter_mut() {
            if rng.gen::<f64>() < cfg.p_mutate {
                *ind = mutate(ind, &mut rng, cfg.d_mut_min, cfg.d_mut_max);
            }
        }
        ev.evaluate(&mut next);
        pop = next;
        let rec = ev.record(generation, &pop);
        progress(&rec);
        trace.push(rec);
    }

    Ok(EvolveResult {
        best: ev.best.expect("population is nonempty"),
        trace,
        evaluations: ev.cache.len(),
    })
}
