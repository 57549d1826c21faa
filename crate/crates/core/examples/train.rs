//! Evolve a node-scoring policy on a small GISP training set.
//!
//! cargo run --release --example train [out_dir]

use gp2s::gp::{evolve_with_progress, FitnessKind, GpConfig};
use gp2s::milp::{gen_er_graph, gen_gisp, GispParams};

fn main() {
    let training: Vec<_> = (0..10)
        .map(|s| gen_gisp(&gen_er_graph(14, 0.75, s).unwrap(), &GispParams::default(), s).unwrap())
        .collect();
    let cfg = GpConfig {
        fitness_kind: FitnessKind::NodeCount,
        pop_size: 16,
        generations: 8,
        seed: 1,
        jobs: 2,
        ..GpConfig::default()
    };
    let result = evolve_with_progress(&training, &cfg, |r| {
        println!(
            "gen {:>2}  best so far {:>8.3}  population best {:>8.3}  mean size {:.1}",
            r.generation, r.best_so_far_fitness, r.population_best_fitness, r.mean_size
        );
    })
    .unwrap();
    println!("\nbest: {}  fitness {:?}  ({} evaluations)", result.best.expr, result.best.fitness, result.evaluations);

    if let Some(dir) = std::env::args().nth(1) {
        result.write_outputs(dir.as_ref()).unwrap();
        println!("wrote best.ssx and convergence.csv to {dir}");
    }
}
