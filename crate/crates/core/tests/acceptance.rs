//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test --test acceptance`.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{all_perfect_trees, count_distinct, gen_oracle_instance, lp_vertex_oracle, milp_enumeration_oracle, random_lp};
use gp2s::bench::{geo_stddev, shifted_geomean};
use gp2s::bnb::{compute_gap, solve, Limits, SolveStatus, Strategy};
use gp2s::expr::{count_perfect_trees, parse, random_tree, NodeContext};
use gp2s::gp::{crossover, evolve, mutate_traced, size_playoff, EvolveResult, FitnessKind, GpConfig, Individual};
use gp2s::lp::{solve_lp, LpStatus};
use gp2s::milp::{gen_er_graph, gen_gisp, GispParams, Milp};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const OBJ_TOL: f64 = 1e-6;
const GEOMEAN_TOL: f64 = 1e-12;
const EVAL_TOL: f64 = 1e-9;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const LP_BUDGET: Duration = Duration::from_secs(30);
const GP_BUDGET: Duration = Duration::from_secs(15 * 60);
const PLAYOFF_TOL: f64 = 0.01;
const BASELINE_SLACK: f64 = 1.05;
const TOY_EDGE_PROB: f64 = 0.75;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn oracle_optimality() -> Verdict {
    let strategies = [
        Strategy::LbBfs,
        Strategy::BeBfs,
        Strategy::BeDfs,
        Strategy::ScoreBfs(parse("(sub lb (mul bigM depth))").unwrap()),
    ];
    let start = Instant::now();
    let mut infeasible = 0;
    for seed in 0..200 {
        let m = gen_oracle_instance(seed);
        let expected = milp_enumeration_oracle(&m);
        infeasible += usize::from(expected.is_none());
        for s in &strategies {
            let o = solve(&m, s, Limits::unlimited()).map_err(|e| format!("seed {seed} {s}: {e}"))?;
            let ok = match expected {
                None => o.status == SolveStatus::Infeasible,
                Some(z) => o.status == SolveStatus::Optimal && (o.objective - z).abs() <= OBJ_TOL,
            };
            if !ok {
                return Err(format!("seed {seed} {s}: {:?} {} vs {expected:?}", o.status, o.objective));
            }
        }
    }
    let t = start.elapsed();
    check(t < ORACLE_BUDGET, format!("200 instances x 4 strategies, {infeasible} infeasible, {t:.2?}"))
}

fn lp_oracle() -> Verdict {
    let start = Instant::now();
    for seed in 0..500 {
        let p = random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        let r = solve_lp(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let ok = match lp_vertex_oracle(&p) {
            None => r.status == LpStatus::Infeasible,
            Some(z) => r.status == LpStatus::Optimal && (r.objective - z).abs() <= OBJ_TOL * (1.0 + z.abs()),
        };
        if !ok {
            return Err(format!("seed {seed}: {:?} {}", r.status, r.objective));
        }
    }
    let t = start.elapsed();
    check(t < LP_BUDGET, format!("500 LPs, {t:.2?}"))
}

fn metric_exactness() -> Verdict {
    let g = shifted_geomean(&[1.0, 3.0]);
    let checks = [
        ((g - (2.0 * 2f64.sqrt() - 1.0)).abs() <= GEOMEAN_TOL, format!("geomean {g}")),
        (compute_gap(10.0, 8.0) == 0.25, format!("gap {}", compute_gap(10.0, 8.0))),
        (compute_gap(f64::INFINITY, 8.0) == 1e20, format!("sentinel {}", compute_gap(f64::INFINITY, 8.0))),
        (geo_stddev(&[5.0, 5.0, 5.0]) == 1.0, format!("stddev {}", geo_stddev(&[5.0, 5.0, 5.0]))),
    ];
    let detail = checks.iter().map(|c| c.1.as_str()).collect::<Vec<_>>().join(", ");
    check(checks.iter().all(|c| c.0), detail)
}

fn expression_count() -> Verdict {
    let c3 = count_perfect_trees(3).map_err(|e| e.to_string())?;
    if c3 != 94_450_499_584 {
        return Err(format!("r=3 gives {c3}"));
    }
    for r in 0..=2 {
        let brute = count_distinct(&all_perfect_trees(r)) as u128;
        let formula = count_perfect_trees(r).unwrap();
        if brute != formula {
            return Err(format!("r={r}: {brute} enumerated vs {formula}"));
        }
    }
    Ok(format!("r=3 gives {c3}; r=0..2 match enumeration"))
}

fn dsl_coverage() -> Verdict {
    let ctx = NodeContext {
        depth: 3,
        best_estimate: 12.5,
        lower_bound: 10.0,
        root_dual_bound: 8.0,
        num_constraints: 40,
        num_variables: 30,
        big_m: 1e8,
    };
    let (d, be, z, z0, m, n, big) = (3.0, 12.5, 10.0, 8.0, 40.0, 30.0, 1e8);
    let table: [(&str, f64); 14] = [
        ("(div estimate depth)", be / d),
        ("(div ncons (add estimate bigM))", m / (be + big)),
        ("(sub (div depth estimate) depth)", d / be - d),
        ("(add lb (div nvars (sub depth nvars)))", z + n / (d - n)),
        ("(add (add estimate lb) ncons)", be + z + m),
        ("(add (div lb rootlb) (mul nvars depth))", z / z0 + n * d),
        ("(mul (add estimate lb) (add estimate lb))", (be + z) * (be + z)),
        (
            "(sub (sub (mul rootlb (sub (add bigM bigM) lb)) estimate) (mul depth lb))",
            z0 * (big + big - z) - be - d * z,
        ),
        ("(div lb (div ncons depth))", z / (m / d)),
        ("(div lb (mul depth (add (add nvars estimate) depth)))", z / (d * (n + be + d))),
        ("(mul (mul lb (div (div depth lb) lb)) (sub estimate nvars))", z * (d / z / z) * (be - n)),
        ("(add lb lb)", z + z),
        ("(add (sub bigM (mul lb depth)) estimate)", big - z * d + be),
        ("(div (div (sub nvars ncons) bigM) estimate)", (n - m) / big / be),
    ];
    for (text, want) in table {
        let e = parse(text).map_err(|err| format!("{text}: {err}"))?;
        if e.to_string() != text || parse(&e.to_string()).as_ref() != Ok(&e) {
            return Err(format!("{text} does not round-trip"));
        }
        let v = e.evaluate(&ctx);
        if (v - want).abs() > EVAL_TOL * (1.0 + want.abs()) {
            return Err(format!("{text}: {v} vs {want}"));
        }
    }
    Ok(format!("{} functions", table.len()))
}

fn toy_gisp(count: u64, offset: u64) -> Vec<Milp> {
    (offset..offset + count)
        .map(|s| gen_gisp(&gen_er_graph(12, TOY_EDGE_PROB, s).unwrap(), &GispParams::default(), s).unwrap())
        .collect()
}

fn gp_config() -> GpConfig {
    GpConfig {
        fitness_kind: FitnessKind::NodeCount,
        pop_size: 16,
        generations: 10,
        seed: 2024,
        ..GpConfig::default()
    }
}

fn outputs(r: &EvolveResult, dir: &Path) -> (Vec<u8>, Vec<u8>) {
    r.write_outputs(dir).unwrap();
    (std::fs::read(dir.join("best.ssx")).unwrap(), std::fs::read(dir.join("convergence.csv")).unwrap())
}

fn gp_mechanics(training: &[Milp]) -> Result<(String, EvolveResult), String> {
    let cfg = gp_config();
    let start = Instant::now();
    let a = evolve(training, &cfg).map_err(|e| e.to_string())?;
    let b = evolve(training, &cfg).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let tmp = tempfile::tempdir().unwrap();
    let same_files = outputs(&a, &tmp.path().join("a")) == outputs(&b, &tmp.path().join("b"));
    let trace: Vec<f64> = a.trace.iter().map(|r| r.best_so_far_fitness).collect();
    let monotone = trace.windows(2).all(|w| w[1] <= w[0]);
    let improved = trace.last() <= trace.first();
    let detail = format!(
        "gen0 {:.3} -> final {:.3}, monotone {monotone}, identical reruns {}, {t:.2?} for two runs",
        trace[0],
        trace[trace.len() - 1],
        a == b && same_files
    );
    let ok = monotone && improved && a == b && same_files && t < GP_BUDGET;
    if ok {
        Ok((detail, a))
    } else {
        Err(detail)
    }
}

/// NodeCount fitness of a fixed strategy, measured the way the trainer does.
fn strategy_fitness(s: &Strategy, set: &[Milp], cfg: &GpConfig) -> f64 {
    let nodes: Vec<f64> = set
        .iter()
        .map(|m| match solve(m, s, cfg.limits) {
            Ok(o) => o.nodes_explored as f64,
            Err(_) => cfg.limits.nodes.map_or(f64::MAX, |n| n as f64),
        })
        .collect();
    shifted_geomean(&nodes)
}

fn beats_baseline(training: &[Milp], evolved: &EvolveResult) -> Verdict {
    let cfg = gp_config();
    let test = toy_gisp(20, 1000);
    let baselines = [Strategy::LbBfs, Strategy::BeBfs, Strategy::BeDfs];
    let min_of = |set: &[Milp]| {
        baselines
            .iter()
            .map(|s| strategy_fitness(s, set, &cfg))
            .fold(f64::INFINITY, f64::min)
    };
    let best = Strategy::ScoreBfs(evolved.best.expr.clone());
    let train_ratio = evolved.best.fitness.unwrap() / min_of(training);
    let test_ratio = strategy_fitness(&best, &test, &cfg) / min_of(&test);
    check(
        train_ratio <= BASELINE_SLACK,
        format!("{} train ratio {train_ratio:.4}, held-out ratio {test_ratio:.4}", evolved.best.expr),
    )
}

fn playoff_statistics() -> Verdict {
    let small = Individual::new(parse("lb").unwrap());
    let large = Individual::new(parse("(add lb (mul depth bigM))").unwrap());
    let freq = |p_size: f64, seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trials = 100_000;
        let wins = (0..trials)
            .filter(|i| {
                let (a, b) = if i % 2 == 0 { (&small, &large) } else { (&large, &small) };
                size_playoff(a, b, &mut rng, p_size).size() == 1
            })
            .count();
        wins as f64 / trials as f64
    };
    let (f12, f2) = (freq(1.2, 8), freq(2.0, 9));
    check((f12 - 0.6).abs() <= PLAYOFF_TOL && f2 == 1.0, format!("p=1.2: {f12}, p=2: {f2}"))
}

fn variation_properties() -> Verdict {
    let cfg = GpConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draw = |rng: &mut ChaCha8Rng| Individual::new(random_tree(rng, cfg.d_init_min, cfg.d_init_max));
    let round_trips = |i: &Individual| parse(&i.expr.to_string()).as_ref() == Ok(&i.expr);
    for op in 0..10_000 {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let (c1, c2) = crossover(&a, &b, &mut rng);
        if c1.size() + c2.size() != a.size() + b.size() || !round_trips(&c1) || !round_trips(&c2) {
            return Err(format!("crossover {op}"));
        }
        let (m, _, graft) = mutate_traced(&a, &mut rng, cfg.d_mut_min, cfg.d_mut_max);
        let depths_ok = graft.leaf_depths().iter().all(|d| (cfg.d_mut_min..=cfg.d_mut_max).contains(d));
        if !depths_ok || !round_trips(&m) {
            return Err(format!("mutation {op}"));
        }
    }
    Ok("10^4 crossovers and 10^4 mutations".into())
}

fn run_cli(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gp2s"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GP2S_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn pipeline(dir: &Path) -> Result<Vec<Vec<u8>>, String> {
    run_cli(&["gen", "--type", "gisp", "--count", "8", "--nodes-graph", "10-12", "--seed", "5", "--out", "inst"], dir)?;
    run_cli(
        &["train", "inst", "--fitness", "nodes", "--pop", "8", "--gens", "3", "--seed", "5", "--jobs", "2", "--out", "tr"],
        dir,
    )?;
    run_cli(
        &["bench", "inst", "--strategy", "lb-bfs,be-bfs,be-dfs,expr:tr/best.ssx", "--no-timing", "--out", "b"],
        dir,
    )?;
    ["tr/convergence.csv", "tr/best.ssx", "b/report.csv", "b/summary.csv"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}")))
        .collect()
}

fn end_to_end_determinism() -> Verdict {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (fa, fb) = (pipeline(a.path())?, pipeline(b.path())?);
    check(fa == fb, format!("{} output files compared byte for byte", fa.len()))
}

fn main() {
    let training = toy_gisp(20, 0);
    let mut results: Vec<(u32, &str, Verdict)> = vec![
        (1, "oracle optimality", oracle_optimality()),
        (2, "LP oracle", lp_oracle()),
        (3, "metric exactness", metric_exactness()),
        (4, "expression count", expression_count()),
        (5, "DSL coverage", dsl_coverage()),
    ];
    match gp_mechanics(&training) {
        Ok((detail, evolved)) => {
            results.push((6, "GP mechanics", Ok(detail)));
            results.push((7, "GP vs baselines", beats_baseline(&training, &evolved)));
        }
        Err(detail) => {
            results.push((6, "GP mechanics", Err(detail)));
            let fallback = evolve(&training, &gp_config()).map_err(|e| e.to_string());
            results.push((7, "GP vs baselines", fallback.and_then(|r| beats_baseline(&training, &r))));
        }
    }
    results.push((8, "double tournament", playoff_statistics()));
    results.push((9, "variation operators", variation_properties()));
    results.push((10, "end-to-end determinism", end_to_end_determinism()));

    let mut failed = 0;
    for (id, name, verdict) in &results {
        match verdict {
            Ok(d) => println!("PASS {id:>2} {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
