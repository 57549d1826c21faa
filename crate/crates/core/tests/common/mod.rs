//! Independent reference solvers and instance generators for the
//! integration tests. Nothing here calls the simplex or branch and bound.

#![allow(dead_code)]

use std::collections::HashSet;

use gp2s::expr::{Op, ScoreExpr, Terminal};
use gp2s::lp::LpProblem;
use gp2s::milp::{gen_er_graph, gen_gisp, gen_maxsat, GispParams, MaxsatParams, Milp, MilpBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves `A y = r` by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let k = r.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        r.swap(col, piv);
        for i in 0..k {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for j in col..k {
                        a[i][j] -= f * a[col][j];
                    }
                    r[i] -= f * r[col];
                }
            }
        }
    }
    Some((0..k).map(|i| r[i] / a[i][i]).collect())
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, k, &mut Vec::new(), &mut out);
    out
}

/// Optimal value of an LP with finite bounds by enumerating every basic
/// solution: each variable sits at a bound or is basic, and the basic
/// variables are pinned by as many active rows. `None` means infeasible.
pub fn lp_vertex_oracle(p: &LpProblem) -> Option<f64> {
    let n = p.num_vars();
    let m = p.num_rows();
    assert!(p.lower.iter().chain(&p.upper).all(|v| v.is_finite()));
    let tol = 1e-7;
    let mut best: Option<f64> = None;
    let states = 3usize.pow(n as u32);
    for code in 0..states {
        // 0 = at lower, 1 = at upper, 2 = basic
        let mut c = code;
        let state: Vec<usize> = (0..n)
            .map(|_| {
                let s = c % 3;
                c /= 3;
                s
            })
            .collect();
        let basic: Vec<usize> = (0..n).filter(|&j| state[j] == 2).collect();
        if basic.len() > m {
            continue;
        }
        let mut x: Vec<f64> = (0..n)
            .map(|j| match state[j] {
                0 => p.lower[j],
                1 => p.upper[j],
                _ => 0.0,
            })
            .collect();
        for rows in combinations(m, basic.len()) {
            if !basic.is_empty() {
                let a: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|&i| basic.iter().map(|&j| p.matrix[i][j]).collect())
                    .collect();
                let r: Vec<f64> = rows
                    .iter()
                    .map(|&i| {
                        p.rhs[i]
                            - (0..n)
                                .filter(|j| state[*j] != 2)
                                .map(|j| p.matrix[i][j] * x[j])
                                .sum::<f64>()
                    })
                    .collect();
                let Some(y) = solve_square(a, r) else { continue };
                for (k, &j) in basic.iter().enumerate() {
                    x[j] = y[k];
                }
            }
            let feasible = (0..n).all(|j| x[j] >= p.lower[j] - tol && x[j] <= p.upper[j] + tol)
                && (0..m).all(|i| p.row_activity(i, &x) >= p.rhs[i] - tol);
            if feasible {
                let z = p.objective_value(&x);
                best = Some(best.map_or(z, |b: f64| b.min(z)));
            }
        }
    }
    best
}

/// A random LP with `n, m <= 5`, small integer data and finite bounds.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(0..=5);
    let int = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| rng.gen_range(lo..=hi) as f64;
    let lower: Vec<f64> = (0..n).map(|_| int(rng, -3, 1)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + int(rng, 0, 5)).collect();
    let matrix: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(0.3) { 0.0 } else { int(rng, -4, 4) })
                .collect()
        })
        .collect();
    LpProblem {
        objective: (0..n).map(|_| int(rng, -5, 5)).collect(),
        rhs: (0..m).map(|_| int(rng, -8, 6)).collect(),
        matrix,
        lower,
        upper,
    }
}

/// Minimum of `c·x` over every integer point in the bounds of a pure
/// integer model. `None` when no point is feasible.
pub fn milp_enumeration_oracle(m: &Milp) -> Option<f64> {
    assert!(m.integer_mask.iter().all(|b| *b), "oracle needs a pure integer model");
    let lo: Vec<i64> = m.lp.lower.iter().map(|v| v.ceil() as i64).collect();
    let hi: Vec<i64> = m.lp.upper.iter().map(|v| v.floor() as i64).collect();
    let n = lo.len();
    let mut x: Vec<i64> = lo.clone();
    let mut best: Option<f64> = None;
    loop {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let ok = (0..m.num_rows()).all(|i| m.lp.row_activity(i, &xf) >= m.lp.rhs[i] - 1e-9);
        if ok {
            let z = m.lp.objective_value(&xf);
            best = Some(best.map_or(z, |b: f64| b.min(z)));
        }
        let mut j = 0;
        loop {
            if j == n {
                return best;
            }
            if x[j] < hi[j] {
                x[j] += 1;
                break;
            }
            x[j] = lo[j];
            j += 1;
        }
    }
}

/// Number of integer points the enumeration oracle visits.
pub fn enumeration_size(m: &Milp) -> f64 {
    m.lp.lower
        .iter()
        .zip(&m.lp.upper)
        .map(|(l, h)| h.floor() - l.ceil() + 1.0)
        .product()
}

/// A bounded integer knapsack: maximize value under one or two capacity rows.
pub fn gen_knapsack(rng: &mut ChaCha8Rng) -> Milp {
    let n = rng.gen_range(3..=7);
    let mut b = MilpBuilder::new();
    let vars: Vec<usize> = (0..n)
        .map(|j| {
            let ub = rng.gen_range(1..=2) as f64;
            b.add_var(format!("x{j}"), 0.0, ub, true, -(rng.gen_range(1..=20) as f64))
        })
        .collect();
    for r in 0..rng.gen_range(1..=2) {
        let terms: Vec<(usize, f64)> = vars
            .iter()
            .map(|&j| (j, rng.gen_range(1..=10) as f64))
            .collect();
        let total: f64 = terms.iter().map(|t| t.1).sum();
        b.add_le(format!("cap{r}"), &terms, (total * rng.gen_range(0.3..0.7)).floor());
    }
    b.build("knapsack").unwrap()
}

/// GISP, MAXSAT or knapsack instance with at most 12 integer variables and
/// at most 3^8 integer points.
pub fn gen_oracle_instance(seed: u64) -> Milp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let s: u64 = rng.gen();
        let m = match rng.gen_range(0..3) {
            0 => {
                let g = gen_er_graph(rng.gen_range(4..=7), rng.gen_range(0.3..0.7), s).unwrap();
                gen_gisp(&g, &GispParams::default(), s).unwrap()
            }
            1 => {
                let n = rng.gen_range(3..=5);
                let g = gen_er_graph(n, rng.gen_range(0.3..0.9), s).unwrap();
                gen_maxsat(n, &g, &MaxsatParams::default(), s).unwrap()
            }
            _ => gen_knapsack(&mut rng),
        };
        if m.num_integer() <= 12 && enumeration_size(&m) <= 6561.0 {
            return m;
        }
    }
}

/// Satisfied weight of the best assignment, by direct clause evaluation.
pub fn maxsat_oracle(n_vars: usize, clauses: &[Vec<(usize, bool)>], weights: &[f64]) -> f64 {
    (0..1u32 << n_vars)
        .map(|bits| {
            clauses
                .iter()
                .zip(weights)
                .filter(|(c, _)| c.iter().any(|&(j, pos)| ((bits >> j) & 1 == 1) == pos))
                .map(|(_, w)| *w)
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Optimal FCMCNF cost by enumerating open-arc sets; with capacity at least
/// the number of unit commodities, routing is a sum of shortest paths.
pub fn fcmcnf_oracle(
    node_count: usize,
    arcs: &[(usize, usize, f64, f64)],
    commodities: &[(usize, usize)],
) -> Option<f64> {
    let mut best: Option<f64> = None;
    for mask in 0..1u32 << arcs.len() {
        let mut d = vec![vec![f64::INFINITY; node_count]; node_count];
        for (v, row) in d.iter_mut().enumerate() {
            row[v] = 0.0;
        }
        let mut fixed = 0.0;
        for (k, &(u, v, f, c)) in arcs.iter().enumerate() {
            if mask >> k & 1 == 1 {
                fixed += f;
                d[u][v] = d[u][v].min(c);
            }
        }
        for k in 0..node_count {
            for i in 0..node_count {
                for j in 0..node_count {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        let routing: f64 = commodities.iter().map(|&(o, t)| d[o][t]).sum();
        if routing.is_finite() {
            let z = fixed + routing;
            best = Some(best.map_or(z, |b: f64| b.min(z)));
        }
    }
    best
}

/// Every perfect tree of depth `r`, built independently of the library's
/// sampler.
pub fn all_perfect_trees(r: u32) -> Vec<ScoreExpr> {
    if r == 0 {
        return Terminal::ALL.iter().map(|&t| ScoreExpr::leaf(t)).collect();
    }
    let sub = all_perfect_trees(r - 1);
    let mut out = Vec::with_capacity(4 * sub.len() * sub.len());
    for op in Op::ALL {
        for a in &sub {
            for b in &sub {
                out.push(ScoreExpr::node(op, a.clone(), b.clone()));
            }
        }
    }
    out
}

pub fn count_distinct(trees: &[ScoreExpr]) -> usize {
    trees.iter().collect::<HashSet<_>>().len()
}
