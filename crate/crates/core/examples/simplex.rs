//! Solve a small LP directly with the bounded-variable simplex.
//!
//! cargo run --example simplex

use gp2s::lp::{solve_lp, solve_lp_with_bounds, LpProblem};

fn main() {
    // min -x - 2y  s.t.  x + y <= 4,  x - y >= -2,  0 <= x, y <= 3
    let p = LpProblem {
        objective: vec![-1.0, -2.0],
        matrix: vec![vec![-1.0, -1.0], vec![1.0, -1.0]],
        rhs: vec![-4.0, -2.0],
        lower: vec![0.0, 0.0],
        upper: vec![3.0, 3.0],
    };
    let r = solve_lp(&p).unwrap();
    println!("{:?}: z = {}, x = {:?}, {} pivots", r.status, r.objective, r.x, r.iterations);

    // Branch-style bound change: force y <= 2.
    let r = solve_lp_with_bounds(&p, &[0.0, 0.0], &[3.0, 2.0]).unwrap();
    println!("with y <= 2: {:?}: z = {}, x = {:?}", r.status, r.objective, r.x);

    // Contradictory bounds and rows.
    let r = solve_lp_with_bounds(&p, &[3.0, 3.0], &[3.0, 3.0]).unwrap();
    println!("with x = y = 3: {:?}", r.status);
}
