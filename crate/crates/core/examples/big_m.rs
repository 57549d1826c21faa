//! The bigM terminal layers score components; its value is a solve option.
//!
//! cargo run --release --example big_m

use gp2s::bnb::{solve_with, Limits, SolveOptions, Strategy, TraceEvent};
use gp2s::expr::parse;
use gp2s::milp::{gen_er_graph, gen_maxsat, MaxsatParams};

fn main() {
    let g = gen_er_graph(20, 0.6, 11).unwrap();
    let m = gen_maxsat(20, &g, &MaxsatParams::default(), 11).unwrap();
    let s = Strategy::ScoreBfs(parse("(sub lb (mul bigM depth))").unwrap());

    // A large M makes depth dominate (diving); a tiny one leaves the bound in charge.
    for big_m in [1e8, 1e-3] {
        let opts = SolveOptions {
            limits: Limits::nodes(50_000),
            big_m,
            trace: true,
        };
        let o = solve_with(&m, &s, &opts).unwrap();
        let first = o.trace.iter().find_map(|e| match e {
            TraceEvent::Incumbent { node, value } => Some((*node, *value)),
            _ => None,
        });
        println!("M = {big_m:e}: z = {}, nodes {}, first incumbent {first:?}", o.objective, o.nodes_explored);
    }
}
