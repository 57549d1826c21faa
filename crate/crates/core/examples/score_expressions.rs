//! Parse, print and evaluate node-scoring expressions, and sample random ones.
//!
//! cargo run --example score_expressions

use gp2s::expr::{count_perfect_trees, parse, random_tree, NodeContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let ctx = NodeContext {
        depth: 4,
        best_estimate: -180.0,
        lower_bound: -210.0,
        root_dual_bound: -240.0,
        num_constraints: 35,
        num_variables: 47,
        big_m: 1e8,
    };

    // Depth first, lowest bound on ties.
    for text in ["lb", "(sub lb (mul bigM depth))", "(div estimate depth)", "(div ncons (sub lb lb))"] {
        let e = parse(text).unwrap();
        println!("{:<32} size {:>2}  score {}", e.to_string(), e.size(), e.evaluate(&ctx));
    }

    match parse("(add lb)") {
        Ok(_) => unreachable!(),
        Err(err) => println!("rejected: {err}"),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let e = random_tree(&mut rng, 1, 3);
        println!("random: {e}  (depth {})", e.depth());
    }

    for r in 0..=3 {
        println!("perfect trees of depth {r}: {}", count_perfect_trees(r).unwrap());
    }
}
