//! Generate one instance of each family and round-trip it through MILP-TXT.
//!
//! cargo run --example instances

use gp2s::milp::{
    gen_er_graph, gen_fcmcnf, gen_gisp, gen_maxsat, parse_milp, to_milp_txt, FcmcnfParams, GispParams, MaxsatParams,
    MilpBuilder,
};

fn main() {
    let g = gen_er_graph(8, 0.5, 3).unwrap();
    println!("graph: {} vertices, {} edges, connected {}", g.node_count, g.edges.len(), g.is_connected());

    let gisp = gen_gisp(&g, &GispParams::default(), 3).unwrap();
    let maxsat = gen_maxsat(8, &g, &MaxsatParams::default(), 3).unwrap();
    let fcmcnf = gen_fcmcnf(&g, 4, &FcmcnfParams::default(), 3).unwrap();
    for m in [&gisp, &maxsat, &fcmcnf] {
        println!("{:<8} {:>3} vars ({} integer), {:>3} rows", m.name, m.num_vars(), m.num_integer(), m.num_rows());
    }

    let text = to_milp_txt(&gisp);
    assert_eq!(parse_milp(&text, &gisp.name).unwrap(), gisp);
    println!("\nGISP as MILP-TXT, first lines:");
    for line in text.lines().take(6) {
        println!("  {line}");
    }

    // Hand-built model: 0/1 knapsack with an equality side constraint.
    let mut b = MilpBuilder::new();
    let x: Vec<usize> = (0..3).map(|j| b.add_binary(format!("x{j}"), -(j as f64 + 2.0))).collect();
    b.add_le("cap", &[(x[0], 3.0), (x[1], 4.0), (x[2], 5.0)], 8.0);
    b.add_eq("pick2", &[(x[0], 1.0), (x[1], 1.0), (x[2], 1.0)], 2.0);
    let k = b.build("knapsack").unwrap();
    print!("\n{}", to_milp_txt(&k));
}
