//! Erdős–Rényi graphs and the GISP, MAXSAT and FCMCNF instance families.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Milp, MilpBuilder, MilpError};

/// An undirected simple graph; edges are stored as `(u, v)` with `u < v`,
/// sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErGraph {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub seed: u64,
}

impl ErGraph {
    /// Builds a graph from an explicit edge list.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self, MilpError> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(MilpError::InvalidParameter(format!("self-loop on vertex {u}")));
            }
            if u.max(v) >= node_count {
                return Err(MilpError::InvalidParameter(format!(
                    "edge ({u}, {v}) outside {node_count} vertices"
                )));
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        if norm.windows(2).any(|w| w[0] == w[1]) {
            return Err(MilpError::InvalidParameter("duplicate edge".into()));
        }
        Ok(ErGraph {
            node_count,
            edges: norm,
            seed: 0,
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }
}

/// G(n, p): each of the `n(n-1)/2` pairs is an edge independently with
/// probability `p`.
pub fn gen_er_graph(n: usize, p: f64, seed: u64) -> Result<ErGraph, MilpError> {
    if n < 2 {
        return Err(MilpError::InvalidParameter(format!("graph needs at least 2 vertices, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(MilpError::InvalidParameter(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok(ErGraph {
        node_count: n,
        edges,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GispParams {
    pub revenue: f64,
    pub removal_cost: f64,
    /// Probability that an edge may be removed at a cost.
    pub removable_prob: f64,
}

impl Default for GispParams {
    fn default() -> Self {
        GispParams {
            revenue: 100.0,
            removal_cost: 1.0,
            removable_prob: 0.5,
        }
    }
}

/// Generalized independent set: pick vertices (revenue each) such that no
/// two picked vertices share an edge, unless the edge is removable and its
/// removal is paid for.
pub fn gen_gisp(g: &ErGraph, params: &GispParams, seed: u64) -> Result<Milp, MilpError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = MilpBuilder::new();
    let x: Vec<usize> = (0..g.node_count)
        .map(|v| b.add_binary(format!("x{v}"), -params.revenue))
        .collect();
    let removable: Vec<bool> = g
        .edges
        .iter()
        .map(|_| rng.gen::<f64>() < params.removable_prob)
        .collect();
    for (&(u, v), &rem) in g.edges.iter().zip(&removable) {
        let mut terms = vec![(x[u], 1.0), (x[v], 1.0)];
        if rem {
            let y = b.add_binary(format!("y{u}_{v}"), params.removal_cost);
            terms.push((y, -1.0));
        }
        b.add_le(format!("e{u}_{v}"), &terms, 1.0);
    }
    b.build(format!("gisp_{seed}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxsatParams {
    pub weight: f64,
}

impl Default for MaxsatParams {
    fn default() -> Self {
        MaxsatParams { weight: 1.0 }
    }
}

/// A disjunction of literals `(variable, positive)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause(pub Vec<(usize, bool)>);

/// Weighted MAXSAT over `n_vars` variables as a MILP: `s_c = 1` only if
/// clause `c` is satisfied; maximize the total satisfied weight.
pub fn maxsat_from_clauses(
    n_vars: usize,
    clauses: &[Clause],
    weights: &[f64],
    name: &str,
) -> Result<Milp, MilpError> {
    if clauses.len() != weights.len() {
        return Err(MilpError::DimensionMismatch(format!(
            "{} clauses but {} weights",
            clauses.len(),
            weights.len()
        )));
    }
    let mut b = MilpBuilder::new();
    let x: Vec<usize> = (0..n_vars).map(|j| b.add_binary(format!("x{j}"), 0.0)).collect();
    for (c, (clause, &w)) in clauses.iter().zip(weights).enumerate() {
        let s = b.add_binary(format!("s{c}"), -w);
        let mut terms = vec![(s, -1.0)];
        let mut negatives = 0.0;
        for &(j, positive) in &clause.0 {
            if j >= n_vars {
                return Err(MilpError::InvalidParameter(format!(
                    "clause {c} uses variable {j} of {n_vars}"
                )));
            }
            if positive {
                terms.push((x[j], 1.0));
            } else {
                terms.push((x[j], -1.0));
                negatives += 1.0;
            }
        }
        b.add_ge(format!("c{c}"), &terms, -negatives);
    }
    b.build(name)
}

/// MAXSAT with one 3-clause per graph edge `(u, v)`: the clause covers `u`,
/// `v` and a third random variable, each literal negated with probability
/// one half.
pub fn gen_maxsat(n_vars: usize, g: &ErGraph, params: &MaxsatParams, seed: u64) -> Result<Milp, MilpError> {
    if n_vars < 3 {
        return Err(MilpError::InvalidParameter(format!("MAXSAT needs at least 3 variables, got {n_vars}")));
    }
    if g.node_count != n_vars {
        return Err(MilpError::InvalidParameter(format!(
            "graph has {} vertices but {n_vars} variables were requested",
            g.node_count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses: Vec<Clause> = g
        .edges
        .iter()
        .map(|&(u, v)| {
            // Third variable uniform over the remaining n - 2.
            let mut w = rng.gen_range(0..n_vars - 2);
            if w >= u {
                w += 1;
            }
            if w >= v {
                w += 1;
            }
            Clause(vec![(u, rng.gen_bool(0.5)), (v, rng.gen_bool(0.5)), (w, rng.gen_bool(0.5))])
        })
        .collect();
    let weights = vec![params.weight; clauses.len()];
    maxsat_from_clauses(n_vars, &clauses, &weights, &format!("maxsat_{seed}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcmcnfParams {
    pub fixed_cost: (u32, u32),
    pub unit_cost: (u32, u32),
    /// Arc capacity; `None` means one unit per commodity.
    pub capacity: Option<f64>,
}

impl Default for FcmcnfParams {
    fn default() -> Self {
        FcmcnfParams {
            fixed_cost: (50, 100),
            unit_cost: (10, 20),
            capacity: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcmcnfArc {
    pub from: usize,
    pub to: usize,
    pub fixed_cost: f64,
    pub unit_cost: f64,
    pub capacity: f64,
}

/// Fixed-charge multicommodity network flow with unit demands: each arc is
/// paid for once if opened, flow is charged per unit, and an arc carries
/// flow only when open.
pub fn fcmcnf_from_parts(
    node_count: usize,
    arcs: &[FcmcnfArc],
    commodities: &[(usize, usize)],
    name: &str,
) -> Result<Milp, MilpError> {
    let mut b = MilpBuilder::new();
    let open: Vec<usize> = arcs
        .iter()
        .map(|a| b.add_binary(format!("open{}_{}", a.from, a.to), a.fixed_cost))
        .collect();
    let flow: Vec<Vec<usize>> = arcs
        .iter()
        .map(|a| {
            (0..commodities.len())
                .map(|q| b.add_var(format!("f{}_{}_q{q}", a.from, a.to), 0.0, f64::INFINITY, false, a.unit_cost))
                .collect()
        })
        .collect();
    for (q, &(origin, dest)) in commodities.iter().enumerate() {
        if origin >= node_count || dest >= node_count {
            return Err(MilpError::InvalidParameter(format!("commodity {q} endpoint outside graph")));
        }
        for v in 0..node_count {
            let mut terms = Vec::new();
            for (k, a) in arcs.iter().enumerate() {
                if a.from == v {
                    terms.push((flow[k][q], 1.0));
                } else if a.to == v {
                    terms.push((flow[k][q], -1.0));
                }
            }
            let supply = if origin == dest {
                0.0
            } else if v == origin {
                1.0
            } else if v == dest {
                -1.0
            } else {
                0.0
            };
            b.add_eq(&format!("flow_q{q}_v{v}"), &terms, supply);
        }
    }
    for (k, a) in arcs.iter().enumerate() {
        let mut terms: Vec<(usize, f64)> = flow[k].iter().map(|&f| (f, 1.0)).collect();
        terms.push((open[k], -a.capacity));
        b.add_le(format!("cap{}_{}", a.from, a.to), &terms, 0.0);
    }
    b.build(name)
}

/// FCMCNF on both orientations of every edge of a connected graph.
pub fn gen_fcmcnf(
    g: &ErGraph,
    commodities: usize,
    params: &FcmcnfParams,
    seed: u64,
) -> Result<Milp, MilpError> {
    if commodities == 0 {
        return Err(MilpError::InvalidParameter("at least one commodity is required".into()));
    }
    if !g.is_connected() {
        return Err(MilpError::DisconnectedGraph);
    }
    let (flo, fhi) = params.fixed_cost;
    let (clo, chi) = params.unit_cost;
    if flo > fhi || clo > chi {
        return Err(MilpError::InvalidParameter("empty cost range".into()));
    }
    let capacity = params.capacity.unwrap_or(commodities as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::with_capacity(2 * g.edges.len());
    for &(u, v) in &g.edges {
        for (from, to) in [(u, v), (v, u)] {
            arcs.push(FcmcnfArc {
                from,
                to,
                fixed_cost: rng.gen_range(flo..=fhi) as f64,
                unit_cost: rng.gen_range(clo..=chi) as f64,
                capacity,
            });
        }
    }
    let pairs: Vec<(usize, usize)> = (0..commodities)
        .map(|_| {
            let o = rng.gen_range(0..g.node_count);
            let mut d = rng.gen_range(0..g.node_count - 1);
            if d >= o {
                d += 1;
            }
            (o, d)
        })
        .collect();
    fcmcnf_from_parts(g.node_count, &arcs, &pairs, &format!("fcmcnf_{seed}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        assert!(gen_er_graph(10, 0.0, 1).unwrap().edges.is_empty());
        assert_eq!(gen_er_graph(10, 1.0, 1).unwrap().edges.len(), 45);
        assert!(gen_er_graph(1, 0.5, 1).is_err());
        assert!(gen_er_graph(5, 1.5, 1).is_err());
    }

    #[test]
    fn er_edge_count_concentrates() {
        // Binomial(1770, 0.6): mean 1062, sd ~20.6.
        for seed in 0..20 {
            let e = gen_er_graph(60, 0.6, seed).unwrap().edges.len() as f64;
            assert!((e - 1062.0).abs() <= 4.0 * (1770.0f64 * 0.6 * 0.4).sqrt(), "{e}");
        }
    }

    #[test]
    fn er_is_deterministic_and_simple() {
        let a = gen_er_graph(30, 0.4, 9).unwrap();
        assert_eq!(a, gen_er_graph(30, 0.4, 9).unwrap());
        assert!(a.edges.iter().all(|&(u, v)| u < v));
        assert!(a.edges.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn from_edges_validation() {
        assert!(ErGraph::from_edges(3, &[(0, 0)]).is_err());
        assert!(ErGraph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(ErGraph::from_edges(3, &[(0, 3)]).is_err());
        assert_eq!(ErGraph::from_edges(3, &[(2, 1)]).unwrap().edges, vec![(1, 2)]);
    }

    #[test]
    fn gisp_non_removable_edge_is_independent_set_clause() {
        let g = ErGraph::from_edges(2, &[(0, 1)]).unwrap();
        let p = GispParams {
            removable_prob: 0.0,
            ..GispParams::default()
        };
        let m = gen_gisp(&g, &p, 0).unwrap();
        assert_eq!(m.num_vars(), 2);
        // x0 + x1 <= 1, stored negated
        assert_eq!(m.lp.matrix, vec![vec![-1.0, -1.0]]);
        assert_eq!(m.lp.rhs, vec![-1.0]);
        assert_eq!(m.lp.objective, vec![-100.0, -100.0]);
    }

    #[test]
    fn gisp_removable_edge_adds_column() {
        let g = ErGraph::from_edges(2, &[(0, 1)]).unwrap();
        let p = GispParams {
            removable_prob: 1.0,
            ..GispParams::default()
        };
        let m = gen_gisp(&g, &p, 0).unwrap();
        assert_eq!(m.var_names, vec!["x0", "x1", "y0_1"]);
        assert_eq!(m.lp.matrix, vec![vec![-1.0, -1.0, 1.0]]);
        assert!(m.is_feasible(&[0.0, 0.0, 0.0], 1e-9));
        assert!(m.is_feasible(&[1.0, 1.0, 1.0], 1e-9));
        assert!(!m.is_feasible(&[1.0, 1.0, 0.0], 1e-9));
    }

    #[test]
    fn maxsat_third_literal_is_distinct() {
        for seed in 0..50 {
            let g = gen_er_graph(5, 0.8, seed).unwrap();
            let m = gen_maxsat(5, &g, &MaxsatParams::default(), seed).unwrap();
            assert_eq!(m.num_rows(), g.edges.len());
            for row in &m.lp.matrix {
                let lits = row[..5].iter().filter(|a| **a != 0.0).count();
                assert_eq!(lits, 3);
            }
        }
    }

    #[test]
    fn maxsat_all_zero_is_feasible() {
        let g = gen_er_graph(8, 0.6, 4).unwrap();
        let m = gen_maxsat(8, &g, &MaxsatParams::default(), 4).unwrap();
        assert!(m.is_feasible(&vec![0.0; m.num_vars()], 1e-9));
        assert!(gen_maxsat(2, &gen_er_graph(2, 1.0, 0).unwrap(), &MaxsatParams::default(), 0).is_err());
        assert!(gen_maxsat(6, &g, &MaxsatParams::default(), 0).is_err());
    }

    #[test]
    fn fcmcnf_requires_connectivity() {
        let g = ErGraph::from_edges(3, &[(0, 1)]).unwrap();
        assert!(matches!(
            gen_fcmcnf(&g, 1, &FcmcnfParams::default(), 0),
            Err(MilpError::DisconnectedGraph)
        ));
        let g = ErGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(gen_fcmcnf(&g, 0, &FcmcnfParams::default(), 0).is_err());
    }

    #[test]
    fn fcmcnf_all_open_is_feasible() {
        let g = ErGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let m = gen_fcmcnf(&g, 3, &FcmcnfParams::default(), 5).unwrap();
        // 8 arcs, 3 commodities
        assert_eq!(m.num_vars(), 8 + 24);
        assert_eq!(m.num_integer(), 8);
        assert_eq!(m.num_rows(), 2 * 4 * 3 + 8);
        for (j, name) in m.var_names.iter().enumerate() {
            if name.starts_with("open") {
                assert!((50.0..=100.0).contains(&m.lp.objective[j]));
            } else {
                assert!((10.0..=20.0).contains(&m.lp.objective[j]));
            }
        }
    }
}
