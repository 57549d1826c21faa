use rand::Rng;

use crate::expr::{random_tree, ScoreExpr};

use super::Individual;

/// Draws `k` individuals with replacement and keeps the fittest; ties go to
/// the earliest draw. Unevaluated individuals lose to evaluated ones.
pub fn fitness_tournament<'a, R: Rng + ?Sized>(
    pop: &'a [Individual],
    rng: &mut R,
    k: usize,
) -> &'a Individual {
    assert!(!pop.is_empty(), "tournament over an empty population");
    let mut best = &pop[rng.gen_range(0..pop.len())];
    for _ in 1..k.max(1) {
        let c = &pop[rng.gen_range(0..pop.len())];
        if c.fitness_or_inf() < best.fitness_or_inf() {
            best = c;
        }
    }
    best
}

/// The smaller tree wins with probability `p_size / 2`; equal sizes are a
/// fair coin. Always consumes exactly one draw from `rng`.
pub fn size_playoff<'a, R: Rng + ?Sized>(
    a: &'a Individual,
    b: &'a Individual,
    rng: &mut R,
    p_size: f64,
) -> &'a Individual {
    let u: f64 = rng.gen();
    let (small, large) = match a.size().cmp(&b.size()) {
        std::cmp::Ordering::Less => (a, b),
        std::cmp::Ordering::Greater => (b, a),
        std::cmp::Ordering::Equal => return if u < 0.5 { a } else { b },
    };
    if u < p_size / 2.0 {
        small
    } else {
        large
    }
}

/// Two fitness tournaments, then a size playoff between their winners.
pub fn double_tournament<R: Rng + ?Sized>(
    pop: &[Individual],
    rng: &mut R,
    tournament_size: usize,
    p_size: f64,
) -> Individual {
    let a = fitness_tournament(pop, rng, tournament_size);
    let b = fitness_tournament(pop, rng, tournament_size);
    size_playoff(a, b, rng, p_size).clone()
}

/// Swaps the subtrees rooted at pre-order positions `i` of `a` and `j` of `b`.
pub fn crossover_at(a: &Individual, b: &Individual, i: usize, j: usize) -> (Individual, Individual) {
    let sa = a.expr.subtree(i).expect("crossover point in a").clone();
    let sb = b.expr.subtree(j).expect("crossover point in b").clone();
    let mut c1 = a.expr.clone();
    let mut c2 = b.expr.clone();
    c1.replace_subtree(i, sb);
    c2.replace_subtree(j, sa);
    (Individual::new(c1), Individual::new(c2))
}

/// One-point crossover with both points uniform over the trees' nodes.
pub fn crossover<R: Rng + ?Sized>(a: &Individual, b: &Individual, rng: &mut R) -> (Individual, Individual) {
    let i = rng.gen_range(0..a.size());
    let j = rng.gen_range(0..b.size());
    crossover_at(a, b, i, j)
}

/// Uniform mutation that also reports the mutation point and the graft.
pub fn mutate_traced<R: Rng + ?Sized>(
    a: &Individual,
    rng: &mut R,
    d_mut_min: usize,
    d_mut_max: usize,
) -> (Individual, usize, ScoreExpr) {
    let point = rng.gen_range(0..a.size());
    let graft = random_tree(rng, d_mut_min, d_mut_max);
    let mut e = a.expr.clone();
    e.replace_subtree(point, graft.clone());
    (Individual::new(e), point, graft)
}

/// Replaces a uniformly chosen subtree with a fresh random tree.
pub fn mutate<R: Rng + ?Sized>(a: &Individual, rng: &mut R, d_mut_min: usize, d_mut_max: usize) -> Individual {
    mutate_traced(a, rng, d_mut_min, d_mut_max).0
}
