/// Which child of a branching a pseudocost observation comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `x_j <= floor(v)`
    Down,
    /// `x_j >= floor(v) + 1`
    Up,
}

/// Running averages of per-unit objective degradation for each variable.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudocostTable {
    down_sum: Vec<f64>,
    down_count: Vec<u64>,
    up_sum: Vec<f64>,
    up_count: Vec<u64>,
}

impl PseudocostTable {
    pub fn new(num_vars: usize) -> Self {
        PseudocostTable {
            down_sum: vec![0.0; num_vars],
            down_count: vec![0; num_vars],
            up_sum: vec![0.0; num_vars],
            up_count: vec![0; num_vars],
        }
    }

    /// Records one observation. `frac` is the fractional part of the
    /// parent's value for `var`. Negative degradations (LP noise) count as 0.
    pub fn update(&mut self, var: usize, dir: Direction, parent_z: f64, child_z: f64, frac: f64) {
        debug_assert!(frac > 0.0 && frac < 1.0);
        let delta = (child_z - parent_z).max(0.0);
        match dir {
            Direction::Down => {
                self.down_sum[var] += delta / frac;
                self.down_count[var] += 1;
            }
            Direction::Up => {
                self.up_sum[var] += delta / (1.0 - frac);
                self.up_count[var] += 1;
            }
        }
    }

    /// Pseudocost `P_j` for `dir`, falling back to the average over all
    /// variables in that direction, then to 1.
    pub fn get(&self, var: usize, dir: Direction) -> f64 {
        let (sum, count) = match dir {
            Direction::Down => (&self.down_sum, &self.down_count),
            Direction::Up => (&self.up_sum, &self.up_count),
        };
        if count[var] > 0 {
            return sum[var] / count[var] as f64;
        }
        let total: u64 = count.iter().sum();
        if total > 0 {
            sum.iter().sum::<f64>() / total as f64
        } else {
            1.0
        }
    }

    pub fn observations(&self, var: usize, dir: Direction) -> u64 {
        match dir {
            Direction::Down => self.down_count[var],
            Direction::Up => self.up_count[var],
        }
    }
}

pub fn update_pseudocosts(
    t: &mut PseudocostTable,
    var: usize,
    parent_z: f64,
    child_z: f64,
    dir: Direction,
    frac: f64,
) {
    t.update(var, dir, parent_z, child_z, frac);
}

/// `z + Σ_j min(P_j⁻ f_j, P_j⁺ (1 − f_j))` over the fractional variables.
pub fn best_estimate(z: f64, frac: &[(usize, f64)], t: &PseudocostTable) -> f64 {
    z + frac
        .iter()
        .map(|&(j, f)| (t.get(j, Direction::Down) * f).min(t.get(j, Direction::Up) * (1.0 - f)))
        .sum::<f64>()
}
