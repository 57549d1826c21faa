//! Dense two-phase primal simplex for `min c·x  s.t.  A x >= b,  lo <= x <= hi`.
//!
//! Variable bounds are handled implicitly (nonbasic variables sit at a bound
//! and may flip between bounds), so branching only ever touches `lo`/`hi`
//! and the row count stays equal to the model's constraint count.
//!
//! Pricing is Dantzig's rule; after `10 * (n + m)` consecutive iterations
//! without objective progress the phase switches to Bland's rule for good.

use thiserror::Error;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("invalid LP: {0}")]
    Invalid(String),
    #[error("simplex failed to converge after {iterations} iterations")]
    NumericalFailure { iterations: usize },
}

/// `min c·x` subject to `A x >= b` and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    /// Row-major `m x n` constraint matrix.
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.matrix.len() != self.rhs.len() {
            return Err(LpError::Invalid(format!(
                "{} matrix rows but {} right-hand sides",
                self.matrix.len(),
                self.rhs.len()
            )));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(LpError::Invalid(format!(
                "row {i} has {} coefficients, expected {n}",
                row.len()
            )));
        }
        check_bounds(n, &self.lower, &self.upper)?;
        let finite = self.objective.iter().chain(&self.rhs).all(|v| v.is_finite())
            && self.matrix.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(LpError::Invalid("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Value of row `i` at `x`.
    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        self.matrix[i].iter().zip(x).map(|(a, v)| a * v).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of a row or bound at `x`.
    pub fn max_violation(&self, x: &[f64], lower: &[f64], upper: &[f64]) -> f64 {
        let rows = (0..self.num_rows()).map(|i| self.rhs[i] - self.row_activity(i, x));
        let bounds = x
            .iter()
            .zip(lower.iter().zip(upper))
            .map(|(v, (lo, hi))| (lo - v).max(v - hi));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

fn check_bounds(n: usize, lower: &[f64], upper: &[f64]) -> Result<(), LpError> {
    if lower.len() != n || upper.len() != n {
        return Err(LpError::Invalid(format!(
            "bound vectors have lengths {} and {}, expected {n}",
            lower.len(),
            upper.len()
        )));
    }
    for (j, (lo, hi)) in lower.iter().zip(upper).enumerate() {
        if lo.is_nan() || hi.is_nan() || lo > hi || *lo == f64::INFINITY || *hi == f64::NEG_INFINITY
        {
            return Err(LpError::Invalid(format!("variable {j} has bounds [{lo}, {hi}]")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Optimal vertex; empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    /// `c·x` when optimal, `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    pub iterations: usize,
}

impl LpResult {
    fn verdict(status: LpStatus, iterations: usize) -> Self {
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        LpResult {
            status,
            x: Vec::new(),
            objective,
            iterations,
        }
    }
}

/// Solves `p` with its own bounds.
pub fn solve_lp(p: &LpProblem) -> Result<LpResult, LpError> {
    solve_lp_with_bounds(p, &p.lower, &p.upper)
}

/// Solves `p` with `lower`/`upper` substituted for its variable bounds.
pub fn solve_lp_with_bounds(
    p: &LpProblem,
    lower: &[f64],
    upper: &[f64],
) -> Result<LpResult, LpError> {
    p.validate()?;
    check_bounds(p.num_vars(), lower, upper)?;
    let mut t = Tableau::new(p, lower, upper);

    if t.num_art > 0 {
        let cost: Vec<f64> = (0..t.cols)
            .map(|j| if t.is_artificial(j) { 1.0 } else { 0.0 })
            .collect();
        match t.run_phase(&cost, true)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => unreachable!("phase one objective is bounded below"),
        }
        let infeasibility: f64 = (t.n + t.m..t.cols).map(|j| t.value(j)).sum();
        let scale = 1.0 + p.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeasibility > FEAS_TOL * scale {
            return Ok(LpResult::verdict(LpStatus::Infeasible, t.iterations));
        }
        t.retire_artificials();
    }

    let mut cost = vec![0.0; t.cols];
    cost[..t.n].copy_from_slice(&p.objective);
    if t.run_phase(&cost, false)? == PhaseEnd::Unbounded {
        return Ok(LpResult::verdict(LpStatus::Unbounded, t.iterations));
    }

    let x: Vec<f64> = (0..t.n)
        .map(|j| t.value(j).clamp(lower[j], upper[j]))
        .collect();
    let scale = 1.0
        + p.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()))
        + x.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if p.max_violation(&x, lower, upper) > 1e-6 * scale {
        return Err(LpError::NumericalFailure {
            iterations: t.iterations,
        });
    }
    Ok(LpResult {
        status: LpStatus::Optimal,
        objective: p.objective_value(&x),
        x,
        iterations: t.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PhaseEnd {
    Optimal,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

/// Columns: `n` structural, `m` surplus (`A_i x - s_i = b_i`), then one
/// artificial per row whose starting residual is positive.
struct Tableau<'a> {
    p: &'a LpProblem,
    n: usize,
    m: usize,
    cols: usize,
    num_art: usize,
    /// `B^-1 [A | -I | art]`, row-major `m x cols`.
    body: Vec<f64>,
    /// Current values of the basic variables, by row.
    beta: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<State>,
    /// Values of nonbasic variables (stale for basic ones).
    val: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Initial basic column per row and its sign, used to recover `B^-1`.
    init_basis: Vec<(usize, f64)>,
    iterations: usize,
}

impl<'a> Tableau<'a> {
    fn new(p: &'a LpProblem, lower: &[f64], upper: &[f64]) -> Self {
        let n = p.num_vars();
        let m = p.num_rows();
        let mut val = vec![0.0; n + m];
        let mut state = vec![State::AtLower; n + m];
        for j in 0..n {
            (val[j], state[j]) = if lower[j].is_finite() {
                (lower[j], State::AtLower)
            } else if upper[j].is_finite() {
                (upper[j], State::AtUpper)
            } else {
                (0.0, State::Free)
            };
        }
        let residual: Vec<f64> = (0..m).map(|i| p.rhs[i] - p.row_activity(i, &val)).collect();
        let num_art = residual.iter().filter(|r| **r > 0.0).count();
        let cols = n + m + num_art;

        let mut body = vec![0.0; m * cols];
        let mut beta = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut init_basis = Vec::with_capacity(m);
        let mut next_art = n + m;
        for i in 0..m {
            let row = &mut body[i * cols..(i + 1) * cols];
            if residual[i] > 0.0 {
                row[..n].copy_from_slice(&p.matrix[i]);
                row[n + i] = -1.0;
                row[next_art] = 1.0;
                beta[i] = residual[i];
                basis[i] = next_art;
                init_basis.push((next_art, 1.0));
                next_art += 1;
            } else {
                for (dst, a) in row[..n].iter_mut().zip(&p.matrix[i]) {
                    *dst = -a;
                }
                row[n + i] = 1.0;
                beta[i] = -residual[i];
                basis[i] = n + i;
                init_basis.push((n + i, -1.0));
            }
        }

        let mut lo: Vec<f64> = lower.to_vec();
        let mut hi: Vec<f64> = upper.to_vec();
        lo.resize(cols, 0.0);
        hi.resize(cols, f64::INFINITY);
        val.resize(cols, 0.0);
        state.resize(cols, State::AtLower);
        for (i, &b) in basis.iter().enumerate() {
            state[b] = State::Basic(i);
        }

        Tableau {
            p,
            n,
            m,
            cols,
            num_art,
            body,
            beta,
            basis,
            state,
            val,
            lo,
            hi,
            init_basis,
            iterations: 0,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n + self.m
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            State::Basic(i) => self.beta[i],
            _ => self.val[j],
        }
    }

    fn entry(&self, i: usize, j: usize) -> f64 {
        self.body[i * self.cols + j]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.body[i * self.cols..(i + 1) * self.cols];
                for (dj, a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn run_phase(&mut self, cost: &[f64], phase_one: bool) -> Result<PhaseEnd, LpError> {
        let mut d = self.reduced_costs(cost);
        let stall_limit = 10 * (self.n + self.m);
        let max_iter = 50 * (self.cols + self.m) + 1000;
        let mut stalled = 0usize;
        let mut bland = false;
        let mut phase_iter = 0usize;

        loop {
            let Some((q, dir)) = self.choose_entering(&d, phase_one, bland) else {
                self.refresh_beta();
                return Ok(PhaseEnd::Optimal);
            };
            phase_iter += 1;
            self.iterations += 1;
            if phase_iter > max_iter {
                return Err(LpError::NumericalFailure {
                    iterations: self.iterations,
                });
            }

            let Some((step, leave)) = self.ratio_test(q, dir, bland) else {
                return Ok(PhaseEnd::Unbounded);
            };

            if step * d[q].abs() > 1e-12 {
                stalled = 0;
            } else {
                stalled += 1;
                if stalled >= stall_limit {
                    bland = true;
                }
            }

            for i in 0..self.m {
                let a = self.entry(i, q);
                if a != 0.0 {
                    self.beta[i] -= dir * a * step;
                }
            }
            let entering_value = self.val[q] + dir * step;

            match leave {
                None => {
                    // Bound flip: the entering variable crosses to its other bound.
                    if dir > 0.0 {
                        self.val[q] = self.hi[q];
                        self.state[q] = State::AtUpper;
                    } else {
                        self.val[q] = self.lo[q];
                        self.state[q] = State::AtLower;
                    }
                }
                Some((r, to_upper)) => {
                    let out = self.basis[r];
                    if to_upper {
                        self.val[out] = self.hi[out];
                        self.state[out] = State::AtUpper;
                    } else {
                        self.val[out] = self.lo[out];
                        self.state[out] = State::AtLower;
                    }
                    self.pivot(r, q, &mut d);
                    self.beta[r] = entering_value;
                }
            }
        }
    }

    fn choose_entering(&self, d: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols {
            if !phase_one && self.is_artificial(j) {
                continue;
            }
            let dir = match self.state[j] {
                State::Basic(_) => continue,
                _ if self.lo[j] == self.hi[j] => continue,
                State::AtLower if d[j] < -DUAL_TOL => 1.0,
                State::AtUpper if d[j] > DUAL_TOL => -1.0,
                State::Free if d[j].abs() > DUAL_TOL => -d[j].signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(_, _, mag)| d[j].abs() > mag) {
                best = Some((j, dir, d[j].abs()));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    /// Returns the step length and, unless the entering variable just flips
    /// bounds, the leaving row and whether it leaves at its upper bound.
    #[allow(clippy::type_complexity)]
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> Option<(f64, Option<(usize, bool)>)> {
        let mut best: Option<(f64, usize, bool, f64)> = None;
        for i in 0..self.m {
            let alpha = self.entry(i, q);
            let rate = -dir * alpha;
            let b = self.basis[i];
            let (limit, to_upper) = if rate < -PIVOT_TOL && self.lo[b].is_finite() {
                ((self.beta[i] - self.lo[b]) / -rate, false)
            } else if rate > PIVOT_TOL && self.hi[b].is_finite() {
                ((self.hi[b] - self.beta[i]) / rate, true)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let better = match best {
                None => true,
                Some((t, row, _, mag)) => {
                    if limit < t - 1e-12 {
                        true
                    } else if limit <= t + 1e-12 {
                        if bland {
                            b < self.basis[row]
                        } else {
                            alpha.abs() > mag
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((limit, i, to_upper, alpha.abs()));
            }
        }

        let flip = self.hi[q] - self.lo[q];
        match best {
            Some((t, _, _, _)) if flip.is_finite() && flip <= t => Some((flip, None)),
            Some((t, row, up, _)) => Some((t, Some((row, up)))),
            None if flip.is_finite() => Some((flip, None)),
            None => None,
        }
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let cols = self.cols;
        let piv = self.entry(r, q);
        let (before, rest) = self.body.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[q] = 1.0;
        for row in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = row[q];
            if f != 0.0 {
                for (v, pr) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pr;
                }
                row[q] = 0.0;
            }
        }
        let dq = d[q];
        if dq != 0.0 {
            for (dj, pr) in d.iter_mut().zip(prow.iter()) {
                *dj -= dq * pr;
            }
            d[q] = 0.0;
        }
        let out = self.basis[r];
        self.basis[r] = q;
        self.state[q] = State::Basic(r);
        debug_assert!(!matches!(self.state[out], State::Basic(_)));
    }

    /// Recomputes basic values as `B^-1 (b - N x_N)` to shed drift.
    fn refresh_beta(&mut self) {
        let mut rhs = self.p.rhs.clone();
        for j in 0..self.cols {
            if matches!(self.state[j], State::Basic(_)) {
                continue;
            }
            let v = self.val[j];
            if v == 0.0 {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r -= self.column_coeff(i, j) * v;
            }
        }
        for i in 0..self.m {
            let mut acc = 0.0;
            for (k, &(col, sign)) in self.init_basis.iter().enumerate() {
                acc += self.entry(i, col) * sign * rhs[k];
            }
            self.beta[i] = acc;
        }
    }

    /// Original (pre-pivot) coefficient of column `j` in row `i`.
    fn column_coeff(&self, i: usize, j: usize) -> f64 {
        if j < self.n {
            self.p.matrix[i][j]
        } else if j < self.n + self.m {
            if j - self.n == i {
                -1.0
            } else {
                0.0
            }
        } else if self.init_basis[i].0 == j {
            1.0
        } else {
            0.0
        }
    }

    /// Fixes artificials at zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        for j in self.n + self.m..self.cols {
            self.hi[j] = 0.0;
            if !matches!(self.state[j], State::Basic(_)) {
                self.val[j] = 0.0;
                self.state[j] = State::AtLower;
            }
        }
        let mut scratch = vec![0.0; self.cols];
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let candidate = (0..self.n + self.m)
                .filter(|&j| !matches!(self.state[j], State::Basic(_)))
                .map(|j| (j, self.entry(r, j).abs()))
                .filter(|&(_, a)| a > 1e-7)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((q, _)) = candidate {
                let out = self.basis[r];
                self.val[out] = 0.0;
                self.state[out] = State::AtLower;
                let entering_value = self.val[q];
                self.pivot(r, q, &mut scratch);
                self.beta[r] = entering_value;
            }
        }
        self.refresh_beta();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn lp(c: &[f64], a: &[&[f64]], b: &[f64], lo: &[f64], hi: &[f64]) -> LpProblem {
        LpProblem {
            objective: c.to_vec(),
            matrix: a.iter().map(|r| r.to_vec()).collect(),
            rhs: b.to_vec(),
            lower: lo.to_vec(),
            upper: hi.to_vec(),
        }
    }

    #[test]
    fn two_variable_knapsack_relaxation() {
        let p = lp(&[-1.0, -1.0], &[&[-2.0, -2.0]], &[-3.0], &[0.0, 0.0], &[1.0, 1.0]);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective + 1.5).abs() < 1e-9);
    }

    #[test]
    fn single_active_bound() {
        let p = lp(&[1.0], &[&[1.0]], &[2.0], &[0.0], &[10.0]);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 2.0).abs() < 1e-9);
        assert!((r.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let p = lp(&[0.0], &[&[1.0], &[-1.0]], &[1.0, 0.0], &[-INF], &[INF]);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let p = lp(&[-1.0, 0.0], &[&[1.0, -1.0]], &[0.0], &[0.0, 0.0], &[INF, INF]);
        assert_eq!(solve_lp(&p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_upper_only_variables() {
        // min x + y with x free, y <= 3, x + y >= 1, x - y >= -5
        let p = lp(
            &[1.0, 2.0],
            &[&[1.0, 1.0], &[1.0, -1.0]],
            &[1.0, -5.0],
            &[-INF, -2.0],
            &[INF, 3.0],
        );
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.status, LpStatus::Optimal);
        // On x + y = 1 the objective is 1 + y, so y sits at its lower bound -2.
        assert!((r.objective - (-1.0)).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn equality_via_two_rows() {
        // x1 + x2 = 4, min x1 - x2, 0 <= x <= 3
        let p = lp(
            &[1.0, -1.0],
            &[&[1.0, 1.0], &[-1.0, -1.0]],
            &[4.0, -4.0],
            &[0.0, 0.0],
            &[3.0, 3.0],
        );
        let r = solve_lp(&p).unwrap();
        assert!((r.objective - (-2.0)).abs() < 1e-9);
        assert!((r.x[0] - 1.0).abs() < 1e-9 && (r.x[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_variables_and_bound_overrides() {
        let p = lp(&[-1.0, -1.0], &[&[-2.0, -2.0]], &[-3.0], &[0.0, 0.0], &[1.0, 1.0]);
        let r = solve_lp_with_bounds(&p, &[1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((r.objective + 1.5).abs() < 1e-9);
        assert!((r.x[0] - 1.0).abs() < 1e-12);
        let r = solve_lp_with_bounds(&p, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
    }

    #[test]
    fn rejects_bad_dimensions_and_bounds() {
        let mut p = lp(&[1.0], &[&[1.0]], &[2.0], &[0.0], &[10.0]);
        p.rhs.push(1.0);
        assert!(matches!(solve_lp(&p), Err(LpError::Invalid(_))));
        let p = lp(&[1.0], &[&[1.0]], &[2.0], &[3.0], &[1.0]);
        assert!(matches!(solve_lp(&p), Err(LpError::Invalid(_))));
    }

    #[test]
    fn no_rows() {
        let p = lp(&[1.0, -2.0], &[], &[], &[-1.0, -1.0], &[1.0, 4.0]);
        let r = solve_lp(&p).unwrap();
        assert_eq!(r.x, vec![-1.0, 4.0]);
        assert_eq!(r.objective, -9.0);
    }

    #[test]
    fn deterministic_bitwise() {
        let p = lp(
            &[3.0, -1.0, 2.0],
            &[&[1.0, 1.0, 1.0], &[2.0, -1.0, 0.5], &[-1.0, 0.0, 3.0]],
            &[1.0, -2.0, 0.5],
            &[0.0, -1.0, 0.0],
            &[2.0, 2.0, 5.0],
        );
        let a = solve_lp(&p).unwrap();
        let b = solve_lp(&p).unwrap();
        assert_eq!(a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }
}
