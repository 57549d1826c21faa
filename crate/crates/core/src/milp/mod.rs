//! MILP models, the MILP-TXT file format, and synthetic instance families.

mod format;
mod generators;

pub use format::{parse_milp, read_instance, to_milp_txt, write_instance};
pub use generators::{
    fcmcnf_from_parts, gen_er_graph, gen_fcmcnf, gen_gisp, gen_maxsat, maxsat_from_clauses, Clause,
    ErGraph, FcmcnfArc, FcmcnfParams, GispParams, MaxsatParams,
};

use thiserror::Error;

use crate::lp::LpProblem;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// `min c·x  s.t.  A x >= b,  lo <= x <= hi`, with some columns integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Milp {
    pub name: String,
    pub lp: LpProblem,
    pub integer_mask: Vec<bool>,
    pub var_names: Vec<String>,
    pub row_names: Vec<String>,
}

impl Milp {
    pub fn new(
        name: impl Into<String>,
        lp: LpProblem,
        integer_mask: Vec<bool>,
        var_names: Vec<String>,
        row_names: Vec<String>,
    ) -> Result<Self, MilpError> {
        let m = Milp {
            name: name.into(),
            lp,
            integer_mask,
            var_names,
            row_names,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.lp.num_vars();
        self.lp.validate().map_err(|e| match e {
            crate::lp::LpError::Invalid(msg) => MilpError::DimensionMismatch(msg),
            other => MilpError::Invalid(other.to_string()),
        })?;
        if self.integer_mask.len() != n || self.var_names.len() != n {
            return Err(MilpError::DimensionMismatch(format!(
                "{n} variables but {} integrality marks and {} names",
                self.integer_mask.len(),
                self.var_names.len()
            )));
        }
        if self.row_names.len() != self.lp.num_rows() {
            return Err(MilpError::DimensionMismatch(format!(
                "{} rows but {} row names",
                self.lp.num_rows(),
                self.row_names.len()
            )));
        }
        if self.num_integer() == 0 {
            return Err(MilpError::Invalid("model has no integer variables".into()));
        }
        for j in 0..n {
            if self.integer_mask[j] && !(self.lp.lower[j].is_finite() && self.lp.upper[j].is_finite())
            {
                return Err(MilpError::Invalid(format!(
                    "integer variable `{}` must have finite bounds",
                    self.var_names[j]
                )));
            }
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.lp.num_vars()
    }

    pub fn num_rows(&self) -> usize {
        self.lp.num_rows()
    }

    /// Number of integer variables (`k`).
    pub fn num_integer(&self) -> usize {
        self.integer_mask.iter().filter(|b| **b).count()
    }

    /// Checks `x` against every row, bound, and integrality mark.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.num_vars()
            && self.lp.max_violation(x, &self.lp.lower, &self.lp.upper) <= tol
            && x
                .iter()
                .zip(&self.integer_mask)
                .all(|(v, int)| !int || (v - v.round()).abs() <= tol)
    }
}

/// Incrementally assembles a [`Milp`], normalizing every row to `>=`.
#[derive(Debug, Default, Clone)]
pub struct MilpBuilder {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer: Vec<bool>,
    names: Vec<String>,
    rows: Vec<(String, Vec<(usize, f64)>, f64)>,
}

impl MilpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lo: f64, hi: f64, integer: bool, cost: f64) -> usize {
        self.objective.push(cost);
        self.lower.push(lo);
        self.upper.push(hi);
        self.integer.push(integer);
        self.names.push(name.into());
        self.objective.len() - 1
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.add_var(name, 0.0, 1.0, true, cost)
    }

    pub fn add_ge(&mut self, name: impl Into<String>, terms: &[(usize, f64)], rhs: f64) {
        self.rows.push((name.into(), terms.to_vec(), rhs));
    }

    pub fn add_le(&mut self, name: impl Into<String>, terms: &[(usize, f64)], rhs: f64) {
        // Adding 0.0 turns -0.0 into 0.0.
        let neg: Vec<(usize, f64)> = terms.iter().map(|&(j, a)| (j, -a + 0.0)).collect();
        self.rows.push((name.into(), neg, -rhs + 0.0));
    }

    /// Adds an equality as the pair `name_ge` / `name_le`.
    pub fn add_eq(&mut self, name: &str, terms: &[(usize, f64)], rhs: f64) {
        self.add_ge(format!("{name}_ge"), terms, rhs);
        self.add_le(format!("{name}_le"), terms, rhs);
    }

    pub fn build(self, name: impl Into<String>) -> Result<Milp, MilpError> {
        let n = self.objective.len();
        let mut matrix = Vec::with_capacity(self.rows.len());
        let mut rhs = Vec::with_capacity(self.rows.len());
        let mut row_names = Vec::with_capacity(self.rows.len());
        for (rname, terms, b) in self.rows {
            let mut row = vec![0.0; n];
            for (j, a) in terms {
                if j >= n {
                    return Err(MilpError::DimensionMismatch(format!(
                        "row `{rname}` references column {j} of {n}"
                    )));
                }
                row[j] += a;
            }
            matrix.push(row);
            rhs.push(b);
            row_names.push(rname);
        }
        let lp = LpProblem {
            objective: self.objective,
            matrix,
            rhs,
            lower: self.lower,
            upper: self.upper,
        };
        Milp::new(name, lp, self.integer, self.names, row_names)
    }
}
