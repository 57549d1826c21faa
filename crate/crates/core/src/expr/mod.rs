//! Node-scoring expressions.
//!
//! A [`ScoreExpr`] is a binary expression tree over four arithmetic operators
//! and seven terminals describing a branch-and-bound node and its model. The
//! search engine always selects the open node with the *smallest* score, so a
//! policy such as "deepest node first, then lowest bound" is written
//! `lb - bigM * depth`.

mod syntax;

pub use syntax::{parse, parse_ssx, ParseError};

use std::fmt;

use rand::Rng;

/// Scores saturate at this magnitude so the node queue stays totally ordered.
pub const BIG_SCORE: f64 = 1e30;

/// Default value of the `bigM` terminal.
pub const DEFAULT_BIG_M: f64 = 1e8;

/// Binary operators. All of them have arity two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Add,
    Sub,
    Mul,
    /// Division returning 1 when the divisor is exactly zero.
    Div,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::Add, Op::Sub, Op::Mul, Op::Div];

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.symbol() == s)
    }

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
            Op::Div => {
                if b == 0.0 {
                    1.0
                } else {
                    a / b
                }
            }
        }
    }
}

/// Leaves of a scoring expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Terminal {
    /// Number of branchings from the root to the node.
    Depth,
    /// Pseudocost best estimate of the node.
    BestEstimate,
    /// LP relaxation value of the node.
    LowerBound,
    /// LP relaxation value of the root node.
    RootDualBound,
    /// Number of rows in the model.
    NumConstraints,
    /// Number of columns in the model.
    NumVariables,
    /// The big positive constant used for lexicographic layering.
    BigM,
}

impl Terminal {
    pub const ALL: [Terminal; 7] = [
        Terminal::Depth,
        Terminal::BestEstimate,
        Terminal::LowerBound,
        Terminal::RootDualBound,
        Terminal::NumConstraints,
        Terminal::NumVariables,
        Terminal::BigM,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Terminal::Depth => "depth",
            Terminal::BestEstimate => "estimate",
            Terminal::LowerBound => "lb",
            Terminal::RootDualBound => "rootlb",
            Terminal::NumConstraints => "ncons",
            Terminal::NumVariables => "nvars",
            Terminal::BigM => "bigM",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Terminal> {
        Terminal::ALL.into_iter().find(|t| t.symbol() == s)
    }

    pub fn value(self, ctx: &NodeContext) -> f64 {
        match self {
            Terminal::Depth => ctx.depth as f64,
            Terminal::BestEstimate => ctx.best_estimate,
            Terminal::LowerBound => ctx.lower_bound,
            Terminal::RootDualBound => ctx.root_dual_bound,
            Terminal::NumConstraints => ctx.num_constraints as f64,
            Terminal::NumVariables => ctx.num_variables as f64,
            Terminal::BigM => ctx.big_m,
        }
    }
}

/// The features a scoring expression can read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeContext {
    pub depth: usize,
    pub best_estimate: f64,
    pub lower_bound: f64,
    pub root_dual_bound: f64,
    pub num_constraints: usize,
    pub num_variables: usize,
    pub big_m: f64,
}

impl NodeContext {
    /// Checks that every real feature is finite and `big_m` is positive.
    pub fn is_valid(&self) -> bool {
        self.best_estimate.is_finite()
            && self.lower_bound.is_finite()
            && self.root_dual_bound.is_finite()
            && self.big_m.is_finite()
            && self.big_m > 0.0
    }
}

impl Default for NodeContext {
    fn default() -> Self {
        NodeContext {
            depth: 0,
            best_estimate: 0.0,
            lower_bound: 0.0,
            root_dual_bound: 0.0,
            num_constraints: 0,
            num_variables: 0,
            big_m: DEFAULT_BIG_M,
        }
    }
}

/// A scoring expression tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScoreExpr {
    Leaf(Terminal),
    Node(Op, Box<ScoreExpr>, Box<ScoreExpr>),
}

impl ScoreExpr {
    pub fn leaf(t: Terminal) -> Self {
        ScoreExpr::Leaf(t)
    }

    pub fn node(op: Op, lhs: ScoreExpr, rhs: ScoreExpr) -> Self {
        ScoreExpr::Node(op, Box::new(lhs), Box::new(rhs))
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            ScoreExpr::Leaf(_) => 1,
            ScoreExpr::Node(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Length of the longest root-to-leaf path; a single leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            ScoreExpr::Leaf(_) => 0,
            ScoreExpr::Node(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Depths of all leaves, in pre-order.
    pub fn leaf_depths(&self) -> Vec<usize> {
        fn walk(e: &ScoreExpr, d: usize, out: &mut Vec<usize>) {
            match e {
                ScoreExpr::Leaf(_) => out.push(d),
                ScoreExpr::Node(_, l, r) => {
                    walk(l, d + 1, out);
                    walk(r, d + 1, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, 0, &mut out);
        out
    }

    /// Evaluates the expression. Every intermediate value saturates at
    /// `±BIG_SCORE`, so the result is always finite for a valid context.
    pub fn evaluate(&self, ctx: &NodeContext) -> f64 {
        match self {
            ScoreExpr::Leaf(t) => saturate(t.value(ctx)),
            ScoreExpr::Node(op, l, r) => saturate(op.apply(l.evaluate(ctx), r.evaluate(ctx))),
        }
    }

    /// The subtree rooted at pre-order position `index` (root is 0).
    pub fn subtree(&self, index: usize) -> Option<&ScoreExpr> {
        let mut remaining = index;
        self.find(&mut remaining)
    }

    fn find(&self, remaining: &mut usize) -> Option<&ScoreExpr> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        match self {
            ScoreExpr::Leaf(_) => None,
            ScoreExpr::Node(_, l, r) => l.find(remaining).or_else(|| r.find(remaining)),
        }
    }

    /// Replaces the subtree at pre-order position `index`, returning the
    /// removed subtree. Returns `None` (and leaves `self` intact) when the
    /// index is out of range.
    pub fn replace_subtree(&mut self, index: usize, graft: ScoreExpr) -> Option<ScoreExpr> {
        let mut remaining = index;
        let slot = self.find_mut(&mut remaining)?;
        Some(std::mem::replace(slot, graft))
    }

    fn find_mut(&mut self, remaining: &mut usize) -> Option<&mut ScoreExpr> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        match self {
            ScoreExpr::Leaf(_) => None,
            ScoreExpr::Node(_, l, r) => {
                let left_size = l.size();
                if *remaining < left_size {
                    l.find_mut(remaining)
                } else {
                    *remaining -= left_size;
                    r.find_mut(remaining)
                }
            }
        }
    }
}

impl fmt::Display for ScoreExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreExpr::Leaf(t) => f.write_str(t.symbol()),
            ScoreExpr::Node(op, l, r) => write!(f, "({} {} {})", op.symbol(), l, r),
        }
    }
}

impl std::str::FromStr for ScoreExpr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Canonical prefix form of `expr`.
pub fn print(expr: &ScoreExpr) -> String {
    expr.to_string()
}

/// Free-function form of [`ScoreExpr::evaluate`].
pub fn evaluate(expr: &ScoreExpr, ctx: &NodeContext) -> f64 {
    expr.evaluate(ctx)
}

fn saturate(v: f64) -> f64 {
    if v.is_nan() {
        // Unreachable from finite inputs, kept so ordering never sees NaN.
        BIG_SCORE
    } else {
        v.clamp(-BIG_SCORE, BIG_SCORE)
    }
}

/// Grows a random tree whose leaves all sit at depth `dmin..=dmax`.
///
/// Above `dmin` only operators are drawn and at `dmax` only terminals; in
/// between each node is drawn uniformly from the eleven operators and
/// terminals together.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, dmin: usize, dmax: usize) -> ScoreExpr {
    assert!(dmin <= dmax, "random_tree requires dmin <= dmax");
    grow(rng, 0, dmin, dmax)
}

fn grow<R: Rng + ?Sized>(rng: &mut R, depth: usize, dmin: usize, dmax: usize) -> ScoreExpr {
    let n_ops = Op::ALL.len();
    let n_terms = Terminal::ALL.len();
    if depth >= dmax {
        return ScoreExpr::Leaf(Terminal::ALL[rng.gen_range(0..n_terms)]);
    }
    let op = if depth < dmin {
        Op::ALL[rng.gen_range(0..n_ops)]
    } else {
        let pick = rng.gen_range(0..n_ops + n_terms);
        if pick >= n_ops {
            return ScoreExpr::Leaf(Terminal::ALL[pick - n_ops]);
        }
        Op::ALL[pick]
    };
    let lhs = grow(rng, depth + 1, dmin, dmax);
    let rhs = grow(rng, depth + 1, dmin, dmax);
    ScoreExpr::node(op, lhs, rhs)
}

/// Error from [`count_perfect_trees`].
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("number of perfect trees of depth {depth} exceeds 128-bit range")]
pub struct CountOverflow {
    pub depth: u32,
}

/// Number of distinct perfect binary trees of depth `r`: `7^(2^r) * 4^(2^r - 1)`.
pub fn count_perfect_trees(r: u32) -> Result<u128, CountOverflow> {
    let overflow = CountOverflow { depth: r };
    let leaves = 1u32.checked_shl(r).ok_or(overflow.clone())?;
    let terms = (Terminal::ALL.len() as u128)
        .checked_pow(leaves)
        .ok_or(overflow.clone())?;
    let ops = (Op::ALL.len() as u128)
        .checked_pow(leaves - 1)
        .ok_or(overflow.clone())?;
    terms.checked_mul(ops).ok_or(overflow)
}
