//! A MILP branch-and-bound engine whose node-selection policy is a scoring
//! expression over node and model features, and a genetic-programming
//! trainer that evolves such expressions.
//!
//! - [`expr`]: scoring-expression trees, their text syntax and random sampling.
//! - [`lp`]: bounded-variable primal simplex for the relaxations.
//! - [`milp`]: models, the MILP-TXT format, and instance generators.
//! - [`bnb`]: branch and bound with pluggable search strategies.
//! - [`gp`]: the evolutionary trainer.
//! - [`bench`]: benchmark harness and shifted-geometric-mean metrics.
//! - [`cli`]: the `gp2s` command line.
//!
//! Scores are minimized: the open node with the smallest score is expanded next.

pub mod bench;
pub mod bnb;
pub mod cli;
pub mod expr;
pub mod gp;
pub mod lp;
pub mod milp;
