//! Classical emulation and resource estimation for tree-generator based
//! quantum search on the 0-1 quadratic knapsack problem (QKP) and the 0-1
//! multidimensional knapsack problem (MDKP).
//!
//! * [`instance`] and [`formats`]: problem data, assignments and file I/O.
//! * [`baseline`] and [`trace`]: greedy incumbents, an exhaustive oracle and
//!   solver incumbent traces.
//! * [`sampler`]: measurement statistics of the biased tree-generator state.
//! * [`amplification`]: emulated amplitude amplification and maximum finding.
//! * [`resources`]: qubit, gate and cycle counts of the circuits.
//! * [`bench`]: classical-vs-quantum comparison campaigns.

pub mod amplification;
pub mod baseline;
pub mod bench;
pub mod error;
pub mod formats;
pub mod instance;
pub mod resources;
pub mod rng;
pub mod sampler;
pub mod trace;
pub mod tree;

pub use error::{Error, InvalidInstance, Result};
pub use instance::{
    check_feasible, evaluate_profit, numbits, profit_upper_bound, Bits, KnapsackInstance, Path, ProblemKind,
    ProfitBound, Profits, Validation,
};
