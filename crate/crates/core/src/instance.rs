//! Quadratic and multidimensional knapsack instances, item assignments and
//! their evaluation.
//!
//! Both problem kinds share one representation: a `d x n` weight matrix with
//! `d` capacities. A quadratic instance has `d == 1` and an `n x n` symmetric
//! profit matrix whose diagonal holds the linear profits; a multidimensional
//! instance has a plain profit vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, InvalidInstance, Result};

/// Smallest register width that stores `x` exactly: `ceil(log2(x + 1))`.
pub fn numbits(x: u64) -> u32 {
    u64::BITS - x.leading_zeros()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "QKP")]
    Qkp,
    #[serde(rename = "MDKP")]
    Mdkp,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemKind::Qkp => f.write_str("QKP"),
            ProblemKind::Mdkp => f.write_str("MDKP"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Profits {
    /// Symmetric `n x n` matrix; diagonal entries are the linear profits.
    Matrix(Vec<Vec<u64>>),
    Vector(Vec<u64>),
}

/// How strictly [`KnapsackInstance::new`] enforces the normalization
/// `max_m w_im <= c_i < sum_m w_im`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    /// Both bounds are enforced. File parsers always use this.
    #[default]
    Strict,
    /// Only `max_m w_im <= c_i`; capacities may hold every item at once.
    AllowSlackCapacity,
}

/// An immutable, validated knapsack instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackInstance {
    name: String,
    kind: ProblemKind,
    weights: Vec<Vec<u64>>,
    capacities: Vec<u64>,
    profits: Profits,
}

impl KnapsackInstance {
    pub fn new(
        name: impl Into<String>,
        weights: Vec<Vec<u64>>,
        capacities: Vec<u64>,
        profits: Profits,
        validation: Validation,
    ) -> Result<Self, InvalidInstance> {
        let kind = match profits {
            Profits::Matrix(_) => ProblemKind::Qkp,
            Profits::Vector(_) => ProblemKind::Mdkp,
        };
        let instance = KnapsackInstance { name: name.into(), kind, weights, capacities, profits };
        instance.validate(validation)?;
        Ok(instance)
    }

    /// Strictly validated quadratic instance with a single capacity.
    pub fn qkp(
        name: impl Into<String>,
        weights: Vec<u64>,
        capacity: u64,
        profit_matrix: Vec<Vec<u64>>,
    ) -> Result<Self, InvalidInstance> {
        Self::new(name, vec![weights], vec![capacity], Profits::Matrix(profit_matrix), Validation::Strict)
    }

    /// Strictly validated multidimensional instance.
    pub fn mdkp(
        name: impl Into<String>,
        weights: Vec<Vec<u64>>,
        capacities: Vec<u64>,
        profits: Vec<u64>,
    ) -> Result<Self, InvalidInstance> {
        Self::new(name, weights, capacities, Profits::Vector(profits), Validation::Strict)
    }

    fn validate(&self, validation: Validation) -> Result<(), InvalidInstance> {
        let d = self.capacities.len();
        if d == 0 || self.weights.is_empty() {
            return Err(InvalidInstance::NoDimensions);
        }
        let n = self.weights[0].len();
        if n == 0 {
            return Err(InvalidInstance::NoItems);
        }
        if self.weights.len() != d {
            return Err(InvalidInstance::WeightRowLength { dim: self.weights.len(), expected: d, found: 0 });
        }
        if self.kind == ProblemKind::Qkp && d != 1 {
            return Err(InvalidInstance::QuadraticDimensions(d));
        }
        for (dim, (row, &capacity)) in self.weights.iter().zip(&self.capacities).enumerate() {
            if row.len() != n {
                return Err(InvalidInstance::WeightRowLength { dim, expected: n, found: row.len() });
            }
            if capacity == 0 {
                return Err(InvalidInstance::ZeroCapacity { dim });
            }
            if capacity > i64::MAX as u64 {
                return Err(InvalidInstance::Overflow("storing a capacity"));
            }
            let mut total: u64 = 0;
            for (item, &weight) in row.iter().enumerate() {
                if weight > capacity {
                    return Err(InvalidInstance::WeightExceedsCapacity { dim, item, weight, capacity });
                }
                total = total
                    .checked_add(weight)
                    .filter(|t| *t <= i64::MAX as u64)
                    .ok_or(InvalidInstance::Overflow("summing weights"))?;
            }
            if validation == Validation::Strict && capacity >= total {
                return Err(InvalidInstance::CapacityNotBinding { dim, capacity, total });
            }
        }
        match &self.profits {
            Profits::Matrix(matrix) => {
                if matrix.len() != n {
                    return Err(InvalidInstance::ProfitLength { expected: n, found: matrix.len() });
                }
                for row in matrix {
                    if row.len() != n {
                        return Err(InvalidInstance::ProfitLength { expected: n, found: row.len() });
                    }
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        if matrix[i][j] != matrix[j][i] {
                            return Err(InvalidInstance::AsymmetricProfit {
                                row: i,
                                col: j,
                                upper: matrix[i][j],
                                lower: matrix[j][i],
                            });
                        }
                    }
                }
            }
            Profits::Vector(profits) => {
                if profits.len() != n {
                    return Err(InvalidInstance::ProfitLength { expected: n, found: profits.len() });
                }
            }
        }
        // Every downstream profit sum is bounded by the full-sum bound.
        self.profit_sum().ok_or(InvalidInstance::Overflow("summing profits"))?;
        Ok(())
    }

    fn profit_sum(&self) -> Option<u64> {
        match &self.profits {
            Profits::Matrix(m) => m.iter().flatten().try_fold(0u64, |acc, &p| acc.checked_add(p)),
            Profits::Vector(v) => v.iter().try_fold(0u64, |acc, &p| acc.checked_add(p)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// Number of items.
    pub fn n(&self) -> usize {
        self.weights[0].len()
    }

    /// Number of constraint dimensions.
    pub fn d(&self) -> usize {
        self.capacities.len()
    }

    /// Weight matrix, one row per dimension.
    pub fn weights(&self) -> &[Vec<u64>] {
        &self.weights
    }

    pub fn weight(&self, dim: usize, item: usize) -> u64 {
        self.weights[dim][item]
    }

    pub fn capacities(&self) -> &[u64] {
        &self.capacities
    }

    pub fn profits(&self) -> &Profits {
        &self.profits
    }

    /// Linear profit of an item (the diagonal entry for quadratic instances).
    pub fn linear_profit(&self, item: usize) -> u64 {
        match &self.profits {
            Profits::Matrix(m) => m[item][item],
            Profits::Vector(v) => v[item],
        }
    }

    /// Off-diagonal profit `p_{m m'}`; always zero for multidimensional
    /// instances and on the diagonal.
    pub fn pair_profit(&self, m: usize, other: usize) -> u64 {
        match &self.profits {
            Profits::Matrix(matrix) if m != other => matrix[m][other],
            _ => 0,
        }
    }

    /// Number of unordered item pairs with a nonzero quadratic profit.
    pub fn nonzero_pairs(&self) -> usize {
        match &self.profits {
            Profits::Matrix(m) => {
                (0..self.n()).map(|i| (0..i).filter(|&j| m[i][j] > 0).count()).sum()
            }
            Profits::Vector(_) => 0,
        }
    }

    /// Same instance with items relabeled: item `k` of the result is item
    /// `perm[k]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::input("not a permutation of the item labels"));
        }
        let weights = self.weights.iter().map(|row| perm.iter().map(|&k| row[k]).collect()).collect();
        let profits = match &self.profits {
            Profits::Matrix(m) => {
                Profits::Matrix(perm.iter().map(|&a| perm.iter().map(|&b| m[a][b]).collect()).collect())
            }
            Profits::Vector(v) => Profits::Vector(perm.iter().map(|&k| v[k]).collect()),
        };
        Ok(KnapsackInstance {
            name: self.name.clone(),
            kind: self.kind,
            weights,
            capacities: self.capacities.clone(),
            profits,
        })
    }

    fn check_len(&self, bits: &Bits) -> Result<()> {
        if bits.len() != self.n() {
            return Err(Error::input(format!(
                "bit-string has length {}, instance has {} items",
                bits.len(),
                self.n()
            )));
        }
        Ok(())
    }
}

/// Objective value of an assignment. For quadratic instances both ordered
/// off-diagonal pairs contribute.
pub fn evaluate_profit(instance: &KnapsackInstance, bits: &Bits) -> Result<u64> {
    instance.check_len(bits)?;
    Ok(profit_unchecked(instance, bits))
}

pub(crate) fn profit_unchecked(instance: &KnapsackInstance, bits: &Bits) -> u64 {
    let selected: Vec<usize> = bits.ones().collect();
    match instance.profits() {
        Profits::Vector(v) => selected.iter().map(|&m| v[m]).sum(),
        Profits::Matrix(matrix) => {
            let mut total = 0;
            for &a in &selected {
                for &b in &selected {
                    total += matrix[a][b];
                }
            }
            total
        }
    }
}

/// Feasibility plus the per-dimension residuals `c_i - sum_m w_im x_m`,
/// which are returned whether or not the assignment is feasible.
pub fn check_feasible(instance: &KnapsackInstance, bits: &Bits) -> Result<(bool, Vec<i64>)> {
    instance.check_len(bits)?;
    let residuals = residuals_unchecked(instance, bits);
    Ok((residuals.iter().all(|&r| r >= 0), residuals))
}

fn residuals_unchecked(instance: &KnapsackInstance, bits: &Bits) -> Vec<i64> {
    instance
        .weights()
        .iter()
        .zip(instance.capacities())
        .map(|(row, &c)| c as i64 - bits.ones().map(|m| row[m] as i64).sum::<i64>())
        .collect()
}

/// An upper bound `P` on the optimal profit; sizes the profit register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProfitBound(u64);

impl ProfitBound {
    pub fn new(value: u64) -> Self {
        ProfitBound(value.max(1))
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

pub trait BoundStrategy {
    fn bound(&self, instance: &KnapsackInstance) -> ProfitBound;
}

/// Sum of every profit entry. Always valid since profits are nonnegative.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullSumBound;

impl BoundStrategy for FullSumBound {
    fn bound(&self, instance: &KnapsackInstance) -> ProfitBound {
        // Overflow is excluded by validation.
        ProfitBound::new(instance.profit_sum().unwrap_or(u64::MAX))
    }
}

pub fn profit_upper_bound(instance: &KnapsackInstance) -> ProfitBound {
    FullSumBound.bound(instance)
}

/// An assignment of all `n` items, indexed by the instance's item labels.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn zeros(n: usize) -> Self {
        Bits(vec![false; n])
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    /// Bit `m` of the result is bit `m` of `mask` (item 0 is the least
    /// significant bit).
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Bits((0..n).map(|m| mask >> m & 1 == 1).collect())
    }

    /// Packs into a mask; `None` for more than 64 items.
    pub fn to_mask(&self) -> Option<u64> {
        (self.0.len() <= 64)
            .then(|| self.0.iter().enumerate().fold(0u64, |acc, (m, &b)| acc | (b as u64) << m))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, m: usize) -> bool {
        self.0[m]
    }

    pub fn set(&mut self, m: usize, value: bool) {
        self.0[m] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// Indices of selected items.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(m, _)| m)
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn hamming(&self, other: &Bits) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

impl FromStr for Bits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::input(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

/// An evaluated assignment: bits with their objective value and residual
/// capacities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub bits: Bits,
    pub profit: u64,
    pub residuals: Vec<i64>,
}

impl Path {
    pub fn evaluate(instance: &KnapsackInstance, bits: Bits) -> Result<Self> {
        instance.check_len(&bits)?;
        let profit = profit_unchecked(instance, &bits);
        let residuals = residuals_unchecked(instance, &bits);
        Ok(Path { bits, profit, residuals })
    }

    pub fn empty(instance: &KnapsackInstance) -> Self {
        Path {
            bits: Bits::zeros(instance.n()),
            profit: 0,
            residuals: instance.capacities().iter().map(|&c| c as i64).collect(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.residuals.iter().all(|&r| r >= 0)
    }
}
