//! Measurement statistics of the tree-generator state.
//!
//! The prepared state is a product of branchings: item by item (in the
//! model's item order) the item is forced out if it exceeds a residual
//! capacity, otherwise it is kept equal to the incumbent's bit with
//! probability `(1 + b) / (2 + b)` and flipped with probability
//! `1 / (2 + b)`. Measuring the path register therefore samples feasible
//! assignments from that branching distribution, and the probability of an
//! assignment is the product of its branch probabilities.

use rand::Rng;
use rayon::prelude::*;

use crate::baseline::item_order;
use crate::error::{Error, Result};
use crate::instance::{Bits, KnapsackInstance, Path};
use crate::rng::StreamKey;
use crate::tree::{for_each_leaf, Leaf, MAX_MASK_ITEMS};

/// Squared amplitudes of the biased rotation applied to `|0>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchProbabilities {
    pub zero: f64,
    pub one: f64,
}

impl BranchProbabilities {
    pub fn of(self, bit: bool) -> f64 {
        if bit {
            self.one
        } else {
            self.zero
        }
    }
}

/// Exclusion/inclusion probabilities of one unforced branching, biased
/// toward `incumbent_bit`. `bias == 0` is the unbiased (Hadamard) split.
pub fn branch_probability(incumbent_bit: bool, bias: f64) -> Result<BranchProbabilities> {
    let (keep, flip) = keep_flip(bias)?;
    Ok(if incumbent_bit {
        BranchProbabilities { zero: flip, one: keep }
    } else {
        BranchProbabilities { zero: keep, one: flip }
    })
}

fn keep_flip(bias: f64) -> Result<(f64, f64)> {
    if !(bias >= 0.0) || bias.is_infinite() {
        return Err(Error::input(format!("bias must be a finite nonnegative number, got {bias}")));
    }
    let flip = 1.0 / (2.0 + bias);
    Ok((1.0 - flip, flip))
}

/// Bias aimed at assignments `delta` flips away from the incumbent:
/// `n / delta`.
pub fn bias_for_distance(n: usize, delta: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::input("n must be positive"));
    }
    if delta == 0 {
        return Err(Error::input("distance 0 is the incumbent itself; use the follow-incumbent bias"));
    }
    Ok(n as f64 / delta as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bias {
    Finite(f64),
    /// The infinite-bias limit: every unforced branch copies the incumbent.
    FollowIncumbent,
}

/// The branching distribution induced by an incumbent, a bias and an item
/// order.
#[derive(Debug, Clone)]
pub struct QtgModel<'a> {
    instance: &'a KnapsackInstance,
    incumbent: Bits,
    bias: Bias,
    order: Vec<usize>,
    keep: f64,
    flip: f64,
}

impl<'a> QtgModel<'a> {
    /// Model over the default (greedy density) item order.
    pub fn new(instance: &'a KnapsackInstance, incumbent: Bits, bias: Bias) -> Result<Self> {
        Self::with_order(instance, incumbent, bias, item_order(instance))
    }

    pub fn with_order(instance: &'a KnapsackInstance, incumbent: Bits, bias: Bias, order: Vec<usize>) -> Result<Self> {
        let n = instance.n();
        let incumbent_path = Path::evaluate(instance, incumbent)?;
        if !incumbent_path.is_feasible() {
            return Err(Error::input(format!("incumbent {} is infeasible", incumbent_path.bits)));
        }
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&m| m >= n || std::mem::replace(&mut seen[m], true)) {
            return Err(Error::input("item order is not a permutation"));
        }
        let (keep, flip) = match bias {
            Bias::Finite(b) => keep_flip(b)?,
            Bias::FollowIncumbent => (1.0, 0.0),
        };
        Ok(QtgModel { instance, incumbent: incumbent_path.bits, bias, order, keep, flip })
    }

    pub fn instance(&self) -> &'a KnapsackInstance {
        self.instance
    }

    pub fn incumbent(&self) -> &Bits {
        &self.incumbent
    }

    pub fn bias(&self) -> Bias {
        self.bias
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    fn fits(&self, item: usize, residuals: &[i64]) -> bool {
        (0..self.instance.d()).all(|i| self.instance.weight(i, item) as i64 <= residuals[i])
    }

    /// Draws one measurement outcome.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Path {
        let mut scratch = SampleScratch::new(self.instance);
        let profit = self.sample_into(rng, &mut scratch);
        Path { bits: Bits::from_bools(scratch.bits), profit, residuals: scratch.residuals }
    }

    /// Allocation-free draw into `scratch`; returns the profit.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut SampleScratch) -> u64 {
        let inst = self.instance;
        scratch.reset(inst);
        let mut profit = 0;
        for &item in &self.order {
            if !self.fits(item, &scratch.residuals) {
                continue;
            }
            let preferred = self.incumbent.get(item);
            let take = match self.bias {
                Bias::FollowIncumbent => preferred,
                Bias::Finite(_) => preferred ^ (rng.gen::<f64>() < self.flip),
            };
            if take {
                profit += inst.linear_profit(item)
                    + 2 * scratch.selected.iter().map(|&other| inst.pair_profit(item, other)).sum::<u64>();
                for (i, r) in scratch.residuals.iter_mut().enumerate() {
                    *r -= inst.weight(i, item) as i64;
                }
                scratch.selected.push(item);
                scratch.bits[item] = true;
            }
        }
        profit
    }

    /// Number of unforced branches along `bits` that agree with / differ
    /// from the incumbent, or `None` when `bits` selects a forced-out item.
    fn branch_counts(&self, bits: &Bits) -> Option<(i32, i32)> {
        let mut residuals: Vec<i64> = self.instance.capacities().iter().map(|&c| c as i64).collect();
        let (mut agree, mut differ) = (0, 0);
        for &item in &self.order {
            let bit = bits.get(item);
            if !self.fits(item, &residuals) {
                if bit {
                    return None;
                }
                continue;
            }
            if bit == self.incumbent.get(item) {
                agree += 1;
            } else {
                differ += 1;
            }
            if bit {
                for (i, r) in residuals.iter_mut().enumerate() {
                    *r -= self.instance.weight(i, item) as i64;
                }
            }
        }
        Some((agree, differ))
    }

    /// Exact probability of measuring `bits`; zero for infeasible bits.
    pub fn path_probability(&self, bits: &Bits) -> Result<f64> {
        if bits.len() != self.instance.n() {
            return Err(Error::input(format!(
                "bit-string has length {}, instance has {} items",
                bits.len(),
                self.instance.n()
            )));
        }
        let Some((agree, differ)) = self.branch_counts(bits) else {
            return Ok(0.0);
        };
        if self.instance.n() > MAX_MASK_ITEMS {
            return Ok(self.log_probability(agree, differ).exp());
        }
        Ok(self.product(agree, differ))
    }

    /// Natural log of [`Self::path_probability`]; `-inf` for zero.
    pub fn log_path_probability(&self, bits: &Bits) -> Result<f64> {
        self.path_probability(bits)?;
        Ok(self.branch_counts(bits).map_or(f64::NEG_INFINITY, |(a, f)| self.log_probability(a, f)))
    }

    fn product(&self, agree: i32, differ: i32) -> f64 {
        if differ > 0 && self.flip == 0.0 {
            return 0.0;
        }
        self.keep.powi(agree) * self.flip.powi(differ)
    }

    fn log_probability(&self, agree: i32, differ: i32) -> f64 {
        if differ > 0 && self.flip == 0.0 {
            return f64::NEG_INFINITY;
        }
        agree as f64 * self.keep.ln() + if differ > 0 { differ as f64 * self.flip.ln() } else { 0.0 }
    }

    fn leaf_probability(&self, leaf: &Leaf, incumbent_mask: u64) -> f64 {
        let differ = (leaf.free & (leaf.mask ^ incumbent_mask)).count_ones() as i32;
        let agree = leaf.free.count_ones() as i32 - differ;
        self.product(agree, differ)
    }

    /// Probability mass strictly above `threshold`, exactly or by sampling.
    pub fn success_mass(&self, threshold: i64, mode: MassMode) -> Result<MassEstimate> {
        match mode {
            MassMode::Exact { limit } => {
                let set = FeasibleSet::enumerate(self.instance, &self.order, limit)?;
                Ok(MassEstimate { p: ExactDistribution::new(&set, self)?.mass_above(threshold), std_error: None })
            }
            MassMode::MonteCarlo { samples, key } => Ok(self.monte_carlo_mass(threshold, samples, key)),
        }
    }

    fn monte_carlo_mass(&self, threshold: i64, samples: u64, key: StreamKey) -> MassEstimate {
        const CHUNK: u64 = 4096;
        let chunks = samples.div_ceil(CHUNK);
        let hits: u64 = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut scratch = SampleScratch::new(self.instance);
                let end = ((c + 1) * CHUNK).min(samples);
                (c * CHUNK..end)
                    .filter(|&i| {
                        let mut rng = key.rng(i);
                        self.sample_into(&mut rng, &mut scratch) as i128 > threshold as i128
                    })
                    .count() as u64
            })
            .sum();
        if samples == 0 {
            return MassEstimate { p: 0.0, std_error: Some(0.0) };
        }
        let p = hits as f64 / samples as f64;
        MassEstimate { p, std_error: Some((p * (1.0 - p) / samples as f64).sqrt()) }
    }
}

/// Reusable buffers for [`QtgModel::sample_into`].
#[derive(Debug, Clone)]
pub struct SampleScratch {
    pub bits: Vec<bool>,
    pub residuals: Vec<i64>,
    selected: Vec<usize>,
}

impl SampleScratch {
    pub fn new(instance: &KnapsackInstance) -> Self {
        SampleScratch {
            bits: vec![false; instance.n()],
            residuals: Vec::with_capacity(instance.d()),
            selected: Vec::with_capacity(instance.n()),
        }
    }

    fn reset(&mut self, instance: &KnapsackInstance) {
        self.bits.clear();
        self.bits.resize(instance.n(), false);
        self.residuals.clear();
        self.residuals.extend(instance.capacities().iter().map(|&c| c as i64));
        self.selected.clear();
    }

    /// Packs the last draw into a mask (item 0 in the lowest bit).
    pub fn mask(&self) -> u64 {
        self.bits.iter().enumerate().fold(0, |acc, (m, &b)| acc | (b as u64) << m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassMode {
    /// Exhaustive enumeration, refused above `limit` items.
    Exact { limit: usize },
    MonteCarlo { samples: u64, key: StreamKey },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassEstimate {
    pub p: f64,
    /// Binomial standard error `sqrt(p(1-p)/samples)` for sampled estimates.
    pub std_error: Option<f64>,
}

/// All feasible assignments of an instance under a fixed item order,
/// sorted by descending profit. Independent of incumbent and bias, so one
/// enumeration serves every model built over the same order.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    n: usize,
    order: Vec<usize>,
    leaves: Vec<Leaf>,
}

impl FeasibleSet {
    pub fn enumerate(instance: &KnapsackInstance, order: &[usize], limit: usize) -> Result<Self> {
        let n = instance.n();
        if n > limit || n > MAX_MASK_ITEMS {
            return Err(Error::TooLarge { n, limit: limit.min(MAX_MASK_ITEMS) });
        }
        let mut leaves = Vec::new();
        for_each_leaf(instance, order, &mut |leaf| leaves.push(*leaf));
        leaves.sort_by(|a, b| b.profit.cmp(&a.profit).then(a.mask.cmp(&b.mask)));
        Ok(FeasibleSet { n, order: order.to_vec(), leaves })
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Largest profit over all feasible assignments.
    pub fn max_profit(&self) -> u64 {
        self.leaves[0].profit
    }

    /// `(mask, profit)` of every feasible assignment, best first.
    pub fn assignments(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.leaves.iter().map(|l| (l.mask, l.profit))
    }
}

/// A model's exact measurement distribution over a [`FeasibleSet`].
#[derive(Debug, Clone)]
pub struct ExactDistribution<'s> {
    set: &'s FeasibleSet,
    /// `cumulative[k]` is the mass of the `k` most profitable assignments.
    cumulative: Vec<f64>,
}

impl<'s> ExactDistribution<'s> {
    pub fn new(set: &'s FeasibleSet, model: &QtgModel<'_>) -> Result<Self> {
        if set.order != model.order || set.n != model.instance.n() {
            return Err(Error::input("feasible set was enumerated for a different item order"));
        }
        let incumbent = model.incumbent.to_mask().expect("enumerated instances fit a mask");
        let mut cumulative = Vec::with_capacity(set.leaves.len() + 1);
        let mut acc = 0.0;
        cumulative.push(acc);
        for leaf in &set.leaves {
            acc += model.leaf_probability(leaf, incumbent);
            cumulative.push(acc);
        }
        Ok(ExactDistribution { set, cumulative })
    }

    fn count_above(&self, threshold: i64) -> usize {
        self.set.leaves.partition_point(|l| l.profit as i128 > threshold as i128)
    }

    /// Total probability (1 up to rounding).
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn mass_above(&self, threshold: i64) -> f64 {
        self.cumulative[self.count_above(threshold)]
    }

    /// Probability of each assignment, in the set's order.
    pub fn probabilities(&self) -> impl Iterator<Item = (u64, u64, f64)> + '_ {
        self.set.leaves.iter().zip(self.cumulative.windows(2)).map(|(l, w)| (l.mask, l.profit, w[1] - w[0]))
    }

    /// Draws from the distribution conditioned on profit above `threshold`;
    /// `None` if that event has zero mass.
    pub fn sample_above<R: Rng + ?Sized>(&self, threshold: i64, rng: &mut R) -> Option<(u64, u64)> {
        let count = self.count_above(threshold);
        let mass = self.cumulative[count];
        if count == 0 || mass <= 0.0 {
            return None;
        }
        let u = rng.gen::<f64>() * mass;
        let k = self.cumulative[1..=count].partition_point(|&c| c <= u).min(count - 1);
        // skip zero-probability leaves that share a cumulative value
        let k = (k..count).find(|&k| self.cumulative[k + 1] > self.cumulative[k]).unwrap_or(k);
        let leaf = &self.set.leaves[k];
        Some((leaf.mask, leaf.profit))
    }
}
