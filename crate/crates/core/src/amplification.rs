//! Emulated amplitude amplification over the tree-generator state.
//!
//! A search round targets the assignments with profit strictly above a
//! threshold. With `p` the prepared-state mass of that set and
//! `sin^2(theta) = p`, measuring after `j` Grover iterations succeeds with
//! probability `sin^2((2j + 1) theta)`; on success the outcome follows the
//! prepared distribution conditioned on the target set. Iteration counts
//! follow the exponentially growing random schedule for an unknown `p`, and
//! maximum finding repeats rounds with the threshold raised to each new
//! incumbent.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::baseline::{greedy_incumbent, item_order};
use crate::error::{Error, Result};
use crate::instance::{Bits, KnapsackInstance, Path};
use crate::resources::{CostModel, ResourceEstimate};
use crate::rng::{derive_seed, StreamKey};
use crate::sampler::{bias_for_distance, Bias, ExactDistribution, FeasibleSet, MassMode, QtgModel, SampleScratch};
use crate::trace::{SearchTrace, Timestamp, TraceEntry, TraceSource};

/// `sin^2((2j + 1) asin(sqrt(p)))`; exactly `p` for `j == 0`.
pub fn grover_success_probability(p: f64, j: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("success mass must lie in [0, 1], got {p}")));
    }
    if j == 0 {
        return Ok(p);
    }
    let theta = p.sqrt().asin();
    Ok(((2 * j + 1) as f64 * theta).sin().powi(2).clamp(0.0, 1.0))
}

/// Wall-clock seconds for a cycle count at the given cycle time.
pub fn cycles_to_runtime(cycles: u64, cycle_time_ns: f64) -> Result<f64> {
    if !(cycle_time_ns >= 0.0) || cycle_time_ns.is_infinite() {
        return Err(Error::input(format!("cycle time must be a finite nonnegative number, got {cycle_time_ns}")));
    }
    Ok(cycles as f64 * cycle_time_ns * 1e-9)
}

/// How the bias is chosen for each round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasPolicy {
    Fixed(f64),
    /// `b = n / delta`, aiming at assignments `delta` flips from the
    /// incumbent.
    Distance(usize),
    FollowIncumbent,
}

impl BiasPolicy {
    pub fn bias(self, n: usize) -> Result<Bias> {
        Ok(match self {
            BiasPolicy::Fixed(b) => Bias::Finite(b),
            BiasPolicy::Distance(delta) => Bias::Finite(bias_for_distance(n, delta)?),
            BiasPolicy::FollowIncumbent => Bias::FollowIncumbent,
        })
    }
}

impl Default for BiasPolicy {
    fn default() -> Self {
        BiasPolicy::Distance(4)
    }
}

/// Cycle charges of one search attempt: `preparation + j * iteration +
/// measurement`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleCosts {
    pub preparation: u64,
    pub iteration: u64,
    pub measurement: u64,
}

impl CycleCosts {
    pub fn from_estimate(estimate: &ResourceEstimate, model: &CostModel) -> Self {
        CycleCosts {
            preparation: estimate.qtg_depth_cycles,
            iteration: estimate.grover_iteration_cycles,
            measurement: model.measurement_cycles,
        }
    }

    pub fn attempt(&self, iterations: u64) -> u64 {
        self.preparation + iterations * self.iteration + self.measurement
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationConfig {
    /// Grover iterations allowed per search round; `None` means `n^2`.
    pub max_grover_iterations: Option<u64>,
    /// Optional cap on the iterations of a whole maximum-finding run.
    pub global_iteration_cap: Option<u64>,
    /// Growth factor of the iteration bound after a failed attempt.
    pub growth: f64,
    pub seed: u64,
    pub bias_policy: BiasPolicy,
    /// Rebuild the bias around each new incumbent (otherwise the greedy
    /// incumbent stays the bias center while the threshold rises).
    pub recenter_on_improvement: bool,
    pub costs: CycleCosts,
    /// Largest `n` for which success masses are computed exactly.
    pub exact_limit: usize,
    /// Draws per Monte-Carlo success-mass estimate above `exact_limit`.
    pub monte_carlo_samples: u64,
}

impl Default for AmplificationConfig {
    fn default() -> Self {
        AmplificationConfig {
            max_grover_iterations: None,
            global_iteration_cap: None,
            growth: 6.0 / 5.0,
            seed: 0,
            bias_policy: BiasPolicy::default(),
            recenter_on_improvement: true,
            costs: CycleCosts { preparation: 1, iteration: 1, measurement: 1 },
            exact_limit: 20,
            monte_carlo_samples: 100_000,
        }
    }
}

impl AmplificationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_grover_iterations == Some(0) {
            return Err(Error::input("max Grover iterations must be at least 1"));
        }
        if !(self.growth > 1.0) || self.growth.is_infinite() {
            return Err(Error::input(format!("growth factor must exceed 1, got {}", self.growth)));
        }
        if self.costs.preparation + self.costs.measurement == 0 {
            return Err(Error::input("an attempt must cost at least one cycle"));
        }
        if let BiasPolicy::Fixed(b) = self.bias_policy {
            if !(b >= 0.0) || b.is_infinite() {
                return Err(Error::input(format!("bias must be a finite nonnegative number, got {b}")));
            }
        }
        Ok(())
    }

    /// Per-round iteration budget `M` for an instance of `n` items.
    pub fn iteration_budget(&self, n: usize) -> u64 {
        self.max_grover_iterations.unwrap_or((n as u64).saturating_mul(n as u64)).max(1)
    }
}

/// Success mass and conditional sampler for one threshold.
enum Target<'a> {
    Exact { instance: &'a KnapsackInstance, dist: ExactDistribution<'a>, p: f64 },
    Sampled { model: &'a QtgModel<'a>, p: f64 },
}

impl Target<'_> {
    fn mass(&self) -> f64 {
        match self {
            Target::Exact { p, .. } | Target::Sampled { p, .. } => *p,
        }
    }

    fn n(&self) -> usize {
        match self {
            Target::Exact { instance, .. } => instance.n(),
            Target::Sampled { model, .. } => model.instance().n(),
        }
    }

    fn draw<R: Rng>(&self, threshold: i64, rng: &mut R) -> Option<Path> {
        match self {
            Target::Exact { instance, dist, .. } => {
                let (mask, _) = dist.sample_above(threshold, rng)?;
                Some(Path::evaluate(instance, Bits::from_mask(mask, instance.n())).expect("mask fits the instance"))
            }
            Target::Sampled { model, p } => {
                // rejection sampling, bounded relative to the estimated mass
                let cap = ((100.0 / p.max(1e-12)) as u64).clamp(10_000, 100_000_000);
                let mut scratch = SampleScratch::new(model.instance());
                for _ in 0..cap {
                    let profit = model.sample_into(rng, &mut scratch);
                    if profit as i128 > threshold as i128 {
                        return Some(
                            Path::evaluate(model.instance(), Bits::from_bools(scratch.bits.clone()))
                                .expect("sampled bits have the instance length"),
                        );
                    }
                }
                log::warn!("rejection sampling above {threshold} gave up after {cap} draws");
                None
            }
        }
    }
}

/// Outcome of one amplitude-amplification round.
#[derive(Debug, Clone, PartialEq)]
pub struct QSearchOutcome {
    /// An assignment with profit above the threshold, or `None` when the
    /// iteration budget ran out.
    pub found: Option<Path>,
    pub iterations: u64,
    pub cycles: u64,
    pub attempts: u64,
    pub success_mass: f64,
}

/// One emulated amplitude-amplification round above `threshold`, spending at
/// most `budget` Grover iterations. Random decisions are drawn from `key`.
pub fn qsearch(
    model: &QtgModel<'_>,
    threshold: i64,
    config: &AmplificationConfig,
    budget: u64,
    key: StreamKey,
) -> Result<QSearchOutcome> {
    config.validate()?;
    let instance = model.instance();
    if instance.n() <= config.exact_limit {
        let set = FeasibleSet::enumerate(instance, model.order(), config.exact_limit)?;
        search_exact(&set, model, threshold, config, budget, key)
    } else {
        search_sampled(model, threshold, config, budget, key)
    }
}

fn search_exact(
    set: &FeasibleSet,
    model: &QtgModel<'_>,
    threshold: i64,
    config: &AmplificationConfig,
    budget: u64,
    key: StreamKey,
) -> Result<QSearchOutcome> {
    let dist = ExactDistribution::new(set, model)?;
    let p = dist.mass_above(threshold).clamp(0.0, 1.0);
    Ok(run_schedule(&Target::Exact { instance: model.instance(), dist, p }, threshold, config, budget, key))
}

fn search_sampled(
    model: &QtgModel<'_>,
    threshold: i64,
    config: &AmplificationConfig,
    budget: u64,
    key: StreamKey,
) -> Result<QSearchOutcome> {
    let mass_key = StreamKey::new(derive_seed(key.seed, "success-mass"), key.stream);
    let p = model
        .success_mass(threshold, MassMode::MonteCarlo { samples: config.monte_carlo_samples, key: mass_key })?
        .p;
    Ok(run_schedule(&Target::Sampled { model, p }, threshold, config, budget, key))
}

fn run_schedule(target: &Target<'_>, threshold: i64, config: &AmplificationConfig, budget: u64, key: StreamKey) -> QSearchOutcome {
    let p = target.mass();
    let bound_cap = 2f64.powf(target.n() as f64 / 2.0);
    let mut bound = 1.0f64;
    let mut remaining = budget;
    let mut outcome = QSearchOutcome { found: None, iterations: 0, cycles: 0, attempts: 0, success_mass: p };
    loop {
        let mut rng = key.rng(outcome.attempts);
        outcome.attempts += 1;
        let upper = (bound.ceil() as u64).max(1);
        let j = rng.gen_range(0..upper).min(remaining);
        outcome.iterations += j;
        remaining -= j;
        outcome.cycles += config.costs.attempt(j);
        let success = grover_success_probability(p, j).expect("mass lies in [0, 1]");
        if rng.gen::<f64>() < success {
            if let Some(path) = target.draw(threshold, &mut rng) {
                outcome.found = Some(path);
                return outcome;
            }
        }
        if remaining == 0 {
            return outcome;
        }
        bound = (bound * config.growth).min(bound_cap);
    }
}

/// Summary of one search round of a maximum-finding run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub threshold: u64,
    pub bias: Option<f64>,
    pub success_mass: f64,
    pub iterations: u64,
    pub attempts: u64,
    pub cycles: u64,
    /// Bits of the improving assignment, if the round found one.
    pub found: Option<String>,
    pub found_profit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumRunRecord {
    pub instance: String,
    pub seed: u64,
    pub max_grover_iterations: u64,
    pub greedy_profit: u64,
    pub final_profit: u64,
    pub final_bits: String,
    pub total_iterations: u64,
    pub total_cycles: u64,
    /// True when the run stopped on the global iteration cap rather than
    /// on an exhausted round.
    pub hit_global_cap: bool,
    pub rounds: Vec<RoundRecord>,
}

/// Maximum finding by repeated amplitude amplification, starting from the
/// greedy incumbent. Holds the enumerated feasible set (when `n` is small
/// enough) so repeated runs on one instance share it.
pub struct QMaxSearch<'a> {
    instance: &'a KnapsackInstance,
    config: AmplificationConfig,
    order: Vec<usize>,
    set: Option<Arc<FeasibleSet>>,
    greedy: Path,
}

impl<'a> QMaxSearch<'a> {
    pub fn new(instance: &'a KnapsackInstance, config: AmplificationConfig) -> Result<Self> {
        config.validate()?;
        let order = item_order(instance);
        let set = if instance.n() <= config.exact_limit {
            Some(Arc::new(FeasibleSet::enumerate(instance, &order, config.exact_limit)?))
        } else {
            None
        };
        Ok(QMaxSearch { instance, greedy: greedy_incumbent(instance), config, order, set })
    }

    pub fn config(&self) -> &AmplificationConfig {
        &self.config
    }

    pub fn greedy(&self) -> &Path {
        &self.greedy
    }

    /// Runs once with the given seed; the configured seed is ignored.
    pub fn run(&self, seed: u64) -> Result<(SearchTrace, QuantumRunRecord)> {
        let instance = self.instance;
        let n = instance.n();
        let budget = self.config.iteration_budget(n);
        let bias = self.config.bias_policy.bias(n)?;
        let mut trace = SearchTrace::new(instance.name(), TraceSource::QuantumEmulated);
        trace.push(TraceEntry {
            timestamp: Timestamp::Cycles(0),
            profit: self.greedy.profit,
            bits: Some(self.greedy.bits.clone()),
            bound: None,
        })?;
        let mut record = QuantumRunRecord {
            instance: instance.name().to_string(),
            seed,
            max_grover_iterations: budget,
            greedy_profit: self.greedy.profit,
            final_profit: self.greedy.profit,
            final_bits: self.greedy.bits.to_string(),
            total_iterations: 0,
            total_cycles: 0,
            hit_global_cap: false,
            rounds: Vec::new(),
        };
        let mut incumbent = self.greedy.clone();
        let mut center = self.greedy.bits.clone();
        for round in 0u64.. {
            let round_budget = match self.config.global_iteration_cap {
                Some(cap) => {
                    let left = cap.saturating_sub(record.total_iterations);
                    if left == 0 {
                        record.hit_global_cap = true;
                        break;
                    }
                    budget.min(left)
                }
                None => budget,
            };
            let model = QtgModel::with_order(instance, center.clone(), bias, self.order.clone())?;
            let threshold = i64::try_from(incumbent.profit).map_err(|_| Error::input("profit exceeds i64"))?;
            let key = StreamKey::new(seed, round);
            let outcome = match &self.set {
                Some(set) => search_exact(set, &model, threshold, &self.config, round_budget, key)?,
                None => search_sampled(&model, threshold, &self.config, round_budget, key)?,
            };
            record.total_iterations += outcome.iterations;
            record.total_cycles += outcome.cycles;
            record.rounds.push(RoundRecord {
                threshold: incumbent.profit,
                bias: match bias {
                    Bias::Finite(b) => Some(b),
                    Bias::FollowIncumbent => None,
                },
                success_mass: outcome.success_mass,
                iterations: outcome.iterations,
                attempts: outcome.attempts,
                cycles: outcome.cycles,
                found: outcome.found.as_ref().map(|p| p.bits.to_string()),
                found_profit: outcome.found.as_ref().map(|p| p.profit),
            });
            let Some(found) = outcome.found else { break };
            trace.push(TraceEntry {
                timestamp: Timestamp::Cycles(record.total_cycles),
                profit: found.profit,
                bits: Some(found.bits.clone()),
                bound: None,
            })?;
            if self.config.recenter_on_improvement {
                center = found.bits.clone();
            }
            incumbent = found;
        }
        record.final_profit = incumbent.profit;
        record.final_bits = incumbent.bits.to_string();
        Ok((trace, record))
    }
}

/// One maximum-finding run with the configured seed.
pub fn qmaxsearch(instance: &KnapsackInstance, config: &AmplificationConfig) -> Result<(SearchTrace, QuantumRunRecord)> {
    QMaxSearch::new(instance, config.clone())?.run(config.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Profits, Validation};

    fn small_qkp() -> KnapsackInstance {
        KnapsackInstance::new(
            "q",
            vec![vec![2, 3, 4, 5, 3]],
            vec![9],
            Profits::Matrix(vec![
                vec![4, 1, 0, 2, 0],
                vec![1, 5, 1, 0, 3],
                vec![0, 1, 6, 2, 0],
                vec![2, 0, 2, 7, 1],
                vec![0, 3, 0, 1, 3],
            ]),
            Validation::Strict,
        )
        .unwrap()
    }

    #[test]
    fn grover_algebra() {
        assert!((grover_success_probability(0.25, 1).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(grover_success_probability(0.3, 0).unwrap(), 0.3);
        assert_eq!(grover_success_probability(0.0, 7).unwrap(), 0.0);
        assert!(grover_success_probability(1.5, 1).is_err());
        assert!(grover_success_probability(-0.1, 0).is_err());
        assert!(grover_success_probability(f64::NAN, 0).is_err());
    }

    #[test]
    fn runtime_conversion() {
        assert!((cycles_to_runtime(1_000_000, 100.0).unwrap() - 0.1).abs() < 1e-12);
        assert!(cycles_to_runtime(5, -1.0).is_err());
    }

    #[test]
    fn zero_mass_exhausts_budget() {
        let inst = small_qkp();
        let greedy = greedy_incumbent(&inst);
        let model = QtgModel::new(&inst, greedy.bits.clone(), Bias::Finite(1.0)).unwrap();
        let config = AmplificationConfig::default();
        let out = qsearch(&model, 10_000, &config, 37, StreamKey::new(3, 0)).unwrap();
        assert!(out.found.is_none());
        assert_eq!(out.iterations, 37);
        assert_eq!(out.success_mass, 0.0);
    }

    #[test]
    fn found_assignments_beat_threshold() {
        let inst = small_qkp();
        let greedy = greedy_incumbent(&inst);
        let model = QtgModel::new(&inst, greedy.bits.clone(), Bias::Finite(0.0)).unwrap();
        let mut config = AmplificationConfig::default();
        for exact_limit in [20, 0] {
            config.exact_limit = exact_limit;
            config.monte_carlo_samples = 20_000;
            for s in 0..50 {
                let out = qsearch(&model, 10, &config, 25, StreamKey::new(s, 0)).unwrap();
                assert!(out.iterations <= 25);
                if let Some(p) = out.found {
                    assert!(p.profit > 10);
                    assert!(p.is_feasible());
                }
            }
        }
    }

    #[test]
    fn maximum_finding_trace() {
        let inst = small_qkp();
        let config = AmplificationConfig { seed: 11, ..Default::default() };
        let (trace, record) = qmaxsearch(&inst, &config).unwrap();
        trace.validate(&inst).unwrap();
        assert_eq!(trace.entries()[0].timestamp, Timestamp::Cycles(0));
        assert_eq!(record.final_profit, trace.last().unwrap().profit);
        assert!(record.rounds.last().unwrap().found.is_none());
        assert_eq!(record.total_cycles, record.rounds.iter().map(|r| r.cycles).sum::<u64>());
        assert_eq!(qmaxsearch(&inst, &config).unwrap().1, record);
    }

    #[test]
    fn follow_incumbent_never_improves() {
        let inst = small_qkp();
        let config = AmplificationConfig { bias_policy: BiasPolicy::FollowIncumbent, ..Default::default() };
        let (trace, record) = qmaxsearch(&inst, &config).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(record.total_iterations, 25);
    }

    #[test]
    fn global_cap_stops_the_run() {
        let inst = small_qkp();
        let config = AmplificationConfig { global_iteration_cap: Some(3), ..Default::default() };
        let (_, record) = qmaxsearch(&inst, &config).unwrap();
        assert!(record.total_iterations <= 3);
    }
}
