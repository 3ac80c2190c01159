//! Qubit, gate and cycle counts of the tree-generator circuits.
//!
//! Hardware model: noiseless logical qubits, single-qubit gates, singly
//! controlled rotations and Toffolis as primitives, disjoint gates run in
//! the same cycle, and multi-controlled gates may borrow shared ancillas.
//!
//! Each item `m` contributes a layer `U_m = U3 U2 U1`:
//! * `U1` compares the residual capacities against `w_m` and applies the
//!   biased rotation controlled on the result,
//! * `U2` subtracts `w_m` from the capacity registers, controlled on `x_m`,
//! * `U3` adds `p_m` (and, for quadratic instances, `p_{m m'}` doubly
//!   controlled on `x_m x_m'` for every earlier `m'`) to the profit
//!   register.
//!
//! The profit register is only read after the whole tree has been built, so
//! it is moved into Fourier space once at the start and back once at the
//! end. The interleaved and deferred variants therefore contain the same
//! gates and differ only in scheduling.

use std::fmt;
use std::path::Path as FsPath;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baseline::item_order;
use crate::error::{Error, Result};
use crate::instance::{numbits, profit_upper_bound, KnapsackInstance, ProblemKind, ProfitBound};

/// `ceil(log2(x))`, zero for `x <= 1`.
fn clog2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        (u64::BITS - (x - 1).leading_zeros()) as u64
    }
}

/// Gate count and depth (in cycles) of a circuit fragment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cost {
    pub gates: u64,
    pub depth: u64,
}

impl Cost {
    pub const ZERO: Cost = Cost { gates: 0, depth: 0 };

    pub fn new(gates: u64, depth: u64) -> Self {
        Cost { gates, depth }
    }

    /// `self` followed by `other`.
    pub fn then(self, other: Cost) -> Cost {
        Cost { gates: self.gates + other.gates, depth: self.depth + other.depth }
    }

    /// `self` alongside `other` on disjoint qubits.
    pub fn alongside(self, other: Cost) -> Cost {
        Cost { gates: self.gates + other.gates, depth: self.depth.max(other.depth) }
    }

    pub fn times(self, k: u64) -> Cost {
        Cost { gates: self.gates * k, depth: self.depth * k }
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Cost::then)
    }
}

/// Primitive cycle costs and parallelism switches.
///
/// Derived formulas for a `k`-qubit register (`s`, `r`, `t` are the
/// single-qubit, controlled-rotation and Toffoli cycle costs):
///
/// | fragment | gates | depth |
/// |---|---|---|
/// | QFT | `k(k+1)/2` | `k s + (k-1) r` |
/// | controlled constant adder (fan-out) | `k + 2(k-1)` | `(2 ceil(log2 k) + 1) r` |
/// | controlled constant adder (no fan-out) | `k` | `k r` |
/// | doubly controlled adder | adder `+ 2` | adder `+ 2 t` |
/// | comparator half (QFT, subtract, QFT^-1 on `k+1` qubits) | `2 QFT(k+1) + k + 1` | `2 QFT(k+1) + s` |
/// | comparator | `2 half + 1` | `2 half + r` |
/// | fan-out comparator half (`k^2` ancillas) | `2k^2 - k` | `ceil(log2 k) r + (ceil(log2 k) + 1) t` |
/// | register adder (carry lookahead) | `10k` | `(4 ceil(log2 k) + 3) t` |
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    pub single_qubit_cycles: u64,
    pub controlled_rotation_cycles: u64,
    pub toffoli_cycles: u64,
    pub measurement_cycles: u64,
    /// Copy controls onto ancillas so that constant adders run in log depth
    /// and independent additions sharing a control may overlap.
    pub fan_out_ancillas: bool,
    /// Allow the pairwise-addition tree (and fan-out comparators) of the
    /// `parallel-tree` variant; when off that variant schedules like
    /// `deferred`.
    pub pairwise_tree: bool,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            single_qubit_cycles: 1,
            controlled_rotation_cycles: 1,
            toffoli_cycles: 1,
            measurement_cycles: 1,
            fan_out_ancillas: true,
            pairwise_tree: true,
        }
    }
}

impl CostModel {
    /// Reads a TOML key-value table; missing keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let model: CostModel = toml::from_str(text).map_err(|e| Error::CostModel(e.to_string()))?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("single_qubit_cycles", self.single_qubit_cycles),
            ("controlled_rotation_cycles", self.controlled_rotation_cycles),
            ("toffoli_cycles", self.toffoli_cycles),
            ("measurement_cycles", self.measurement_cycles),
        ] {
            if v == 0 {
                return Err(Error::CostModel(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    fn s(&self) -> u64 {
        self.single_qubit_cycles
    }

    fn r(&self) -> u64 {
        self.controlled_rotation_cycles
    }

    fn t(&self) -> u64 {
        self.toffoli_cycles
    }

    pub fn qft(&self, k: u64) -> Cost {
        if k == 0 {
            return Cost::ZERO;
        }
        Cost::new(k * (k + 1) / 2, k * self.s() + (k - 1) * self.r())
    }

    /// Constant addition in Fourier space, singly controlled. With fan-out
    /// ancillas the control is copied so all `k` rotations run in one
    /// layer; that is only used where it is shallower than `k` rotations in
    /// sequence (from `k = 8` under unit costs).
    pub fn controlled_adder(&self, k: u64) -> Cost {
        if k == 0 {
            return Cost::ZERO;
        }
        let sequential = Cost::new(k, k * self.r());
        let fan_out = Cost::new(k + 2 * (k - 1), (2 * clog2(k) + 1) * self.r());
        if self.fan_out_ancillas && fan_out.depth < sequential.depth {
            fan_out
        } else {
            sequential
        }
    }

    pub fn doubly_controlled_adder(&self, k: u64) -> Cost {
        if k == 0 {
            return Cost::ZERO;
        }
        self.controlled_adder(k).then(Cost::new(2, 2 * self.t()))
    }

    /// Computes the sign of `register - w` into one extra qubit.
    pub fn comparator_half(&self, k: u64) -> Cost {
        let q = self.qft(k + 1);
        Cost::new(2 * q.gates + k + 1, 2 * q.depth + self.s())
    }

    /// Compute, apply one controlled operation, uncompute.
    pub fn comparator(&self, k: u64) -> Cost {
        let half = self.comparator_half(k);
        half.then(Cost::new(1, self.r())).then(half)
    }

    /// Comparison against copies of the register (`k^2` ancillas).
    pub fn fan_out_comparator_half(&self, k: u64) -> Cost {
        let l = clog2(k);
        Cost::new(2 * k * k - k.min(k * k), l * self.r() + (l + 1) * self.t())
    }

    /// Quantum-quantum addition of two `k`-qubit registers.
    pub fn register_adder(&self, k: u64) -> Cost {
        if k == 0 {
            return Cost::ZERO;
        }
        Cost::new(10 * k, (4 * clog2(k) + 3) * self.t())
    }

    /// Reflection about the initial state of `q` qubits.
    pub fn reflection(&self, q: u64) -> Cost {
        if q <= 1 {
            return Cost::new(1, self.s());
        }
        Cost::new(2 * (q - 1) + 1, 2 * clog2(q) * self.t() + self.r())
    }

    /// Conditionally loads `terms` constants into `k`-qubit ancilla
    /// registers, sums them pairwise and adds the total into a target
    /// register, then uncomputes the ancillas. Returns the cost and the
    /// ancilla qubits used. `fan_out_width` bounds how many loads share one
    /// control.
    pub fn addition_tree(&self, terms: u64, k: u64, fan_out_width: u64) -> (Cost, u64) {
        if terms == 0 || k == 0 {
            return (Cost::ZERO, 0);
        }
        let load = Cost::new(terms * k, clog2(fan_out_width.max(1) * k) * self.r() + self.t());
        let layers = clog2(terms);
        let adder = self.register_adder(k);
        let reduce = Cost::new((terms - 1) * adder.gates, layers * adder.depth);
        let cost = load.then(reduce).then(adder).then(reduce).then(load);
        (cost, terms * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Quadratic additions inside each layer, layers strictly sequential.
    Interleaved,
    /// Quadratic additions after the tree; linear profit additions overlap
    /// the capacity updates.
    Deferred,
    /// Pairwise addition trees and fan-out comparators.
    ParallelTree,
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interleaved" => Ok(Variant::Interleaved),
            "deferred" => Ok(Variant::Deferred),
            "parallel-tree" => Ok(Variant::ParallelTree),
            other => Err(Error::input(format!(
                "unknown variant {other:?} (expected interleaved, deferred or parallel-tree)"
            ))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Interleaved => "interleaved",
            Variant::Deferred => "deferred",
            Variant::ParallelTree => "parallel-tree",
        })
    }
}

/// Qubits for a quadratic instance:
/// `n + bits(c) + bits(P) + max(n, bits(c), bits(P))`.
pub fn qubit_count_qkp(n: u64, capacity: u64, profit_bound: u64) -> u64 {
    let (c, p) = (numbits(capacity) as u64, numbits(profit_bound) as u64);
    n + c + p + n.max(c).max(p)
}

/// Qubits for a multidimensional instance:
/// `n + sum_i bits(c_i) + bits(P) + max(n, sum_i bits(c_i) + 1, bits(P))`.
pub fn qubit_count_mdkp(n: u64, capacities: &[u64], profit_bound: u64) -> u64 {
    let c: u64 = capacities.iter().map(|&c| numbits(c) as u64).sum();
    let p = numbits(profit_bound) as u64;
    n + c + p + n.max(c + 1).max(p)
}

/// First position (1-based, in the given item order) at which the
/// cumulative weight exceeds the capacity. Every assignment of the items
/// before it is feasible. `n + 1` when all items fit together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BreakItem {
    Single(usize),
    /// One break position per dimension for multidimensional instances.
    PerDimension(Vec<usize>),
}

impl BreakItem {
    /// Length of the prefix whose sub-assignments are all feasible.
    pub fn feasible_prefix(&self) -> usize {
        match self {
            BreakItem::Single(b) => b - 1,
            BreakItem::PerDimension(bs) => bs.iter().min().map_or(0, |b| b - 1),
        }
    }
}

pub fn break_item(instance: &KnapsackInstance, order: &[usize]) -> BreakItem {
    let per_dim: Vec<usize> = (0..instance.d())
        .map(|i| {
            let capacity = instance.capacities()[i];
            let mut total = 0u64;
            order
                .iter()
                .position(|&m| {
                    total += instance.weight(i, m);
                    total > capacity
                })
                .map_or(order.len() + 1, |p| p + 1)
        })
        .collect();
    match instance.kind() {
        ProblemKind::Qkp => BreakItem::Single(per_dim[0]),
        ProblemKind::Mdkp => BreakItem::PerDimension(per_dim),
    }
}

/// Per-kind totals of the layer unitaries (sequential sums).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerBreakdown {
    /// `U1`: comparisons and controlled rotations.
    pub branching: Cost,
    /// `U2`: controlled capacity subtractions.
    pub capacity_update: Cost,
    /// `U3`: linear profit additions.
    pub profit_linear: Cost,
    /// `U3`: doubly controlled quadratic profit additions.
    pub profit_quadratic: Cost,
    /// Moving the profit register into and out of Fourier space.
    pub profit_register_qft: Cost,
    /// Pairwise addition tree replacing the profit additions, if used.
    pub profit_tree: Option<Cost>,
    /// Pairwise addition tree for the capacity updates before the break
    /// item, if used.
    pub capacity_tree: Option<Cost>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub instance: String,
    pub kind: ProblemKind,
    pub n: usize,
    pub d: usize,
    pub variant: Variant,
    pub profit_bound: u64,
    pub capacity_register_qubits: Vec<u64>,
    pub profit_register_qubits: u64,
    /// Closed-form register total (path, capacity, profit, ancilla).
    pub qubits: u64,
    /// Extra ancillas charged by the parallel-tree constructions.
    pub ancilla_qubits: u64,
    pub gates: u64,
    pub qtg_depth_cycles: u64,
    pub oracle: Cost,
    pub reflection: Cost,
    pub grover_iteration_cycles: u64,
    pub break_item: BreakItem,
    pub breakdown: LayerBreakdown,
    pub cost_model: CostModel,
}

impl ResourceEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

/// Qubits reflected by the diffusion operator: path, capacity and profit
/// registers.
fn data_qubits(estimate: &ResourceEstimate) -> u64 {
    estimate.n as u64 + estimate.capacity_register_qubits.iter().sum::<u64>() + estimate.profit_register_qubits
}

/// Cycles of one Grover iteration: the tree generator and its inverse, the
/// profit oracle and the reflection about the initial state.
pub fn grover_iteration_cost(estimate: &ResourceEstimate, model: &CostModel) -> u64 {
    2 * estimate.qtg_depth_cycles
        + model.comparator(estimate.profit_register_qubits).depth
        + model.reflection(data_qubits(estimate)).depth
}

pub fn estimate_qtg(instance: &KnapsackInstance, model: &CostModel, variant: Variant) -> Result<ResourceEstimate> {
    estimate_qtg_with_bound(instance, profit_upper_bound(instance), model, variant)
}

/// Item costs shared by all variants.
struct ItemCosts {
    branching: Cost,
    branching_fast: Cost,
    capacity: Cost,
    linear: Cost,
    quadratic_count: u64,
}

/// Like [`estimate_qtg`] but with an explicit profit-register bound.
pub fn estimate_qtg_with_bound(
    instance: &KnapsackInstance,
    bound: ProfitBound,
    model: &CostModel,
    variant: Variant,
) -> Result<ResourceEstimate> {
    model.validate()?;
    let n = instance.n();
    let order = item_order(instance);
    let kc: Vec<u64> = instance.capacities().iter().map(|&c| numbits(c) as u64).collect();
    let kp = numbits(bound.value()) as u64;

    let cc_adder = model.doubly_controlled_adder(kp);
    let mut items = Vec::with_capacity(n);
    for (pos, &m) in order.iter().enumerate() {
        let dims: Vec<usize> = (0..instance.d()).filter(|&i| instance.weight(i, m) > 0).collect();
        let branching_with = |half: &dyn Fn(u64) -> Cost| {
            if dims.is_empty() {
                return Cost::new(1, model.s());
            }
            let compare = dims.iter().map(|&i| half(kc[i])).fold(Cost::ZERO, Cost::alongside);
            let k = dims.len() as u64;
            let conjunction = Cost::new(2 * (k - 1), 2 * clog2(k) * model.t());
            compare.then(conjunction).then(Cost::new(1, model.r())).then(compare)
        };
        let branching = branching_with(&|k| model.comparator_half(k));
        let branching_fast = branching_with(&|k| model.fan_out_comparator_half(k));
        let capacity = dims
            .iter()
            .map(|&i| model.qft(kc[i]).then(model.controlled_adder(kc[i])).then(model.qft(kc[i])))
            .fold(Cost::ZERO, Cost::alongside);
        let linear = if instance.linear_profit(m) > 0 { model.controlled_adder(kp) } else { Cost::ZERO };
        let quadratic_count = order[..pos].iter().filter(|&&other| instance.pair_profit(m, other) > 0).count() as u64;
        items.push(ItemCosts { branching, branching_fast, capacity, linear, quadratic_count });
    }

    let profit_qft = model.qft(kp).times(2);
    let pairs = instance.nonzero_pairs() as u64;
    let quadratic_tail = cc_adder.times(pairs);
    let mut breakdown = LayerBreakdown {
        branching: items.iter().map(|c| c.branching).sum(),
        capacity_update: items.iter().map(|c| c.capacity).sum(),
        profit_linear: items.iter().map(|c| c.linear).sum(),
        profit_quadratic: quadratic_tail,
        profit_register_qft: profit_qft,
        profit_tree: None,
        capacity_tree: None,
    };
    let sequential_gates = breakdown.branching.gates
        + breakdown.capacity_update.gates
        + breakdown.profit_linear.gates
        + quadratic_tail.gates
        + profit_qft.gates;
    let overlap = |a: Cost, b: Cost| if model.fan_out_ancillas { a.alongside(b) } else { a.then(b) };

    let deferred_depth = profit_qft.depth
        + items.iter().map(|c| c.branching.depth + overlap(c.capacity, c.linear).depth).sum::<u64>()
        + quadratic_tail.depth;
    let breaks = break_item(instance, &order);
    let mut ancilla_qubits = 0;

    let (gates, depth) = match variant {
        Variant::Interleaved => {
            let depth = profit_qft.depth
                + items
                    .iter()
                    .map(|c| {
                        c.branching.depth + c.capacity.depth + c.linear.depth + c.quadratic_count * cc_adder.depth
                    })
                    .sum::<u64>();
            (sequential_gates, depth)
        }
        Variant::Deferred => (sequential_gates, deferred_depth),
        Variant::ParallelTree if !model.pairwise_tree => (sequential_gates, deferred_depth),
        Variant::ParallelTree => {
            let prefix_len = breaks.feasible_prefix().min(n);
            let (prefix, suffix) = items.split_at(prefix_len);
            let prefix_items = &order[..prefix_len];

            // Before the break item every branch is unconditional.
            let prefix_rotations =
                if prefix_len > 0 { Cost::new(prefix_len as u64, model.s()) } else { Cost::ZERO };
            let prefix_sequential: Cost = prefix.iter().map(|c| c.capacity).sum();
            let mut prefix_tree = Cost::ZERO;
            let mut prefix_tree_ancillas = 0;
            for (i, &k) in kc.iter().enumerate() {
                let terms = prefix_items.iter().filter(|&&m| instance.weight(i, m) > 0).count() as u64;
                let (cost, anc) = model.addition_tree(terms, k, 1);
                prefix_tree = prefix_tree.alongside(cost);
                prefix_tree_ancillas += anc;
            }
            let use_capacity_tree = prefix_tree.depth < prefix_sequential.depth;
            let prefix_update = if use_capacity_tree { prefix_tree } else { prefix_sequential };

            let suffix_branching: Cost = suffix.iter().map(|c| c.branching_fast).sum();
            let fan_out_ancillas: u64 = if suffix.is_empty() { 0 } else { kc.iter().map(|k| k * k).sum() };

            // (a) all profits through one pairwise addition tree
            let terms = (0..n).filter(|&m| instance.linear_profit(m) > 0).count() as u64 + pairs;
            let (profit_tree, profit_tree_ancillas) = model.addition_tree(terms, kp, n as u64);
            let suffix_capacity: Cost = suffix.iter().map(|c| c.capacity).sum();
            let depth_tree = prefix_rotations.depth
                + prefix_update.depth
                + suffix_branching.depth
                + suffix_capacity.depth
                + profit_tree.depth;
            let gates_tree = prefix_rotations.gates
                + prefix_update.gates
                + suffix_branching.gates
                + suffix_capacity.gates
                + profit_tree.gates;

            // (b) sequential profit additions overlapping the capacity work
            let prefix_linear: Cost = prefix.iter().map(|c| c.linear).sum();
            let depth_overlap = profit_qft.depth
                + prefix_rotations.depth
                + overlap(prefix_update, prefix_linear).depth
                + suffix.iter().map(|c| c.branching_fast.depth + overlap(c.capacity, c.linear).depth).sum::<u64>()
                + quadratic_tail.depth;
            let gates_overlap = prefix_rotations.gates
                + prefix_update.gates
                + suffix_branching.gates
                + suffix_capacity.gates
                + breakdown.profit_linear.gates
                + quadratic_tail.gates
                + profit_qft.gates;

            breakdown.branching = prefix_rotations.then(suffix_branching);
            if use_capacity_tree {
                breakdown.capacity_tree = Some(prefix_tree);
                breakdown.capacity_update = suffix_capacity;
                ancilla_qubits += prefix_tree_ancillas;
            }
            ancilla_qubits += fan_out_ancillas;
            if depth_tree < depth_overlap {
                breakdown.profit_tree = Some(profit_tree);
                breakdown.profit_linear = Cost::ZERO;
                breakdown.profit_quadratic = Cost::ZERO;
                breakdown.profit_register_qft = Cost::ZERO;
                ancilla_qubits += profit_tree_ancillas;
                (gates_tree, depth_tree)
            } else {
                (gates_overlap, depth_overlap)
            }
        }
    };

    let qubits = match instance.kind() {
        ProblemKind::Qkp => qubit_count_qkp(n as u64, instance.capacities()[0], bound.value()),
        ProblemKind::Mdkp => qubit_count_mdkp(n as u64, instance.capacities(), bound.value()),
    };
    let mut estimate = ResourceEstimate {
        instance: instance.name().to_string(),
        kind: instance.kind(),
        n,
        d: instance.d(),
        variant,
        profit_bound: bound.value(),
        capacity_register_qubits: kc,
        profit_register_qubits: kp,
        qubits,
        ancilla_qubits,
        gates,
        qtg_depth_cycles: depth,
        oracle: model.comparator(kp),
        reflection: Cost::ZERO,
        grover_iteration_cycles: 0,
        break_item: breaks,
        breakdown,
        cost_model: model.clone(),
    };
    estimate.reflection = model.reflection(data_qubits(&estimate));
    estimate.grover_iteration_cycles = grover_iteration_cost(&estimate, model);
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_formulas() {
        assert_eq!(qubit_count_qkp(4, 10, 100), 22);
        assert_eq!(qubit_count_qkp(8, 1, 1), 18);
        assert_eq!(qubit_count_qkp(5, 31, 16), 20);
        assert_eq!(qubit_count_mdkp(4, &[10, 10], 100), 28);
        assert_eq!(qubit_count_mdkp(4, &[10], 100), 22);
        assert_eq!(qubit_count_mdkp(32, &[1, 1], 1), 32 + 2 + 1 + 32);
        // the extra capacity qubit matters once it dominates
        assert_eq!(qubit_count_qkp(4, 255, 100), 4 + 8 + 7 + 8);
        assert_eq!(qubit_count_mdkp(4, &[255], 100), 4 + 8 + 7 + 9);
    }

    #[test]
    fn clog2_values() {
        assert_eq!([0, 1, 2, 3, 4, 5, 8, 9].map(clog2), [0, 0, 1, 2, 2, 3, 3, 4]);
    }

    #[test]
    fn break_positions() {
        let inst = KnapsackInstance::mdkp("b", vec![vec![3, 4, 5]], vec![7], vec![1, 1, 1]).unwrap();
        assert_eq!(break_item(&inst, &[0, 1, 2]), BreakItem::PerDimension(vec![3]));
        let inst = KnapsackInstance::qkp("b", vec![3, 4, 5], 7, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]])
            .unwrap();
        assert_eq!(break_item(&inst, &[0, 1, 2]), BreakItem::Single(3));
        assert_eq!(break_item(&inst, &[2, 1, 0]), BreakItem::Single(2));
        let inst = KnapsackInstance::qkp("b", vec![4, 4], 7, vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(break_item(&inst, &[0, 1]), BreakItem::Single(2));
        let md = KnapsackInstance::mdkp("m", vec![vec![3, 4, 5], vec![5, 1, 1]], vec![7, 6], vec![1, 1, 1]).unwrap();
        let b = break_item(&md, &[0, 1, 2]);
        assert_eq!(b, BreakItem::PerDimension(vec![3, 3]));
        assert_eq!(b.feasible_prefix(), 2);
    }

    #[test]
    fn variant_names() {
        assert_eq!("parallel-tree".parse::<Variant>().unwrap(), Variant::ParallelTree);
        assert!("fast".parse::<Variant>().is_err());
        assert_eq!(Variant::Deferred.to_string(), "deferred");
    }

    #[test]
    fn cost_model_toml() {
        let m = CostModel::from_toml_str("toffoli_cycles = 3\nfan_out_ancillas = false\n").unwrap();
        assert_eq!(m.toffoli_cycles, 3);
        assert!(!m.fan_out_ancillas);
        assert_eq!(m.single_qubit_cycles, 1);
        assert!(CostModel::from_toml_str("toffoli_cycles = 0").is_err());
        assert!(CostModel::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn default_table_values() {
        let m = CostModel::default();
        assert_eq!(m.qft(4), Cost::new(10, 7));
        // fan-out pays off from 8 qubits on
        assert_eq!(m.controlled_adder(4), Cost::new(4, 4));
        assert_eq!(m.controlled_adder(7), Cost::new(7, 7));
        assert_eq!(m.controlled_adder(8), Cost::new(22, 7));
        assert_eq!(m.controlled_adder(16), Cost::new(46, 9));
        assert_eq!(m.doubly_controlled_adder(16), Cost::new(48, 11));
        let no_fan = CostModel { fan_out_ancillas: false, ..CostModel::default() };
        assert_eq!(no_fan.controlled_adder(16), Cost::new(16, 16));
        // half: 2 QFT(5) = 2 * (15, 9), plus 5 phase gates in one cycle
        assert_eq!(m.comparator_half(4), Cost::new(35, 19));
        assert_eq!(m.comparator(4), Cost::new(71, 39));
    }

    #[test]
    fn oracle_is_profit_register_comparator() {
        let inst = KnapsackInstance::mdkp("m", vec![vec![3, 4, 5]], vec![7], vec![10, 20, 30]).unwrap();
        let model = CostModel::default();
        let est = estimate_qtg(&inst, &model, Variant::Deferred).unwrap();
        assert_eq!(est.profit_register_qubits, 6);
        assert_eq!(est.oracle, model.comparator(6));
        assert!(est.grover_iteration_cycles > est.qtg_depth_cycles);
        let mut doubled = est.clone();
        doubled.qtg_depth_cycles *= 2;
        assert_eq!(
            grover_iteration_cost(&doubled, &model) - grover_iteration_cost(&est, &model),
            2 * est.qtg_depth_cycles
        );
    }
}
