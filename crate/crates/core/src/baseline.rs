//! Classical reference points: the greedy incumbent that seeds the quantum
//! search, the fixed item order shared by the tree and the oracle, and an
//! exhaustive optimum for small instances.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::instance::{Bits, KnapsackInstance, Path, ProblemKind};
use crate::tree::for_each_leaf;

/// Default item-count ceiling for [`exact_optimum`].
pub const DEFAULT_ORACLE_LIMIT: usize = 24;

/// Greedy density of every item.
///
/// Quadratic: `(p_m + sum_{m' != m} p_{m m'}) / w_m`. Multidimensional:
/// `p_m / sum_i (w_im / c_i)`. Weightless items rank first.
pub fn densities(instance: &KnapsackInstance) -> Vec<f64> {
    (0..instance.n())
        .map(|m| {
            let (value, size) = match instance.kind() {
                ProblemKind::Qkp => {
                    let value = instance.linear_profit(m)
                        + (0..instance.n()).map(|other| instance.pair_profit(m, other)).sum::<u64>();
                    (value as f64, instance.weight(0, m) as f64)
                }
                ProblemKind::Mdkp => {
                    let size = (0..instance.d())
                        .map(|i| instance.weight(i, m) as f64 / instance.capacities()[i] as f64)
                        .sum::<f64>();
                    (instance.linear_profit(m) as f64, size)
                }
            };
            if size == 0.0 {
                f64::INFINITY
            } else {
                value / size
            }
        })
        .collect()
}

/// Items by descending greedy density; ties keep the lower label first.
/// This is the order in which the tree generator and the oracle branch.
pub fn item_order(instance: &KnapsackInstance) -> Vec<usize> {
    let density = densities(instance);
    let mut order: Vec<usize> = (0..instance.n()).collect();
    order.sort_by(|&a, &b| density[b].partial_cmp(&density[a]).unwrap_or(Ordering::Equal));
    order
}

/// Packs items in density order, taking each one that still fits in every
/// dimension.
pub fn greedy_incumbent(instance: &KnapsackInstance) -> Path {
    let mut residuals: Vec<i64> = instance.capacities().iter().map(|&c| c as i64).collect();
    let mut bits = Bits::zeros(instance.n());
    for item in item_order(instance) {
        if (0..instance.d()).all(|i| instance.weight(i, item) as i64 <= residuals[i]) {
            for (i, r) in residuals.iter_mut().enumerate() {
                *r -= instance.weight(i, item) as i64;
            }
            bits.set(item, true);
        }
    }
    Path::evaluate(instance, bits).expect("length matches")
}

#[derive(Debug, Clone)]
pub struct ExactOptimum {
    pub path: Path,
    /// Tree nodes visited, a deterministic measure of the work done.
    pub nodes: u64,
}

impl ExactOptimum {
    pub fn profit(&self) -> u64 {
        self.path.profit
    }
}

/// Exhaustive search over the feasible tree in [`item_order`]. Refuses
/// instances with more than `limit_n` items.
pub fn exact_optimum(instance: &KnapsackInstance, limit_n: usize) -> Result<ExactOptimum> {
    let n = instance.n();
    if n > limit_n || n > crate::tree::MAX_MASK_ITEMS {
        return Err(Error::TooLarge { n, limit: limit_n.min(crate::tree::MAX_MASK_ITEMS) });
    }
    let order = item_order(instance);
    let mut best: Option<(u64, u64)> = None;
    let nodes = for_each_leaf(instance, &order, &mut |leaf| {
        if best.is_none_or(|(profit, _)| leaf.profit > profit) {
            best = Some((leaf.profit, leaf.mask));
        }
    });
    let (_, mask) = best.expect("the empty assignment is always feasible");
    let path = Path::evaluate(instance, Bits::from_mask(mask, n))?;
    Ok(ExactOptimum { path, nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Profits, Validation};

    fn relaxed(weights: Vec<Vec<u64>>, caps: Vec<u64>, profits: Profits) -> KnapsackInstance {
        KnapsackInstance::new("t", weights, caps, profits, Validation::AllowSlackCapacity).unwrap()
    }

    #[test]
    fn greedy_takes_densest_fitting_item() {
        let inst = KnapsackInstance::qkp("g", vec![5, 5], 7, vec![vec![10, 0], vec![0, 9]]).unwrap();
        let path = greedy_incumbent(&inst);
        assert_eq!(path.bits.to_string(), "10");
        assert_eq!(path.profit, 10);

        let single = relaxed(vec![vec![3]], vec![5], Profits::Matrix(vec![vec![4]]));
        assert_eq!(greedy_incumbent(&single).bits.to_string(), "1");

        let inst = KnapsackInstance::mdkp("m", vec![vec![4, 4], vec![4, 4]], vec![7, 7], vec![6, 5]).unwrap();
        let path = greedy_incumbent(&inst);
        assert_eq!(path.bits.to_string(), "10");
        assert_eq!(path.profit, 6);
    }

    #[test]
    fn quadratic_density_includes_pair_profits() {
        // item 1 alone is worse but its pair profit lifts it above item 0
        let inst =
            KnapsackInstance::qkp("q", vec![4, 4, 4], 8, vec![vec![5, 0, 0], vec![0, 1, 3], vec![0, 3, 1]]).unwrap();
        assert_eq!(densities(&inst), vec![5.0 / 4.0, 4.0 / 4.0, 4.0 / 4.0]);
        assert_eq!(item_order(&inst), vec![0, 1, 2]);
        let inst =
            KnapsackInstance::qkp("q", vec![4, 4, 4], 8, vec![vec![3, 0, 0], vec![0, 1, 3], vec![0, 3, 1]]).unwrap();
        assert_eq!(item_order(&inst), vec![1, 2, 0]);
    }

    #[test]
    fn weightless_items_come_first() {
        let inst = KnapsackInstance::mdkp("z", vec![vec![3, 0, 3]], vec![4], vec![9, 1, 9]).unwrap();
        assert_eq!(item_order(&inst)[0], 1);
        assert_eq!(greedy_incumbent(&inst).bits.to_string(), "110");
    }

    #[test]
    fn exact_small_cases() {
        let inst = relaxed(vec![vec![1, 1]], vec![2], Profits::Matrix(vec![vec![3, 1], vec![1, 4]]));
        let opt = exact_optimum(&inst, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(opt.path.bits.to_string(), "11");
        assert_eq!(opt.profit(), 9);

        let single = relaxed(vec![vec![3]], vec![5], Profits::Vector(vec![2]));
        assert_eq!(exact_optimum(&single, 24).unwrap().path.bits.to_string(), "1");

        let inst = KnapsackInstance::mdkp("m", vec![vec![3, 4, 2]], vec![6], vec![5, 7, 2]).unwrap();
        let opt = exact_optimum(&inst, 24).unwrap();
        assert_eq!(opt.path.bits.to_string(), "011");
        assert_eq!(opt.profit(), 9);
    }

    #[test]
    fn exact_refuses_large_instances() {
        let inst = KnapsackInstance::mdkp("m", vec![vec![3, 4, 2]], vec![6], vec![5, 7, 2]).unwrap();
        assert!(matches!(exact_optimum(&inst, 2), Err(Error::TooLarge { n: 3, limit: 2 })));
    }
}
