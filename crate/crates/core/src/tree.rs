//! Depth-first walk over the feasible branching tree.
//!
//! Items are visited in a fixed order. An item that no longer fits in some
//! dimension is forced out; every other item branches both ways. The leaves
//! are therefore exactly the feasible assignments.

use crate::instance::KnapsackInstance;

/// Largest item count representable by the bit-mask walker.
pub const MAX_MASK_ITEMS: usize = 64;

/// A feasible assignment reached by the walk. Bit `m` of each mask refers to
/// item label `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leaf {
    pub mask: u64,
    pub profit: u64,
    /// Items whose branch was free (not forced out by capacity).
    pub free: u64,
}

/// Calls `visit` once per feasible assignment. Returns the number of tree
/// nodes visited. Requires `instance.n() <= 64`.
pub fn for_each_leaf(instance: &KnapsackInstance, order: &[usize], visit: &mut impl FnMut(&Leaf)) -> u64 {
    assert!(instance.n() <= MAX_MASK_ITEMS, "mask walker supports at most 64 items");
    let mut walker = Walker {
        instance,
        order,
        residuals: instance.capacities().iter().map(|&c| c as i64).collect(),
        selected: Vec::with_capacity(order.len()),
        nodes: 0,
    };
    walker.descend(0, 0, 0, 0, visit);
    walker.nodes
}

struct Walker<'a> {
    instance: &'a KnapsackInstance,
    order: &'a [usize],
    residuals: Vec<i64>,
    selected: Vec<usize>,
    nodes: u64,
}

impl Walker<'_> {
    fn descend(&mut self, depth: usize, mask: u64, free: u64, profit: u64, visit: &mut impl FnMut(&Leaf)) {
        self.nodes += 1;
        let Some(&item) = self.order.get(depth) else {
            visit(&Leaf { mask, profit, free });
            return;
        };
        let inst = self.instance;
        let fits = (0..inst.d()).all(|i| inst.weight(i, item) as i64 <= self.residuals[i]);
        if !fits {
            self.descend(depth + 1, mask, free, profit, visit);
            return;
        }
        let free = free | 1 << item;
        self.descend(depth + 1, mask, free, profit, visit);

        let gain = inst.linear_profit(item)
            + 2 * self.selected.iter().map(|&other| inst.pair_profit(item, other)).sum::<u64>();
        for i in 0..inst.d() {
            self.residuals[i] -= inst.weight(i, item) as i64;
        }
        self.selected.push(item);
        self.descend(depth + 1, mask | 1 << item, free, profit + gain, visit);
        self.selected.pop();
        for i in 0..inst.d() {
            self.residuals[i] += inst.weight(i, item) as i64;
        }
    }
}
