//! Test-side oracles and instance generators. Nothing here calls the
//! library's enumeration, sampling or counting code.

#![allow(dead_code)]

use qtg_core::{Bits, KnapsackInstance, Profits, Validation};
use rand::Rng;

pub fn random_qkp<R: Rng>(rng: &mut R, name: &str, n: usize, density: f64) -> KnapsackInstance {
    let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=50)).collect();
    let total: u64 = weights.iter().sum();
    let max = *weights.iter().max().unwrap();
    let capacity = rng.gen_range(max.max(total / 4)..total);
    let mut profits = vec![vec![0u64; n]; n];
    for i in 0..n {
        for j in i..n {
            if rng.gen_bool(density) {
                let v = rng.gen_range(1..=100);
                profits[i][j] = v;
                profits[j][i] = v;
            }
        }
    }
    KnapsackInstance::new(name, vec![weights], vec![capacity], Profits::Matrix(profits), Validation::Strict).unwrap()
}

pub fn random_mdkp<R: Rng>(rng: &mut R, name: &str, n: usize, d: usize) -> KnapsackInstance {
    let weights: Vec<Vec<u64>> = (0..d).map(|_| (0..n).map(|_| rng.gen_range(0..=40)).collect()).collect();
    let capacities: Vec<u64> = weights
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum::<u64>().max(2);
            let max = (*row.iter().max().unwrap()).max(1);
            rng.gen_range(max.max(total / 4)..total.max(max + 1))
        })
        .collect();
    let profits = (0..n).map(|_| rng.gen_range(1..=100)).collect();
    KnapsackInstance::new(name, weights, capacities, Profits::Vector(profits), Validation::Strict)
        .unwrap_or_else(|_| random_mdkp(rng, name, n, d))
}

pub fn mask_bits(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|m| mask >> m & 1 == 1).collect()
}

/// Objective of a 0/1 vector from the raw data: `sum_{i,j} x_i x_j p_ij`
/// for a matrix, `sum_i x_i p_i` for a vector.
pub fn brute_profit(inst: &KnapsackInstance, x: &[bool]) -> u64 {
    match inst.profits() {
        Profits::Matrix(p) => {
            let mut total = 0;
            for i in 0..x.len() {
                for j in 0..x.len() {
                    if x[i] && x[j] {
                        total += p[i][j];
                    }
                }
            }
            total
        }
        Profits::Vector(p) => x.iter().zip(p).filter(|(b, _)| **b).map(|(_, v)| v).sum(),
    }
}

pub fn brute_feasible(inst: &KnapsackInstance, x: &[bool]) -> bool {
    inst.weights().iter().zip(inst.capacities()).all(|(row, &c)| {
        row.iter().zip(x).filter(|(_, b)| **b).map(|(w, _)| w).sum::<u64>() <= c
    })
}

pub fn brute_optimum(inst: &KnapsackInstance) -> u64 {
    let n = inst.n();
    (0..1u64 << n)
        .map(|mask| mask_bits(mask, n))
        .filter(|x| brute_feasible(inst, x))
        .map(|x| brute_profit(inst, &x))
        .max()
        .unwrap()
}

/// Probability of `x` under the biased branching walk; `None` bias means
/// always follow the incumbent.
pub fn brute_path_probability(
    inst: &KnapsackInstance,
    order: &[usize],
    incumbent: &[bool],
    bias: Option<f64>,
    x: &[bool],
) -> f64 {
    let mut residual: Vec<u64> = inst.capacities().to_vec();
    let mut prob = 1.0;
    for &m in order {
        let fits = (0..inst.d()).all(|i| inst.weights()[i][m] <= residual[i]);
        if !fits {
            if x[m] {
                return 0.0;
            }
            continue;
        }
        let keep = match bias {
            Some(b) => (1.0 + b) / (2.0 + b),
            None => 1.0,
        };
        prob *= if x[m] == incumbent[m] { keep } else { 1.0 - keep };
        if x[m] {
            for i in 0..inst.d() {
                residual[i] -= inst.weights()[i][m];
            }
        }
    }
    prob
}

/// Bit length by string formatting.
pub fn bit_length(x: u64) -> u64 {
    if x == 0 {
        0
    } else {
        format!("{x:b}").len() as u64
    }
}

pub fn bits_of(x: &[bool]) -> Bits {
    Bits::from_bools(x.to_vec())
}

pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}
