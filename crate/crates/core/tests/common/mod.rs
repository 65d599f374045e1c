//! Independent oracles shared by the integration suites.
//!
//! Everything here recomputes engine quantities along structurally
//! different routes: effects via truncated factorization, entropies via the
//! plain `-sum p log2 p` form, divergences by direct summation, and the
//! residual floor by a quadratic scan with no bucketing. When an oracle and
//! the engine disagree, the oracle wins.
//!
//! Each integration binary uses its own subset of these.
#![allow(dead_code)]

use evistate::enumerate::{fingerprint_partition, ModelClass};
use evistate::model::total_variation_raw;

/// Shannon entropy in bits of a count histogram, `-sum p log2 p` form.
pub fn entropy_oracle(histogram: &[u64]) -> f64 {
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &c in histogram {
        if c > 0 {
            let p = c as f64 / total as f64;
            h -= p * p.log2();
        }
    }
    h
}

/// KL divergence in bits by direct summation; `None` when `q` does not
/// dominate `p`.
pub fn kl_oracle(p: &[f64], q: &[f64]) -> Option<f64> {
    assert_eq!(p.len(), q.len());
    let mut bits = 0.0;
    for (&pe, &pf) in p.iter().zip(q) {
        if pe > 0.0 {
            if pf <= 0.0 {
                return None;
            }
            bits += pe * (pe / pf).log2();
        }
    }
    Some(bits)
}

/// Bin of an effect value over `bins` equal intervals spanning `[-1, 1]`,
/// written as an explicit edge walk rather than arithmetic.
pub fn bin_oracle(tau: f64, bins: usize) -> usize {
    let width = 2.0 / bins as f64;
    for b in 0..bins {
        let hi = -1.0 + (b + 1) as f64 * width;
        if tau < hi {
            return b;
        }
    }
    bins - 1
}

/// Effect histogram over a member list via the truncated-factorization
/// route.
pub fn tau_histogram_oracle(class: &ModelClass, members: &[u64], bins: usize) -> Vec<u64> {
    let mut hist = vec![0u64; bins];
    for &i in members {
        let tau = class.model_at(i).tau_truncated().unwrap();
        hist[bin_oracle(tau, bins)] += 1;
    }
    hist
}

/// Exhaustive per-cell residual-floor oracle: partition by quantized
/// observed law, then for every cell scan every other cell's representative
/// law, pool the effect histograms of all cells within `epsilon` total
/// variation, and take the minimal entropy. Quadratic in the number of
/// cells; only for small classes.
pub fn residual_k_oracle(class: &ModelClass, quantum: f64, bins: usize, epsilon: f64) -> f64 {
    let partition = fingerprint_partition(class, quantum).unwrap();
    let cells: Vec<(Vec<f64>, Vec<u64>)> = partition
        .into_values()
        .map(|members| {
            let law = class.model_at(members[0]).observed_law().probs().to_vec();
            (law, members)
        })
        .collect();
    let mut best = f64::INFINITY;
    for (law, _) in &cells {
        let mut hist = vec![0u64; bins];
        for (other_law, other_members) in &cells {
            if total_variation_raw(law, other_law) <= epsilon + 1e-12 {
                for (bin, count) in tau_histogram_oracle(class, other_members, bins)
                    .into_iter()
                    .enumerate()
                {
                    hist[bin] += count;
                }
            }
        }
        best = best.min(entropy_oracle(&hist));
    }
    best
}
