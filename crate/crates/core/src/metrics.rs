//! Identified sets, uncertainty metrics, and the causal-breadth audit.
//!
//! The causal effect of every admissible member is summarized as a
//! [`TauSet`]; its histogram entropy (uniform weight per member, `B` equal
//! bins over `[-1, 1]`) measures how much uncertainty about the effect a
//! state leaves. `delta_cause` is the entropy reduction relative to the
//! pipeline-initial state; `delta_breadth` is the KL divergence of the
//! state's observed distribution from the full-population one; and
//! [`residual_k`] is the minimal effect-entropy over observationally
//! equivalent model classes — the floor that the product
//! `delta_cause * delta_breadth` is audited against.
//!
//! The audit reports monotonicity and the product bound step by step with
//! violation flags; it never asserts them.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

use crate::enumerate::{observed_probs_of, quantize, ModelClass};
use crate::error::{Error, Result};
use crate::model::total_variation_raw;
use crate::operators::EvidentialState;

/// Summary of the causal effects attainable across an admissible set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSet {
    pub min: f64,
    pub max: f64,
    pub width: f64,
    pub bins: usize,
    /// Member counts per bin over `[-1, 1]`.
    pub histogram: Vec<u64>,
    pub members: u64,
}

/// Bin of a causal effect in a `bins`-bin histogram over `[-1, 1]`.
#[inline]
fn bin_of(tau: f64, bins: usize) -> usize {
    let idx = ((tau + 1.0) / 2.0 * bins as f64).floor() as isize;
    idx.clamp(0, bins as isize - 1) as usize
}

/// Shannon entropy in bits of a count histogram; `0 log 0 = 0`.
fn entropy_bits(histogram: &[u64]) -> f64 {
    let total: u64 = histogram.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let weighted: f64 =
        histogram.iter().filter(|&&c| c > 0).map(|&c| c as f64 * (c as f64).log2()).sum();
    (n.log2() - weighted / n).max(0.0)
}

/// Effect histogram over a member list. Members are evaluated in disjoint
/// blocks and the integer histograms merged, so the result is bit-identical
/// across parallelism degrees.
fn tau_summary(class: &ModelClass, members: &[u64], bins: usize) -> Result<TauSet> {
    if members.is_empty() {
        return Err(Error::EmptyAdmissible);
    }
    class.diagram().treatment()?;
    class.diagram().outcome()?;
    let identity = || (vec![0u64; bins], f64::INFINITY, f64::NEG_INFINITY);
    let (histogram, min, max) = members
        .par_iter()
        .fold(identity, |(mut hist, min, max), &i| {
            let tau = class.model_at(i).tau().expect("roles checked above");
            hist[bin_of(tau, bins)] += 1;
            (hist, min.min(tau), max.max(tau))
        })
        .reduce(identity, |(mut ha, mina, maxa), (hb, minb, maxb)| {
            for (a, b) in ha.iter_mut().zip(&hb) {
                *a += b;
            }
            (ha, mina.min(minb), maxa.max(maxb))
        });
    Ok(TauSet {
        min,
        max,
        width: max - min,
        bins,
        histogram,
        members: members.len() as u64,
    })
}

/// The identified set `{tau(M) : M admissible}` of a state, summarized with
/// the default bin count.
pub fn tau_set(state: &EvidentialState) -> Result<TauSet> {
    tau_set_with_bins(state, crate::DEFAULT_BINS)
}

pub fn tau_set_with_bins(state: &EvidentialState, bins: usize) -> Result<TauSet> {
    tau_summary(state.class(), state.admissible().members(), bins)
}

/// Whether the state identifies the causal effect: the identified set must
/// be narrow (width at most `eps_id`) and every registered adjustment
/// analysis must have been feasible. A state whose registered adjustment
/// raised a positivity violation does not identify the effect no matter how
/// narrow the raw set is — the design's stated analysis cannot be run.
pub fn identifiable(state: &EvidentialState, eps_id: f64) -> Result<bool> {
    if state.adjustments().iter().any(|r| r.outcome.is_err()) {
        return Ok(false);
    }
    let set = tau_set(state)?;
    Ok(set.width <= eps_id)
}

/// Entropy bookkeeping for one state against its pipeline-initial prior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub h_prior: f64,
    pub h_state: f64,
    pub delta_cause: f64,
    pub bins: usize,
}

/// Entropy reduction attributable to the state: `H(tau | prior) - H(tau |
/// state)` over the effect histograms of the origin and current admissible
/// sets.
pub fn delta_cause(state: &EvidentialState, bins: usize) -> Result<EntropyReport> {
    let prior = tau_summary(state.class(), state.origin().admissible.members(), bins)?;
    let current = tau_summary(state.class(), state.admissible().members(), bins)?;
    let h_prior = entropy_bits(&prior.histogram);
    let h_state = entropy_bits(&current.histogram);
    Ok(EntropyReport { h_prior, h_state, delta_cause: h_prior - h_state, bins })
}

/// Divergence of a state's observed distribution from the full-population
/// one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreadthReport {
    /// KL divergence in bits; `None` when unbounded.
    pub kl_bits: Option<f64>,
    /// Whether the full distribution dominates the state's (no state mass on
    /// a full-population zero cell).
    pub dominated: bool,
}

/// `KL(P_state || P_full)` in bits over the observed joint. Scopes must
/// match; restriction preserves scope, so along the supported pipelines they
/// always do.
pub fn delta_breadth(state: &EvidentialState) -> Result<BreadthReport> {
    let full = &state.origin().observed;
    let current = state.observed();
    if current.scope() != full.scope() {
        return Err(Error::ScopeMismatch {
            left: current.scope().join(", "),
            right: full.scope().join(", "),
        });
    }
    Ok(kl_report(current.probs(), full.probs()))
}

fn kl_report(p: &[f64], q: &[f64]) -> BreadthReport {
    let mut bits = 0.0;
    for (&pe, &pf) in p.iter().zip(q) {
        if pe > 0.0 {
            if pf <= 0.0 {
                return BreadthReport { kl_bits: None, dominated: false };
            }
            bits += pe * (pe / pf).log2();
        }
    }
    BreadthReport { kl_bits: Some(bits.max(0.0)), dominated: true }
}

/// The minimal residual effect-uncertainty of a model class.
///
/// The enumeration is partitioned into cells of identical quantized observed
/// law; each cell's neighborhood is every cell whose representative law is
/// within `epsilon` total variation of its own (cell representatives stand
/// in for their members, exact up to the quantum). The entropy of the
/// effect histogram over each neighborhood is computed, and the minimum over
/// cells returned. Classes whose observed law pins the effect everywhere
/// (a point-identified full system) therefore yield exactly zero.
pub fn residual_k(class: &ModelClass, quantum: f64, bins: usize, epsilon: f64) -> Result<f64> {
    if quantum.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidModel(format!("quantum {quantum} must be positive")));
    }
    if bins == 0 {
        return Err(Error::InvalidModel("bins must be positive".into()));
    }
    if epsilon < 0.0 {
        return Err(Error::InvalidModel(format!("epsilon {epsilon} is negative")));
    }
    class.diagram().treatment()?;
    class.diagram().outcome()?;
    let size = class.size()?;

    // Pass 1: quantized law per model, sorted so equal laws are adjacent.
    let mut keyed: Vec<(Vec<i64>, u64)> = (0..size)
        .into_par_iter()
        .map(|i| (quantize(&observed_probs_of(class, i), quantum), i))
        .collect();
    keyed.par_sort_unstable();

    // Pass 2: one cell per distinct law, carrying the representative law
    // (of the lowest member index) and a sparse effect histogram.
    struct Cell {
        law: Vec<f64>,
        hist: Vec<(u16, u32)>,
    }
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    let mut start = 0usize;
    for i in 1..=keyed.len() {
        if i == keyed.len() || keyed[i].0 != keyed[start].0 {
            ranges.push((start, i));
            start = i;
        }
    }
    let cells: Vec<Cell> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let law = observed_probs_of(class, keyed[lo].1);
            let mut dense = HashMap::new();
            for (_, idx) in &keyed[lo..hi] {
                let tau = class.model_at(*idx).tau().expect("roles checked above");
                *dense.entry(bin_of(tau, bins) as u16).or_insert(0u32) += 1;
            }
            let mut hist: Vec<(u16, u32)> = dense.into_iter().collect();
            hist.sort_unstable();
            Cell { law, hist }
        })
        .collect();

    // Pass 3: bucket cells on their first coordinates so the epsilon-ball
    // scan only touches nearby cells; TV <= eps forces every coordinate
    // within 2 eps.
    let m = cells.first().map(|c| c.law.len()).unwrap_or(0);
    let dims = m.min(3);
    let width = (2.0 * epsilon).max(1e-9);
    let key_of = |law: &[f64]| -> [i64; 3] {
        let mut key = [0i64; 3];
        for (d, slot) in key.iter_mut().enumerate().take(dims) {
            *slot = (law[d] / width).floor() as i64;
        }
        key
    };
    let mut buckets: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    for (ci, cell) in cells.iter().enumerate() {
        buckets.entry(key_of(&cell.law)).or_default().push(ci as u32);
    }

    let tv_slack = epsilon + 1e-12;
    let k = cells
        .par_iter()
        .map(|cell| {
            let mut merged = vec![0u64; bins];
            let center = key_of(&cell.law);
            let mut neighbor = [0i64; 3];
            for da in -1..=1i64 {
                for db in -1..=1i64 {
                    for dc in -1..=1i64 {
                        neighbor[0] = center[0] + da;
                        neighbor[1] = center[1] + db;
                        neighbor[2] = center[2] + dc;
                        if dims < 3 && (dc != 0 || (dims < 2 && db != 0)) {
                            continue;
                        }
                        let Some(list) = buckets.get(&neighbor) else { continue };
                        for &other in list {
                            let o = &cells[other as usize];
                            if total_variation_raw(&cell.law, &o.law) <= tv_slack {
                                for &(bin, count) in &o.hist {
                                    merged[bin as usize] += count as u64;
                                }
                            }
                        }
                    }
                }
            }
            entropy_bits(&merged)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(k)
}

/// Metrics of one pipeline prefix within an audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepMetrics {
    pub step: usize,
    /// `"initial"` for the pipeline-initial state, the rendered operation
    /// otherwise.
    pub op: String,
    pub h_state: f64,
    pub kl_bits: Option<f64>,
    pub dominated: bool,
    pub admissible_members: u64,
    /// Whether effect entropy did not increase relative to the previous
    /// prefix. A raised flag is a finding, not a bug.
    pub h_non_increasing: bool,
    /// Whether divergence did not decrease relative to the previous prefix.
    pub kl_non_decreasing: bool,
}

/// The causal-breadth constraint audit of one pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintReport {
    pub pipeline: String,
    pub delta_cause: f64,
    /// `None` when the state's distribution is not dominated by the full
    /// one (unbounded divergence).
    pub delta_breadth: Option<f64>,
    /// `delta_cause * delta_breadth` in bits squared.
    pub product: Option<f64>,
    pub k: f64,
    /// `product >= k` within tolerance; `None` (not applicable) when the
    /// breadth is unbounded.
    pub satisfied: Option<bool>,
    pub steps: Vec<StepMetrics>,
    // Reproducibility echo: k is meaningful only relative to these.
    pub bins: usize,
    pub quantum: f64,
    pub epsilon: f64,
    pub grid: Vec<f64>,
}

/// Audits the states of one pipeline (as returned by `run_pipeline`)
/// against a precomputed `k`. Fills the per-step monotonicity table and the
/// final product-bound verdict; flags report, they do not assert.
pub fn constraint_audit(
    label: &str,
    states: &[EvidentialState],
    k: f64,
    quantum: f64,
    bins: usize,
) -> Result<ConstraintReport> {
    if states.is_empty() {
        return Err(Error::InvalidModel("audit needs at least the initial state".into()));
    }
    let mut steps = Vec::with_capacity(states.len());
    let mut prev_h = f64::INFINITY;
    let mut prev_kl = Some(0.0f64);
    let mut h_first = 0.0;
    let mut h_last = 0.0;
    let mut last_breadth = BreadthReport { kl_bits: Some(0.0), dominated: true };
    for (i, state) in states.iter().enumerate() {
        let summary = tau_summary(state.class(), state.admissible().members(), bins)?;
        let h = entropy_bits(&summary.histogram);
        let breadth = delta_breadth(state)?;
        let h_non_increasing = i == 0 || h <= prev_h + 1e-12;
        let kl_non_decreasing = i == 0
            || match (prev_kl, breadth.kl_bits) {
                (Some(prev), Some(cur)) => cur >= prev - 1e-12,
                (Some(_), None) => true,
                (None, None) => true,
                (None, Some(_)) => false,
            };
        steps.push(StepMetrics {
            step: i,
            op: if i == 0 { "initial".to_string() } else { state.trace()[i - 1].to_string() },
            h_state: h,
            kl_bits: breadth.kl_bits,
            dominated: breadth.dominated,
            admissible_members: state.admissible().len() as u64,
            h_non_increasing,
            kl_non_decreasing,
        });
        prev_h = h;
        prev_kl = breadth.kl_bits;
        if i == 0 {
            h_first = h;
        }
        h_last = h;
        last_breadth = breadth;
    }
    let delta_cause = h_first - h_last;
    let delta_breadth = last_breadth.kl_bits;
    let product = delta_breadth.map(|b| delta_cause * b);
    let satisfied = product.map(|p| p >= k - 1e-9);
    let state = &states[0];
    Ok(ConstraintReport {
        pipeline: label.to_string(),
        delta_cause,
        delta_breadth,
        product,
        k,
        satisfied,
        steps,
        bins,
        quantum,
        epsilon: state.epsilon(),
        grid: state.class().grid().levels().to_vec(),
    })
}
