//! Exhaustive enumeration of the discretized model space and admissible-set
//! computation.
//!
//! A [`ModelClass`] is a diagram plus a [`ParameterGrid`]; its enumeration
//! ranges over every assignment of grid levels to CPT entries. The order is
//! fixed and documented so member indices are stable identifiers across
//! runs: parameters are ordered by variable (declaration order), then by
//! parent tuple (binary ascending, first parent most significant); an
//! enumeration index decomposes mixed-radix over the grid levels with
//! parameter 0 as the most significant digit.
//!
//! Admissibility is law matching: a model satisfies a [`Constraint`] when
//! its observed law, pushed through the constraint's operation prefix, is
//! within `epsilon` total variation of the reference table. Index ranges
//! are evaluated in disjoint blocks and merged by set union, so results are
//! independent of parallelism.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{total_variation_raw, CausalDiagram, JointTable, Mechanism, StructuralModel};
use crate::operators::{transformed_observed_probs, Operation};

/// Strictly increasing probability levels used to discretize CPT entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGrid {
    levels: Vec<f64>,
}

impl ParameterGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidModel("parameter grid is empty".into()));
        }
        for w in levels.windows(2) {
            if w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less) {
                return Err(Error::InvalidModel("grid levels must be strictly increasing".into()));
            }
        }
        if levels[0] < 0.0 || *levels.last().unwrap() > 1.0 {
            return Err(Error::InvalidModel("grid levels must lie in [0, 1]".into()));
        }
        Ok(ParameterGrid { levels })
    }

    /// Grid `{0, step, 2 step, .., 1}`; `step` must divide 1 evenly.
    pub fn from_step(step: f64) -> Result<Self> {
        if step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || step > 1.0 {
            return Err(Error::InvalidModel(format!("grid step {step} outside (0, 1]")));
        }
        let count = (1.0 / step).round();
        if ((1.0 / step) - count).abs() > 1e-9 {
            return Err(Error::InvalidModel(format!("grid step {step} does not divide 1")));
        }
        let levels = (0..=count as usize).map(|i| i as f64 * step).collect();
        ParameterGrid::new(levels)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
}

impl Default for ParameterGrid {
    fn default() -> Self {
        ParameterGrid { levels: crate::DEFAULT_GRID.to_vec() }
    }
}

/// A diagram, a grid, and an enumeration cap.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelClass {
    diagram: CausalDiagram,
    grid: ParameterGrid,
    cap: u64,
    /// Flattened parameter layout: `offsets[v]` is the first parameter of
    /// variable `v`; variable `v` owns `2^|parents(v)|` parameters.
    offsets: Vec<usize>,
    parameter_count: usize,
}

impl ModelClass {
    pub fn new(diagram: CausalDiagram, grid: ParameterGrid) -> Self {
        Self::with_cap(diagram, grid, crate::DEFAULT_CAP)
    }

    pub fn with_cap(diagram: CausalDiagram, grid: ParameterGrid, cap: u64) -> Self {
        let mut offsets = Vec::with_capacity(diagram.var_count());
        let mut count = 0usize;
        for v in 0..diagram.var_count() {
            offsets.push(count);
            count += 1usize << diagram.parents(v).len();
        }
        ModelClass { diagram, grid, cap, offsets, parameter_count: count }
    }

    pub fn diagram(&self) -> &CausalDiagram {
        &self.diagram
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Total CPT entries across all mechanisms.
    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    /// Enumeration size `levels ^ parameters`, or [`Error::SizeOverflow`]
    /// when it exceeds the cap.
    pub fn size(&self) -> Result<u64> {
        let levels = self.grid.levels.len() as u128;
        let mut size: u128 = 1;
        for _ in 0..self.parameter_count {
            size = size.checked_mul(levels).ok_or(Error::SizeOverflow {
                size: u128::MAX,
                cap: self.cap,
            })?;
            if size > self.cap as u128 {
                return Err(Error::SizeOverflow { size, cap: self.cap });
            }
        }
        Ok(size as u64)
    }

    /// The model at one enumeration index. `index` must be below
    /// [`size`](Self::size).
    pub fn model_at(&self, index: u64) -> StructuralModel {
        let levels = &self.grid.levels;
        let radix = levels.len() as u64;
        let mut digits = vec![0usize; self.parameter_count];
        let mut rem = index;
        for d in digits.iter_mut().rev() {
            *d = (rem % radix) as usize;
            rem /= radix;
        }
        debug_assert_eq!(rem, 0, "index out of range");
        let mechanisms = (0..self.diagram.var_count())
            .map(|v| {
                let rows = 1usize << self.diagram.parents(v).len();
                let start = self.offsets[v];
                let probs = digits[start..start + rows].iter().map(|&d| levels[d]).collect();
                Mechanism { child: v, parents: self.diagram.parents(v).to_vec(), probs }
            })
            .collect();
        StructuralModel::new(self.diagram.clone(), mechanisms)
            .expect("grid models are valid by construction")
    }

    /// Ordered stream of every model in the class.
    pub fn models(&self) -> Result<impl Iterator<Item = StructuralModel> + '_> {
        let size = self.size()?;
        Ok((0..size).map(move |i| self.model_at(i)))
    }
}

/// A law-matching requirement: the candidate's observed law, transformed by
/// `prefix`, must be within `epsilon` total variation of `reference`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub prefix: Vec<Operation>,
    pub reference: JointTable,
    pub epsilon: f64,
}

impl Constraint {
    pub fn match_observed(prefix: Vec<Operation>, reference: JointTable, epsilon: f64) -> Self {
        Constraint { prefix, reference, epsilon }
    }

    /// Whether `model` satisfies this constraint. A candidate under which
    /// the prefix cannot be applied (zero-support restriction) does not
    /// match.
    pub fn satisfied_by(&self, model: &StructuralModel) -> bool {
        match transformed_observed_probs(model, &self.prefix) {
            Ok(law) => {
                debug_assert_eq!(law.len(), self.reference.probs().len());
                total_variation_raw(&law, self.reference.probs()) <= self.epsilon
            }
            Err(_) => false,
        }
    }
}

/// The subset of a model class satisfying a constraint list.
#[derive(Debug, Clone)]
pub struct AdmissibleSet {
    class: ModelClass,
    members: Arc<Vec<u64>>,
    constraints: Arc<Vec<Constraint>>,
}

impl AdmissibleSet {
    pub fn class(&self) -> &ModelClass {
        &self.class
    }

    /// Member enumeration indices, sorted ascending.
    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn contains(&self, index: u64) -> bool {
        self.members.binary_search(&index).is_ok()
    }

    /// Filters the current members through one additional constraint.
    /// Because constraints only ever accumulate, this equals recomputing
    /// the admissible set over the whole class with the extended list.
    pub(crate) fn refine(&self, constraint: &Constraint) -> AdmissibleSet {
        let mut members: Vec<u64> = self
            .members
            .par_iter()
            .copied()
            .filter(|&i| constraint.satisfied_by(&self.class.model_at(i)))
            .collect();
        members.sort_unstable();
        let mut constraints = (*self.constraints).clone();
        constraints.push(constraint.clone());
        AdmissibleSet {
            class: self.class.clone(),
            members: Arc::new(members),
            constraints: Arc::new(constraints),
        }
    }
}

fn check_constraints(class: &ModelClass, constraints: &[Constraint]) -> Result<()> {
    let observed = class.diagram.observed_names();
    for c in constraints {
        if c.epsilon < 0.0 {
            return Err(Error::InvalidModel(format!("constraint epsilon {} is negative", c.epsilon)));
        }
        if c.reference.scope() != observed {
            return Err(Error::ScopeMismatch {
                left: c.reference.scope().join(", "),
                right: observed.join(", "),
            });
        }
    }
    Ok(())
}

/// Computes the admissible set: every enumeration index whose model
/// satisfies every constraint. Parallel over disjoint index blocks; the
/// result is sorted and independent of the parallelism degree. An empty
/// result is valid and signals contradictory constraints or a too-small
/// tolerance.
pub fn admissible(class: &ModelClass, constraints: Vec<Constraint>) -> Result<AdmissibleSet> {
    check_constraints(class, &constraints)?;
    let size = class.size()?;
    let mut members: Vec<u64> = (0..size)
        .into_par_iter()
        .filter(|&i| {
            let model = class.model_at(i);
            constraints.iter().all(|c| c.satisfied_by(&model))
        })
        .collect();
    members.sort_unstable();
    Ok(AdmissibleSet {
        class: class.clone(),
        members: Arc::new(members),
        constraints: Arc::new(constraints),
    })
}

/// Slow reference implementation of [`admissible`]: one sequential loop over
/// the whole enumeration, every constraint checked independently, no
/// parallelism and no set refinement. Exists to differential-test the fast
/// path.
pub fn naive_admissible(class: &ModelClass, constraints: Vec<Constraint>) -> Result<AdmissibleSet> {
    check_constraints(class, &constraints)?;
    let size = class.size()?;
    let mut members = Vec::new();
    for i in 0..size {
        let model = class.model_at(i);
        let mut ok = true;
        for c in &constraints {
            if !c.satisfied_by(&model) {
                ok = false;
            }
        }
        if ok {
            members.push(i);
        }
    }
    Ok(AdmissibleSet {
        class: class.clone(),
        members: Arc::new(members),
        constraints: Arc::new(constraints),
    })
}

/// A quantized observed-law vector: two models with identical observed
/// tables always share a fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint(pub Vec<i64>);

pub(crate) fn quantize(law: &[f64], quantum: f64) -> Vec<i64> {
    law.iter().map(|p| (p / quantum).round() as i64).collect()
}

/// Partitions the enumeration by quantized observed law. Every index lands
/// in exactly one cell; cell members are sorted ascending.
pub fn fingerprint_partition(
    class: &ModelClass,
    quantum: f64,
) -> Result<BTreeMap<Fingerprint, Vec<u64>>> {
    if quantum.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidModel(format!("quantum {quantum} must be positive")));
    }
    let size = class.size()?;
    let mut pairs: Vec<(Vec<i64>, u64)> = (0..size)
        .into_par_iter()
        .map(|i| {
            let law = observed_probs_of(class, i);
            (quantize(&law, quantum), i)
        })
        .collect();
    pairs.par_sort_unstable();
    let mut partition: BTreeMap<Fingerprint, Vec<u64>> = BTreeMap::new();
    for (fp, idx) in pairs {
        partition.entry(Fingerprint(fp)).or_default().push(idx);
    }
    Ok(partition)
}

pub(crate) fn observed_probs_of(class: &ModelClass, index: u64) -> Vec<f64> {
    transformed_observed_probs(&class.model_at(index), &[])
        .expect("empty prefix cannot fail")
}
