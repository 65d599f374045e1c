//! Evidential states and the restriction / conditioning / intervention
//! operators.
//!
//! An [`EvidentialState`] pairs the observed distribution produced by a
//! ground-truth model with the admissible set of grid models still
//! compatible with every recorded operation. Operations transform states:
//!
//! - [`Operation::Restrict`] renormalizes the world onto an event and adds
//!   a matching constraint;
//! - conditioning in *stratify* mode does the same but is recorded as an
//!   analytic step; in *adjust* mode it only registers a covariate for
//!   adjustment — it reorganizes inference, it does not filter the world;
//! - [`Operation::Intervene`] replaces the treatment mechanism with a
//!   randomized assignment inside whatever world earlier restrictions have
//!   left standing, and re-matches every candidate model through the same
//!   surgery.
//!
//! The same fold that advances the ground truth is used to transform each
//! candidate model during law matching, so order sensitivity is identical
//! on both sides.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::enumerate::{admissible, AdmissibleSet, Constraint, ModelClass};
use crate::error::{Error, Result};
use crate::metrics::{tau_set, TauSet};
use crate::model::{adjustment_estimate, Event, JointTable, StructuralModel, Visibility};

/// How a conditioning step treats its covariate.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionMode {
    /// Select the stratum `variable = value`; world-changing, same mechanics
    /// as restriction.
    Stratify(bool),
    /// Register the covariate for backdoor adjustment; the world is left
    /// untouched.
    Adjust,
}

/// One study operation.
#[derive(Debug, Clone, PartialEq)]
pub enum Operation {
    Restrict(Event),
    Condition { variable: String, mode: ConditionMode },
    Intervene { variable: String, probability: f64 },
}

impl Operation {
    pub fn restrict(variable: impl Into<String>, value: bool) -> Self {
        Operation::Restrict(Event::is(variable, value))
    }

    pub fn stratify(variable: impl Into<String>, value: bool) -> Self {
        Operation::Condition { variable: variable.into(), mode: ConditionMode::Stratify(value) }
    }

    pub fn adjust(variable: impl Into<String>) -> Self {
        Operation::Condition { variable: variable.into(), mode: ConditionMode::Adjust }
    }

    pub fn intervene(variable: impl Into<String>, probability: f64) -> Self {
        Operation::Intervene { variable: variable.into(), probability }
    }

    /// Whether the step alters the observed world (and therefore appends an
    /// admissibility constraint).
    pub fn changes_world(&self) -> bool {
        !matches!(self, Operation::Condition { mode: ConditionMode::Adjust, .. })
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::Restrict(e) => write!(f, "restrict {e}"),
            Operation::Condition { variable, mode: ConditionMode::Stratify(v) } => {
                write!(f, "stratify {variable}={}", u8::from(*v))
            }
            Operation::Condition { variable, mode: ConditionMode::Adjust } => {
                write!(f, "adjust {variable}")
            }
            Operation::Intervene { variable, probability } => {
                write!(f, "intervene {variable} p={probability}")
            }
        }
    }
}

/// A labelled, ordered sequence of operations, applied left to right.
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub label: String,
    pub steps: Vec<Operation>,
}

impl Pipeline {
    pub fn new(label: impl Into<String>, steps: Vec<Operation>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::InvalidModel("pipeline label is empty".into()));
        }
        Ok(Pipeline { label, steps })
    }
}

/// The transformation state of one model being pushed through a pipeline:
/// the (possibly intervened) model plus the current full joint over all
/// variables, declaration order, first variable as most significant bit.
#[derive(Debug, Clone)]
pub(crate) struct WorldState {
    pub model: StructuralModel,
    pub world: Vec<f64>,
}

impl WorldState {
    pub fn from_model(model: &StructuralModel) -> Self {
        let world = model.joint_probs();
        WorldState { model: model.clone(), world }
    }

    /// Applies one operation in place. Adjust steps are no-ops here.
    pub fn apply(&mut self, op: &Operation) -> Result<()> {
        match op {
            Operation::Restrict(event) => self.condition_world(event),
            Operation::Condition { variable, mode: ConditionMode::Stratify(value) } => {
                self.condition_world(&Event::is(variable.clone(), *value))
            }
            Operation::Condition { mode: ConditionMode::Adjust, .. } => Ok(()),
            Operation::Intervene { variable, probability } => {
                self.intervene_world(variable, *probability)
            }
        }
    }

    fn condition_world(&mut self, event: &Event) -> Result<()> {
        let d = self.model.diagram();
        let n = d.var_count();
        let mut clauses = Vec::with_capacity(event.clauses().len());
        for (name, value) in event.clauses() {
            let i = d.index_of(name)?;
            if d.variable(i).visibility != Visibility::Observed {
                return Err(Error::InvalidModel(format!(
                    "cannot restrict on hidden variable `{name}`"
                )));
            }
            clauses.push((n - 1 - i, usize::from(*value)));
        }
        let mut mass = 0.0;
        for (cell, p) in self.world.iter_mut().enumerate() {
            if clauses.iter().all(|&(shift, v)| (cell >> shift) & 1 == v) {
                mass += *p;
            } else {
                *p = 0.0;
            }
        }
        if mass <= 0.0 {
            return Err(Error::ZeroSupport { event: event.to_string() });
        }
        for p in &mut self.world {
            *p /= mass;
        }
        Ok(())
    }

    /// Randomized assignment inside the current world: the distribution of
    /// the target's non-descendants is kept as-is (restrictions applied so
    /// far included), while the target and its descendants are regenerated
    /// from their mechanisms. With no prior restriction this coincides with
    /// the joint of `do_replace`.
    fn intervene_world(&mut self, variable: &str, probability: f64) -> Result<()> {
        let t = self.model.diagram().index_of(variable)?;
        let new_model = self.model.do_replace(variable, probability)?;
        let d = new_model.diagram();
        let n = d.var_count();
        let mut regen = self.model.diagram().descendants(t);
        regen[t] = true;

        // Marginal of the current world over the kept (non-regenerated)
        // variables, laid out on the full cell index with regenerated bits
        // forced to zero.
        let mut kept_mask = 0usize;
        for (v, regenerated) in regen.iter().enumerate() {
            if !regenerated {
                kept_mask |= 1 << (n - 1 - v);
            }
        }
        let mut kept_marginal = vec![0.0; self.world.len()];
        for (cell, p) in self.world.iter().enumerate() {
            kept_marginal[cell & kept_mask] += p;
        }

        let mut world = vec![0.0; self.world.len()];
        for (cell, slot) in world.iter_mut().enumerate() {
            let mut p = kept_marginal[cell & kept_mask];
            if p == 0.0 {
                continue;
            }
            for (v, mech) in new_model.mechanisms().iter().enumerate() {
                if !regen[v] {
                    continue;
                }
                let bit = (cell >> (n - 1 - v)) & 1;
                let mut row = 0usize;
                for (j, &par) in mech.parents.iter().enumerate() {
                    row |= ((cell >> (n - 1 - par)) & 1) << (mech.parents.len() - 1 - j);
                }
                let pv = mech.probs[row];
                p *= if bit == 1 { pv } else { 1.0 - pv };
            }
            *slot = p;
        }
        let mass: f64 = world.iter().sum();
        if mass > 0.0 {
            for p in &mut world {
                *p /= mass;
            }
        }
        self.model = new_model;
        self.world = world;
        Ok(())
    }

    /// Raw observed law: marginal of the world onto observed variables in
    /// declaration order.
    pub fn observed_probs(&self) -> Vec<f64> {
        let d = self.model.diagram();
        let n = d.var_count();
        let obs = d.observed_indices();
        let m = obs.len();
        let mut out = vec![0.0; 1 << m];
        for (cell, p) in self.world.iter().enumerate() {
            let mut idx = 0usize;
            for (j, &v) in obs.iter().enumerate() {
                idx |= ((cell >> (n - 1 - v)) & 1) << (m - 1 - j);
            }
            out[idx] += p;
        }
        out
    }

    pub fn observed_table(&self) -> JointTable {
        let names = self.model.diagram().observed_names();
        JointTable::new(names, self.observed_probs()).expect("observed law is normalized")
    }
}

/// Transforms a candidate model's observed law through an operation prefix.
/// Returns an error when the prefix cannot be applied (a restriction event
/// with zero support under the candidate), which law matching treats as
/// failure to match.
pub(crate) fn transformed_observed_probs(
    model: &StructuralModel,
    prefix: &[Operation],
) -> Result<Vec<f64>> {
    let mut ws = WorldState::from_model(model);
    for op in prefix {
        ws.apply(op)?;
    }
    Ok(ws.observed_probs())
}

/// One registered covariate-adjustment analysis: which variables were in the
/// adjustment set when the step ran, and what the estimator returned on the
/// observed table of that moment.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentRegistration {
    pub variable: String,
    pub at_step: usize,
    pub adjustment_set: Vec<String>,
    pub outcome: Result<f64>,
}

/// Everything the initial state knew: the full-population observed table
/// and the admissible set before any operation.
#[derive(Debug)]
pub struct Origin {
    pub observed: JointTable,
    pub admissible: AdmissibleSet,
}

/// The information available to an investigator at one point of a study:
/// observed distribution, accumulated trace, admissible model set, and the
/// registered adjustment analyses.
#[derive(Debug, Clone)]
pub struct EvidentialState {
    class: ModelClass,
    epsilon: f64,
    ground: WorldState,
    observed: JointTable,
    trace: Vec<Operation>,
    admissible: AdmissibleSet,
    adjustments: Vec<AdjustmentRegistration>,
    origin: Arc<Origin>,
}

impl EvidentialState {
    pub fn class(&self) -> &ModelClass {
        &self.class
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Current observed table (the ground truth's, after the trace).
    pub fn observed(&self) -> &JointTable {
        &self.observed
    }

    /// The ground-truth model as currently intervened.
    pub fn ground_model(&self) -> &StructuralModel {
        &self.ground.model
    }

    pub fn trace(&self) -> &[Operation] {
        &self.trace
    }

    pub fn admissible(&self) -> &AdmissibleSet {
        &self.admissible
    }

    /// Covariates registered for adjustment, in registration order.
    pub fn adjustment_set(&self) -> Vec<String> {
        self.adjustments.iter().map(|r| r.variable.clone()).collect()
    }

    pub fn adjustments(&self) -> &[AdjustmentRegistration] {
        &self.adjustments
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn is_origin(&self) -> bool {
        self.trace.is_empty()
    }
}

/// Builds the pipeline-initial evidential state for a ground truth within a
/// model class: full observed law, empty trace, and the admissible set under
/// the empty-prefix law-matching constraint.
pub fn initial_state(
    class: &ModelClass,
    ground_truth: &StructuralModel,
    epsilon: f64,
) -> Result<EvidentialState> {
    if ground_truth.diagram() != class.diagram() {
        return Err(Error::InvalidModel(
            "ground truth diagram differs from the model class diagram".into(),
        ));
    }
    if epsilon < 0.0 {
        return Err(Error::InvalidModel(format!("epsilon {epsilon} is negative")));
    }
    let ground = WorldState::from_model(ground_truth);
    let observed = ground.observed_table();
    let constraint = Constraint::match_observed(Vec::new(), observed.clone(), epsilon);
    let admissible = admissible(class, vec![constraint])?;
    let origin = Arc::new(Origin { observed: observed.clone(), admissible: admissible.clone() });
    Ok(EvidentialState {
        class: class.clone(),
        epsilon,
        ground,
        observed,
        trace: Vec::new(),
        admissible,
        adjustments: Vec::new(),
        origin,
    })
}

/// Applies one operation, returning the successor state.
///
/// World-changing steps append a law-matching constraint whose prefix is the
/// full trace so far; because constraints only accumulate, admissible sets
/// are nested along any pipeline by construction, so the successor's members
/// are computed by filtering the predecessor's members through the new
/// constraint alone.
pub fn apply(state: &EvidentialState, op: &Operation) -> Result<EvidentialState> {
    let mut next = state.clone();
    next.trace.push(op.clone());

    if let Operation::Condition { variable, mode: ConditionMode::Adjust } = op {
        // Validate the covariate exists and is observed.
        let i = state.ground.model.diagram().index_of(variable)?;
        if state.ground.model.diagram().variable(i).visibility != Visibility::Observed {
            return Err(Error::InvalidModel(format!(
                "cannot adjust for hidden variable `{variable}`"
            )));
        }
        let mut adjustment_set = state.adjustment_set();
        if !adjustment_set.contains(variable) {
            adjustment_set.push(variable.clone());
        }
        // The analysis is evaluated against the world as it stands when the
        // step runs; a later restriction does not retroactively invalidate
        // it, and an earlier one can already have destroyed the variation
        // the estimator needs.
        let outcome = registered_estimate(state, &adjustment_set);
        next.adjustments.push(AdjustmentRegistration {
            variable: variable.clone(),
            at_step: next.trace.len() - 1,
            adjustment_set,
            outcome,
        });
        return Ok(next);
    }

    next.ground.apply(op)?;
    next.observed = next.ground.observed_table();
    let constraint =
        Constraint::match_observed(next.trace.clone(), next.observed.clone(), state.epsilon);
    next.admissible = state.admissible.refine(&constraint);
    Ok(next)
}

fn registered_estimate(state: &EvidentialState, adjustment_set: &[String]) -> Result<f64> {
    let d = state.ground.model.diagram();
    let treatment = d.variable(d.treatment()?).name.clone();
    let outcome = d.variable(d.outcome()?).name.clone();
    let adjust: Vec<&str> = adjustment_set
        .iter()
        .filter(|v| **v != treatment && **v != outcome)
        .map(|s| s.as_str())
        .collect();
    adjustment_estimate(&state.observed, &treatment, &outcome, &adjust)
}

/// Runs a pipeline and returns the state after every prefix, the initial
/// state included (`steps + 1` states). Errors carry the failing step index.
pub fn run_pipeline(initial: &EvidentialState, pipeline: &Pipeline) -> Result<Vec<EvidentialState>> {
    let mut states = Vec::with_capacity(pipeline.steps.len() + 1);
    states.push(initial.clone());
    for (i, op) in pipeline.steps.iter().enumerate() {
        let next = apply(states.last().unwrap(), op).map_err(|e| Error::PipelineStep {
            pipeline: pipeline.label.clone(),
            step: i,
            source: Box::new(e),
        })?;
        states.push(next);
    }
    Ok(states)
}

/// Commutation verdict between two pipeline orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Commute,
    Diverge,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Commute => write!(f, "commute"),
            Verdict::Diverge => write!(f, "diverge"),
        }
    }
}

/// Tolerances for the commutation verdict: observed tables must match
/// within `table_tv`; member sets must be identical.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub table_tv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { table_tv: crate::DEFAULT_TABLE_TOL }
    }
}

/// The result of running two pipelines from the same initial state.
#[derive(Debug)]
pub struct CommutationReport {
    pub label_a: String,
    pub label_b: String,
    pub state_a: EvidentialState,
    pub state_b: EvidentialState,
    /// Total variation between final observed tables; `None` when the
    /// surviving scopes differ and the tables are incomparable.
    pub table_tv: Option<f64>,
    pub scopes_comparable: bool,
    /// Jaccard similarity of the admissible member sets.
    pub set_jaccard: f64,
    pub members_equal: bool,
    pub tau_set_a: Option<TauSet>,
    pub tau_set_b: Option<TauSet>,
    pub verdict: Verdict,
}

/// Runs `a` and `b` from `initial` and compares the final states.
/// Incomparable scopes are reported as divergence with the scope flag down.
pub fn compare_orders(
    initial: &EvidentialState,
    a: &Pipeline,
    b: &Pipeline,
    tolerances: Tolerances,
) -> Result<CommutationReport> {
    let states_a = run_pipeline(initial, a)?;
    let states_b = run_pipeline(initial, b)?;
    let fa = states_a.last().unwrap();
    let fb = states_b.last().unwrap();

    let scopes_comparable = fa.observed().scope() == fb.observed().scope();
    let table_tv = if scopes_comparable {
        Some(fa.observed().total_variation(fb.observed())?)
    } else {
        None
    };
    let members_a = fa.admissible().members();
    let members_b = fb.admissible().members();
    let members_equal = members_a == members_b;
    let set_jaccard = jaccard(members_a, members_b);
    let commute = scopes_comparable
        && table_tv.is_some_and(|tv| tv <= tolerances.table_tv)
        && members_equal;

    Ok(CommutationReport {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        table_tv,
        scopes_comparable,
        set_jaccard,
        members_equal,
        tau_set_a: tau_set(fa).ok(),
        tau_set_b: tau_set(fb).ok(),
        verdict: if commute { Verdict::Commute } else { Verdict::Diverge },
        state_a: states_a.into_iter().next_back().unwrap(),
        state_b: states_b.into_iter().next_back().unwrap(),
    })
}

/// Jaccard similarity of two sorted index sets; `1.0` for two empty sets.
pub fn jaccard(a: &[u64], b: &[u64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let mut i = 0;
    let mut j = 0;
    let mut inter = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{ModelClass, ParameterGrid};
    use crate::testutil::{fig1_canonical, fig1_diagram, ty_diagram, ty_model};

    fn fig1_state(step: f64, epsilon: f64) -> EvidentialState {
        let class = ModelClass::new(fig1_diagram(), ParameterGrid::from_step(step).unwrap());
        initial_state(&class, &fig1_canonical(), epsilon).unwrap()
    }

    fn world_changing_steps(state: &EvidentialState) -> usize {
        state.trace().iter().filter(|op| op.changes_world()).count()
    }

    #[test]
    fn initial_state_in_singleton_class_has_one_member() {
        let truth = ty_model(0.5, 0.0, 1.0);
        let class = ModelClass::new(ty_diagram(), ParameterGrid::new(vec![0.5]).unwrap());
        // Grid {0.5} cannot express Y's CPT, so match loosely: with epsilon 1
        // the single enumerable model is admissible.
        let state = initial_state(&class, &truth, 1.0).unwrap();
        assert_eq!(state.admissible().members(), &[0]);
    }

    #[test]
    fn epsilon_one_admits_the_full_grid() {
        let state = fig1_state(0.5, 1.0);
        assert_eq!(state.admissible().len() as u64, state.class().size().unwrap());
    }

    #[test]
    fn restrict_on_sure_event_is_identity() {
        // T=1 has probability 1 under this truth, so restricting on it
        // changes neither the observed table nor the admissible set.
        let truth = ty_model(1.0, 0.0, 1.0);
        let class = ModelClass::new(ty_diagram(), ParameterGrid::from_step(0.5).unwrap());
        let s0 = initial_state(&class, &truth, 0.02).unwrap();
        let s1 = apply(&s0, &Operation::restrict("T", true)).unwrap();
        assert_eq!(s0.observed().probs(), s1.observed().probs());
        assert_eq!(s0.admissible().members(), s1.admissible().members());
    }

    #[test]
    fn intervene_makes_crude_risk_difference_equal_tau() {
        let s0 = fig1_state(0.5, 1.0);
        let tau = fig1_canonical().tau().unwrap();
        let s1 = apply(&s0, &Operation::intervene("T", 0.5)).unwrap();
        let crude = crate::model::crude_risk_difference(s1.observed(), "T", "Y").unwrap();
        assert!((crude - tau).abs() < 1e-9, "crude {crude} vs tau {tau}");
    }

    #[test]
    fn restrict_then_adjust_registers_positivity_violation() {
        let s0 = fig1_state(0.5, 0.3);
        let s1 = apply(&s0, &Operation::restrict("X", true)).unwrap();
        let s2 = apply(&s1, &Operation::adjust("X")).unwrap();
        let registration = &s2.adjustments()[0];
        assert_eq!(registration.at_step, 1);
        assert!(matches!(
            registration.outcome,
            Err(crate::error::Error::PositivityViolation { .. })
        ));
    }

    #[test]
    fn adjust_changes_neither_observed_nor_admissible() {
        let s0 = fig1_state(0.5, 1.0);
        let s1 = apply(&s0, &Operation::adjust("X")).unwrap();
        assert_eq!(s0.observed().probs(), s1.observed().probs());
        assert_eq!(s0.admissible().members(), s1.admissible().members());
        assert_eq!(s1.adjustment_set(), vec!["X".to_string()]);
    }

    #[test]
    fn run_pipeline_returns_every_prefix() {
        let s0 = fig1_state(0.5, 1.0);
        let pipeline = Pipeline::new(
            "p",
            vec![
                Operation::adjust("X"),
                Operation::restrict("X", true),
                Operation::intervene("T", 0.5),
            ],
        )
        .unwrap();
        let states = run_pipeline(&s0, &pipeline).unwrap();
        assert_eq!(states.len(), 4);
        // Last state equals folding apply over the steps.
        let mut folded = s0.clone();
        for op in &pipeline.steps {
            folded = apply(&folded, op).unwrap();
        }
        assert_eq!(states[3].observed().probs(), folded.observed().probs());
        assert_eq!(states[3].admissible().members(), folded.admissible().members());
    }

    #[test]
    fn trace_constraint_bijection() {
        let s0 = fig1_state(0.5, 1.0);
        let pipeline = Pipeline::new(
            "p",
            vec![
                Operation::adjust("X"),
                Operation::restrict("X", true),
                Operation::stratify("Y", false),
                Operation::intervene("T", 0.5),
            ],
        )
        .unwrap();
        for state in run_pipeline(&s0, &pipeline).unwrap() {
            // One constraint per world-changing step, plus the empty-prefix
            // constraint of the initial state.
            assert_eq!(
                state.admissible().constraints().len(),
                world_changing_steps(&state) + 1
            );
        }
    }

    #[test]
    fn admissible_sets_shrink_along_pipelines() {
        let s0 = fig1_state(0.5, 0.1);
        let pipeline = Pipeline::new(
            "p",
            vec![Operation::restrict("X", true), Operation::intervene("T", 0.5)],
        )
        .unwrap();
        let states = run_pipeline(&s0, &pipeline).unwrap();
        for pair in states.windows(2) {
            let prev: std::collections::HashSet<u64> =
                pair[0].admissible().members().iter().copied().collect();
            assert!(pair[1].admissible().members().iter().all(|i| prev.contains(i)));
        }
    }

    #[test]
    fn two_restricts_on_independent_events_commute() {
        let d = crate::model::CausalDiagram::new(
            vec![
                crate::model::Variable::observed("A"),
                crate::model::Variable::observed("B"),
                crate::model::Variable::new(
                    "T",
                    crate::model::Visibility::Observed,
                    crate::model::Role::Treatment,
                ),
                crate::model::Variable::new(
                    "Y",
                    crate::model::Visibility::Observed,
                    crate::model::Role::Outcome,
                ),
            ],
            &[("T", "Y")],
        )
        .unwrap();
        let truth = crate::model::StructuralModel::new(
            d.clone(),
            vec![
                crate::model::Mechanism::new(0, vec![], vec![0.5]).unwrap(),
                crate::model::Mechanism::new(1, vec![], vec![0.5]).unwrap(),
                crate::model::Mechanism::new(2, vec![], vec![0.5]).unwrap(),
                crate::model::Mechanism::new(3, vec![2], vec![0.0, 1.0]).unwrap(),
            ],
        )
        .unwrap();
        let class = ModelClass::new(d, ParameterGrid::from_step(0.5).unwrap());
        let s0 = initial_state(&class, &truth, 0.02).unwrap();
        let ab = Pipeline::new(
            "AB",
            vec![Operation::restrict("A", true), Operation::restrict("B", true)],
        )
        .unwrap();
        let ba = Pipeline::new(
            "BA",
            vec![Operation::restrict("B", true), Operation::restrict("A", true)],
        )
        .unwrap();
        let report = compare_orders(&s0, &ab, &ba, Tolerances::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Commute);
        assert!(report.table_tv.unwrap() <= 1e-12);
        assert!(report.members_equal);
    }

    #[test]
    fn compare_pipeline_with_itself_commutes() {
        let s0 = fig1_state(0.5, 1.0);
        let p = Pipeline::new("p", vec![Operation::restrict("X", true)]).unwrap();
        let report = compare_orders(&s0, &p, &p, Tolerances::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Commute);
        assert_eq!(report.table_tv, Some(0.0));
        assert_eq!(report.set_jaccard, 1.0);
    }

    #[test]
    fn zero_support_restriction_reports_step_index() {
        let truth = ty_model(1.0, 0.0, 1.0);
        let class = ModelClass::new(ty_diagram(), ParameterGrid::from_step(0.5).unwrap());
        let s0 = initial_state(&class, &truth, 0.02).unwrap();
        let pipeline = Pipeline::new(
            "dead",
            vec![Operation::restrict("Y", true), Operation::restrict("T", false)],
        )
        .unwrap();
        match run_pipeline(&s0, &pipeline) {
            Err(Error::PipelineStep { pipeline, step, source }) => {
                assert_eq!(pipeline, "dead");
                assert_eq!(step, 1);
                assert!(matches!(*source, Error::ZeroSupport { .. }));
            }
            other => panic!("expected pipeline step error, got {other:?}"),
        }
    }

    #[test]
    fn hidden_variables_cannot_be_restricted() {
        let s0 = fig1_state(0.5, 1.0);
        let err = apply(&s0, &Operation::restrict("U", true)).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
        let err = apply(&s0, &Operation::adjust("U")).unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
    }

    #[test]
    fn intervention_on_hidden_variable_is_allowed() {
        let s0 = fig1_state(0.5, 1.0);
        let s1 = apply(&s0, &Operation::intervene("U", 0.5)).unwrap();
        assert_eq!(world_changing_steps(&s1), 1);
    }

    #[test]
    fn jaccard_edge_cases() {
        assert_eq!(jaccard(&[], &[]), 1.0);
        assert_eq!(jaccard(&[1, 2], &[]), 0.0);
        assert_eq!(jaccard(&[1, 2], &[2, 3]), 1.0 / 3.0);
        assert_eq!(jaccard(&[1, 2], &[1, 2]), 1.0);
    }

    #[test]
    fn operation_display_matches_dsl_syntax() {
        assert_eq!(Operation::restrict("X", true).to_string(), "restrict X=1");
        assert_eq!(Operation::stratify("X", false).to_string(), "stratify X=0");
        assert_eq!(Operation::adjust("X").to_string(), "adjust X");
        assert_eq!(Operation::intervene("T", 0.5).to_string(), "intervene T p=0.5");
    }
}
