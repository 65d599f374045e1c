//! Machine-readable run reports.
//!
//! A [`RunReport`] is self-contained: it echoes every engine setting that
//! produced it, so a run can be reproduced from the report alone. JSON and
//! CSV renderings are deterministic — identical inputs yield byte-identical
//! bytes regardless of parallelism — which is why wall-clock timings are
//! kept out of them; timings appear in the text rendering only.

use serde::Serialize;
use std::time::Instant;

use crate::enumerate::ModelClass;
use crate::error::{Error, Result};
use crate::metrics::{
    constraint_audit, delta_breadth, delta_cause, residual_k, tau_set_with_bins, BreadthReport,
    ConstraintReport, EntropyReport, TauSet,
};
use crate::operators::{
    compare_orders, initial_state, run_pipeline, CommutationReport, EvidentialState, Tolerances,
    Verdict,
};
use crate::scenario::{render_scenario, Scenario, Settings};

/// Settings echo embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingsEcho {
    pub grid: Vec<f64>,
    pub epsilon: f64,
    pub eps_id: f64,
    pub bins: usize,
    pub quantum: f64,
    pub cap: u64,
}

/// One registered adjustment analysis as reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustmentReport {
    pub variables: Vec<String>,
    pub at_step: usize,
    /// The estimate when the analysis was feasible.
    pub estimate: Option<f64>,
    /// The rendered positivity violation when it was not.
    pub positivity_violation: Option<String>,
}

/// Per-pipeline results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub pipeline: String,
    pub identifiable: bool,
    pub tau_set: TauSet,
    pub entropy: EntropyReport,
    pub breadth: BreadthReport,
    pub constraint: ConstraintReport,
    pub adjustments: Vec<AdjustmentReport>,
}

/// Commutation comparison between two pipelines, as reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub a: String,
    pub b: String,
    pub verdict: Verdict,
    pub scopes_comparable: bool,
    pub table_tv: Option<f64>,
    pub set_jaccard: f64,
    pub members_equal: bool,
    pub tau_set_a: Option<TauSet>,
    pub tau_set_b: Option<TauSet>,
}

impl ComparisonReport {
    pub fn from_commutation(c: &CommutationReport) -> Self {
        ComparisonReport {
            a: c.label_a.clone(),
            b: c.label_b.clone(),
            verdict: c.verdict,
            scopes_comparable: c.scopes_comparable,
            table_tv: c.table_tv,
            set_jaccard: c.set_jaccard,
            members_equal: c.members_equal,
            tau_set_a: c.tau_set_a.clone(),
            tau_set_b: c.tau_set_b.clone(),
        }
    }
}

/// Wall-clock phase timings; text rendering only, never serialized.
#[derive(Debug, Clone, Default)]
pub struct Timings {
    pub phases: Vec<(String, f64)>,
}

/// The full result of running a scenario. Self-contained: the canonical
/// scenario text plus the settings echo are enough to reproduce the run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    /// Canonical rendering of the scenario that produced this report.
    pub scenario_text: String,
    pub settings: SettingsEcho,
    /// Residual uncertainty floor of the scenario's model class.
    pub k: f64,
    pub initial_admissible: u64,
    pub pipelines: Vec<PipelineReport>,
    pub comparisons: Vec<ComparisonReport>,
    #[serde(skip)]
    pub timings: Timings,
}

pub(crate) fn settings_echo(scenario: &Scenario) -> SettingsEcho {
    SettingsEcho {
        grid: scenario.grid.levels().to_vec(),
        epsilon: scenario.settings.epsilon,
        eps_id: scenario.settings.eps_id,
        bins: scenario.settings.bins,
        quantum: scenario.settings.quantum,
        cap: scenario.settings.cap,
    }
}

pub(crate) fn class_of(scenario: &Scenario) -> ModelClass {
    ModelClass::with_cap(scenario.diagram.clone(), scenario.grid.clone(), scenario.settings.cap)
}

pub(crate) fn initial_of(scenario: &Scenario) -> Result<EvidentialState> {
    let class = class_of(scenario);
    initial_state(&class, &scenario.ground_truth, scenario.settings.epsilon)
}

fn adjustment_reports(state: &EvidentialState) -> Vec<AdjustmentReport> {
    state
        .adjustments()
        .iter()
        .map(|r| AdjustmentReport {
            variables: r.adjustment_set.clone(),
            at_step: r.at_step,
            estimate: r.outcome.as_ref().ok().copied(),
            positivity_violation: r.outcome.as_ref().err().map(|e| e.to_string()),
        })
        .collect()
}

/// Runs every pipeline and every metric of a scenario, plus commutation
/// comparisons for every pipeline pair.
pub fn run_scenario(scenario: &Scenario) -> Result<RunReport> {
    let Settings { eps_id, bins, quantum, .. } = scenario.settings;
    let mut timings = Timings::default();

    let t = Instant::now();
    let initial = initial_of(scenario)?;
    timings.phases.push(("initial_state".into(), t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let k = residual_k(initial.class(), quantum, bins, scenario.settings.epsilon)?;
    timings.phases.push(("residual_k".into(), t.elapsed().as_secs_f64()));

    let mut pipelines = Vec::with_capacity(scenario.pipelines.len());
    for p in &scenario.pipelines {
        let t = Instant::now();
        let states = run_pipeline(&initial, p)?;
        let last = states.last().expect("run_pipeline returns at least the initial state");
        let tau = tau_set_with_bins(last, bins)?;
        let entropy = delta_cause(last, bins)?;
        let breadth = delta_breadth(last)?;
        let constraint = constraint_audit(&p.label, &states, k, quantum, bins)?;
        let adjustments = adjustment_reports(last);
        let identifiable =
            adjustments.iter().all(|a| a.positivity_violation.is_none()) && tau.width <= eps_id;
        pipelines.push(PipelineReport {
            pipeline: p.label.clone(),
            identifiable,
            tau_set: tau,
            entropy,
            breadth,
            constraint,
            adjustments,
        });
        timings.phases.push((format!("pipeline {}", p.label), t.elapsed().as_secs_f64()));
    }

    let mut comparisons = Vec::new();
    for i in 0..scenario.pipelines.len() {
        for j in i + 1..scenario.pipelines.len() {
            let t = Instant::now();
            let c = compare_orders(
                &initial,
                &scenario.pipelines[i],
                &scenario.pipelines[j],
                Tolerances::default(),
            )?;
            comparisons.push(ComparisonReport::from_commutation(&c));
            timings.phases.push((
                format!("compare {} vs {}", scenario.pipelines[i].label, scenario.pipelines[j].label),
                t.elapsed().as_secs_f64(),
            ));
        }
    }

    Ok(RunReport {
        scenario: scenario.name.clone(),
        scenario_text: render_scenario(scenario),
        settings: settings_echo(scenario),
        k,
        initial_admissible: initial.admissible().len() as u64,
        pipelines,
        comparisons,
        timings,
    })
}

/// The audit of one scenario: `k` computed once, every pipeline audited.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub scenario: String,
    pub settings: SettingsEcho,
    pub k: f64,
    pub pipelines: Vec<ConstraintReport>,
    #[serde(skip)]
    pub timings: Timings,
}

pub fn audit_scenario(scenario: &Scenario) -> Result<AuditReport> {
    let Settings { bins, quantum, .. } = scenario.settings;
    let mut timings = Timings::default();

    let t = Instant::now();
    let initial = initial_of(scenario)?;
    timings.phases.push(("initial_state".into(), t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let k = residual_k(initial.class(), quantum, bins, scenario.settings.epsilon)?;
    timings.phases.push(("residual_k".into(), t.elapsed().as_secs_f64()));

    let mut reports = Vec::with_capacity(scenario.pipelines.len());
    for p in &scenario.pipelines {
        let t = Instant::now();
        let states = run_pipeline(&initial, p)?;
        reports.push(constraint_audit(&p.label, &states, k, quantum, bins)?);
        timings.phases.push((format!("audit {}", p.label), t.elapsed().as_secs_f64()));
    }
    Ok(AuditReport {
        scenario: scenario.name.clone(),
        settings: settings_echo(scenario),
        k,
        pipelines: reports,
        timings,
    })
}

/// Runs one comparison between two named pipelines.
pub fn compare_scenario(scenario: &Scenario, a: &str, b: &str) -> Result<ComparisonReport> {
    let pa = scenario
        .pipeline(a)
        .ok_or_else(|| Error::InvalidModel(format!("unknown pipeline label `{a}`")))?;
    let pb = scenario
        .pipeline(b)
        .ok_or_else(|| Error::InvalidModel(format!("unknown pipeline label `{b}`")))?;
    let initial = initial_of(scenario)?;
    let c = compare_orders(&initial, pa, pb, Tolerances::default())?;
    Ok(ComparisonReport::from_commutation(&c))
}

// ── Renderings ──────────────────────────────────────────────────────────

fn float(v: f64) -> String {
    format!("{v}")
}

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// Serializes any report value as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Fixed CSV column set: `scenario,pipeline,metric,value`. One row per
/// (pipeline, metric); scenario-level metrics carry an empty pipeline
/// field; comparison rows use the label pair `a|b`.
pub fn run_report_csv(report: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "pipeline", "metric", "value"]).unwrap();
    let mut row = |pipeline: &str, metric: &str, value: String| {
        w.write_record([report.scenario.as_str(), pipeline, metric, value.as_str()]).unwrap();
    };
    row("", "k", float(report.k));
    row("", "initial_admissible", report.initial_admissible.to_string());
    for p in &report.pipelines {
        let l = p.pipeline.as_str();
        row(l, "identifiable", p.identifiable.to_string());
        row(l, "tau_min", float(p.tau_set.min));
        row(l, "tau_max", float(p.tau_set.max));
        row(l, "tau_width", float(p.tau_set.width));
        row(l, "members", p.tau_set.members.to_string());
        row(l, "h_prior", float(p.entropy.h_prior));
        row(l, "h_state", float(p.entropy.h_state));
        row(l, "delta_cause", float(p.entropy.delta_cause));
        row(l, "delta_breadth", opt_float(p.breadth.kl_bits));
        row(l, "dominated", p.breadth.dominated.to_string());
        row(l, "product", opt_float(p.constraint.product));
        row(
            l,
            "satisfied",
            p.constraint.satisfied.map(|s| s.to_string()).unwrap_or_else(|| "na".into()),
        );
        for a in &p.adjustments {
            row(l, "adjustment_estimate", opt_float(a.estimate));
            row(l, "adjustment_positivity", a.positivity_violation.clone().unwrap_or_else(|| "ok".into()));
        }
        for s in &p.constraint.steps {
            row(l, &format!("step{}_h_state", s.step), float(s.h_state));
            row(l, &format!("step{}_kl_bits", s.step), opt_float(s.kl_bits));
            row(l, &format!("step{}_h_non_increasing", s.step), s.h_non_increasing.to_string());
            row(l, &format!("step{}_kl_non_decreasing", s.step), s.kl_non_decreasing.to_string());
        }
    }
    for c in &report.comparisons {
        let pair = format!("{}|{}", c.a, c.b);
        row(&pair, "verdict", c.verdict.to_string());
        row(&pair, "table_tv", opt_float(c.table_tv));
        row(&pair, "set_jaccard", float(c.set_jaccard));
        row(&pair, "members_equal", c.members_equal.to_string());
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

fn render_tau(t: &TauSet) -> String {
    format!(
        "tau in [{}, {}], width {}, {} members",
        float(t.min),
        float(t.max),
        float(t.width),
        t.members
    )
}

fn render_constraint(c: &ConstraintReport, out: &mut String) {
    out.push_str(&format!(
        "  constraint: delta_cause {} * delta_breadth {} = {} vs k {} -> {}\n",
        float(c.delta_cause),
        c.delta_breadth.map(float).unwrap_or_else(|| "unbounded".into()),
        c.product.map(float).unwrap_or_else(|| "n/a".into()),
        float(c.k),
        c.satisfied.map(|s| if s { "satisfied" } else { "violated" }.to_string())
            .unwrap_or_else(|| "not applicable".into()),
    ));
    out.push_str("  step  op                         h_state       kl_bits  flags\n");
    for s in &c.steps {
        let mut flags = String::new();
        if !s.h_non_increasing {
            flags.push_str(" H-INCREASED");
        }
        if !s.kl_non_decreasing {
            flags.push_str(" KL-DECREASED");
        }
        out.push_str(&format!(
            "  {:>4}  {:<24} {:>9.6} {:>13} {}\n",
            s.step,
            s.op,
            s.h_state,
            s.kl_bits.map(|k| format!("{k:.6}")).unwrap_or_else(|| "unbounded".into()),
            if flags.is_empty() { " ok" } else { &flags },
        ));
    }
}

/// Human-readable rendering of a run report, timings included.
pub fn run_report_text(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario {}\n", report.scenario));
    out.push_str(&format!(
        "settings: grid {:?}, epsilon {}, eps_id {}, bins {}, quantum {}, cap {}\n",
        report.settings.grid,
        report.settings.epsilon,
        report.settings.eps_id,
        report.settings.bins,
        report.settings.quantum,
        report.settings.cap
    ));
    out.push_str(&format!(
        "k = {} bits; initial admissible members = {}\n",
        float(report.k),
        report.initial_admissible
    ));
    for p in &report.pipelines {
        out.push_str(&format!(
            "\npipeline {}: {}\n",
            p.pipeline,
            if p.identifiable { "identifiable" } else { "not identifiable" }
        ));
        out.push_str(&format!("  {}\n", render_tau(&p.tau_set)));
        out.push_str(&format!(
            "  entropy: prior {} -> state {} (delta_cause {})\n",
            float(p.entropy.h_prior),
            float(p.entropy.h_state),
            float(p.entropy.delta_cause)
        ));
        out.push_str(&format!(
            "  breadth: {}\n",
            p.breadth
                .kl_bits
                .map(|b| format!("{} bits", float(b)))
                .unwrap_or_else(|| "unbounded (not dominated)".into())
        ));
        for a in &p.adjustments {
            match (&a.estimate, &a.positivity_violation) {
                (Some(e), _) => out.push_str(&format!(
                    "  adjustment over {:?} at step {}: estimate {}\n",
                    a.variables,
                    a.at_step,
                    float(*e)
                )),
                (None, Some(v)) => out.push_str(&format!(
                    "  adjustment over {:?} at step {}: {}\n",
                    a.variables, a.at_step, v
                )),
                (None, None) => {}
            }
        }
        render_constraint(&p.constraint, &mut out);
    }
    for c in &report.comparisons {
        out.push_str(&format!(
            "\ncompare {} vs {}: {} (table tv {}, jaccard {}, members {})\n",
            c.a,
            c.b,
            c.verdict,
            c.table_tv.map(float).unwrap_or_else(|| "incomparable".into()),
            float(c.set_jaccard),
            if c.members_equal { "equal" } else { "differ" },
        ));
    }
    render_timings(&report.timings, &mut out);
    out
}

pub fn audit_report_text(report: &AuditReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario {}\n", report.scenario));
    out.push_str(&format!("k = {} bits\n", float(report.k)));
    for c in &report.pipelines {
        out.push_str(&format!("\npipeline {}\n", c.pipeline));
        render_constraint(c, &mut out);
    }
    render_timings(&report.timings, &mut out);
    out
}

pub fn comparison_text(c: &ComparisonReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("compare {} vs {}: {}\n", c.a, c.b, c.verdict));
    out.push_str(&format!(
        "  observed tables: {}\n",
        if !c.scopes_comparable {
            "incomparable scopes".to_string()
        } else {
            format!("tv = {}", float(c.table_tv.unwrap_or(f64::NAN)))
        }
    ));
    out.push_str(&format!(
        "  admissible sets: jaccard {}, {}\n",
        float(c.set_jaccard),
        if c.members_equal { "identical members" } else { "different members" }
    ));
    if let (Some(a), Some(b)) = (&c.tau_set_a, &c.tau_set_b) {
        out.push_str(&format!("  a: {}\n  b: {}\n", render_tau(a), render_tau(b)));
    }
    out
}

fn render_timings(t: &Timings, out: &mut String) {
    if t.phases.is_empty() {
        return;
    }
    out.push_str("\nwall time per phase:\n");
    for (name, secs) in &t.phases {
        out.push_str(&format!("  {name:<28} {secs:.3}s\n"));
    }
}
