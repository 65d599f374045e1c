//! Binary structural causal models.
//!
//! A [`CausalDiagram`] is a DAG over named binary variables; a
//! [`StructuralModel`] attaches one conditional probability table per
//! variable. Everything downstream (enumeration, operators, metrics) builds
//! on the handful of exact operations here: the factorized joint, marginals,
//! conditioning, the do-operator, the causal effect `tau`, and the backdoor
//! adjustment estimator.
//!
//! Index conventions, used everywhere:
//! - variables are identified by their declaration position in the diagram;
//! - a cell of a table over scope `[v0, .., v_{m-1}]` is indexed with `v0`
//!   as the most significant bit, so cells enumerate in binary ascending
//!   order of the value tuple;
//! - a mechanism row is indexed the same way over the parent list.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Tolerance for "this table is normalized".
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Whether a variable can appear in observed tables and events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Observed,
    Hidden,
}

/// Causal role of a variable within a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Treatment,
    Outcome,
    Covariate,
    None,
}

/// A named binary variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub visibility: Visibility,
    pub role: Role,
}

impl Variable {
    pub fn new(name: impl Into<String>, visibility: Visibility, role: Role) -> Self {
        Variable { name: name.into(), visibility, role }
    }

    pub fn observed(name: impl Into<String>) -> Self {
        Variable::new(name, Visibility::Observed, Role::None)
    }

    pub fn hidden(name: impl Into<String>) -> Self {
        Variable::new(name, Visibility::Hidden, Role::None)
    }
}

/// A directed acyclic graph over binary variables.
///
/// Variable order is declaration order and is load-bearing: it fixes bit
/// positions in joint tables, parent-row indexing in mechanisms, and the
/// parameter order of grid enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalDiagram {
    variables: Arc<Vec<Variable>>,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
}

impl CausalDiagram {
    /// Builds a diagram from variables and `(parent, child)` name pairs.
    ///
    /// Fails on duplicate names, unknown edge endpoints, self loops,
    /// duplicate edges, or a cycle.
    pub fn new(variables: Vec<Variable>, edges: &[(&str, &str)]) -> Result<Self> {
        let n = variables.len();
        if n == 0 {
            return Err(Error::InvalidModel("diagram has no variables".into()));
        }
        if n > 20 {
            return Err(Error::InvalidModel(format!(
                "diagram has {n} variables; joint tables beyond 20 are not supported"
            )));
        }
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::InvalidModel(format!("duplicate variable `{}`", v.name)));
            }
        }
        let index_of = |name: &str| -> Result<usize> {
            variables
                .iter()
                .position(|v| v.name == name)
                .ok_or_else(|| Error::UnknownVariable(name.to_string()))
        };
        let mut resolved = Vec::with_capacity(edges.len());
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(p, c) in edges {
            let (pi, ci) = (index_of(p)?, index_of(c)?);
            if pi == ci {
                return Err(Error::InvalidModel(format!("self loop on `{p}`")));
            }
            if resolved.contains(&(pi, ci)) {
                return Err(Error::InvalidModel(format!("duplicate edge {p} -> {c}")));
            }
            resolved.push((pi, ci));
            parents[ci].push(pi);
        }
        for ps in &mut parents {
            ps.sort_unstable();
        }
        let diagram = CausalDiagram { variables: Arc::new(variables), edges: resolved, parents };
        diagram.check_acyclic()?;
        Ok(diagram)
    }

    fn check_acyclic(&self) -> Result<()> {
        // Kahn's algorithm.
        let n = self.var_count();
        let mut indegree: Vec<usize> = self.parents.iter().map(|p| p.len()).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for &(p, c) in &self.edges {
                if p == v {
                    indegree[c] -= 1;
                    if indegree[c] == 0 {
                        queue.push(c);
                    }
                }
            }
        }
        if seen != n {
            let looped: Vec<&str> = (0..n)
                .filter(|&i| indegree[i] > 0)
                .map(|i| self.variables[i].name.as_str())
                .collect();
            return Err(Error::InvalidModel(format!("cycle through {}", looped.join(", "))));
        }
        Ok(())
    }

    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &Variable {
        &self.variables[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Parent indices of `child`, sorted by declaration order.
    pub fn parents(&self, child: usize) -> &[usize] {
        &self.parents[child]
    }

    /// Indices of observed variables, in declaration order.
    pub fn observed_indices(&self) -> Vec<usize> {
        (0..self.var_count()).filter(|&i| self.variables[i].visibility == Visibility::Observed).collect()
    }

    /// Names of observed variables, in declaration order.
    pub fn observed_names(&self) -> Vec<String> {
        self.observed_indices().iter().map(|&i| self.variables[i].name.clone()).collect()
    }

    fn role_index(&self, role: Role, what: &str) -> Result<usize> {
        let hits: Vec<usize> =
            (0..self.var_count()).filter(|&i| self.variables[i].role == role).collect();
        match hits.as_slice() {
            [i] => Ok(*i),
            [] => Err(Error::MissingRole(format!("no {what} variable declared"))),
            _ => Err(Error::MissingRole(format!("more than one {what} variable declared"))),
        }
    }

    /// The unique treatment variable.
    pub fn treatment(&self) -> Result<usize> {
        self.role_index(Role::Treatment, "treatment")
    }

    /// The unique outcome variable.
    pub fn outcome(&self) -> Result<usize> {
        self.role_index(Role::Outcome, "outcome")
    }

    /// Strict descendants of `v` as a boolean mask.
    pub fn descendants(&self, v: usize) -> Vec<bool> {
        let n = self.var_count();
        let mut mask = vec![false; n];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &(p, c) in &self.edges {
                if p == u && !mask[c] {
                    mask[c] = true;
                    stack.push(c);
                }
            }
        }
        mask
    }

    /// Returns a copy of this diagram with all edges into `target` removed.
    pub fn cut_into(&self, target: usize) -> CausalDiagram {
        let edges: Vec<(usize, usize)> =
            self.edges.iter().copied().filter(|&(_, c)| c != target).collect();
        let mut parents = self.parents.clone();
        parents[target].clear();
        CausalDiagram { variables: Arc::clone(&self.variables), edges, parents }
    }
}

/// One conditional probability table: `probs[row]` is `P(child = 1 | row)`,
/// rows indexed over the parent tuple with the first parent as the most
/// significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    pub child: usize,
    pub parents: Vec<usize>,
    pub probs: Vec<f64>,
}

impl Mechanism {
    pub fn new(child: usize, parents: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << parents.len() {
            return Err(Error::InvalidModel(format!(
                "mechanism for variable #{child} has {} rows, expected {}",
                probs.len(),
                1usize << parents.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p) || !p.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "mechanism probability {p} outside [0, 1]"
            )));
        }
        Ok(Mechanism { child, parents, probs })
    }

    /// Row index of the parent tuple realized in `cell` (full-scope index).
    #[inline]
    fn row_in_cell(&self, cell: usize, n: usize) -> usize {
        let k = self.parents.len();
        let mut row = 0;
        for (j, &p) in self.parents.iter().enumerate() {
            let bit = (cell >> (n - 1 - p)) & 1;
            row |= bit << (k - 1 - j);
        }
        row
    }
}

/// A diagram plus one mechanism per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralModel {
    diagram: CausalDiagram,
    mechanisms: Vec<Mechanism>,
}

impl StructuralModel {
    /// Mechanism parent lists must match the diagram's parent sets exactly.
    pub fn new(diagram: CausalDiagram, mechanisms: Vec<Mechanism>) -> Result<Self> {
        if mechanisms.len() != diagram.var_count() {
            return Err(Error::InvalidModel(format!(
                "{} mechanisms for {} variables",
                mechanisms.len(),
                diagram.var_count()
            )));
        }
        for (i, m) in mechanisms.iter().enumerate() {
            if m.child != i {
                return Err(Error::InvalidModel(format!(
                    "mechanism #{i} declares child {}",
                    m.child
                )));
            }
            if m.parents != diagram.parents(i) {
                return Err(Error::InvalidModel(format!(
                    "mechanism parents for `{}` do not match the diagram",
                    diagram.variable(i).name
                )));
            }
        }
        Ok(StructuralModel { diagram, mechanisms })
    }

    pub fn diagram(&self) -> &CausalDiagram {
        &self.diagram
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    /// The full joint over all variables (hidden included): the product of
    /// each mechanism's probability given its parents, normalized.
    pub fn joint(&self) -> JointTable {
        let scope: Vec<String> = self.diagram.variables().iter().map(|v| v.name.clone()).collect();
        JointTable::new_normalized(scope, self.joint_probs())
    }

    /// Raw cell vector of [`joint`](Self::joint), without the scope labels.
    pub(crate) fn joint_probs(&self) -> Vec<f64> {
        let n = self.diagram.var_count();
        let cells = 1usize << n;
        let mut probs = vec![0.0; cells];
        for (cell, slot) in probs.iter_mut().enumerate() {
            let mut p = 1.0;
            for (v, mech) in self.mechanisms.iter().enumerate() {
                let bit = (cell >> (n - 1 - v)) & 1;
                let pv = mech.probs[mech.row_in_cell(cell, n)];
                p *= if bit == 1 { pv } else { 1.0 - pv };
            }
            *slot = p;
        }
        let sum: f64 = probs.iter().sum();
        if sum > 0.0 {
            for p in &mut probs {
                *p /= sum;
            }
        }
        probs
    }

    /// Marginal law over the observed variables.
    pub fn observed_law(&self) -> JointTable {
        let obs = self.diagram.observed_names();
        let refs: Vec<&str> = obs.iter().map(|s| s.as_str()).collect();
        self.joint().marginal(&refs).expect("observed variables are in scope")
    }

    /// The do-operator: replaces `target`'s mechanism with a parentless
    /// Bernoulli(`p`) assignment and removes the diagram edges into it.
    pub fn do_replace(&self, target: &str, p: f64) -> Result<StructuralModel> {
        let t = self.diagram.index_of(target)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidModel(format!("assignment probability {p} outside [0, 1]")));
        }
        let diagram = self.diagram.cut_into(t);
        let mut mechanisms = self.mechanisms.clone();
        mechanisms[t] = Mechanism { child: t, parents: Vec::new(), probs: vec![p] };
        Ok(StructuralModel { diagram, mechanisms })
    }

    /// The causal effect `P(Y=1 | do(T=1)) - P(Y=1 | do(T=0))` for the
    /// diagram's designated treatment and outcome.
    pub fn tau(&self) -> Result<f64> {
        let t = self.diagram.treatment()?;
        let y = self.diagram.outcome()?;
        let t_name = self.diagram.variable(t).name.clone();
        let n = self.diagram.var_count();
        let mut means = [0.0; 2];
        for (slot, value) in means.iter_mut().zip([0.0, 1.0]) {
            let intervened = self.do_replace(&t_name, value)?;
            let joint = intervened.joint_probs();
            *slot = joint
                .iter()
                .enumerate()
                .filter(|(cell, _)| (cell >> (n - 1 - y)) & 1 == 1)
                .map(|(_, p)| p)
                .sum();
        }
        Ok(means[1] - means[0])
    }

    /// Independent cross-check for [`tau`](Self::tau) by truncated
    /// factorization: drop the treatment factor, fix the treatment bit, and
    /// sum mechanism products directly. No intervened model, no joint table,
    /// no marginalization.
    pub fn tau_truncated(&self) -> Result<f64> {
        let t = self.diagram.treatment()?;
        let y = self.diagram.outcome()?;
        let n = self.diagram.var_count();
        let mut means = [0.0; 2];
        for (slot, t_bit) in means.iter_mut().zip([0usize, 1]) {
            let mut p_y1 = 0.0;
            for cell in 0..1usize << n {
                if (cell >> (n - 1 - t)) & 1 != t_bit {
                    continue;
                }
                if (cell >> (n - 1 - y)) & 1 != 1 {
                    continue;
                }
                let mut p = 1.0;
                for (v, mech) in self.mechanisms.iter().enumerate() {
                    if v == t {
                        continue;
                    }
                    let bit = (cell >> (n - 1 - v)) & 1;
                    let pv = mech.probs[mech.row_in_cell(cell, n)];
                    p *= if bit == 1 { pv } else { 1.0 - pv };
                }
                p_y1 += p;
            }
            *slot = p_y1;
        }
        Ok(means[1] - means[0])
    }
}

/// A normalized probability table over an ordered variable scope. Zero cells
/// are stored explicitly so tables over equal scopes are position-comparable.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    scope: Vec<String>,
    probs: Vec<f64>,
}

impl JointTable {
    /// Validates shape and normalization (within [`NORMALIZATION_TOL`]),
    /// then renormalizes exactly.
    pub fn new(scope: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << scope.len() {
            return Err(Error::InvalidModel(format!(
                "table over {} variables has {} cells",
                scope.len(),
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidModel("table has a negative or non-finite cell".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidModel(format!("table mass {sum} is not 1")));
        }
        Ok(Self::new_normalized(scope, probs))
    }

    fn new_normalized(scope: Vec<String>, mut probs: Vec<f64>) -> Self {
        let sum: f64 = probs.iter().sum();
        if sum > 0.0 {
            for p in &mut probs {
                *p /= sum;
            }
        }
        JointTable { scope, probs }
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.scope
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Value of variable at scope position `pos` within `cell`.
    #[inline]
    pub fn bit(&self, cell: usize, pos: usize) -> usize {
        (cell >> (self.scope.len() - 1 - pos)) & 1
    }

    /// Sums out every variable not in `keep`. The output scope preserves the
    /// order given in `keep`.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointTable> {
        let positions: Vec<usize> =
            keep.iter().map(|name| self.position(name)).collect::<Result<_>>()?;
        for (i, name) in keep.iter().enumerate() {
            if keep[..i].contains(name) {
                return Err(Error::InvalidModel(format!("duplicate variable `{name}` in keep")));
            }
        }
        let m = keep.len();
        let mut probs = vec![0.0; 1usize << m];
        for (cell, p) in self.probs.iter().enumerate() {
            let mut out = 0usize;
            for (j, &pos) in positions.iter().enumerate() {
                out |= self.bit(cell, pos) << (m - 1 - j);
            }
            probs[out] += p;
        }
        Ok(JointTable::new_normalized(keep.iter().map(|s| s.to_string()).collect(), probs))
    }

    /// Probability of `event` under this table.
    pub fn event_probability(&self, event: &Event) -> Result<f64> {
        let clauses = self.resolve(event)?;
        Ok(self
            .probs
            .iter()
            .enumerate()
            .filter(|(cell, _)| clauses.iter().all(|&(pos, val)| self.bit(*cell, pos) == val))
            .map(|(_, p)| p)
            .sum())
    }

    /// Conditions on `event`: zeroes out non-matching cells and
    /// renormalizes. Scope is unchanged. Fails with [`Error::ZeroSupport`]
    /// when the event has probability zero.
    pub fn condition(&self, event: &Event) -> Result<JointTable> {
        let clauses = self.resolve(event)?;
        let mut probs = self.probs.clone();
        for (cell, p) in probs.iter_mut().enumerate() {
            if !clauses.iter().all(|&(pos, val)| self.bit(cell, pos) == val) {
                *p = 0.0;
            }
        }
        if probs.iter().sum::<f64>() <= 0.0 {
            return Err(Error::ZeroSupport { event: event.to_string() });
        }
        Ok(JointTable::new_normalized(self.scope.clone(), probs))
    }

    fn resolve(&self, event: &Event) -> Result<Vec<(usize, usize)>> {
        event
            .clauses()
            .iter()
            .map(|(name, value)| Ok((self.position(name)?, usize::from(*value))))
            .collect()
    }

    /// Total-variation distance to a table over the identical scope.
    pub fn total_variation(&self, other: &JointTable) -> Result<f64> {
        if self.scope != other.scope {
            return Err(Error::ScopeMismatch {
                left: self.scope.join(", "),
                right: other.scope.join(", "),
            });
        }
        Ok(total_variation_raw(&self.probs, &other.probs))
    }
}

/// Total variation over two aligned probability vectors: `0.5 * L1`.
#[inline]
pub fn total_variation_raw(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// A conjunction of `(variable, value)` clauses over observed variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    clauses: Vec<(String, bool)>,
}

impl Event {
    pub fn new(clauses: Vec<(String, bool)>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::InvalidModel("event has no clauses".into()));
        }
        for (i, (name, _)) in clauses.iter().enumerate() {
            if clauses[..i].iter().any(|(other, _)| other == name) {
                return Err(Error::InvalidModel(format!("duplicate clause variable `{name}`")));
            }
        }
        Ok(Event { clauses })
    }

    /// Single-clause event `name = value`.
    pub fn is(name: impl Into<String>, value: bool) -> Self {
        Event { clauses: vec![(name.into(), value)] }
    }

    pub fn clauses(&self) -> &[(String, bool)] {
        &self.clauses
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.clauses.iter().map(|(n, v)| format!("{n}={}", u8::from(*v))).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Backdoor adjustment: `sum_x P(x) [P(Y=1 | T=1, x) - P(Y=1 | T=0, x)]`
/// over the strata of `adjust`.
///
/// Positivity requires every stratum of the adjustment variables to carry
/// both treatment arms: `P(T=t, X=x) > 0` for every `t` and every value
/// combination `x`. A stratum with no mass at all therefore also violates
/// positivity — that failure mode is exactly what a restriction that
/// destroys covariate variation produces.
pub fn adjustment_estimate(
    table: &JointTable,
    treatment: &str,
    outcome: &str,
    adjust: &[&str],
) -> Result<f64> {
    let t_pos = table.position(treatment)?;
    let y_pos = table.position(outcome)?;
    let adj_pos: Vec<usize> = adjust.iter().map(|a| table.position(a)).collect::<Result<_>>()?;
    if adj_pos.contains(&t_pos) || adj_pos.contains(&y_pos) {
        return Err(Error::InvalidModel(
            "adjustment set overlaps treatment or outcome".into(),
        ));
    }

    let m = adj_pos.len();
    let strata = 1usize << m;
    // p[stratum][t] and p_y1[stratum][t].
    let mut mass = vec![[0.0f64; 2]; strata];
    let mut mass_y1 = vec![[0.0f64; 2]; strata];
    for (cell, p) in table.probs().iter().enumerate() {
        let mut stratum = 0usize;
        for (j, &pos) in adj_pos.iter().enumerate() {
            stratum |= table.bit(cell, pos) << (m - 1 - j);
        }
        let t = table.bit(cell, t_pos);
        mass[stratum][t] += p;
        if table.bit(cell, y_pos) == 1 {
            mass_y1[stratum][t] += p;
        }
    }

    let describe = |stratum: usize| -> String {
        if m == 0 {
            "(empty stratum)".to_string()
        } else {
            adj_pos
                .iter()
                .enumerate()
                .map(|(j, _)| format!("{}={}", adjust[j], (stratum >> (m - 1 - j)) & 1))
                .collect::<Vec<_>>()
                .join(",")
        }
    };

    for (stratum, arms) in mass.iter().enumerate() {
        for (t, &p_tx) in arms.iter().enumerate() {
            if p_tx <= 0.0 {
                return Err(Error::PositivityViolation {
                    treatment_level: t as u8,
                    stratum: describe(stratum),
                });
            }
        }
    }

    let mut estimate = 0.0;
    for stratum in 0..strata {
        let p_x = mass[stratum][0] + mass[stratum][1];
        let diff = mass_y1[stratum][1] / mass[stratum][1] - mass_y1[stratum][0] / mass[stratum][0];
        estimate += p_x * diff;
    }
    Ok(estimate)
}

/// Crude risk difference `P(Y=1 | T=1) - P(Y=1 | T=0)`: adjustment over the
/// empty covariate set.
pub fn crude_risk_difference(table: &JointTable, treatment: &str, outcome: &str) -> Result<f64> {
    adjustment_estimate(table, treatment, outcome, &[])
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig1_diagram() -> CausalDiagram {
        CausalDiagram::new(
            vec![
                Variable::hidden("U"),
                Variable::observed("X"),
                Variable::new("T", Visibility::Observed, Role::Treatment),
                Variable::new("Y", Visibility::Observed, Role::Outcome),
            ],
            &[("U", "X"), ("U", "Y"), ("X", "T"), ("T", "Y")],
        )
        .unwrap()
    }

    /// The canonical fig1 ground truth: P(U)=0.5, P(X=1|U)=0.75/0.25,
    /// P(T=1|X)=0.75/0.25, P(Y=1|U,T) rows (U,T) in binary ascending order.
    pub(crate) fn fig1_canonical() -> StructuralModel {
        let d = fig1_diagram();
        StructuralModel::new(
            d,
            vec![
                Mechanism::new(0, vec![], vec![0.5]).unwrap(),
                Mechanism::new(1, vec![0], vec![0.25, 0.75]).unwrap(),
                Mechanism::new(2, vec![1], vec![0.25, 0.75]).unwrap(),
                // rows (U,T): 00, 01, 10, 11
                Mechanism::new(3, vec![0, 2], vec![0.1, 0.6, 0.4, 0.9]).unwrap(),
            ],
        )
        .unwrap()
    }

    /// Direct-summation oracle: P(cell of kept variables) computed by a
    /// plain filtered sum over all full-joint assignments, with the joint
    /// itself rebuilt by explicit mechanism lookups.
    fn brute_marginal(model: &StructuralModel, keep: &[&str]) -> Vec<f64> {
        let d = model.diagram();
        let n = d.var_count();
        let positions: Vec<usize> = keep.iter().map(|k| d.index_of(k).unwrap()).collect();
        let mut out = vec![0.0; 1 << keep.len()];
        for cell in 0..1usize << n {
            let mut p = 1.0;
            for v in 0..n {
                let mech = &model.mechanisms()[v];
                let mut row = 0usize;
                for (j, &par) in mech.parents.iter().enumerate() {
                    row |= ((cell >> (n - 1 - par)) & 1) << (mech.parents.len() - 1 - j);
                }
                let pv = mech.probs[row];
                p *= if (cell >> (n - 1 - v)) & 1 == 1 { pv } else { 1.0 - pv };
            }
            let mut idx = 0usize;
            for (j, &pos) in positions.iter().enumerate() {
                idx |= ((cell >> (n - 1 - pos)) & 1) << (keep.len() - 1 - j);
            }
            out[idx] += p;
        }
        out
    }

    #[test]
    fn joint_single_variable() {
        let d = CausalDiagram::new(vec![Variable::hidden("U")], &[]).unwrap();
        let m = StructuralModel::new(d, vec![Mechanism::new(0, vec![], vec![0.5]).unwrap()]).unwrap();
        assert_eq!(m.joint().probs(), &[0.5, 0.5]);
    }

    #[test]
    fn joint_deterministic_chain() {
        let d = CausalDiagram::new(
            vec![Variable::observed("X"), Variable::observed("T")],
            &[("X", "T")],
        )
        .unwrap();
        let m = StructuralModel::new(
            d,
            vec![
                Mechanism::new(0, vec![], vec![1.0]).unwrap(),
                Mechanism::new(1, vec![0], vec![0.0, 1.0]).unwrap(),
            ],
        )
        .unwrap();
        // Point mass on (X=1, T=1) = cell 0b11.
        assert_eq!(m.joint().probs(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn joint_uniform_grid_point() {
        let d = fig1_diagram();
        let m = StructuralModel::new(
            d,
            vec![
                Mechanism::new(0, vec![], vec![0.5]).unwrap(),
                Mechanism::new(1, vec![0], vec![0.5, 0.5]).unwrap(),
                Mechanism::new(2, vec![1], vec![0.5, 0.5]).unwrap(),
                Mechanism::new(3, vec![0, 2], vec![0.5; 4]).unwrap(),
            ],
        )
        .unwrap();
        let j = m.joint();
        assert_eq!(j.probs().len(), 16);
        for &p in j.probs() {
            assert!((p - 0.0625).abs() < 1e-15);
        }
    }

    #[test]
    fn joint_sums_to_one() {
        let j = fig1_canonical().joint();
        assert!((j.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_identity_and_symmetry() {
        let j = fig1_canonical().joint();
        let full: Vec<&str> = vec!["U", "X", "T", "Y"];
        assert_eq!(j.marginal(&full).unwrap().probs(), j.probs());

        let d = CausalDiagram::new(
            vec![Variable::hidden("U"), Variable::observed("X")],
            &[],
        )
        .unwrap();
        let m = StructuralModel::new(
            d,
            vec![
                Mechanism::new(0, vec![], vec![0.5]).unwrap(),
                Mechanism::new(1, vec![], vec![0.5]).unwrap(),
            ],
        )
        .unwrap();
        let marg = m.joint().marginal(&["X"]).unwrap();
        assert_eq!(marg.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_matches_brute_force_oracle() {
        let m = fig1_canonical();
        let marg = m.joint().marginal(&["X", "T", "Y"]).unwrap();
        let oracle = brute_marginal(&m, &["X", "T", "Y"]);
        for (a, b) in marg.probs().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn marginal_chain_consistency() {
        // Marginalizing to A then to B subset of A equals marginalizing to B.
        let m = fig1_canonical();
        let j = m.joint();
        let via = j.marginal(&["X", "T", "Y"]).unwrap().marginal(&["T", "Y"]).unwrap();
        let direct = j.marginal(&["T", "Y"]).unwrap();
        for (a, b) in via.probs().iter().zip(direct.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn condition_on_sure_event_is_identity() {
        let d = CausalDiagram::new(
            vec![Variable::observed("X"), Variable::observed("T")],
            &[],
        )
        .unwrap();
        let m = StructuralModel::new(
            d,
            vec![
                Mechanism::new(0, vec![], vec![1.0]).unwrap(),
                Mechanism::new(1, vec![], vec![0.5]).unwrap(),
            ],
        )
        .unwrap();
        let j = m.joint();
        let c = j.condition(&Event::is("X", true)).unwrap();
        assert_eq!(c.probs(), j.probs());
    }

    #[test]
    fn condition_renormalizes_uniform() {
        let t = JointTable::new(
            vec!["X".into(), "T".into()],
            vec![0.25, 0.25, 0.25, 0.25],
        )
        .unwrap();
        let c = t.condition(&Event::is("X", true)).unwrap();
        assert_eq!(c.probs(), &[0.0, 0.0, 0.5, 0.5]);
    }

    #[test]
    fn condition_zero_support_errors() {
        let t = JointTable::new(vec!["X".into()], vec![1.0, 0.0]).unwrap();
        let err = t.condition(&Event::is("X", true)).unwrap_err();
        assert!(matches!(err, Error::ZeroSupport { .. }));
    }

    #[test]
    fn condition_matches_direct_renormalization_oracle() {
        let m = fig1_canonical();
        let observed = m.observed_law();
        let conditioned = observed.condition(&Event::is("X", true)).unwrap();
        // Oracle: renormalize by hand over the matching cells.
        let x_pos = observed.position("X").unwrap();
        let mass: f64 = observed
            .probs()
            .iter()
            .enumerate()
            .filter(|(c, _)| observed.bit(*c, x_pos) == 1)
            .map(|(_, p)| p)
            .sum();
        for (cell, p) in observed.probs().iter().enumerate() {
            let expect = if observed.bit(cell, x_pos) == 1 { p / mass } else { 0.0 };
            assert!((conditioned.probs()[cell] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn do_replace_forces_assignment() {
        let m = fig1_canonical();
        let done = m.do_replace("T", 1.0).unwrap();
        assert!(done.diagram().parents(2).is_empty());
        let marg = done.joint().marginal(&["T"]).unwrap();
        assert_eq!(marg.probs()[1], 1.0);
        // Other mechanisms untouched.
        assert_eq!(done.mechanisms()[3], m.mechanisms()[3]);
    }

    #[test]
    fn do_replace_on_parentless_is_identity_up_to_parents() {
        let m = fig1_canonical();
        let done = m.do_replace("U", 0.5).unwrap();
        assert_eq!(done.joint().probs(), m.joint().probs());
    }

    #[test]
    fn do_replace_unknown_target_errors() {
        let m = fig1_canonical();
        assert!(matches!(m.do_replace("Z", 0.5), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn tau_deterministic_copy_is_one() {
        let d = CausalDiagram::new(
            vec![
                Variable::new("T", Visibility::Observed, Role::Treatment),
                Variable::new("Y", Visibility::Observed, Role::Outcome),
            ],
            &[("T", "Y")],
        )
        .unwrap();
        let m = StructuralModel::new(
            d,
            vec![
                Mechanism::new(0, vec![], vec![0.3]).unwrap(),
                Mechanism::new(1, vec![0], vec![0.0, 1.0]).unwrap(),
            ],
        )
        .unwrap();
        assert!((m.tau().unwrap() - 1.0).abs() < 1e-12);
        assert!((m.tau_truncated().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_constant_outcome_is_zero() {
        let m = fig1_canonical();
        let mut mechs = m.mechanisms().to_vec();
        mechs[3] = Mechanism::new(3, vec![0, 2], vec![0.4, 0.4, 0.7, 0.7]).unwrap();
        let m = StructuralModel::new(fig1_diagram(), mechs).unwrap();
        assert!(m.tau().unwrap().abs() < 1e-12);
        assert!(m.tau_truncated().unwrap().abs() < 1e-12);
    }

    #[test]
    fn tau_canonical_matches_truncated_oracle() {
        let m = fig1_canonical();
        let a = m.tau().unwrap();
        let b = m.tau_truncated().unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!((a - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tau_missing_role_errors() {
        let d = CausalDiagram::new(vec![Variable::observed("X")], &[]).unwrap();
        let m = StructuralModel::new(d, vec![Mechanism::new(0, vec![], vec![0.5]).unwrap()])
            .unwrap();
        assert!(matches!(m.tau(), Err(Error::MissingRole(_))));
    }

    #[test]
    fn adjustment_empty_set_is_crude_rd() {
        let m = fig1_canonical();
        let done = m.do_replace("T", 0.5).unwrap();
        let obs = done.observed_law();
        let crude = crude_risk_difference(&obs, "T", "Y").unwrap();
        let adj = adjustment_estimate(&obs, "T", "Y", &[]).unwrap();
        assert!((crude - adj).abs() < 1e-15);
        assert!((crude - m.tau().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn adjustment_independent_outcome_is_zero() {
        // Y independent of T within each X stratum.
        let t = JointTable::new(
            vec!["X".into(), "T".into(), "Y".into()],
            vec![0.1, 0.1, 0.1, 0.1, 0.15, 0.15, 0.15, 0.15],
        )
        .unwrap();
        let adj = adjustment_estimate(&t, "T", "Y", &["X"]).unwrap();
        assert!(adj.abs() < 1e-12);
    }

    #[test]
    fn adjustment_recovers_tau_on_canonical_fig1() {
        let m = fig1_canonical();
        let obs = m.observed_law();
        let adj = adjustment_estimate(&obs, "T", "Y", &["X"]).unwrap();
        assert!((adj - m.tau().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn adjustment_positivity_violation_names_stratum() {
        let m = fig1_canonical();
        let restricted = m.observed_law().condition(&Event::is("X", true)).unwrap();
        let err = adjustment_estimate(&restricted, "T", "Y", &["X"]).unwrap_err();
        match err {
            Error::PositivityViolation { stratum, .. } => assert_eq!(stratum, "X=0"),
            other => panic!("expected positivity violation, got {other:?}"),
        }
    }

    #[test]
    fn diagram_rejects_cycle() {
        let err = CausalDiagram::new(
            vec![Variable::observed("A"), Variable::observed("B")],
            &[("A", "B"), ("B", "A")],
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidModel(_)));
    }

    #[test]
    fn diagram_rejects_unknown_endpoint() {
        let err =
            CausalDiagram::new(vec![Variable::observed("A")], &[("A", "Z")]).unwrap_err();
        assert!(matches!(err, Error::UnknownVariable(_)));
    }

    #[test]
    fn total_variation_requires_matching_scope() {
        let a = JointTable::new(vec!["X".into()], vec![0.5, 0.5]).unwrap();
        let b = JointTable::new(vec!["Y".into()], vec![0.5, 0.5]).unwrap();
        assert!(matches!(a.total_variation(&b), Err(Error::ScopeMismatch { .. })));
    }
}
