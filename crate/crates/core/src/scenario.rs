//! The scenario file format.
//!
//! Scenarios are line oriented: one directive per line, `#` starts a
//! comment, blank lines are ignored. The grammar:
//!
//! ```text
//! scenario <name>
//! var <name> (obs|hidden) [treatment|outcome]
//! edge <parent> <child>
//! grid <p1> <p2> ...
//! truth <var> [<parent-tuple as bits>] = <prob>     # one line per CPT entry
//! settings epsilon=<p> eps_id=<p> bins=<n> quantum=<p> cap=<n>
//! pipeline <label>: <step> ; <step> ; ...
//!   # step := restrict <var>=<bit> | stratify <var>=<bit>
//!   #       | adjust <var> | intervene <var> p=<prob>
//! ```
//!
//! Truth rows are keyed by the parent tuple with parents in declaration
//! order and the first parent as the most significant bit, so `truth Y 01 =
//! 0.6` sets `P(Y=1 | first parent = 0, second parent = 1)`. Probabilities
//! accept decimal literals and simple fractions (`1/3`). Unknown directives
//! are errors; nothing is skipped silently.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::enumerate::ParameterGrid;
use crate::model::{
    CausalDiagram, Mechanism, Role, StructuralModel, Variable, Visibility,
};
use crate::operators::{Operation, Pipeline};

/// Engine settings carried by a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub epsilon: f64,
    pub eps_id: f64,
    pub bins: usize,
    pub quantum: f64,
    pub cap: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            epsilon: crate::DEFAULT_EPSILON,
            eps_id: crate::DEFAULT_EPS_ID,
            bins: crate::DEFAULT_BINS,
            quantum: crate::DEFAULT_QUANTUM,
            cap: crate::DEFAULT_CAP,
        }
    }
}

/// A parsed, validated scenario: diagram, grid, ground truth, pipelines and
/// settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub diagram: CausalDiagram,
    pub grid: ParameterGrid,
    pub ground_truth: StructuralModel,
    pub pipelines: Vec<Pipeline>,
    pub settings: Settings,
}

impl Scenario {
    pub fn pipeline(&self, label: &str) -> Option<&Pipeline> {
        self.pipelines.iter().find(|p| p.label == label)
    }
}

/// A syntax error with its 1-based position.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        if !self.token.is_empty() {
            write!(f, " (found `{}`)", self.token)?;
        }
        Ok(())
    }
}

/// A structural error: the text parsed but does not describe a valid
/// scenario (cycle, undeclared variable, missing roles, CPT arity mismatch).
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationError {
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    Parse(ParseError),
    Validation(ValidationError),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Parse(e) => write!(f, "parse error: {e}"),
            ScenarioError::Validation(e) => write!(f, "validation error: {e}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

type ParseResult<T> = Result<T, ScenarioError>;

fn parse_fail(line: usize, column: usize, message: impl Into<String>, token: &str) -> ScenarioError {
    ScenarioError::Parse(ParseError {
        line,
        column,
        message: message.into(),
        token: token.to_string(),
    })
}

fn invalid(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(ValidationError { message: message.into() })
}

/// A token with its 1-based column.
#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (char column base, byte offset)
    for (ci, (bi, ch)) in line.char_indices().enumerate() {
        if ch.is_whitespace() {
            if let Some((sc, sb)) = start.take() {
                tokens.push(Token { column: sc + 1, text: &line[sb..bi] });
            }
        } else if start.is_none() {
            start = Some((ci, bi));
        }
    }
    if let Some((sc, sb)) = start {
        tokens.push(Token { column: sc + 1, text: &line[sb..] });
    }
    tokens
}

/// Parses a probability literal: a decimal or a simple fraction `a/b`.
fn parse_prob(line: usize, tok: Token<'_>) -> ParseResult<f64> {
    let value = if let Some((num, den)) = tok.text.split_once('/') {
        let n: f64 = num
            .parse()
            .map_err(|_| parse_fail(line, tok.column, "expected probability", tok.text))?;
        let d: f64 = den
            .parse()
            .map_err(|_| parse_fail(line, tok.column, "expected probability", tok.text))?;
        if d == 0.0 {
            return Err(parse_fail(line, tok.column, "fraction with zero denominator", tok.text));
        }
        n / d
    } else {
        tok.text
            .parse()
            .map_err(|_| parse_fail(line, tok.column, "expected probability", tok.text))?
    };
    if !value.is_finite() {
        return Err(parse_fail(line, tok.column, "probability is not finite", tok.text));
    }
    Ok(value)
}

fn parse_bit(line: usize, tok: Token<'_>, text: &str) -> ParseResult<bool> {
    match text {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(parse_fail(line, tok.column, "expected bit 0 or 1", text)),
    }
}

#[derive(Debug)]
struct RawTruth {
    var: String,
    bits: Option<String>,
    prob: f64,
    line: usize,
}

#[derive(Debug, Default)]
struct Draft {
    name: Option<String>,
    variables: Vec<Variable>,
    edges: Vec<(String, String)>,
    grid: Option<Vec<f64>>,
    truths: Vec<RawTruth>,
    settings: Option<Settings>,
    pipelines: Vec<Pipeline>,
}

/// Parses scenario text into a validated [`Scenario`].
///
/// Parsing is total: any byte sequence yields a scenario or an error,
/// never a panic.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut draft = Draft::default();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let tokens = tokenize(line);
        let Some(head) = tokens.first() else { continue };
        match head.text {
            "scenario" => parse_scenario_line(&mut draft, line_no, &tokens)?,
            "var" => parse_var_line(&mut draft, line_no, &tokens)?,
            "edge" => parse_edge_line(&mut draft, line_no, &tokens)?,
            "grid" => parse_grid_line(&mut draft, line_no, &tokens)?,
            "truth" => parse_truth_line(&mut draft, line_no, &tokens)?,
            "settings" => parse_settings_line(&mut draft, line_no, &tokens)?,
            "pipeline" => parse_pipeline_line(&mut draft, line_no, line, &tokens)?,
            other => {
                return Err(parse_fail(line_no, head.column, "unknown directive", other));
            }
        }
    }
    validate(draft)
}

fn expect_arity(line: usize, tokens: &[Token<'_>], want: usize, usage: &str) -> ParseResult<()> {
    if tokens.len() != want {
        let (column, token) = tokens
            .get(want.min(tokens.len().saturating_sub(1)))
            .map(|t| (t.column, t.text))
            .unwrap_or((1, ""));
        return Err(parse_fail(line, column, format!("expected `{usage}`"), token));
    }
    Ok(())
}

fn parse_scenario_line(draft: &mut Draft, line: usize, tokens: &[Token<'_>]) -> ParseResult<()> {
    expect_arity(line, tokens, 2, "scenario <name>")?;
    if draft.name.is_some() {
        return Err(parse_fail(line, tokens[0].column, "duplicate scenario directive", tokens[1].text));
    }
    draft.name = Some(tokens[1].text.to_string());
    Ok(())
}

fn parse_var_line(draft: &mut Draft, line: usize, tokens: &[Token<'_>]) -> ParseResult<()> {
    if tokens.len() != 3 && tokens.len() != 4 {
        let t = tokens.last().unwrap();
        return Err(parse_fail(line, t.column, "expected `var <name> (obs|hidden) [treatment|outcome]`", t.text));
    }
    let name = tokens[1].text.to_string();
    let visibility = match tokens[2].text {
        "obs" => Visibility::Observed,
        "hidden" => Visibility::Hidden,
        other => return Err(parse_fail(line, tokens[2].column, "expected `obs` or `hidden`", other)),
    };
    let role = match tokens.get(3).map(|t| t.text) {
        None => Role::None,
        Some("treatment") => Role::Treatment,
        Some("outcome") => Role::Outcome,
        Some(other) => {
            return Err(parse_fail(line, tokens[3].column, "expected `treatment` or `outcome`", other))
        }
    };
    draft.variables.push(Variable::new(name, visibility, role));
    Ok(())
}

fn parse_edge_line(draft: &mut Draft, line: usize, tokens: &[Token<'_>]) -> ParseResult<()> {
    expect_arity(line, tokens, 3, "edge <parent> <child>")?;
    draft.edges.push((tokens[1].text.to_string(), tokens[2].text.to_string()));
    Ok(())
}

fn parse_grid_line(draft: &mut Draft, line: usize, tokens: &[Token<'_>]) -> ParseResult<()> {
    if draft.grid.is_some() {
        return Err(parse_fail(line, tokens[0].column, "duplicate grid directive", ""));
    }
    if tokens.len() < 2 {
        return Err(parse_fail(line, tokens[0].column, "expected `grid <p1> <p2> ...`", ""));
    }
    let mut levels = Vec::with_capacity(tokens.len() - 1);
    for tok in &tokens[1..] {
        levels.push(parse_prob(line, *tok)?);
    }
    draft.grid = Some(levels);
    Ok(())
}

fn parse_truth_line(draft: &mut Draft, line: usize, tokens: &[Token<'_>]) -> ParseResult<()> {
    // truth <var> = <prob>   |   truth <var> <bits> = <prob>
    let (bits, eq_at) = match tokens.get(2).map(|t| t.text) {
        Some("=") => (None, 2),
        _ => (tokens.get(2).map(|t| t.text.to_string()), 3),
    };
    if tokens.len() != eq_at + 2 || tokens.get(eq_at).map(|t| t.text) != Some("=") {
        let t = tokens.last().unwrap();
        return Err(parse_fail(line, t.column, "expected `truth <var> [bits] = <prob>`", t.text));
    }
    if let Some(b) = &bits {
        if b.is_empty() || !b.chars().all(|c| c == '0' || c == '1') {
            return Err(parse_fail(line, tokens[2].column, "expected a parent tuple of bits", b));
        }
        if b.len() > 20 {
            return Err(parse_fail(line, tokens[2].column, "parent tuple too long", b));
        }
    }
    let prob = parse_prob(line, tokens[eq_at + 1])?;
    draft.truths.push(RawTruth { var: tokens[1].text.to_string(), bits, prob, line });
    Ok(())
}

fn parse_settings_line(draft: &mut Draft, line: usize, tokens: &[Token<'_>]) -> ParseResult<()> {
    if draft.settings.is_some() {
        return Err(parse_fail(line, tokens[0].column, "duplicate settings directive", ""));
    }
    let mut settings = Settings::default();
    let mut seen: Vec<&str> = Vec::new();
    for tok in &tokens[1..] {
        let Some((key, value)) = tok.text.split_once('=') else {
            return Err(parse_fail(line, tok.column, "expected `key=value`", tok.text));
        };
        if seen.contains(&key) {
            return Err(parse_fail(line, tok.column, "duplicate settings key", key));
        }
        let vtok = Token { column: tok.column + key.len() + 1, text: value };
        match key {
            "epsilon" => settings.epsilon = parse_prob(line, vtok)?,
            "eps_id" => settings.eps_id = parse_prob(line, vtok)?,
            "bins" => {
                settings.bins = value
                    .parse()
                    .map_err(|_| parse_fail(line, vtok.column, "expected a positive integer", value))?
            }
            "quantum" => settings.quantum = parse_prob(line, vtok)?,
            "cap" => {
                settings.cap = value
                    .parse()
                    .map_err(|_| parse_fail(line, vtok.column, "expected a positive integer", value))?
            }
            other => return Err(parse_fail(line, tok.column, "unknown settings key", other)),
        }
        seen.push(key);
    }
    draft.settings = Some(settings);
    Ok(())
}

fn parse_pipeline_line(
    draft: &mut Draft,
    line_no: usize,
    line: &str,
    tokens: &[Token<'_>],
) -> ParseResult<()> {
    let Some(colon) = line.find(':') else {
        return Err(parse_fail(line_no, tokens[0].column, "expected `pipeline <label>: <steps>`", ""));
    };
    let head = &line[..colon];
    let head_tokens = tokenize(head);
    if head_tokens.len() != 2 {
        return Err(parse_fail(
            line_no,
            head_tokens.last().map(|t| t.column).unwrap_or(1),
            "expected a single pipeline label before `:`",
            head.trim(),
        ));
    }
    let label = head_tokens[1].text.to_string();
    let body = &line[colon + 1..];
    let body_col = head.chars().count() + 1;
    let mut steps = Vec::new();
    for chunk in body.split(';') {
        let chunk_tokens = tokenize(chunk);
        if chunk_tokens.is_empty() {
            return Err(parse_fail(line_no, body_col, "empty pipeline step", ";"));
        }
        steps.push(parse_step(line_no, body_col, &chunk_tokens)?);
    }
    draft
        .pipelines
        .push(Pipeline::new(label, steps).map_err(|e| invalid(e.to_string()))?);
    Ok(())
}

fn parse_step(line: usize, base_col: usize, tokens: &[Token<'_>]) -> ParseResult<Operation> {
    let col = |t: &Token<'_>| base_col + t.column;
    match tokens[0].text {
        "restrict" | "stratify" => {
            if tokens.len() != 2 {
                return Err(parse_fail(line, col(&tokens[0]), "expected `<var>=<bit>`", tokens[0].text));
            }
            let Some((var, bit)) = tokens[1].text.split_once('=') else {
                return Err(parse_fail(line, col(&tokens[1]), "expected `<var>=<bit>`", tokens[1].text));
            };
            let value = parse_bit(line, tokens[1], bit)?;
            if var.is_empty() {
                return Err(parse_fail(line, col(&tokens[1]), "missing variable name", tokens[1].text));
            }
            Ok(if tokens[0].text == "restrict" {
                Operation::restrict(var, value)
            } else {
                Operation::stratify(var, value)
            })
        }
        "adjust" => {
            if tokens.len() != 2 {
                return Err(parse_fail(line, col(&tokens[0]), "expected `adjust <var>`", tokens[0].text));
            }
            Ok(Operation::adjust(tokens[1].text))
        }
        "intervene" => {
            if tokens.len() != 3 {
                return Err(parse_fail(
                    line,
                    col(&tokens[0]),
                    "expected `intervene <var> p=<prob>`",
                    tokens[0].text,
                ));
            }
            let Some(value) = tokens[2].text.strip_prefix("p=") else {
                return Err(parse_fail(line, col(&tokens[2]), "expected `p=<prob>`", tokens[2].text));
            };
            let p = parse_prob(line, Token { column: tokens[2].column + 2, text: value })?;
            Ok(Operation::intervene(tokens[1].text, p))
        }
        other => Err(parse_fail(line, col(&tokens[0]), "unknown pipeline step", other)),
    }
}

fn validate(draft: Draft) -> Result<Scenario, ScenarioError> {
    let name = draft.name.ok_or_else(|| invalid("missing `scenario <name>` directive"))?;
    if draft.variables.is_empty() {
        return Err(invalid("scenario declares no variables"));
    }

    let edge_refs: Vec<(&str, &str)> =
        draft.edges.iter().map(|(p, c)| (p.as_str(), c.as_str())).collect();
    let diagram = CausalDiagram::new(draft.variables, &edge_refs)
        .map_err(|e| invalid(e.to_string()))?;

    diagram.treatment().map_err(|e| invalid(e.to_string()))?;
    diagram.outcome().map_err(|e| invalid(e.to_string()))?;

    let grid = ParameterGrid::new(draft.grid.unwrap_or_else(|| crate::DEFAULT_GRID.to_vec()))
        .map_err(|e| invalid(e.to_string()))?;

    // Assemble CPTs: one probability per (variable, parent tuple).
    let mut tables: Vec<BTreeMap<usize, f64>> =
        (0..diagram.var_count()).map(|_| BTreeMap::new()).collect();
    for t in &draft.truths {
        let v = diagram
            .index_of(&t.var)
            .map_err(|_| invalid(format!("truth line {} names undeclared variable `{}`", t.line, t.var)))?;
        let parents = diagram.parents(v).len();
        let row = match &t.bits {
            None if parents == 0 => 0usize,
            None => {
                return Err(invalid(format!(
                    "truth for `{}` needs a {parents}-bit parent tuple (line {})",
                    t.var, t.line
                )))
            }
            Some(bits) if bits.len() == parents => {
                bits.chars().fold(0usize, |acc, c| (acc << 1) | usize::from(c == '1'))
            }
            Some(bits) => {
                return Err(invalid(format!(
                    "truth for `{}` has a {}-bit tuple, expected {parents} (line {})",
                    t.var,
                    bits.len(),
                    t.line
                )))
            }
        };
        if !(0.0..=1.0).contains(&t.prob) {
            return Err(invalid(format!(
                "truth probability {} for `{}` outside [0, 1] (line {})",
                t.prob, t.var, t.line
            )));
        }
        if tables[v].insert(row, t.prob).is_some() {
            return Err(invalid(format!(
                "duplicate truth entry for `{}` (line {})",
                t.var, t.line
            )));
        }
    }
    let mut mechanisms = Vec::with_capacity(diagram.var_count());
    for (v, table) in tables.iter().enumerate() {
        let rows = 1usize << diagram.parents(v).len();
        let name = &diagram.variable(v).name;
        if table.len() != rows {
            return Err(invalid(format!(
                "truth for `{name}` has {} entries, expected {rows}",
                table.len()
            )));
        }
        let probs: Vec<f64> = (0..rows).map(|r| table[&r]).collect();
        mechanisms.push(
            Mechanism::new(v, diagram.parents(v).to_vec(), probs)
                .map_err(|e| invalid(e.to_string()))?,
        );
    }
    let ground_truth =
        StructuralModel::new(diagram.clone(), mechanisms).map_err(|e| invalid(e.to_string()))?;

    let settings = draft.settings.unwrap_or_default();
    let positive = |v: f64| v.partial_cmp(&0.0) == Some(std::cmp::Ordering::Greater);
    if !positive(settings.epsilon)
        || !positive(settings.eps_id)
        || settings.bins == 0
        || !positive(settings.quantum)
        || settings.cap == 0
    {
        return Err(invalid("settings must all be positive"));
    }

    if draft.pipelines.is_empty() {
        return Err(invalid("scenario declares no pipelines"));
    }
    for (i, p) in draft.pipelines.iter().enumerate() {
        if draft.pipelines[..i].iter().any(|q| q.label == p.label) {
            return Err(invalid(format!("duplicate pipeline label `{}`", p.label)));
        }
        for op in &p.steps {
            validate_step(&diagram, &p.label, op)?;
        }
    }

    Ok(Scenario { name, diagram, grid, ground_truth, pipelines: draft.pipelines, settings })
}

fn validate_step(diagram: &CausalDiagram, label: &str, op: &Operation) -> ParseResult<()> {
    let observed_only = |name: &str| -> ParseResult<()> {
        let v = diagram.index_of(name).map_err(|_| {
            invalid(format!("pipeline `{label}` references undeclared variable `{name}`"))
        })?;
        if diagram.variable(v).visibility != Visibility::Observed {
            return Err(invalid(format!(
                "pipeline `{label}` references hidden variable `{name}`"
            )));
        }
        Ok(())
    };
    match op {
        Operation::Restrict(event) => {
            for (name, _) in event.clauses() {
                observed_only(name)?;
            }
        }
        Operation::Condition { variable, .. } => observed_only(variable)?,
        Operation::Intervene { variable, probability } => {
            diagram.index_of(variable).map_err(|_| {
                invalid(format!("pipeline `{label}` intervenes on undeclared variable `{variable}`"))
            })?;
            if !(0.0..=1.0).contains(probability) {
                return Err(invalid(format!(
                    "pipeline `{label}` intervention probability {probability} outside [0, 1]"
                )));
            }
        }
    }
    Ok(())
}

/// Renders a scenario in canonical form; `parse_scenario(render_scenario(s))`
/// reproduces `s` structurally, and rendering is deterministic.
pub fn render_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenario {}\n", s.name));
    for v in s.diagram.variables() {
        let vis = match v.visibility {
            Visibility::Observed => "obs",
            Visibility::Hidden => "hidden",
        };
        let role = match v.role {
            Role::Treatment => " treatment",
            Role::Outcome => " outcome",
            _ => "",
        };
        out.push_str(&format!("var {} {}{}\n", v.name, vis, role));
    }
    for &(p, c) in s.diagram.edges() {
        out.push_str(&format!(
            "edge {} {}\n",
            s.diagram.variable(p).name,
            s.diagram.variable(c).name
        ));
    }
    let levels: Vec<String> = s.grid.levels().iter().map(|l| l.to_string()).collect();
    out.push_str(&format!("grid {}\n", levels.join(" ")));
    for (v, mech) in s.ground_truth.mechanisms().iter().enumerate() {
        let name = &s.diagram.variable(v).name;
        let parents = mech.parents.len();
        if parents == 0 {
            out.push_str(&format!("truth {} = {}\n", name, mech.probs[0]));
        } else {
            for (row, p) in mech.probs.iter().enumerate() {
                let bits: String =
                    (0..parents).rev().map(|b| if (row >> b) & 1 == 1 { '1' } else { '0' }).collect();
                out.push_str(&format!("truth {} {} = {}\n", name, bits, p));
            }
        }
    }
    out.push_str(&format!(
        "settings epsilon={} eps_id={} bins={} quantum={} cap={}\n",
        s.settings.epsilon, s.settings.eps_id, s.settings.bins, s.settings.quantum, s.settings.cap
    ));
    for p in &s.pipelines {
        let steps: Vec<String> = p.steps.iter().map(|op| op.to_string()).collect();
        out.push_str(&format!("pipeline {}: {}\n", p.label, steps.join(" ; ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
scenario tiny
var T obs treatment
var Y obs outcome
edge T Y
grid 0 0.5 1
truth T = 0.5
truth Y 0 = 0
truth Y 1 = 1
pipeline id: adjust T
";

    #[test]
    fn parses_minimal_scenario() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.name, "tiny");
        assert_eq!(s.diagram.var_count(), 2);
        assert_eq!(s.grid.levels(), &[0.0, 0.5, 1.0]);
        assert_eq!(s.settings, Settings::default());
        assert_eq!(s.pipelines.len(), 1);
    }

    #[test]
    fn roundtrip_is_structural_identity() {
        let s = parse_scenario(MINIMAL).unwrap();
        let rendered = render_scenario(&s);
        let s2 = parse_scenario(&rendered).unwrap();
        assert_eq!(s, s2);
        // Deterministic rendering.
        assert_eq!(rendered, render_scenario(&s2));
    }

    #[test]
    fn undeclared_edge_variable_is_validation_error() {
        let text = MINIMAL.replace("edge T Y", "edge T Z");
        match parse_scenario(&text) {
            Err(ScenarioError::Validation(e)) => assert!(e.message.contains('Z'), "{e}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn cycle_is_validation_error() {
        let text = MINIMAL.replace("edge T Y", "edge T Y\nedge Y T");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Validation(_))));
    }

    #[test]
    fn unknown_directive_is_parse_error_with_position() {
        let text = format!("{MINIMAL}frobnicate 12\n");
        match parse_scenario(&text) {
            Err(ScenarioError::Parse(e)) => {
                assert_eq!(e.line, 10);
                assert_eq!(e.column, 1);
                assert_eq!(e.token, "frobnicate");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_probability_points_at_token() {
        let text = MINIMAL.replace("truth T = 0.5", "truth T = banana");
        match parse_scenario(&text) {
            Err(ScenarioError::Parse(e)) => {
                assert_eq!(e.token, "banana");
                assert!(e.column > 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn fractions_are_accepted() {
        let text = MINIMAL.replace("truth T = 0.5", "truth T = 1/2");
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.ground_truth.mechanisms()[0].probs[0], 0.5);
    }

    #[test]
    fn arity_mismatch_is_validation_error() {
        let text = MINIMAL.replace("truth Y 1 = 1\n", "");
        match parse_scenario(&text) {
            Err(ScenarioError::Validation(e)) => assert!(e.message.contains("expected 2"), "{e}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn missing_roles_are_validation_errors() {
        let text = MINIMAL.replace(" treatment", "");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Validation(_))));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = format!("# header\n\n{MINIMAL}# trailing\n");
        assert!(parse_scenario(&text).is_ok());
    }

    #[test]
    fn hidden_variable_in_pipeline_is_rejected() {
        let text = MINIMAL
            .replace("var T obs treatment", "var T obs treatment\nvar H hidden")
            .replace("pipeline id: adjust T", "pipeline id: restrict H=1");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Validation(_))));
    }

    #[test]
    fn empty_input_is_error_not_panic() {
        assert!(parse_scenario("").is_err());
        assert!(parse_scenario("\n\n#only comments\n").is_err());
    }
}
