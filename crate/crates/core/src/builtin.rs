//! Canonical scenarios shipped with the engine.
//!
//! - `fig1`: the minimal observational system — a hidden confounder `U`
//!   drives proxy `X` and outcome `Y`, treatment follows the proxy. `X`
//!   blocks the backdoor path, so adjusting for it identifies the effect,
//!   while restricting on it first destroys the variation adjustment needs.
//! - `s2`: the same system with a direct `U -> T` edge, so the proxy can
//!   no longer block confounding and the effect is only partially
//!   identified from any observed law.
//! - `trial`: an idealized randomized trial with eligibility `V`,
//!   `V`- and `T`-dependent adherence `A`, and the per-protocol pipeline
//!   restrict(V=1); intervene(T, 0.5); restrict(A=1).
//! - `independent`: two restrictions on causally unconnected covariates —
//!   the commuting control case.
//!
//! Ground-truth CPTs lie exactly on each scenario's grid so the canonical
//! law is reachable by enumeration at the default matching tolerance.

use crate::scenario::{parse_scenario, Scenario};

pub const FIG1: &str = "\
scenario fig1
var U hidden
var X obs
var T obs treatment
var Y obs outcome
edge U X
edge U Y
edge X T
edge T Y
grid 0 0.25 0.5 0.75 1
truth U = 0.5
truth X 0 = 0.25
truth X 1 = 0.75
truth T 0 = 0.25
truth T 1 = 0.75
truth Y 00 = 0
truth Y 01 = 0.5
truth Y 10 = 0.5
truth Y 11 = 1
settings epsilon=0.02 eps_id=0.05 bins=41 quantum=0.000001 cap=100000000
pipeline CR: adjust X
pipeline RC: restrict X=1 ; adjust X
";

pub const S2: &str = "\
scenario s2
var U hidden
var X obs
var T obs treatment
var Y obs outcome
edge U X
edge U T
edge U Y
edge X T
edge T Y
grid 0 0.5 1
truth U = 0.5
truth X 0 = 0.5
truth X 1 = 1
truth T 00 = 0.5
truth T 01 = 0
truth T 10 = 0.5
truth T 11 = 1
truth Y 00 = 0
truth Y 01 = 0.5
truth Y 10 = 0.5
truth Y 11 = 1
settings epsilon=0.02 eps_id=0.05 bins=41 quantum=0.000001 cap=100000000
pipeline CR: adjust X
pipeline RC: restrict X=1 ; adjust X
";

pub const TRIAL: &str = "\
scenario trial
var V obs
var T obs treatment
var A obs
var Y obs outcome
edge V A
edge V Y
edge T A
edge T Y
grid 0 0.5 1
truth V = 0.5
truth T = 0.5
truth A 00 = 0.5
truth A 01 = 0.5
truth A 10 = 0.5
truth A 11 = 1
truth Y 00 = 0
truth Y 01 = 0.5
truth Y 10 = 0
truth Y 11 = 1
settings epsilon=0.02 eps_id=0.05 bins=41 quantum=0.000001 cap=100000000
pipeline trial: restrict V=1 ; intervene T p=0.5 ; restrict A=1
";

pub const INDEPENDENT: &str = "\
scenario independent
var A obs
var B obs
var T obs treatment
var Y obs outcome
edge T Y
grid 0 0.5 1
truth A = 0.5
truth B = 0.5
truth T = 0.5
truth Y 0 = 0
truth Y 1 = 1
settings epsilon=0.02 eps_id=0.05 bins=41 quantum=0.000001 cap=100000000
pipeline AB: restrict A=1 ; restrict B=1
pipeline BA: restrict B=1 ; restrict A=1
";

pub const NAMES: [&str; 4] = ["fig1", "s2", "trial", "independent"];

/// Scenario text by builtin name.
pub fn text(name: &str) -> Option<&'static str> {
    match name {
        "fig1" => Some(FIG1),
        "s2" => Some(S2),
        "trial" => Some(TRIAL),
        "independent" => Some(INDEPENDENT),
        _ => None,
    }
}

/// Parsed builtin scenario.
pub fn scenario(name: &str) -> Option<Scenario> {
    text(name).map(|t| parse_scenario(t).expect("builtin scenarios are valid"))
}
