//! Shared fixtures for unit tests.

use crate::model::{CausalDiagram, Mechanism, Role, StructuralModel, Variable, Visibility};

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

/// The canonical fig1 ground truth shipped with the `fig1` builtin.
pub(crate) fn fig1_canonical() -> StructuralModel {
    StructuralModel::new(
        fig1_diagram(),
        vec![
            Mechanism::new(0, vec![], vec![0.5]).unwrap(),
            Mechanism::new(1, vec![0], vec![0.25, 0.75]).unwrap(),
            Mechanism::new(2, vec![1], vec![0.25, 0.75]).unwrap(),
            Mechanism::new(3, vec![0, 2], vec![0.0, 0.5, 0.5, 1.0]).unwrap(),
        ],
    )
    .unwrap()
}

/// Two-variable randomized class: T -> Y only.
pub(crate) fn ty_diagram() -> CausalDiagram {
    CausalDiagram::new(
        vec![
            Variable::new("T", Visibility::Observed, Role::Treatment),
            Variable::new("Y", Visibility::Observed, Role::Outcome),
        ],
        &[("T", "Y")],
    )
    .unwrap()
}

pub(crate) fn ty_model(p_t: f64, y0: f64, y1: f64) -> StructuralModel {
    StructuralModel::new(
        ty_diagram(),
        vec![
            Mechanism::new(0, vec![], vec![p_t]).unwrap(),
            Mechanism::new(1, vec![0], vec![y0, y1]).unwrap(),
        ],
    )
    .unwrap()
}
