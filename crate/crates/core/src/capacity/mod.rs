//! Numerical capacity functionals: channel mutual information `I(E)`,
//! Holevo information `χ(E)`, the classical Blahut–Arimoto capacity and a
//! brute-force qubit oracle for `I(E)`.

mod blahut_arimoto;
mod brute_force;
mod holevo;
mod mutual_info;

use serde::{Deserialize, Serialize};

pub use blahut_arimoto::{blahut_arimoto, classical_mutual_information};
pub use brute_force::{brute_force_qubit_mi, BruteForceResult};
pub use holevo::{holevo_gradients, holevo_information, holevo_objective};
pub use mutual_info::{channel_mi_gradient, channel_mi_objective, channel_mi_upper_bound, channel_mutual_information};

use crate::exec::Execution;
use crate::info::Ensemble;
use crate::quantum::DensityOperator;

/// Eigenvalue floor inside matrix logarithms used for gradients.
pub const DELTA_EIG: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Gradient-norm threshold for convergence. A run whose objective stops
    /// moving at machine precision also counts as converged once its
    /// gradient norm is below `√tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Number of random starts; `None` picks the per-solver default
    /// (1 for `I(E)`, 8 for `χ(E)`).
    pub restarts: Option<usize>,
    pub seed: u64,
    /// Input dimension cap.
    pub max_dim: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iters: 5000, restarts: None, seed: 0, max_dim: 64, execution: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    State(DensityOperator),
    Ensemble(Ensemble),
    Distribution(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    #[serde(rename = "value_bits")]
    pub value: f64,
    pub witness: Witness,
    pub iterations: usize,
    pub final_step_norm: f64,
    pub converged: bool,
    /// Certified upper bound on the optimum, when the solver has one.
    #[serde(rename = "upper_bound_bits", skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    /// Objective value after each iteration of the best run.
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// Helper shared by the solvers: pick the best run, lowest index on ties.
pub(crate) fn best_of(runs: Vec<CapacityReport>) -> CapacityReport {
    let mut best: Option<CapacityReport> = None;
    for r in runs {
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    best.expect("at least one run")
}
