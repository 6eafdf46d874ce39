use super::{best_of, CapacityReport, SolverOptions, Witness, DELTA_EIG};
use crate::error::{Error, Result};
use crate::info::Ensemble;
use crate::linalg::{self, c, CMatrix, CVector};
use crate::quantum::random::{random_vector_with, rng};
use crate::quantum::{Channel, Register};

const ARMIJO: f64 = 1e-4;
/// Iterations without objective progress before a run counts as stationary.
const STALL_WINDOW: usize = 200;

fn log2_reg(m: &CMatrix) -> CMatrix {
    linalg::hermitian_fn(m, |x| x.max(DELTA_EIG).log2())
}

fn outputs(ch: &Channel, states: &[CVector]) -> Vec<CMatrix> {
    states.iter().map(|v| ch.apply_matrix(&linalg::outer(v))).collect()
}

fn average(probs: &[f64], outs: &[CMatrix]) -> CMatrix {
    let d = outs[0].nrows();
    let mut avg = CMatrix::zeros(d, d);
    for (p, s) in probs.iter().zip(outs) {
        avg += s * c(*p, 0.0);
    }
    avg
}

fn chi_from_outputs(probs: &[f64], outs: &[CMatrix]) -> f64 {
    let mut v = linalg::entropy_of(&average(probs, outs));
    for (p, s) in probs.iter().zip(outs) {
        if *p > 0.0 {
            v -= p * linalg::entropy_of(s);
        }
    }
    v
}

/// Holevo quantity of the pure-state ensemble `{p_w, ψ_w}` sent through `ch`.
pub fn holevo_objective(ch: &Channel, probs: &[f64], states: &[CVector]) -> f64 {
    chi_from_outputs(probs, &outputs(ch, states))
}

/// Euclidean gradients `2 G_w ψ_w` of [`holevo_objective`] with respect to
/// each state vector, where `G_w = p_w E†(log σ_w − log σ̄)`.
pub fn holevo_gradients(ch: &Channel, probs: &[f64], states: &[CVector]) -> Vec<CVector> {
    let outs = outputs(ch, states);
    let log_avg = log2_reg(&average(probs, &outs));
    outs.iter()
        .zip(probs)
        .zip(states)
        .map(|((s, p), v)| {
            let g = ch.adjoint_apply(&(log2_reg(s) - &log_avg)) * c(2.0 * p, 0.0);
            g * v
        })
        .collect()
}

fn normalized(v: CVector) -> CVector {
    let n = v.norm();
    v / c(n, 0.0)
}

fn single_run(ch: &Channel, opts: &SolverOptions, seed: u64) -> (CapacityReport, Vec<f64>, Vec<CVector>) {
    let d = ch.dim_in();
    let k = d * d;
    let mut r = rng(seed);
    let mut states: Vec<CVector> = (0..k).map(|_| random_vector_with(&mut r, d)).collect();
    let mut probs = vec![1.0 / k as f64; k];
    let mut outs = outputs(ch, &states);
    let mut chi = chi_from_outputs(&probs, &outs);
    let mut history = vec![chi];
    let mut eta = 1.0;
    let mut norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = 0;
    while iterations < opts.max_iters {
        // Probability step: one Blahut–Arimoto update on the induced cq channel.
        let log_avg = log2_reg(&average(&probs, &outs));
        let div: Vec<f64> = outs
            .iter()
            .map(|s| -linalg::entropy_of(s) - linalg::trace_product(s, &log_avg).re)
            .collect();
        let ba_gap = div.iter().copied().fold(f64::MIN, f64::max) - chi;
        let weights: Vec<f64> = probs.iter().zip(&div).map(|(p, dv)| p * dv.exp2()).collect();
        let z: f64 = weights.iter().sum();
        probs = weights.iter().map(|w| w / z).collect();
        let before = chi;
        chi = chi_from_outputs(&probs, &outs);

        // State step: Riemannian gradient on each sphere, shared Armijo step.
        let raw = holevo_gradients(ch, &probs, &states);
        let tangent: Vec<CVector> = raw
            .iter()
            .zip(&states)
            .map(|(g, v)| {
                let along = v.dotc(g);
                g - v * along
            })
            .collect();
        norm = tangent.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        iterations += 1;
        if norm < opts.tol && ba_gap < opts.tol {
            converged = true;
            history.push(chi);
            break;
        }
        if norm >= opts.tol {
            while eta > 1e-16 {
                let trial: Vec<CVector> =
                    states.iter().zip(&tangent).map(|(v, g)| normalized(v + g * c(eta, 0.0))).collect();
                let trial_outs = outputs(ch, &trial);
                let trial_chi = chi_from_outputs(&probs, &trial_outs);
                if trial_chi >= chi + ARMIJO * eta * norm * norm {
                    states = trial;
                    outs = trial_outs;
                    chi = trial_chi;
                    eta = (eta * 2.0).min(1e6);
                    break;
                }
                eta *= 0.5;
            }
            if eta <= 1e-16 {
                eta = 1e-3;
            }
        }
        history.push(chi);
        stalled = if chi - before <= 1e-15 { stalled + 1 } else { 0 };
        if stalled >= STALL_WINDOW {
            converged = ba_gap < opts.tol && norm < opts.tol.sqrt();
            break;
        }
    }
    let value = holevo_objective(ch, &probs, &states);
    let report = CapacityReport {
        value,
        witness: Witness::Distribution(Vec::new()),
        iterations,
        final_step_norm: norm,
        converged,
        upper_bound: None,
        history,
    };
    (report, probs, states)
}

/// Alternating maximization of the Holevo quantity over ensembles of
/// `dim_in²` pure states. The reported value is attained by the witness,
/// so it is a lower bound on `χ(E)`.
pub fn holevo_information(ch: &Channel, opts: &SolverOptions) -> Result<CapacityReport> {
    if ch.dim_in() > opts.max_dim {
        return Err(Error::Infeasible(format!("input dimension {} exceeds cap {}", ch.dim_in(), opts.max_dim)));
    }
    let restarts = opts.restarts.unwrap_or(8).max(1);
    let runs = opts
        .execution
        .map_range(restarts, |r| single_run(ch, opts, opts.seed.wrapping_add(r as u64)));
    let register = Register::new(ch.input().label(), ch.dim_in())?;
    let mut reports = Vec::with_capacity(runs.len());
    for (mut report, probs, states) in runs {
        report.witness = Witness::Ensemble(Ensemble::from_pure(&register, &probs, &states)?);
        reports.push(report);
    }
    Ok(best_of(reports))
}
