use std::f64::consts::LN_2;

use super::{best_of, CapacityReport, SolverOptions, Witness, DELTA_EIG};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::quantum::random::{ginibre, rng};
use crate::quantum::{Channel, DensityOperator, Register};

const ARMIJO: f64 = 1e-4;

fn log2_reg(m: &CMatrix) -> CMatrix {
    linalg::hermitian_fn(m, |x| x.max(DELTA_EIG).log2())
}

/// `f(ρ) = S(ρ) + S(E(ρ)) − S(E^c(ρ))`, the mutual information between the
/// channel output and a purifying reference.
pub fn channel_mi_objective(ch: &Channel, rho: &CMatrix) -> f64 {
    linalg::entropy_of(rho) + linalg::entropy_of(&ch.apply_matrix(rho)) - linalg::entropy_of(&ch.complementary_matrix(rho))
}

/// Gradient of [`channel_mi_objective`] with respect to `ρ` (as a Hermitian
/// matrix, under the pairing `tr(G δρ)`), valid for unnormalized `ρ` too.
pub fn channel_mi_gradient(ch: &Channel, rho: &CMatrix) -> CMatrix {
    let d = rho.nrows();
    let out = ch.apply_matrix(rho);
    let env = ch.complementary_matrix(rho);
    let g = -log2_reg(rho) - ch.adjoint_apply(&log2_reg(&out)) + ch.complementary_adjoint(&log2_reg(&env))
        - linalg::identity(d) * c(1.0 / LN_2, 0.0);
    linalg::hermitian_part(&g)
}

/// Duality-gap bound `f(ρ) + λ_max(G) − tr(Gρ)` on the maximum of the
/// concave objective. `None` when `ρ` is too close to the boundary for the
/// gradient to be trusted.
pub fn channel_mi_upper_bound(ch: &Channel, rho: &CMatrix) -> Option<f64> {
    let vals = linalg::eigenvalues_h(rho);
    if vals.first().copied().unwrap_or(0.0) < 1e-8 {
        return None;
    }
    let g = channel_mi_gradient(ch, rho);
    let top = *linalg::eigenvalues_h(&g).last()?;
    let gap = top - linalg::trace_product(&g, rho).re;
    Some(channel_mi_objective(ch, rho) + gap.max(0.0))
}

fn normalize(a: &mut CMatrix) {
    let n = a.norm();
    *a /= c(n, 0.0);
}

fn single_run(ch: &Channel, opts: &SolverOptions, seed: u64) -> CapacityReport {
    let d = ch.dim_in();
    let mut a = ginibre(&mut rng(seed), d, d);
    normalize(&mut a);
    let mut rho = &a * a.adjoint();
    let mut f = channel_mi_objective(ch, &rho);
    let mut history = vec![f];
    let mut eta = 1.0;
    let mut norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        let g = channel_mi_gradient(ch, &rho);
        let mean = linalg::trace_product(&g, &rho).re;
        let step = (g - linalg::identity(d) * c(mean, 0.0)) * &a * c(2.0, 0.0);
        norm = step.norm();
        if norm < opts.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let mut accepted = false;
        while eta > 1e-16 {
            let mut trial = &a + &step * c(eta, 0.0);
            normalize(&mut trial);
            let trial_rho = &trial * trial.adjoint();
            let trial_f = channel_mi_objective(ch, &trial_rho);
            if trial_f >= f + ARMIJO * eta * norm * norm {
                a = trial;
                rho = trial_rho;
                f = trial_f;
                eta = (eta * 2.0).min(1e6);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        history.push(f);
        if !accepted {
            // No representable ascent step is left.
            converged = norm < opts.tol.sqrt();
            break;
        }
    }
    let rho = linalg::hermitian_part(&rho);
    let value = channel_mi_objective(ch, &rho);
    let register = Register::new(ch.input().label(), d).expect("positive dimension");
    let upper_bound = channel_mi_upper_bound(ch, &rho);
    let witness = DensityOperator::new(vec![register], rho).expect("normalized by construction");
    CapacityReport {
        value,
        witness: Witness::State(witness),
        iterations,
        final_step_norm: norm,
        converged,
        upper_bound,
        history,
    }
}

/// Maximizes the channel mutual information over input states by gradient
/// ascent on `ρ = AA†/tr(AA†)` with Armijo backtracking.
pub fn channel_mutual_information(ch: &Channel, opts: &SolverOptions) -> Result<CapacityReport> {
    if ch.dim_in() > opts.max_dim {
        return Err(Error::Infeasible(format!("input dimension {} exceeds cap {}", ch.dim_in(), opts.max_dim)));
    }
    let restarts = opts.restarts.unwrap_or(1).max(1);
    let runs = opts
        .execution
        .map_range(restarts, |r| single_run(ch, opts, opts.seed.wrapping_add(r as u64)));
    Ok(best_of(runs))
}
