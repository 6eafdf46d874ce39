use serde::{Deserialize, Serialize};

use super::model::Protocol;
use super::report::TraceReport;
use super::run::{run_exact, RunOptions};
use crate::capacity::{channel_mutual_information, SolverOptions};
use crate::error::{Error, Result};
use crate::info::TAU_MI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub step: usize,
    pub kind: String,
    /// `I(A_j:B_j) − I(A_{j−1}:B_{j−1})`, or `I(A_0:B_0)` for the initial state.
    #[serde(rename = "delta_bits")]
    pub delta: f64,
    #[serde(rename = "bound_bits")]
    pub bound: f64,
    #[serde(rename = "margin_bits")]
    pub margin: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub records: Vec<AuditRecord>,
    pub violations: usize,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Checks the per-step information-flow inequalities on a trace: the
/// initial correlation is zero, a noisy use adds at most `I(E)`, an
/// auxiliary message adds at most `H(Z_k|Z^{(k−1)})` and local processing
/// adds nothing. A noisy use without a recorded `I(E)` is a violation.
pub fn audit_trace(trace: &TraceReport) -> AuditReport {
    let mut records = Vec::with_capacity(trace.steps.len());
    let mut prev = 0.0;
    for s in &trace.steps {
        let delta = s.mutual_information - prev;
        let bound = match s.kind.as_str() {
            "noisy_use" => s.channel_mi.unwrap_or(f64::NAN),
            "aux_forward" | "aux_back" => s.aux_entropy.unwrap_or(f64::NAN),
            _ => 0.0,
        };
        let margin = bound + TAU_MI - delta;
        let ok = margin >= 0.0 && s.mutual_information.is_finite();
        records.push(AuditRecord { step: s.index, kind: s.kind.clone(), delta, bound, margin, ok });
        prev = s.mutual_information;
    }
    let violations = records.iter().filter(|r| !r.ok).count();
    AuditReport { records, violations }
}

/// Fills in missing `I(E)` values from the solver's certified upper bound
/// (or its value when no bound is available), runs the protocol exactly and
/// audits the trace.
pub fn mi_audit(protocol: &Protocol, run: &RunOptions, solver: &SolverOptions) -> Result<(TraceReport, AuditReport)> {
    let annotated = protocol.clone().with_channel_mi(|ch| {
        let r = channel_mutual_information(ch, solver)?;
        Ok(r.upper_bound.unwrap_or(r.value))
    })?;
    let trace = run_exact(&annotated, run)?;
    let audit = audit_trace(&trace);
    Ok((trace, audit))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goodness {
    pub epsilon: f64,
    pub c: f64,
    pub n: usize,
    #[serde(rename = "h_k_given_j_bits")]
    pub h_k_given_j: f64,
    /// `εcn + 1`.
    #[serde(rename = "fano_bound_bits")]
    pub fano_bound: f64,
    pub fano_holds: bool,
}

/// Fano check `H(K|J) ≤ εcn + 1` with `ε = Pr(J ≠ K)`.
pub fn goodness(trace: &TraceReport, c: f64, n: usize) -> Goodness {
    let epsilon = trace.pr_err;
    let fano_bound = epsilon * c * n as f64 + 1.0;
    Goodness {
        epsilon,
        c,
        n,
        h_k_given_j: trace.h_k_given_j,
        fano_bound,
        fano_holds: trace.h_k_given_j <= fano_bound + TAU_MI,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiConverse {
    #[serde(rename = "i_jk_bits")]
    pub i_jk: f64,
    #[serde(rename = "chi_n_bits")]
    pub chi_n: f64,
    #[serde(rename = "log_az_bits")]
    pub log_az: f64,
    pub holds: bool,
}

/// Forward-assisted converse `I(J:K) ≤ χ(E^{⊗n}) + log|A_Z|`.
pub fn chi_converse_check(trace: &TraceReport, chi_n: f64) -> Result<ChiConverse> {
    if trace.has_back_steps {
        return Err(Error::InvalidProtocol("the Holevo converse applies to forward-assisted protocols only".into()));
    }
    Ok(ChiConverse {
        i_jk: trace.i_jk,
        chi_n,
        log_az: trace.log_az,
        holds: trace.i_jk <= chi_n + trace.log_az + TAU_MI,
    })
}
