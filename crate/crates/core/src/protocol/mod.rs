//! Exact simulation of assisted randomness-distribution protocols.
//!
//! A protocol is a list of steps between Alice and Bob: uses of the noisy
//! channel (Alice to Bob), auxiliary classical messages in either direction,
//! and local instruments or classical maps. Every register has an owner.
//! [`run_exact`] tracks one branch per assignment of classical values, each
//! holding the conditional state of the live quantum registers, and reports
//! the final `(J, K, Z)` distribution together with `I(A_j:B_j)` after every
//! step. [`audit_trace`] turns the per-step information-flow inequalities
//! into runtime checks.

mod audit;
mod builders;
mod model;
mod report;
mod run;

pub use audit::{audit_trace, chi_converse_check, goodness, mi_audit, AuditRecord, AuditReport, ChiConverse, Goodness};
pub use builders::{
    coin_copy_protocol, f2_basis_forward_protocol, figure4_protocol, figure4_with, random_forward_protocol,
    random_protocol, shipped_suite, SuiteEntry,
};
pub use model::{ClassicalMap, Extractor, Instrument, LocalOp, Party, Protocol, ProtocolDraft, Step};
pub use report::{JointEntry, StepRecord, TraceReport};
pub use run::{run_exact, run_sampled, RunOptions, SampledReport, DEFAULT_MAX_DIM};

/// Resolves a builtin protocol name: `figure4:d=N` or `coin-copy`.
pub fn builtin(name: &str) -> crate::Result<Protocol> {
    if let Some(rest) = name.strip_prefix("figure4:d=") {
        let d: usize = rest
            .parse()
            .map_err(|_| crate::Error::Spec(format!("builtin {name:?}: d must be a positive integer")))?;
        if d < 2 {
            return Err(crate::Error::Spec(format!("builtin {name:?}: d must be at least 2")));
        }
        return figure4_protocol(d);
    }
    match name {
        "coin-copy" => coin_copy_protocol(),
        "f2-basis-forward" => f2_basis_forward_protocol(),
        _ => Err(crate::Error::Spec(format!("unknown builtin protocol {name:?}"))),
    }
}
