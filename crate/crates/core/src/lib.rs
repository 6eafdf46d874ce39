//! Simulation of classically assisted randomness distribution and
//! communication over finite-dimensional quantum channels.
//!
//! The crate is organized bottom-up:
//!
//! * [`quantum`]: registers, density operators, POVMs and channels.
//! * [`info`]: entropies, mutual information and Holevo quantities.
//! * [`capacity`]: numerical channel mutual information `I(E)`, Holevo
//!   information `χ(E)` and a classical Blahut–Arimoto solver.
//! * [`protocol`]: exact simulation of assisted protocols with the
//!   information-flow audit.
//! * [`dw`]: random-binning distillation with a pretty-good-measurement
//!   decoder.
//!
//! All entropies are in bits.

pub mod error;
pub mod capacity;
pub mod dw;
pub mod exec;
pub mod info;
pub mod linalg;
pub mod protocol;
pub mod quantum;

pub use error::{Error, Result};
pub use exec::Execution;
