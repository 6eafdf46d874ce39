//! Back-assisted randomness distribution by random binning.
//!
//! Alice prepares `ψ_RX` `n` times and sends each `X` through a qc channel,
//! so Bob holds `Yⁿ` and Alice holds `Rⁿ`. Bob keeps `K = Yⁿ` and sends the
//! label of a random bin of rate `H(Y|R) + δ` containing it. Alice decodes
//! with the pretty-good measurement of that bin. Atypical sequences are left
//! unbinned and count as errors.

mod binning;
mod decoder;
mod run;
mod source;

pub use binning::{bin_count, is_typical, random_binning, Binning, MAX_SEQUENCES};
pub use decoder::{pgm_decoder, DEFAULT_MAX_DECODER_DIM};
pub use run::{dw_sweep, run_dw, DwMode, DwOptions, DwReport, CSV_HEADER, EXACT_LIMIT};
pub use source::{build_source, CqSource};
