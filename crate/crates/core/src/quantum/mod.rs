//! Dense finite-dimensional quantum states, measurements and channels.

mod channel;
pub(crate) mod layout;
mod povm;
pub mod random;
mod register;
mod special;
pub mod spec_json;
mod state;

pub use channel::{Channel, ChannelKind};
pub use povm::Povm;
pub use register::Register;
pub use special::{
    computational_basis, example_channel_f, fourier_basis, fourier_matrix, maximally_entangled_state,
    mub_measurement_channel,
};
pub use state::{DensityOperator, MeasurementBranch, PureState};

/// Hermiticity tolerance (max entrywise deviation from the adjoint).
pub const TAU_HERM: f64 = 1e-9;
/// Most negative eigenvalue accepted (and clipped) in a state.
pub const TAU_PSD: f64 = 1e-9;
pub const TAU_TRACE: f64 = 1e-9;
pub const TAU_POVM: f64 = 1e-9;
/// Post-measurement states are only defined above this probability.
pub const TAU_PROB: f64 = 1e-12;
/// Tolerance for the compositional qc/cq identities.
pub const TAU_CHAN: f64 = 1e-9;
