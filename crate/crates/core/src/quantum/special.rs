//! Named states, bases and the two-basis measurement channel.

use std::f64::consts::PI;

use super::{Channel, Povm, PureState, Register};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};

/// `(1/√d) Σ_i |i⟩_R |i⟩_X`.
pub fn maximally_entangled_state(d: usize) -> PureState {
    let mut v = CVector::zeros(d * d);
    let amp = c(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    let regs = vec![Register::new("R", d).expect("d >= 1"), Register::new("X", d).expect("d >= 1")];
    PureState::new(regs, v).expect("unit vector")
}

/// Unitary whose column `j` is `(1/√d) Σ_k ω^{jk} |k⟩` with `ω = exp(2πi/d)`.
pub fn fourier_matrix(d: usize) -> CMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |k, j| {
        let phase = 2.0 * PI * ((j * k) % d) as f64 / d as f64;
        c(norm * phase.cos(), norm * phase.sin())
    })
}

pub fn computational_basis(d: usize) -> Povm {
    Povm::computational(d)
}

pub fn fourier_basis(d: usize) -> Povm {
    let f = fourier_matrix(d);
    let vecs: Vec<CVector> = (0..d).map(|j| f.column(j).into_owned()).collect();
    Povm::from_basis(&vecs).expect("Fourier vectors are orthonormal")
}

/// Qc channel that picks a uniformly random bit `G`, measures the
/// computational basis when `G = 0` and the basis given by the columns of
/// `second_basis` when `G = 1`, and emits `(G, M)` as the index `G·d + M`.
pub fn mub_measurement_channel(second_basis: &CMatrix) -> Result<Channel> {
    let d = second_basis.nrows();
    if d < 2 || second_basis.ncols() != d {
        return Err(Error::InvalidChannel(format!(
            "second basis must be a square matrix of size >= 2, got {:?}",
            second_basis.shape()
        )));
    }
    let mut labels = Vec::with_capacity(2 * d);
    let mut elements = Vec::with_capacity(2 * d);
    for m in 0..d {
        labels.push(format!("G=0,M={m}"));
        elements.push(linalg::outer(&linalg::basis_vector(d, m)) * c(0.5, 0.0));
    }
    for m in 0..d {
        labels.push(format!("G=1,M={m}"));
        elements.push(linalg::outer(&second_basis.column(m).into_owned()) * c(0.5, 0.0));
    }
    Channel::qc(Povm::new(labels, elements)?)
}

/// The measurement channel with the Fourier basis as second basis, mutually
/// unbiased with the computational one.
pub fn example_channel_f(d: usize) -> Result<Channel> {
    mub_measurement_channel(&fourier_matrix(d))
}
