//! Seeded sampling of unitaries, states, POVMs and channels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Channel, DensityOperator, Povm, PureState, Register};
use crate::linalg::{self, c, CMatrix, CVector};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phases fixed.
pub fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let z = ginibre(rng, d, d);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_random_unitary(d: usize, seed: u64) -> CMatrix {
    haar_unitary_with(&mut rng(seed), d)
}

pub fn random_vector_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CVector {
    let v = ginibre(rng, d, 1).column(0).into_owned();
    let n = v.norm();
    v / c(n, 0.0)
}

/// Haar-random pure state on a single register labeled `"Q"`.
pub fn random_pure_state(d: usize, seed: u64) -> PureState {
    random_pure_state_with(&mut rng(seed), d)
}

pub fn random_pure_state_with<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PureState {
    let reg = Register::new("Q", d).expect("d >= 1");
    PureState::new(vec![reg], random_vector_with(rng, d)).expect("normalized")
}

/// Random state of the given rank (induced measure from a Ginibre factor).
pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, d: usize, rank: usize, label: &str) -> DensityOperator {
    let a = ginibre(rng, d, rank.max(1));
    let m = &a * a.adjoint();
    let tr = linalg::trace(&m).re;
    let reg = Register::new(label, d).expect("d >= 1");
    DensityOperator::from_unnormalized(vec![reg], m / c(tr, 0.0)).expect("PSD by construction")
}

pub fn random_density(d: usize, rank: usize, seed: u64, label: &str) -> DensityOperator {
    random_density_with(&mut rng(seed), d, rank, label)
}

/// Channel with `k` Kraus operators taken from a Haar-random isometry.
/// `k` is raised to `⌈d_in/d_out⌉` when smaller, the least Kraus rank any
/// channel from `d_in` to `d_out` needs.
pub fn random_kraus_channel<R: Rng + ?Sized>(rng: &mut R, d_in: usize, d_out: usize, k: usize) -> Channel {
    let k = k.max(d_in.div_ceil(d_out));
    let big = d_out * k;
    let u = haar_unitary_with(rng, big.max(d_in));
    let ops = (0..k)
        .map(|i| CMatrix::from_fn(d_out, d_in, |r, col| u[(i * d_out + r, col)]))
        .collect();
    Channel::kraus(ops).expect("isometry blocks form a channel")
}

/// POVM `S^{-1/2} A_i S^{-1/2}` from random PSD `A_i` with `S = Σ A_i`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, d: usize, outcomes: usize) -> Povm {
    let mut total = 0;
    let parts: Vec<CMatrix> = (0..outcomes)
        .map(|i| {
            let mut rank = 1 + rng.random_range(0..d);
            if i + 1 == outcomes {
                // Keep S = Σ A_i invertible.
                rank = rank.max(d.saturating_sub(total));
            }
            total += rank;
            let a = ginibre(rng, d, rank);
            &a * a.adjoint()
        })
        .collect();
    let s: CMatrix = parts.iter().sum();
    let inv_sqrt = linalg::hermitian_fn(&s, |v| 1.0 / v.sqrt());
    let elems = parts.iter().map(|a| linalg::hermitian_part(&(&inv_sqrt * a * &inv_sqrt))).collect();
    Povm::unlabeled(elems).expect("normalized POVM")
}

pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitarity_and_determinism() {
        for d in 1..=5 {
            let u = haar_random_unitary(d, 42);
            assert!(linalg::max_abs(&(u.adjoint() * &u - linalg::identity(d))) <= 1e-12);
            assert_eq!(u, haar_random_unitary(d, 42));
        }
        let one = haar_random_unitary(1, 3);
        assert!((one[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn samplers_produce_valid_objects() {
        let mut r = rng(1);
        for _ in 0..20 {
            random_density_with(&mut r, 3, 2, "A").validate().unwrap();
            let p = random_povm(&mut r, 3, 4);
            assert_eq!(p.len(), 4);
            random_kraus_channel(&mut r, 2, 2, 3);
            let q = random_distribution(&mut r, 5);
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(random_pure_state(3, 8), random_pure_state(3, 8));
    }
}
