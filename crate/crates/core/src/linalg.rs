//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues below this are treated as exact zeros in entropy sums.
pub const ENTROPY_FLOOR: f64 = 1e-15;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != ZERO {
                return false;
            }
        }
    }
    true
}

/// Eigen-decomposition of the Hermitian part of `m`. Eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    if is_diagonal(m) {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
        let mut vecs = CMatrix::zeros(n, n);
        for (col, &i) in idx.iter().enumerate() {
            vecs[(i, col)] = ONE;
        }
        return (idx.iter().map(|&i| m[(i, i)].re).collect(), vecs);
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, idx[col])]);
    (vals, vecs)
}

pub fn eigenvalues_h(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    if is_diagonal(m) {
        let mut v: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
        v.sort_by(f64::total_cmp);
        return v;
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `V diag(f(λ)) V†` for Hermitian `m`.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &lam) in vals.iter().enumerate() {
        let fl = f(lam);
        for i in 0..n {
            scaled[(i, j)] *= fl;
        }
    }
    scaled * vecs.adjoint()
}

/// Shannon-type entropy in bits of a nonnegative spectrum; entries below
/// [`ENTROPY_FLOOR`] contribute nothing.
pub fn spectrum_entropy(vals: impl IntoIterator<Item = f64>) -> f64 {
    let mut h = 0.0;
    for v in vals {
        if v > ENTROPY_FLOOR {
            h -= v * v.log2();
        }
    }
    h
}

/// Von Neumann entropy in bits of a Hermitian PSD matrix, no validation.
pub fn entropy_of(m: &CMatrix) -> f64 {
    spectrum_entropy(eigenvalues_h(m))
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut s = ZERO;
    for i in 0..n {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    eigenvalues_h(m).iter().map(|v| v.abs()).sum()
}

/// Half the trace norm of the difference of two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn basis_vector(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = ONE;
    v
}

/// Mixed-radix index of `digits` (first digit most significant).
pub fn mixed_radix(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

pub fn mixed_radix_digits(mut index: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_reconstructs() {
        let m = CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let (vals, vecs) = eigh(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let mut d = CMatrix::zeros(2, 2);
        d[(0, 0)] = c(vals[0], 0.0);
        d[(1, 1)] = c(vals[1], 0.0);
        assert!(max_abs(&(&vecs * d * vecs.adjoint() - &m)) < 1e-12);
    }

    #[test]
    fn radix_roundtrip() {
        let r = [2, 3, 4];
        for i in 0..24 {
            assert_eq!(mixed_radix(&mixed_radix_digits(i, &r), &r), i);
        }
    }

    #[test]
    fn entropy_of_uniform() {
        assert!((spectrum_entropy([0.25; 4]) - 2.0).abs() < 1e-15);
        assert_eq!(spectrum_entropy([1.0, 0.0]), 0.0);
    }
}
