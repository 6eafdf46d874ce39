//! Index arithmetic for operators on tensor products of registers.
//! Registers are ordered with the first one most significant.

use crate::linalg::{CMatrix, ZERO};

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// For each multi-index over the registers in `positions`, its offset into the
/// full index space.
fn offsets(dims: &[usize], positions: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &p in positions {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for &o in &out {
            for v in 0..dims[p] {
                next.push(o + v * st[p]);
            }
        }
        out = next;
    }
    out
}

pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
    let ko = offsets(dims, keep);
    let to = offsets(dims, &traced);
    let mut out = CMatrix::zeros(ko.len(), ko.len());
    for (i, &ri) in ko.iter().enumerate() {
        for (j, &cj) in ko.iter().enumerate() {
            let mut s = ZERO;
            for &t in &to {
                s += m[(ri + t, cj + t)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Reorders tensor factors: new factor `i` is old factor `order[i]`.
pub fn permute(m: &CMatrix, dims: &[usize], order: &[usize]) -> CMatrix {
    let map = offsets(dims, order);
    CMatrix::from_fn(map.len(), map.len(), |i, j| m[(map[i], map[j])])
}

/// `(I ⊗ op ⊗ I) m` where `op` maps factor `pos` from `dims[pos]` to
/// `op.nrows()` dimensions.
pub fn apply_left(op: &CMatrix, m: &CMatrix, dims: &[usize], pos: usize) -> CMatrix {
    let d_in = dims[pos];
    let d_out = op.nrows();
    let pre: usize = dims[..pos].iter().product();
    let post: usize = dims[pos + 1..].iter().product();
    let cols = m.ncols();
    let mut out = CMatrix::zeros(pre * d_out * post, cols);
    for p in 0..pre {
        for a_out in 0..d_out {
            for a_in in 0..d_in {
                let k = op[(a_out, a_in)];
                if k == ZERO {
                    continue;
                }
                for q in 0..post {
                    let ro = (p * d_out + a_out) * post + q;
                    let ri = (p * d_in + a_in) * post + q;
                    for c in 0..cols {
                        out[(ro, c)] += k * m[(ri, c)];
                    }
                }
            }
        }
    }
    out
}

/// `(I ⊗ op ⊗ I) m (I ⊗ op ⊗ I)†`.
pub fn sandwich(op: &CMatrix, m: &CMatrix, dims: &[usize], pos: usize) -> CMatrix {
    let left = apply_left(op, m, dims, pos);
    apply_left(op, &left.adjoint(), dims, pos).adjoint()
}

pub fn replace_dim(dims: &[usize], pos: usize, d: usize) -> Vec<usize> {
    let mut out = dims.to_vec();
    out[pos] = d;
    out
}
