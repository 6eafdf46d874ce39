use super::source::CqSource;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::quantum::Povm;

/// Default cap on `dim Rⁿ` for decoder construction.
pub const DEFAULT_MAX_DECODER_DIM: usize = 1 << 10;

/// Success probabilities of the square-root measurement for one bin.
///
/// With `W` the matrix whose columns span `p(yⁿ) ρ(yⁿ)` for all members,
/// `W† A^{-1/2} W = √G` for the Gram matrix `G = W†W`, so the joint success
/// of member `k` is the squared Frobenius norm of its diagonal block of `√G`.
/// `G` factorizes over letters and is never larger than the bin's total rank.
pub(crate) struct BinDecoder {
    sqrt_gram: CMatrix,
    blocks: Vec<std::ops::Range<usize>>,
}

pub(crate) fn check_dim(src: &CqSource, max_dim: usize) -> Result<usize> {
    match src.r_dim().checked_pow(src.n as u32) {
        Some(d) if d <= max_dim => Ok(d),
        _ => Err(Error::Infeasible(format!(
            "decoder dimension {}^{} exceeds the cap {max_dim}",
            src.r_dim(),
            src.n
        ))),
    }
}

impl BinDecoder {
    pub fn new(src: &CqSource, members: &[usize]) -> Self {
        let mut cols: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut blocks = Vec::with_capacity(members.len());
        for &i in members {
            let letters = src.letters(i);
            let w = src.sequence_probability(&letters).sqrt();
            let start = cols.len();
            cols.extend(src.factor_columns(&letters).into_iter().map(|c| (w, c)));
            blocks.push(start..cols.len());
        }
        let g = CMatrix::from_fn(cols.len(), cols.len(), |a, b| {
            let (wa, ca) = &cols[a];
            let (wb, cb) = &cols[b];
            ca.iter().zip(cb).fold(linalg::c(wa * wb, 0.0), |acc, (&x, &y)| acc * src.factor_gram[(x, y)])
        });
        let sqrt_gram = linalg::hermitian_fn(&g, |l| l.max(0.0).sqrt());
        Self { sqrt_gram, blocks }
    }

    /// `Pr(J = yⁿ, K = yⁿ)` for member `k`.
    pub fn joint_success(&self, k: usize) -> f64 {
        let r = self.blocks[k].clone();
        self.sqrt_gram.view((r.start, r.start), (r.len(), r.len())).norm_squared()
    }
}

/// Pretty-good measurement on `Rⁿ` for the sequences in `bin`: one element
/// per member in the given order, then the completion `I − Π_supp`.
///
/// With `W = U S V†` (thin SVD over all members' columns), `A^{-1/2} W_k`
/// equals `U V_k†`, so every element is built from the isometric factors and
/// stays positive to roundoff even when `A` is badly conditioned.
pub fn pgm_decoder(src: &CqSource, bin: &[usize], max_dim: usize) -> Result<Povm> {
    if bin.is_empty() {
        return Err(Error::InvalidPovm("decoder needs a nonempty bin".into()));
    }
    let dim = check_dim(src, max_dim)?;
    let factors: Vec<CMatrix> = bin.iter().map(|&i| src.weighted_factor(&src.letters(i))).collect();
    let widths: Vec<usize> = factors.iter().map(CMatrix::ncols).collect();
    let mut w = CMatrix::zeros(dim, widths.iter().sum());
    let mut at = 0;
    for f in &factors {
        w.view_mut((0, at), (dim, f.ncols())).copy_from(f);
        at += f.ncols();
    }
    let svd = w.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > top * 1e-10).collect();
    let u = u.select_columns(&keep);
    let v_t = v_t.select_rows(&keep);
    let mut elements = Vec::with_capacity(bin.len() + 1);
    let mut at = 0;
    for &wd in &widths {
        let iso = &u * v_t.columns(at, wd);
        elements.push(linalg::hermitian_part(&(&iso * iso.adjoint())));
        at += wd;
    }
    elements.push(linalg::hermitian_part(&(linalg::identity(dim) - &u * u.adjoint())));
    Povm::unlabeled(elements)
}
