use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{self, conditional_entropy, shannon_entropy};
use crate::linalg::{self, CMatrix, CVector};
use crate::quantum::layout::partial_trace;
use crate::quantum::{Channel, DensityOperator, PureState, Register, TAU_PROB};

/// i.i.d. classical-quantum source `ρ_RY = Σ_y p(y) ρ(y)_R ⊗ |y⟩⟨y|`
/// obtained from `n` uses of a qc channel on `ψ_RX`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqSource {
    pub n: usize,
    pub alphabet: usize,
    pub p: Vec<f64>,
    /// `ρ(y)_R`; `None` where `p(y)` is zero.
    pub cond_states: Vec<Option<DensityOperator>>,
    #[serde(rename = "h_y_bits")]
    pub h_y: f64,
    #[serde(rename = "h_y_given_r_bits")]
    pub h_y_given_r: f64,
    #[serde(rename = "i_yr_bits")]
    pub i_yr: f64,
    /// Per letter, `√λ·v` for each eigenpair of `ρ(y)_R` above the floor.
    #[serde(skip)]
    pub(crate) factors: Vec<Vec<CVector>>,
    /// Global id of factor `a` of letter `y` is `factor_offset[y] + a`.
    #[serde(skip)]
    pub(crate) factor_offset: Vec<usize>,
    /// Inner products between all letter factors, indexed by global id.
    #[serde(skip)]
    pub(crate) factor_gram: CMatrix,
}

/// Builds the per-letter source from `ψ` on `R⊗X` (registers in that order)
/// and a qc channel acting on `X`.
pub fn build_source(psi: &PureState, channel: &Channel, n: usize) -> Result<CqSource> {
    if n == 0 {
        return Err(Error::Infeasible("block length n must be at least 1".into()));
    }
    let regs = psi.registers();
    if regs.len() != 2 {
        return Err(Error::DimensionMismatch(format!("source state needs registers R and X, found {}", regs.len())));
    }
    let (r, x) = (&regs[0], &regs[1]);
    if x.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "channel input dimension {} but register {:?} has {}",
            channel.dim_in(),
            x.label(),
            x.dim()
        )));
    }
    if !channel.is_qc() {
        return Err(Error::InvalidChannel("the distillation source needs a quantum-classical channel".into()));
    }
    let dims = [r.dim(), x.dim()];
    let joint = linalg::outer(psi.vector());
    let mut p = Vec::with_capacity(channel.dim_out());
    let mut weighted = Vec::with_capacity(channel.dim_out());
    for y in 0..channel.dim_out() {
        let mut unit = CMatrix::zeros(channel.dim_out(), channel.dim_out());
        unit[(y, y)] = linalg::ONE;
        let e = channel.adjoint_apply(&unit);
        let m = linalg::kron(&linalg::identity(r.dim()), &e) * &joint;
        let sub = linalg::hermitian_part(&partial_trace(&m, &dims, &[0]));
        p.push(linalg::trace(&sub).re.max(0.0));
        weighted.push(sub);
    }
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    let mut cond_states = Vec::with_capacity(p.len());
    let mut factors = Vec::with_capacity(p.len());
    for (py, sub) in p.iter().zip(&weighted) {
        if *py <= TAU_PROB {
            cond_states.push(None);
            factors.push(Vec::new());
            continue;
        }
        let rho = sub / linalg::c(py * total, 0.0);
        let (vals, vecs) = linalg::eigh(&rho);
        factors.push(
            vals.iter()
                .enumerate()
                .filter(|(_, &l)| l > 1e-14)
                .map(|(i, &l)| vecs.column(i).into_owned() * linalg::c(l.sqrt(), 0.0))
                .collect(),
        );
        cond_states.push(Some(DensityOperator::from_unnormalized(vec![r.clone()], rho)?));
    }

    let ry = cq_joint(r, &p, &cond_states)?;
    let h_y = shannon_entropy(&p)?;
    let h_y_given_r = conditional_entropy(&ry, &[r.label()])?;
    let i_yr = info::mutual_information(&ry, &[r.label()], &[ry.registers()[1].label()])?;
    let mut factor_offset = Vec::with_capacity(factors.len());
    let mut flat: Vec<&CVector> = Vec::new();
    for f in &factors {
        factor_offset.push(flat.len());
        flat.extend(f);
    }
    let factor_gram = CMatrix::from_fn(flat.len(), flat.len(), |i, j| flat[i].dotc(flat[j]));
    Ok(CqSource { n, alphabet: p.len(), p, cond_states, h_y, h_y_given_r, i_yr, factors, factor_offset, factor_gram })
}

fn cq_joint(r: &Register, p: &[f64], states: &[Option<DensityOperator>]) -> Result<DensityOperator> {
    let dy = p.len();
    let dr = r.dim();
    let mut m = CMatrix::zeros(dr * dy, dr * dy);
    for (y, st) in states.iter().enumerate() {
        if let Some(st) = st {
            for i in 0..dr {
                for j in 0..dr {
                    m[(i * dy + y, j * dy + y)] = st.matrix()[(i, j)] * p[y];
                }
            }
        }
    }
    let y = if r.label() == "Y" { "Y'" } else { "Y" };
    DensityOperator::from_unnormalized(vec![r.clone(), Register::classical(y, dy)?], m)
}

impl CqSource {
    pub fn sequences(&self) -> Option<usize> {
        self.alphabet.checked_pow(self.n as u32)
    }

    pub fn r_dim(&self) -> usize {
        self.cond_states.iter().flatten().next().map_or(1, DensityOperator::dim)
    }

    pub fn letters(&self, index: usize) -> Vec<usize> {
        linalg::mixed_radix_digits(index, &vec![self.alphabet; self.n])
    }

    pub fn sequence_probability(&self, letters: &[usize]) -> f64 {
        letters.iter().map(|&y| self.p[y]).product()
    }

    /// Global factor ids of every product eigenvector of `ρ(yⁿ)`.
    pub(crate) fn factor_columns(&self, letters: &[usize]) -> Vec<Vec<usize>> {
        let mut cols: Vec<Vec<usize>> = vec![Vec::with_capacity(letters.len())];
        for &y in letters {
            let base = self.factor_offset[y];
            let mut next = Vec::with_capacity(cols.len() * self.factors[y].len());
            for c in &cols {
                for a in 0..self.factors[y].len() {
                    let mut v = c.clone();
                    v.push(base + a);
                    next.push(v);
                }
            }
            cols = next;
        }
        cols
    }

    /// Columns `√p(yⁿ)·√λ·v` spanning `p(yⁿ) ρ(yⁿ)` on `Rⁿ`.
    pub(crate) fn weighted_factor(&self, letters: &[usize]) -> CMatrix {
        let mut cols: Vec<CVector> = vec![CVector::from_element(1, linalg::ONE)];
        for &y in letters {
            let mut next = Vec::with_capacity(cols.len() * self.factors[y].len());
            for a in &cols {
                for b in &self.factors[y] {
                    next.push(a.kronecker(b));
                }
            }
            cols = next;
        }
        if cols.is_empty() {
            return CMatrix::zeros(self.r_dim().pow(letters.len() as u32), 1);
        }
        let w = self.sequence_probability(letters).sqrt();
        let mut m = CMatrix::from_columns(&cols);
        m *= linalg::c(w, 0.0);
        m
    }
}
