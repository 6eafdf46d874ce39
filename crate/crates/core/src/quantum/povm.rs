use super::{TAU_HERM, TAU_POVM, TAU_PSD};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Positive operator-valued measure with labeled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    outcomes: Vec<String>,
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(outcomes: Vec<String>, elements: Vec<CMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        if outcomes.len() != elements.len() {
            return Err(Error::InvalidPovm(format!(
                "{} labels for {} elements",
                outcomes.len(),
                elements.len()
            )));
        }
        let d = elements[0].nrows();
        let mut sum = CMatrix::zeros(d, d);
        for (label, e) in outcomes.iter().zip(&elements) {
            if e.nrows() != d || e.ncols() != d {
                return Err(Error::InvalidPovm(format!("element {label:?} is not {d}x{d}")));
            }
            let herm = linalg::max_abs(&(e - e.adjoint()));
            if herm > TAU_HERM {
                return Err(Error::InvalidPovm(format!("element {label:?} not Hermitian ({herm:e})")));
            }
            if let Some(&min) = linalg::eigenvalues_h(e).first() {
                if min < -TAU_PSD {
                    return Err(Error::InvalidPovm(format!("element {label:?} has eigenvalue {min:e}")));
                }
            }
            sum += e;
        }
        let dev = linalg::max_abs(&(sum - linalg::identity(d)));
        if dev > TAU_POVM {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {dev:e}")));
        }
        Ok(Self { outcomes, elements })
    }

    /// Numbered outcomes `0..elements.len()`.
    pub fn unlabeled(elements: Vec<CMatrix>) -> Result<Self> {
        Self::new((0..elements.len()).map(|i| i.to_string()).collect(), elements)
    }

    /// Rank-one projectors onto the given orthonormal vectors.
    pub fn from_basis(vectors: &[CVector]) -> Result<Self> {
        Self::unlabeled(vectors.iter().map(linalg::outer).collect())
    }

    pub fn computational(d: usize) -> Self {
        let v: Vec<CVector> = (0..d).map(|i| linalg::basis_vector(d, i)).collect();
        Self::from_basis(&v).expect("computational basis is a POVM")
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `tr(E(y) ρ)` for each outcome.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        self.elements.iter().map(|e| linalg::trace_product(e, rho).re).collect()
    }

    /// If every element is a rank-one projector, the unit vectors they project
    /// onto.
    pub fn basis_vectors(&self) -> Option<Vec<CVector>> {
        if self.len() != self.dim() {
            return None;
        }
        let mut out = Vec::with_capacity(self.len());
        for e in &self.elements {
            let (vals, vecs) = linalg::eigh(e);
            let top = *vals.last()?;
            if (top - 1.0).abs() > TAU_POVM || vals[..vals.len() - 1].iter().any(|v| v.abs() > TAU_POVM) {
                return None;
            }
            out.push(vecs.column(vals.len() - 1).into_owned());
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn rejects_incomplete() {
        let e = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!(Povm::unlabeled(vec![e.clone()]).is_err());
        assert!(Povm::unlabeled(vec![e.clone(), e]).is_ok());
    }

    #[test]
    fn rejects_negative_element() {
        let mut a = CMatrix::identity(2, 2) * c(1.5, 0.0);
        a[(1, 1)] = c(1.5, 0.0);
        let b = CMatrix::identity(2, 2) * c(-0.5, 0.0);
        assert!(Povm::unlabeled(vec![a, b]).is_err());
    }

    #[test]
    fn basis_vectors_detected() {
        assert!(Povm::computational(3).basis_vectors().is_some());
        let half = CMatrix::identity(2, 2) * c(0.5, 0.0);
        assert!(Povm::unlabeled(vec![half.clone(), half]).unwrap().basis_vectors().is_none());
    }
}
