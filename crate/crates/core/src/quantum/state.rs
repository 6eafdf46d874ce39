use serde::{Deserialize, Serialize};

use super::layout;
use super::register::{check_unique, total_dim};
use super::{Channel, Povm, Register, TAU_HERM, TAU_PROB, TAU_PSD, TAU_TRACE};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ONE};

/// Positive unit-trace operator on an ordered list of registers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensity", into = "RawDensity")]
pub struct DensityOperator {
    registers: Vec<Register>,
    matrix: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct RawDensity {
    registers: Vec<Register>,
    matrix: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<RawDensity> for DensityOperator {
    type Error = Error;

    fn try_from(raw: RawDensity) -> Result<Self> {
        let n = raw.matrix.len();
        if raw.matrix.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let m = CMatrix::from_fn(n, n, |i, j| c(raw.matrix[i][j][0], raw.matrix[i][j][1]));
        DensityOperator::new(raw.registers, m)
    }
}

impl From<DensityOperator> for RawDensity {
    fn from(d: DensityOperator) -> Self {
        let n = d.matrix.nrows();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| [d.matrix[(i, j)].re, d.matrix[(i, j)].im]).collect())
            .collect();
        RawDensity { registers: d.registers, matrix }
    }
}

/// One outcome of [`DensityOperator::measure`].
#[derive(Debug, Clone)]
pub struct MeasurementBranch {
    pub outcome: usize,
    pub probability: f64,
    /// State of the unmeasured registers; `None` when the probability is at
    /// or below [`TAU_PROB`].
    pub post_state: Option<DensityOperator>,
}

impl DensityOperator {
    pub fn new(registers: Vec<Register>, matrix: CMatrix) -> Result<Self> {
        let rho = Self::raw(registers, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    fn raw(registers: Vec<Register>, matrix: CMatrix) -> Result<Self> {
        check_unique(&registers)?;
        let d = total_dim(&registers);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, registers need {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { registers, matrix })
    }

    /// Builds a state from a matrix that is PSD up to roundoff: eigenvalues in
    /// `[-TAU_PSD, 0)` are clipped and the trace is renormalized. Anything more
    /// negative is an error.
    pub fn from_unnormalized(registers: Vec<Register>, matrix: CMatrix) -> Result<Self> {
        let rho = Self::raw(registers, linalg::hermitian_part(&matrix))?;
        let tr = linalg::trace(&rho.matrix).re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("nonpositive trace {tr}")));
        }
        let mut m = rho.matrix / c(tr, 0.0);
        let (vals, vecs) = linalg::eigh(&m);
        if let Some(&min) = vals.first() {
            if min < -TAU_PSD {
                return Err(Error::InvalidState(format!("eigenvalue {min} below -{TAU_PSD}")));
            }
            if min < 0.0 {
                let n = vals.len();
                let mut scaled = vecs.clone();
                for (j, &v) in vals.iter().enumerate() {
                    let v = v.max(0.0);
                    for i in 0..n {
                        scaled[(i, j)] *= v;
                    }
                }
                m = scaled * vecs.adjoint();
                let t = linalg::trace(&m).re;
                m /= c(t, 0.0);
                m = linalg::hermitian_part(&m);
            }
        }
        Ok(Self { registers: rho.registers, matrix: m })
    }

    /// The state on no registers: the 1x1 matrix `[1]`.
    pub fn trivial() -> Self {
        Self { registers: Vec::new(), matrix: CMatrix::identity(1, 1) }
    }

    pub fn maximally_mixed(register: Register) -> Self {
        let d = register.dim();
        Self { registers: vec![register], matrix: CMatrix::identity(d, d) / c(d as f64, 0.0) }
    }

    pub fn basis_state(register: Register, index: usize) -> Result<Self> {
        let d = register.dim();
        if index >= d {
            return Err(Error::DimensionMismatch(format!("basis index {index} >= dim {d}")));
        }
        let mut m = CMatrix::zeros(d, d);
        m[(index, index)] = ONE;
        Ok(Self { registers: vec![register], matrix: m })
    }

    pub fn diagonal(register: Register, probabilities: &[f64]) -> Result<Self> {
        if probabilities.len() != register.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for register of dim {}",
                probabilities.len(),
                register.dim()
            )));
        }
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| c(p, 0.0)),
        ));
        Self::new(vec![register], m)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self { registers: psi.registers.clone(), matrix: linalg::outer(&psi.vector) }
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(Register::dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.registers.iter().map(Register::label).collect()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.label() == label)
            .ok_or_else(|| Error::UnknownRegister(label.to_string()))
    }

    pub fn register(&self, label: &str) -> Result<&Register> {
        Ok(&self.registers[self.position(label)?])
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigenvalues_h(&self.matrix)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = linalg::max_abs(&(&self.matrix - self.matrix.adjoint()));
        if herm > TAU_HERM {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&self.matrix);
        if (tr.re - 1.0).abs() > TAU_TRACE || tr.im.abs() > TAU_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if let Some(&min) = self.eigenvalues().first() {
            if min < -TAU_PSD {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        for r in self.registers.iter().filter(|r| r.is_classical()) {
            if !self.is_diagonal_on(r.label())? {
                return Err(Error::InvalidState(format!(
                    "classical register {:?} carries coherences",
                    r.label()
                )));
            }
        }
        Ok(())
    }

    /// True if dephasing `label` leaves the state unchanged within [`TAU_HERM`].
    pub fn is_diagonal_on(&self, label: &str) -> Result<bool> {
        let d = self.dephase_matrix(self.position(label)?);
        Ok(linalg::max_abs(&(d - &self.matrix)) <= TAU_HERM)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        check_unique(&regs)?;
        Ok(Self { registers: regs, matrix: linalg::kron(&self.matrix, &other.matrix) })
    }

    /// Reduced state on `keep`, in this state's register order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator> {
        let mut pos = keep.iter().map(|l| self.position(l)).collect::<Result<Vec<_>>>()?;
        pos.sort_unstable();
        pos.dedup();
        let m = layout::partial_trace(&self.matrix, &self.dims(), &pos);
        Ok(Self { registers: pos.iter().map(|&p| self.registers[p].clone()).collect(), matrix: m })
    }

    pub fn trace_out(&self, remove: &[&str]) -> Result<DensityOperator> {
        for l in remove {
            self.position(l)?;
        }
        let keep: Vec<&str> = self.labels().into_iter().filter(|l| !remove.contains(l)).collect();
        self.partial_trace(&keep)
    }

    /// Reorders the tensor factors to `order`, which must list every register.
    pub fn permute(&self, order: &[&str]) -> Result<DensityOperator> {
        if order.len() != self.registers.len() {
            return Err(Error::InvalidPartition(format!(
                "permutation lists {} of {} registers",
                order.len(),
                self.registers.len()
            )));
        }
        let pos = order.iter().map(|l| self.position(l)).collect::<Result<Vec<_>>>()?;
        let regs: Vec<Register> = pos.iter().map(|&p| self.registers[p].clone()).collect();
        check_unique(&regs)?;
        Ok(Self { matrix: layout::permute(&self.matrix, &self.dims(), &pos), registers: regs })
    }

    fn dephase_matrix(&self, pos: usize) -> CMatrix {
        let dims = self.dims();
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for i in 0..dims[pos] {
            let mut proj = CMatrix::zeros(dims[pos], dims[pos]);
            proj[(i, i)] = ONE;
            out += layout::sandwich(&proj, &self.matrix, &dims, pos);
        }
        out
    }

    /// Completely dephases `target` in its computational basis.
    pub fn dephase(&self, target: &str) -> Result<DensityOperator> {
        let pos = self.position(target)?;
        Ok(Self { registers: self.registers.clone(), matrix: self.dephase_matrix(pos) })
    }

    /// Marks `label` as classical after dephasing it.
    pub fn classicalize(&self, label: &str) -> Result<DensityOperator> {
        let pos = self.position(label)?;
        let mut out = self.dephase(label)?;
        out.registers[pos] = out.registers[pos].clone().into_classical();
        Ok(out)
    }

    /// Applies `channel` to its input register; the output register takes
    /// the input's place in the ordering.
    pub fn apply(&self, channel: &Channel) -> Result<DensityOperator> {
        let pos = self.position(channel.input().label())?;
        let dims = self.dims();
        if dims[pos] != channel.dim_in() {
            return Err(Error::DimensionMismatch(format!(
                "channel input dim {} on register {:?} of dim {}",
                channel.dim_in(),
                channel.input().label(),
                dims[pos]
            )));
        }
        let out_dims = layout::replace_dim(&dims, pos, channel.dim_out());
        let d: usize = out_dims.iter().product();
        let mut m = CMatrix::zeros(d, d);
        for k in channel.kraus_operators() {
            m += layout::sandwich(k, &self.matrix, &dims, pos);
        }
        let mut regs = self.registers.clone();
        regs[pos] = channel.output().clone();
        check_unique(&regs)?;
        Self::from_unnormalized(regs, m)
    }

    /// Applies a local operator `op` (not necessarily unitary) on `label`
    /// without renormalizing.
    pub(crate) fn sandwich_matrix(&self, op: &CMatrix, label: &str) -> Result<CMatrix> {
        let pos = self.position(label)?;
        Ok(layout::sandwich(op, &self.matrix, &self.dims(), pos))
    }

    /// Conjugates register `label` by the unitary `u`.
    pub fn conjugate(&self, u: &CMatrix, label: &str) -> Result<DensityOperator> {
        let m = self.sandwich_matrix(u, label)?;
        Self::from_unnormalized(self.registers.clone(), m)
    }

    /// Measures `targets` (jointly, in the given order) with `povm`. Each
    /// branch carries `tr_targets[(E ⊗ I) ρ] / p` on the remaining registers.
    pub fn measure(&self, povm: &Povm, targets: &[&str]) -> Result<Vec<MeasurementBranch>> {
        let tpos = targets.iter().map(|l| self.position(l)).collect::<Result<Vec<_>>>()?;
        let tdim: usize = tpos.iter().map(|&p| self.registers[p].dim()).product();
        if povm.dim() != tdim {
            return Err(Error::DimensionMismatch(format!(
                "POVM of dim {} on targets of total dim {tdim}",
                povm.dim()
            )));
        }
        let rest: Vec<usize> = (0..self.registers.len()).filter(|p| !tpos.contains(p)).collect();
        let mut order = tpos.clone();
        order.extend(&rest);
        let dims = self.dims();
        let permuted = layout::permute(&self.matrix, &dims, &order);
        let rest_regs: Vec<Register> = rest.iter().map(|&p| self.registers[p].clone()).collect();
        let rest_dim = total_dim(&rest_regs);
        let block_dims = [tdim, rest_dim];
        let mut out = Vec::with_capacity(povm.len());
        for (y, e) in povm.elements().iter().enumerate() {
            let applied = layout::apply_left(e, &permuted, &block_dims, 0);
            let reduced = layout::partial_trace(&applied, &block_dims, &[1]);
            let p = linalg::trace(&reduced).re.max(0.0);
            let post_state = if p > TAU_PROB {
                Some(Self::from_unnormalized(rest_regs.clone(), linalg::hermitian_part(&reduced))?)
            } else {
                None
            };
            out.push(MeasurementBranch { outcome: y, probability: p, post_state });
        }
        Ok(out)
    }
}

/// Unit vector on an ordered list of registers.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    registers: Vec<Register>,
    vector: CVector,
}

impl PureState {
    pub fn new(registers: Vec<Register>, vector: CVector) -> Result<Self> {
        check_unique(&registers)?;
        let d = total_dim(&registers);
        if vector.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {}, registers need {d}",
                vector.len()
            )));
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > TAU_TRACE {
            return Err(Error::InvalidState(format!("vector norm {norm} differs from 1")));
        }
        Ok(Self { registers, vector })
    }

    /// Normalizes `vector` before validating.
    pub fn normalized(registers: Vec<Register>, vector: CVector) -> Result<Self> {
        let norm = vector.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(registers, vector / c(norm, 0.0))
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::from_pure(self)
    }

    pub fn inner(&self, other: &PureState) -> crate::linalg::C64 {
        self.vector.dotc(&other.vector)
    }
}
