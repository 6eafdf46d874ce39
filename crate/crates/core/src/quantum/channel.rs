use super::{DensityOperator, Povm, Register, TAU_CHAN, TAU_POVM, TAU_TRACE};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ZERO};

/// Concrete representation of a quantum operation.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelKind {
    Kraus(Vec<CMatrix>),
    /// Quantum input, classical output: outcome `y` is emitted with
    /// probability `tr(E(y) ρ)`.
    Qc(Povm),
    /// Classical input letter `x` is mapped to the output state at index `x`.
    Cq(Vec<CMatrix>),
    /// `transition[y][x]` is the probability of output `y` given input `x`.
    Classical(Vec<Vec<f64>>),
}

/// A quantum operation between two registers, with its Kraus form cached.
#[derive(Debug, Clone)]
pub struct Channel {
    kind: ChannelKind,
    input: Register,
    output: Register,
    kraus: Vec<CMatrix>,
    /// `kraus[j]† kraus[i]` at index `i * k + j`.
    kraus_products: Vec<CMatrix>,
}

impl PartialEq for Channel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.input == other.input && self.output == other.output
    }
}

impl Channel {
    pub fn kraus(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (d_out, d_in) = first.shape();
        let mut sum = CMatrix::zeros(d_in, d_in);
        for (i, k) in ops.iter().enumerate() {
            if k.shape() != (d_out, d_in) {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {i} is {:?}, expected {:?}",
                    k.shape(),
                    (d_out, d_in)
                )));
            }
            sum += k.adjoint() * k;
        }
        let dev = linalg::max_abs(&(sum - linalg::identity(d_in)));
        if dev > TAU_POVM {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (deviation {dev:e})"
            )));
        }
        Self::build(ChannelKind::Kraus(ops.clone()), d_in, d_out, ops)
    }

    pub fn qc(povm: Povm) -> Result<Self> {
        let d = povm.dim();
        let n = povm.len();
        let mut ops = Vec::new();
        for (y, e) in povm.elements().iter().enumerate() {
            let (vals, vecs) = linalg::eigh(e);
            for (k, &lam) in vals.iter().enumerate() {
                if lam > 1e-14 {
                    let mut op = CMatrix::zeros(n, d);
                    for col in 0..d {
                        op[(y, col)] = vecs[(col, k)].conj() * lam.sqrt();
                    }
                    ops.push(op);
                }
            }
        }
        Self::build(ChannelKind::Qc(povm), d, n, ops)
    }

    pub fn cq(states: Vec<CMatrix>) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidChannel("no output states".into()))?;
        let d_out = first.nrows();
        let d_in = states.len();
        let reg = Register::new("Y", d_out)?;
        let mut ops = Vec::new();
        for (x, s) in states.iter().enumerate() {
            DensityOperator::new(vec![reg.clone()], s.clone())
                .map_err(|e| Error::InvalidChannel(format!("output state for input {x}: {e}")))?;
            let (vals, vecs) = linalg::eigh(s);
            for (k, &lam) in vals.iter().enumerate() {
                if lam > 1e-14 {
                    let mut op = CMatrix::zeros(d_out, d_in);
                    for row in 0..d_out {
                        op[(row, x)] = vecs[(row, k)] * lam.sqrt();
                    }
                    ops.push(op);
                }
            }
        }
        Self::build(ChannelKind::Cq(states), d_in, d_out, ops)
    }

    pub fn classical(transition: Vec<Vec<f64>>) -> Result<Self> {
        let d_out = transition.len();
        let d_in = transition.first().map_or(0, Vec::len);
        if d_out == 0 || d_in == 0 {
            return Err(Error::InvalidChannel("empty stochastic matrix".into()));
        }
        if transition.iter().any(|row| row.len() != d_in) {
            return Err(Error::InvalidChannel("ragged stochastic matrix".into()));
        }
        let mut ops = Vec::new();
        for x in 0..d_in {
            let mut col_sum = 0.0;
            for (y, row) in transition.iter().enumerate() {
                let w = row[x];
                if !(w >= 0.0) {
                    return Err(Error::InvalidChannel(format!("entry W({y}|{x}) = {w} is negative")));
                }
                col_sum += w;
                if w > 0.0 {
                    let mut op = CMatrix::zeros(d_out, d_in);
                    op[(y, x)] = c(w.sqrt(), 0.0);
                    ops.push(op);
                }
            }
            if (col_sum - 1.0).abs() > TAU_TRACE {
                return Err(Error::InvalidChannel(format!("column {x} sums to {col_sum}")));
            }
        }
        Self::build(ChannelKind::Classical(transition), d_in, d_out, ops)
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::kraus(vec![linalg::identity(d)])
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::kraus(vec![u])
    }

    pub fn classical_identity(m: usize) -> Result<Self> {
        Self::classical((0..m).map(|y| (0..m).map(|x| if x == y { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn binary_symmetric(flip: f64) -> Result<Self> {
        Self::classical(vec![vec![1.0 - flip, flip], vec![flip, 1.0 - flip]])
    }

    /// Qubit depolarizing channel `ρ ↦ (1-p) ρ + p I/2`.
    pub fn depolarizing_qubit(p: f64) -> Result<Self> {
        let paulis = [
            CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO]),
            CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]),
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(-1.0, 0.0)]),
        ];
        let mut ops = vec![linalg::identity(2) * c((1.0 - 0.75 * p).sqrt(), 0.0)];
        ops.extend(paulis.iter().map(|s| s * c((p / 4.0).sqrt(), 0.0)));
        Self::kraus(ops)
    }

    fn build(kind: ChannelKind, d_in: usize, d_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        let classical_out = matches!(kind, ChannelKind::Qc(_) | ChannelKind::Classical(_));
        let classical_in = matches!(kind, ChannelKind::Cq(_) | ChannelKind::Classical(_));
        let mut input = Register::new("X", d_in)?;
        let mut output = Register::new("Y", d_out)?;
        if classical_in {
            input = input.into_classical();
        }
        if classical_out {
            output = output.into_classical();
        }
        let k = kraus.len();
        let mut kraus_products = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                kraus_products.push(kraus[j].adjoint() * &kraus[i]);
            }
        }
        Ok(Self { kind, input, output, kraus, kraus_products })
    }

    /// Same operation acting from register `input` to register `output`.
    pub fn with_registers(mut self, input: &str, output: &str) -> Self {
        self.input = self.input.relabeled(input);
        self.output = self.output.relabeled(output);
        self
    }

    pub fn kind(&self) -> &ChannelKind {
        &self.kind
    }

    pub fn input(&self) -> &Register {
        &self.input
    }

    pub fn output(&self) -> &Register {
        &self.output
    }

    pub fn dim_in(&self) -> usize {
        self.input.dim()
    }

    pub fn dim_out(&self) -> usize {
        self.output.dim()
    }

    pub fn kraus_operators(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Whether outputs are always diagonal by construction.
    pub fn has_classical_output(&self) -> bool {
        self.output.is_classical()
    }

    /// The channel's action on an arbitrary (not necessarily Hermitian)
    /// input-space matrix.
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        match &self.kind {
            ChannelKind::Kraus(ops) => {
                let mut out = CMatrix::zeros(self.dim_out(), self.dim_out());
                for k in ops {
                    out += k * m * k.adjoint();
                }
                out
            }
            ChannelKind::Qc(povm) => {
                let mut out = CMatrix::zeros(self.dim_out(), self.dim_out());
                for (y, e) in povm.elements().iter().enumerate() {
                    out[(y, y)] = linalg::trace_product(e, m);
                }
                out
            }
            ChannelKind::Cq(states) => {
                let mut out = CMatrix::zeros(self.dim_out(), self.dim_out());
                for (x, s) in states.iter().enumerate() {
                    out += s * m[(x, x)];
                }
                out
            }
            ChannelKind::Classical(w) => {
                let mut out = CMatrix::zeros(self.dim_out(), self.dim_out());
                for (y, row) in w.iter().enumerate() {
                    out[(y, y)] = row.iter().enumerate().map(|(x, &p)| m[(x, x)] * p).sum();
                }
                out
            }
        }
    }

    /// Adjoint map (Heisenberg picture) on output-space matrices.
    pub fn adjoint_apply(&self, x: &CMatrix) -> CMatrix {
        match &self.kind {
            ChannelKind::Kraus(ops) => {
                let mut out = CMatrix::zeros(self.dim_in(), self.dim_in());
                for k in ops {
                    out += k.adjoint() * x * k;
                }
                out
            }
            ChannelKind::Qc(povm) => {
                let mut out = CMatrix::zeros(self.dim_in(), self.dim_in());
                for (y, e) in povm.elements().iter().enumerate() {
                    out += e * x[(y, y)];
                }
                out
            }
            ChannelKind::Cq(states) => {
                let mut out = CMatrix::zeros(self.dim_in(), self.dim_in());
                for (i, s) in states.iter().enumerate() {
                    out[(i, i)] = linalg::trace_product(s, x);
                }
                out
            }
            ChannelKind::Classical(w) => {
                let mut out = CMatrix::zeros(self.dim_in(), self.dim_in());
                for i in 0..self.dim_in() {
                    out[(i, i)] = w.iter().enumerate().map(|(y, row)| x[(y, y)] * row[i]).sum();
                }
                out
            }
        }
    }

    /// Complementary channel in the environment basis labeled by Kraus
    /// operators: entry `(i, j)` is `tr(K_i m K_j†)`.
    pub fn complementary_matrix(&self, m: &CMatrix) -> CMatrix {
        let k = self.kraus.len();
        CMatrix::from_fn(k, k, |i, j| linalg::trace_product(&self.kraus_products[i * k + j], m))
    }

    pub fn complementary_adjoint(&self, x: &CMatrix) -> CMatrix {
        let k = self.kraus.len();
        let mut out = CMatrix::zeros(self.dim_in(), self.dim_in());
        for i in 0..k {
            for j in 0..k {
                let w = x[(j, i)];
                if w != ZERO {
                    out += &self.kraus_products[i * k + j] * w;
                }
            }
        }
        out
    }

    fn kraus_apply(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out(), self.dim_out());
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    fn matrix_units(d: usize) -> impl Iterator<Item = (usize, usize, CMatrix)> {
        (0..d).flat_map(move |i| {
            (0..d).map(move |j| {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = c(1.0, 0.0);
                (i, j, e)
            })
        })
    }

    /// Checks `M ∘ E = E` on the matrix-unit basis of the input space.
    pub fn is_qc(&self) -> bool {
        Self::matrix_units(self.dim_in()).all(|(_, _, e)| {
            let out = self.kraus_apply(&e);
            let mut off = out.clone();
            for y in 0..off.nrows() {
                off[(y, y)] = ZERO;
            }
            linalg::max_abs(&off) <= TAU_CHAN
        })
    }

    /// Checks `E ∘ M = E` on the matrix-unit basis of the input space.
    pub fn is_cq(&self) -> bool {
        Self::matrix_units(self.dim_in())
            .filter(|(i, j, _)| i != j)
            .all(|(_, _, e)| linalg::max_abs(&self.kraus_apply(&e)) <= TAU_CHAN)
    }

    /// `self ⊗ other` as a Kraus channel.
    pub fn tensor(&self, other: &Channel) -> Result<Channel> {
        let mut ops = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                ops.push(linalg::kron(a, b));
            }
        }
        Self::kraus(ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{example_channel_f, random};

    #[test]
    fn identity_leaves_state_unchanged() {
        let rho = random::random_density(3, 3, 1, "X");
        let out = rho.apply(&Channel::identity(3).unwrap()).unwrap();
        assert!(linalg::max_abs(&(out.matrix() - rho.matrix())) < 1e-12);
        assert_eq!(out.labels(), vec!["Y"]);
    }

    #[test]
    fn variants_match_kraus_form() {
        let mut rng = random::rng(5);
        let channels = vec![
            example_channel_f(3).unwrap(),
            Channel::binary_symmetric(0.2).unwrap(),
            Channel::cq(vec![
                random::random_density_with(&mut rng, 2, 2, "Y").into_matrix(),
                random::random_density_with(&mut rng, 2, 1, "Y").into_matrix(),
                random::random_density_with(&mut rng, 2, 2, "Y").into_matrix(),
            ])
            .unwrap(),
            random::random_kraus_channel(&mut rng, 2, 3, 2),
        ];
        for ch in channels {
            let d = ch.dim_in();
            let m = random::random_density_with(&mut rng, d, d, "X").into_matrix();
            assert!(linalg::max_abs(&(ch.apply_matrix(&m) - ch.kraus_apply(&m))) < 1e-12);
            let x = random::random_density_with(&mut rng, ch.dim_out(), ch.dim_out(), "Y").into_matrix();
            let lhs = linalg::trace_product(&x, &ch.apply_matrix(&m));
            let rhs = linalg::trace_product(&ch.adjoint_apply(&x), &m);
            assert!((lhs - rhs).norm() < 1e-12);
            let k = ch.kraus_operators().len();
            let xe = random::random_density_with(&mut rng, k, k, "E").into_matrix();
            let lhs = linalg::trace_product(&xe, &ch.complementary_matrix(&m));
            let rhs = linalg::trace_product(&ch.complementary_adjoint(&xe), &m);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn qc_and_cq_classification() {
        let f = example_channel_f(3).unwrap();
        assert!(f.is_qc() && !f.is_cq());
        let id = Channel::classical_identity(3).unwrap();
        assert!(id.is_qc() && id.is_cq());
        let u = random::haar_random_unitary(2, 17);
        let ch = Channel::unitary(u).unwrap();
        assert!(!ch.is_qc() && !ch.is_cq());
    }

    #[test]
    fn invalid_channels_rejected() {
        assert!(Channel::kraus(vec![linalg::identity(2) * c(0.5, 0.0)]).is_err());
        assert!(Channel::classical(vec![vec![0.5, 0.5], vec![0.6, 0.5]]).is_err());
        assert!(Channel::classical(vec![vec![1.5, 1.0], vec![-0.5, 0.0]]).is_err());
        assert!(Channel::cq(vec![linalg::identity(2)]).is_err());
    }

    #[test]
    fn dimension_mismatch_on_apply() {
        let rho = DensityOperator::maximally_mixed(Register::new("X", 3).unwrap());
        assert!(matches!(
            rho.apply(&Channel::identity(2).unwrap()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
