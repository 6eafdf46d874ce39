//! Entropies and mutual information, all in bits.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::quantum::{Channel, DensityOperator, Povm, PureState, Register, TAU_TRACE};

/// Nonnegativity slack for mutual-information style quantities.
pub const TAU_MI: f64 = 1e-9;

pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    rho.validate()?;
    Ok(linalg::entropy_of(rho.matrix()))
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    if let Some(bad) = p.iter().find(|x| !(**x >= -TAU_TRACE)) {
        return Err(Error::InvalidDistribution(format!("entry {bad} is negative")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > TAU_TRACE {
        return Err(Error::InvalidDistribution(format!("sums to {s}")));
    }
    Ok(())
}

pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    check_distribution(p)?;
    Ok(linalg::spectrum_entropy(p.iter().copied()))
}

/// `H(A|B) = H(AB) − H(B)` where `B` is `given` and `A` the remaining
/// registers. Negative values are allowed unless every register in `A` is
/// classical.
pub fn conditional_entropy(joint: &DensityOperator, given: &[&str]) -> Result<f64> {
    let h_ab = von_neumann_entropy(joint)?;
    let h_b = linalg::entropy_of(joint.partial_trace(given)?.matrix());
    let h = h_ab - h_b;
    let all_classical = joint
        .registers()
        .iter()
        .filter(|r| !given.contains(&r.label()))
        .all(Register::is_classical);
    if all_classical && h < -TAU_MI {
        return Err(Error::InvalidState(format!(
            "conditional entropy {h} of classical registers is negative"
        )));
    }
    Ok(h)
}

fn check_partition(rho: &DensityOperator, a: &[&str], b: &[&str]) -> Result<()> {
    for l in a.iter().chain(b) {
        rho.position(l)?;
    }
    if let Some(l) = a.iter().find(|l| b.contains(l)) {
        return Err(Error::InvalidPartition(format!("register {l:?} on both sides")));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidPartition("empty side".into()));
    }
    if a.len() + b.len() != rho.registers().len() {
        return Err(Error::InvalidPartition(format!(
            "{} + {} labels do not cover {} registers",
            a.len(),
            b.len(),
            rho.registers().len()
        )));
    }
    Ok(())
}

/// `I(A:B) = H(A) + H(B) − H(AB)` for a bipartition of the registers.
pub fn mutual_information(rho: &DensityOperator, part_a: &[&str], part_b: &[&str]) -> Result<f64> {
    check_partition(rho, part_a, part_b)?;
    let h_ab = von_neumann_entropy(rho)?;
    let h_a = linalg::entropy_of(rho.partial_trace(part_a)?.matrix());
    let h_b = linalg::entropy_of(rho.partial_trace(part_b)?.matrix());
    Ok(h_a + h_b - h_ab)
}

/// Finite list of `(probability, state)` pairs on a common register.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Ensemble {
    entries: Vec<(f64, DensityOperator)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, DensityOperator)>) -> Result<Self> {
        let first = entries.first().ok_or_else(|| Error::InvalidEnsemble("empty".into()))?;
        let d = first.1.dim();
        if let Some((i, _)) = entries.iter().enumerate().find(|(_, (_, s))| s.dim() != d) {
            return Err(Error::InvalidEnsemble(format!("state {i} has dimension != {d}")));
        }
        let probs: Vec<f64> = entries.iter().map(|e| e.0).collect();
        check_distribution(&probs).map_err(|e| Error::InvalidEnsemble(e.to_string()))?;
        Ok(Self { entries })
    }

    /// Builds an ensemble from pure state vectors on one register.
    pub fn from_pure(register: &Register, probs: &[f64], states: &[crate::linalg::CVector]) -> Result<Self> {
        let entries = probs
            .iter()
            .zip(states)
            .map(|(&p, v)| {
                let psi = PureState::normalized(vec![register.clone()], v.clone())?;
                Ok((p, psi.density()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn entries(&self) -> &[(f64, DensityOperator)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries[0].1.dim()
    }

    pub fn average(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (p, s) in &self.entries {
            m += s.matrix() * c(*p, 0.0);
        }
        m
    }
}

/// `S(E(ρ̄)) − Σ_w p(w) S(E(ψ_w))`.
pub fn holevo_quantity(ensemble: &Ensemble, channel: &Channel) -> Result<f64> {
    if ensemble.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "ensemble dimension {} vs channel input {}",
            ensemble.dim(),
            channel.dim_in()
        )));
    }
    let avg = linalg::entropy_of(&channel.apply_matrix(&ensemble.average()));
    let cond: f64 = ensemble
        .entries()
        .iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, s)| p * linalg::entropy_of(&channel.apply_matrix(s.matrix())))
        .sum();
    Ok(avg - cond)
}

fn basis_entropy(psi: &PureState, basis: &Povm) -> Result<f64> {
    if basis.dim() != psi.vector().len() || basis.basis_vectors().is_none() {
        return Err(Error::InvalidPovm(format!(
            "expected a rank-one basis of dimension {}",
            psi.vector().len()
        )));
    }
    let rho = linalg::outer(psi.vector());
    let probs: Vec<f64> = basis.probabilities(&rho).into_iter().map(|p| p.max(0.0)).collect();
    Ok(linalg::spectrum_entropy(probs))
}

/// `(H(M|G=0), H(M|G=1))`: outcome entropies of measuring `psi` in the two
/// bases.
pub fn uncertainty_entropies(psi: &PureState, basis0: &Povm, basis1: &Povm) -> Result<(f64, f64)> {
    Ok((basis_entropy(psi, basis0)?, basis_entropy(psi, basis1)?))
}

/// `½[H(M|G=0) + H(M|G=1)]`. For mutually unbiased bases this is at least
/// `½ log₂ d`.
pub fn uncertainty_average(psi: &PureState, basis0: &Povm, basis1: &Povm) -> Result<f64> {
    let (h0, h1) = uncertainty_entropies(psi, basis0, basis1)?;
    Ok(0.5 * (h0 + h1))
}

/// Entropy of a marginal of a joint probability table indexed in mixed radix
/// over `dims`.
pub fn marginal_entropy(table: &[f64], dims: &[usize], keep: &[usize]) -> f64 {
    linalg::spectrum_entropy(marginal(table, dims, keep))
}

pub fn marginal(table: &[f64], dims: &[usize], keep: &[usize]) -> Vec<f64> {
    let kdims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let mut out = vec![0.0; kdims.iter().product()];
    for (idx, &p) in table.iter().enumerate() {
        let digits = linalg::mixed_radix_digits(idx, dims);
        let kd: Vec<usize> = keep.iter().map(|&k| digits[k]).collect();
        out[linalg::mixed_radix(&kd, &kdims)] += p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CVector;
    use crate::quantum::{
        computational_basis, example_channel_f, fourier_basis, maximally_entangled_state, random,
    };

    fn reg(l: &str, d: usize) -> Register {
        Register::new(l, d).unwrap()
    }

    #[test]
    fn entropy_edge_cases() {
        let pure = random::random_pure_state(4, 1).density();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);
        for d in 1..=6 {
            let mixed = DensityOperator::maximally_mixed(reg("A", d));
            assert!((von_neumann_entropy(&mixed).unwrap() - (d as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_unitary_invariance() {
        for seed in 0..20 {
            let rho = random::random_density(4, 3, seed, "A");
            let u = random::haar_random_unitary(4, seed + 100);
            let moved = rho.conjugate(&u, "A").unwrap();
            let dh = von_neumann_entropy(&rho).unwrap() - von_neumann_entropy(&moved).unwrap();
            assert!(dh.abs() <= 1e-9);
        }
    }

    #[test]
    fn shannon_basics() {
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!(shannon_entropy(&[0.5, 0.6]).is_err());
        assert!(shannon_entropy(&[]).is_err());
    }

    #[test]
    fn classical_chain_rule() {
        // Oracle: direct marginal sums over a random 2x3x2 joint table.
        let mut r = random::rng(11);
        for _ in 0..50 {
            let dims = [2, 3, 2];
            let p = random::random_distribution(&mut r, 12);
            let h1 = marginal_entropy(&p, &dims, &[0]);
            let h12 = marginal_entropy(&p, &dims, &[0, 1]);
            let h123 = marginal_entropy(&p, &dims, &[0, 1, 2]);
            let chain = h1 + (h12 - h1) + (h123 - h12);
            assert!((chain - shannon_entropy(&p).unwrap()).abs() <= 1e-9);
        }
    }

    #[test]
    fn conditional_entropy_of_correlated_bits() {
        let a = Register::classical("A", 2).unwrap();
        let b = Register::classical("B", 2).unwrap();
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]));
        let rho = DensityOperator::new(vec![a, b], m).unwrap();
        assert!(conditional_entropy(&rho, &["B"]).unwrap().abs() < 1e-12);
        let phi = maximally_entangled_state(2).density();
        assert!((conditional_entropy(&phi, &["X"]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_cases() {
        let a = random::random_density(2, 2, 1, "A");
        let b = random::random_density(3, 3, 2, "B");
        let ab = a.tensor(&b).unwrap();
        assert!(mutual_information(&ab, &["A"], &["B"]).unwrap().abs() < 1e-12);
        let phi = maximally_entangled_state(2).density();
        assert!((mutual_information(&phi, &["R"], &["X"]).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(mutual_information(&phi, &["R"], &["R"]), Err(Error::InvalidPartition(_))));
        assert!(matches!(mutual_information(&phi, &["R"], &[]), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn mutual_information_bounds_and_symmetry() {
        let mut r = random::rng(3);
        for _ in 0..30 {
            let psi = random::random_pure_state_with(&mut r, 6);
            let rho = DensityOperator::new(vec![reg("A", 2), reg("B", 3)], psi.density().into_matrix()).unwrap();
            let mixed = rho.apply(&random::random_kraus_channel(&mut r, 3, 3, 2).with_registers("B", "B")).unwrap();
            for s in [&rho, &mixed] {
                let i_ab = mutual_information(s, &["A"], &["B"]).unwrap();
                let i_ba = mutual_information(s, &["B"], &["A"]).unwrap();
                assert!((i_ab - i_ba).abs() < 1e-12);
                assert!(i_ab >= -TAU_MI && i_ab <= 2.0 * 2f64.log2() + 1e-9);
            }
        }
    }

    #[test]
    fn holevo_single_element_is_zero() {
        let f = example_channel_f(2).unwrap();
        let ens = Ensemble::new(vec![(1.0, random::random_density(2, 1, 4, "X"))]).unwrap();
        assert!(holevo_quantity(&ens, &f).unwrap().abs() < 1e-12);
    }

    #[test]
    fn holevo_of_uniform_computational_ensemble_on_f() {
        for d in 2..=4 {
            let f = example_channel_f(d).unwrap();
            let x = reg("X", d);
            let states: Vec<CVector> = (0..d).map(|w| linalg::basis_vector(d, w)).collect();
            let ens = Ensemble::from_pure(&x, &vec![1.0 / d as f64; d], &states).unwrap();
            let chi = holevo_quantity(&ens, &f).unwrap();
            assert!((chi - 0.5 * (d as f64).log2()).abs() <= 1e-9);
        }
    }

    #[test]
    fn holevo_equals_cq_mutual_information() {
        // Oracle: build Σ p(w)|w⟩⟨w| ⊗ E(ψ_w) and evaluate I(W:Y) directly.
        let mut r = random::rng(21);
        for _ in 0..20 {
            let ch = random::random_kraus_channel(&mut r, 2, 3, 2);
            let k = 3;
            let probs = random::random_distribution(&mut r, k);
            let entries: Vec<(f64, DensityOperator)> =
                probs.iter().map(|&p| (p, random::random_density_with(&mut r, 2, 2, "X"))).collect();
            let ens = Ensemble::new(entries.clone()).unwrap();
            let mut joint = CMatrix::zeros(k * 3, k * 3);
            for (w, (p, s)) in entries.iter().enumerate() {
                let out = ch.apply_matrix(s.matrix());
                let mut proj = CMatrix::zeros(k, k);
                proj[(w, w)] = c(*p, 0.0);
                joint += linalg::kron(&proj, &out);
            }
            let wy = DensityOperator::new(vec![Register::classical("W", k).unwrap(), reg("Y", 3)], joint).unwrap();
            let oracle = mutual_information(&wy, &["W"], &["Y"]).unwrap();
            let chi = holevo_quantity(&ens, &ch).unwrap();
            assert!((chi - oracle).abs() < 1e-10);
            let avg_out = linalg::entropy_of(&ch.apply_matrix(&ens.average()));
            assert!(chi <= avg_out + 1e-12 && chi >= -TAU_MI);
        }
    }

    #[test]
    fn uncertainty_equality_cases() {
        let z = computational_basis(2);
        let x = fourier_basis(2);
        let zero = PureState::new(vec![reg("Q", 2)], linalg::basis_vector(2, 0)).unwrap();
        let (h0, h1) = uncertainty_entropies(&zero, &z, &x).unwrap();
        assert!(h0.abs() < 1e-12 && (h1 - 1.0).abs() < 1e-12);
        assert!((uncertainty_average(&zero, &z, &x).unwrap() - 0.5).abs() < 1e-12);
        let plus_vec = x.basis_vectors().unwrap()[0].clone();
        let plus = PureState::new(vec![reg("Q", 2)], plus_vec).unwrap();
        assert!((uncertainty_average(&plus, &z, &x).unwrap() - 0.5).abs() < 1e-12);
        let not_basis = Povm::unlabeled(vec![CMatrix::identity(2, 2) * c(0.5, 0.0); 2]).unwrap();
        assert!(uncertainty_average(&zero, &z, &not_basis).is_err());
    }

    #[test]
    fn output_entropy_decomposes_over_the_basis_bit() {
        // H(M,G)_ψ = 1 + ½[H(M|G=0) + H(M|G=1)] for the two-basis channel.
        let mut r = random::rng(8);
        for d in 2..=4 {
            let f = example_channel_f(d).unwrap();
            for _ in 0..50 {
                let psi = random::random_pure_state_with(&mut r, d);
                let out = linalg::entropy_of(&f.apply_matrix(&psi.density().into_matrix()));
                let avg = uncertainty_average(&psi, &computational_basis(d), &fourier_basis(d)).unwrap();
                assert!((out - 1.0 - avg).abs() <= 1e-9);
            }
        }
    }
}
