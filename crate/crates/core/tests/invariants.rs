use proptest::prelude::*;
use qrand_core::info::{holevo_quantity, mutual_information, shannon_entropy, von_neumann_entropy, Ensemble};
use qrand_core::linalg::{self, c, CMatrix};
use qrand_core::protocol::{random_protocol, run_exact, shipped_suite, RunOptions};
use qrand_core::quantum::random::{ginibre, haar_random_unitary, random_density, random_kraus_channel, random_povm, rng};
use qrand_core::quantum::{example_channel_f, DensityOperator, Povm, Register};

fn check_state(rho: &DensityOperator) {
    let m = rho.matrix();
    assert!(linalg::max_abs(&(m - m.adjoint())) <= 1e-9);
    assert!(rho.eigenvalues().iter().all(|&l| l >= -1e-9));
    assert!((rho.trace() - 1.0).abs() <= 1e-9);
}

fn check_povm(p: &Povm) {
    let d = p.dim();
    let sum = p.elements().iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
    assert!(linalg::max_abs(&(sum - linalg::identity(d))) <= 1e-9);
    for e in p.elements() {
        assert!(linalg::max_abs(&(e - e.adjoint())) <= 1e-9);
        assert!(linalg::eigenvalues_h(e).iter().all(|&l| l >= -1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_inverts_tensor(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let a = random_density(da, da, seed, "A");
        let b = random_density(db, db, seed ^ 0xabc, "B");
        let ab = a.tensor(&b).unwrap();
        check_state(&ab);
        let back = ab.partial_trace(&["A"]).unwrap();
        prop_assert!(linalg::max_abs(&(back.matrix() - a.matrix())) <= 1e-12);
        let back = ab.partial_trace(&["B"]).unwrap();
        prop_assert!(linalg::max_abs(&(back.matrix() - b.matrix())) <= 1e-12);
    }

    #[test]
    fn entropy_bounds(seed in any::<u64>(), d in 1usize..6, rank in 1usize..6) {
        let rho = random_density(d, rank.min(d), seed, "X");
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!(s >= -1e-12 && s <= (d as f64).log2() + 1e-9);
        if rank == 1 || d == 1 {
            prop_assert!(s.abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>(), d in 2usize..5) {
        let rho = random_density(d, d, seed, "X");
        let u = haar_random_unitary(d, seed.wrapping_add(1));
        let moved = rho.conjugate(&u, "X").unwrap();
        let gap = von_neumann_entropy(&rho).unwrap() - von_neumann_entropy(&moved).unwrap();
        prop_assert!(gap.abs() <= 1e-9);
    }

    #[test]
    fn mutual_information_symmetric_nonnegative_bounded(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let m = random_density(da * db, 1 + (seed as usize % (da * db)), seed, "AB").into_matrix();
        let rho = DensityOperator::new(vec![Register::new("A", da).unwrap(), Register::new("B", db).unwrap()], m).unwrap();
        let ab = mutual_information(&rho, &["A"], &["B"]).unwrap();
        let ba = mutual_information(&rho, &["B"], &["A"]).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!(ab >= -1e-9);
        prop_assert!(ab <= 2.0 * (da.min(db) as f64).log2() + 1e-9);
    }

    #[test]
    fn holevo_quantity_below_output_entropy(seed in any::<u64>(), k in 1usize..5) {
        let ch = random_kraus_channel(&mut rng(seed), 2, 3, 2);
        let states: Vec<(f64, DensityOperator)> =
            (0..k).map(|i| (1.0 / k as f64, random_density(2, 1 + i % 2, seed.wrapping_add(i as u64 + 1), "X"))).collect();
        let ens = Ensemble::new(states).unwrap();
        let chi = holevo_quantity(&ens, &ch).unwrap();
        let out = linalg::entropy_of(&ch.apply_matrix(&ens.average()));
        prop_assert!(chi >= -1e-9 && chi <= out + 1e-9);
    }

    #[test]
    fn povm_probabilities_are_traces(seed in any::<u64>(), d in 2usize..5, n in 2usize..5) {
        let povm = random_povm(&mut rng(seed), d, n);
        check_povm(&povm);
        let rho = random_density(d, d, seed ^ 7, "X");
        let probs = povm.probabilities(rho.matrix());
        for (p, e) in probs.iter().zip(povm.elements()) {
            let mut t = 0.0;
            for i in 0..d {
                for j in 0..d {
                    t += (e[(i, j)] * rho.matrix()[(j, i)]).re;
                }
            }
            prop_assert!((p - t).abs() <= 1e-12);
        }
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn channel_outputs_are_states(seed in any::<u64>(), din in 1usize..4, dout in 1usize..4, k in 1usize..4) {
        let ch = random_kraus_channel(&mut rng(seed), din, dout, k);
        let rho = random_density(din, din, seed ^ 3, "X");
        let out = rho.apply(&ch.clone().with_registers("X", "Y")).unwrap();
        check_state(&out);
    }

    #[test]
    fn f_output_entropy_chain_rule(seed in any::<u64>(), d in 2usize..5) {
        let psi = qrand_core::quantum::random::random_pure_state(d, seed);
        let f = example_channel_f(d).unwrap();
        let out = linalg::entropy_of(&f.apply_matrix(&psi.density().into_matrix()));
        let avg = qrand_core::info::uncertainty_average(
            &psi,
            &qrand_core::quantum::computational_basis(d),
            &qrand_core::quantum::fourier_basis(d),
        )
        .unwrap();
        prop_assert!((out - 1.0 - avg).abs() <= 1e-9);
    }
}

#[test]
fn dephasing_is_idempotent_and_trace_preserving() {
    for seed in 0..1000u64 {
        let d = 2 + (seed % 3) as usize;
        let rho = random_density(d, 1 + (seed % d as u64) as usize, seed, "X");
        let once = rho.dephase("X").unwrap();
        let twice = once.dephase("X").unwrap();
        assert!(linalg::max_abs(&(once.matrix() - twice.matrix())) <= 1e-15);
        assert!((once.trace() - 1.0).abs() <= 1e-12);
        assert!(linalg::is_diagonal(once.matrix()));
    }
}

#[test]
fn chain_rule_on_random_classical_joints() {
    let mut r = rng(11);
    for _ in 0..100 {
        let g = ginibre(&mut r, 1, 12);
        let w: Vec<f64> = g.iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        // Z = (Z1, Z2, Z3) with radices 2, 3, 2.
        let dims = [2, 3, 2];
        let h1 = qrand_core::info::marginal_entropy(&p, &dims, &[0]);
        let h12 = qrand_core::info::marginal_entropy(&p, &dims, &[0, 1]);
        let h123 = shannon_entropy(&p).unwrap();
        let sum = h1 + (h12 - h1) + (h123 - h12);
        assert!((sum - h123).abs() <= 1e-9);
        assert!(h12 - h1 >= -1e-12 && h123 - h12 >= -1e-12);
    }
}

#[test]
fn data_processing_on_protocol_joints() {
    let mut protocols: Vec<_> = shipped_suite().unwrap().into_iter().map(|e| e.protocol).collect();
    protocols.extend((0..20).map(|s| random_protocol(s).unwrap()));
    for p in protocols {
        let t = run_exact(&p, &RunOptions::default()).unwrap();
        let last = t.steps.last().unwrap().mutual_information;
        assert!(t.i_jk <= last + 1e-9, "{}: I(J:K) {} > final I(A:B) {}", p.name(), t.i_jk, last);
        for s in &t.steps {
            assert!((s.probability_mass - 1.0).abs() <= 1e-9, "{} step {}", p.name(), s.index);
        }
    }
}

#[test]
fn scaled_states_are_rejected() {
    let m = linalg::identity(2) * c(0.6, 0.0);
    assert!(DensityOperator::new(vec![Register::new("X", 2).unwrap()], m).is_err());
}
