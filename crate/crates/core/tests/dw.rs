use proptest::prelude::*;
use qrand_core::dw::{
    build_source, dw_sweep, pgm_decoder, random_binning, run_dw, CqSource, DwMode, DwOptions, DEFAULT_MAX_DECODER_DIM,
};
use qrand_core::linalg::{self, CMatrix};
use qrand_core::quantum::random::{random_povm, random_pure_state, rng};
use qrand_core::quantum::{example_channel_f, maximally_entangled_state, Channel, PureState, Register};
use qrand_core::Execution;

fn f2(n: usize) -> CqSource {
    build_source(&maximally_entangled_state(2), &example_channel_f(2).unwrap(), n).unwrap()
}

fn random_source(seed: u64, n: usize) -> CqSource {
    let v = random_pure_state(4, seed);
    let psi = PureState::new(vec![Register::new("R", 2).unwrap(), Register::new("X", 2).unwrap()], v.vector().clone())
        .unwrap();
    let povm = random_povm(&mut rng(seed + 100), 2, 3);
    build_source(&psi, &Channel::qc(povm).unwrap(), n).unwrap()
}

/// Error probability from explicit decoder POVMs on `Rⁿ`.
fn explicit_error(src: &CqSource, delta: f64, seed: u64) -> f64 {
    let binning = random_binning(src, delta, seed).unwrap();
    let dim = 2usize.pow(src.n as u32);
    let mut success = 0.0;
    for members in binning.bins().values() {
        let povm = pgm_decoder(src, members, DEFAULT_MAX_DECODER_DIM).unwrap();
        for (k, &i) in members.iter().enumerate() {
            let letters = src.letters(i);
            let mut rho = CMatrix::identity(1, 1);
            for &y in &letters {
                rho = linalg::kron(&rho, src.cond_states[y].as_ref().unwrap().matrix());
            }
            assert_eq!(rho.nrows(), dim);
            let p = src.sequence_probability(&letters);
            success += p * linalg::trace_product(&povm.elements()[k], &rho).re;
        }
    }
    1.0 - success
}

#[test]
fn f_d_source_information_is_log_d() {
    for d in [2, 3, 4] {
        let src = build_source(&maximally_entangled_state(d), &example_channel_f(d).unwrap(), 1).unwrap();
        let log_d = (d as f64).log2();
        assert!((src.i_yr - log_d).abs() < 1e-9, "d={d}: {}", src.i_yr);
        assert!((src.h_y - (1.0 + log_d)).abs() < 1e-9);
    }
}

#[test]
fn exact_error_matches_explicit_povms() {
    for (src, delta) in [(f2(3), 0.5), (random_source(1, 3), 0.3), (random_source(2, 4), 0.4)] {
        for seed in 0..3 {
            let r = run_dw(&src, delta, seed, &DwOptions::default()).unwrap();
            let want = explicit_error(&src, delta, seed);
            assert!((r.pr_err - want).abs() < 1e-9, "seed {seed}: {} vs {want}", r.pr_err);
        }
    }
}

#[test]
fn exact_and_sampled_agree() {
    let opts = DwOptions { mode: DwMode::Sampled, trials: 4000, ..DwOptions::default() };
    for n in [2, 3, 4] {
        for (src, delta) in [(f2(n), 0.5), (random_source(7, n), 0.3)] {
            for seed in 0..3 {
                let e = run_dw(&src, delta, seed, &DwOptions::default()).unwrap();
                let s = run_dw(&src, delta, seed, &opts).unwrap();
                assert_eq!(s.mode, DwMode::Sampled);
                assert!(
                    (e.pr_err - s.pr_err).abs() <= 3.0 * s.std_err + 1e-12,
                    "n={n} seed={seed}: exact {} sampled {} ± {}",
                    e.pr_err,
                    s.pr_err,
                    s.std_err
                );
            }
        }
    }
}

#[test]
fn error_trend_over_even_block_lengths() {
    let seeds: Vec<u64> = (0..10).collect();
    let mut means = Vec::new();
    for n in [2, 4, 6] {
        let src = f2(n);
        let total: f64 = seeds.iter().map(|&s| run_dw(&src, 0.5, s, &DwOptions::default()).unwrap().pr_err).sum();
        means.push(total / seeds.len() as f64);
    }
    assert!(means.windows(2).all(|w| w[1] <= w[0]), "{means:?}");
}

#[test]
fn per_bin_errors_are_reported() {
    let r = run_dw(&f2(4), 0.5, 0, &DwOptions::default()).unwrap();
    let worst = r.worst_bin_error.unwrap();
    assert!((0.0..1.0).contains(&worst));
    assert!(r.pr_err <= r.unbinned_mass + worst + 1e-12);
    assert!(r.nonempty_bins as u64 <= r.num_bins);
    assert!((r.mean_occupancy - r.typical_sequences as f64 / r.nonempty_bins as f64).abs() < 1e-12);
}

#[test]
fn large_blocks_fall_back_to_sampling() {
    let r = run_dw(&f2(7), 0.5, 0, &DwOptions { trials: 500, ..DwOptions::default() }).unwrap();
    assert_eq!(r.mode, DwMode::Sampled);
    assert_eq!(r.trials, 500);
    let too_big = run_dw(&f2(11), 0.5, 0, &DwOptions::default());
    assert!(matches!(too_big, Err(qrand_core::Error::Infeasible(_))));
}

#[test]
fn parallel_and_sequential_are_identical() {
    let psi = maximally_entangled_state(2);
    let ch = example_channel_f(2).unwrap();
    let par = DwOptions { execution: Execution::Parallel, ..DwOptions::default() };
    let seq = DwOptions { execution: Execution::Sequential, ..DwOptions::default() };
    assert_eq!(dw_sweep(&psi, &ch, &[2, 4], 0.5, &[0, 1], &par).unwrap(), dw_sweep(&psi, &ch, &[2, 4], 0.5, &[0, 1], &seq).unwrap());
    let sp = DwOptions { mode: DwMode::Sampled, trials: 300, ..par };
    let ss = DwOptions { mode: DwMode::Sampled, trials: 300, ..seq };
    assert_eq!(run_dw(&f2(4), 0.5, 9, &sp).unwrap(), run_dw(&f2(4), 0.5, 9, &ss).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bin_count_respects_rate(n in 1usize..6, delta in 0.05f64..2.0, seed in any::<u64>()) {
        let src = random_source(seed % 50, n);
        let r = run_dw(&src, delta, seed, &DwOptions::default()).unwrap();
        let n = n as f64;
        prop_assert!((r.num_bins as f64).log2() / n <= r.h_y_given_r + delta + 1.0 / n + 1e-12);
        prop_assert!((r.net_rate - r.nominal_rate).abs() <= 1.0 / n + 1e-12);
        prop_assert!((0.0..=1.0).contains(&r.pr_err));
    }

    #[test]
    fn decoders_are_valid_povms(seed in 0u64..200, n in 1usize..5) {
        let src = random_source(seed, n);
        let binning = random_binning(&src, 0.3, seed).unwrap();
        let dim = 2usize.pow(n as u32);
        for members in binning.bins().values().take(4) {
            let povm = pgm_decoder(&src, members, DEFAULT_MAX_DECODER_DIM).unwrap();
            let sum = povm.elements().iter().fold(CMatrix::zeros(dim, dim), |acc, e| acc + e);
            prop_assert!(linalg::max_abs(&(sum - linalg::identity(dim))) <= 1e-9);
            for e in povm.elements() {
                prop_assert!(linalg::eigenvalues_h(e).iter().all(|&l| l >= -1e-9));
            }
        }
    }
}
