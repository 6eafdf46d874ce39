use rand::seq::SliceRandom;
use rand::Rng;

use super::model::{ClassicalMap, Extractor, Instrument, LocalOp, Party, Protocol, ProtocolDraft, Step};
use crate::error::Result;
use crate::linalg::{self, c, CMatrix};
use crate::quantum::random::{haar_unitary_with, random_density_with, random_kraus_channel, random_povm, rng};
use crate::quantum::{
    example_channel_f, fourier_matrix, maximally_entangled_state, mub_measurement_channel, Channel, DensityOperator,
    Register,
};

fn local(party: Party, op: LocalOp) -> Step {
    Step::Local { party, op }
}

fn instrument(party: Party, ins: Instrument) -> Step {
    local(party, LocalOp::Instrument(ins))
}

fn classical_map(party: Party, inputs: &[&str], output: Register, table: Vec<usize>) -> Step {
    local(party, LocalOp::ClassicalMap(ClassicalMap { inputs: inputs.iter().map(|s| s.to_string()).collect(), output, table }))
}

/// The one-use, one-bit back-assisted protocol over the MUB measurement
/// channel with Fourier second basis.
pub fn figure4_protocol(d: usize) -> Result<Protocol> {
    let v = fourier_matrix(d);
    figure4_with(&v, &v.transpose(), &format!("figure4:d={d}"))
}

/// Layout of [`figure4_protocol`] for the measurement channel whose second basis is the
/// columns of `second_basis`; Alice applies `correction` to `R` when `Z = 1`.
/// The exact construction uses `correction = second_basisᵀ`.
pub fn figure4_with(second_basis: &CMatrix, correction: &CMatrix, name: &str) -> Result<Protocol> {
    let d = second_basis.nrows();
    let channel = if *second_basis == fourier_matrix(d) { example_channel_f(d)? } else { mub_measurement_channel(second_basis)? };
    let phi = maximally_entangled_state(d).density();
    let measure = |u: &CMatrix| -> Vec<Vec<CMatrix>> {
        (0..d)
            .map(|m| {
                let mut p = CMatrix::zeros(d, d);
                p[(m, m)] = c(1.0, 0.0);
                vec![p * u]
            })
            .collect()
    };
    let correct = Instrument {
        acts_on: vec!["R".into()],
        controls: vec!["Z".into()],
        outcome: Some(Register::classical("Mhat", d)?),
        kraus: vec![measure(&linalg::identity(d)), measure(correction)],
        discard: true,
    };
    let steps = vec![
        Step::NoisyUse { channel, input: "X".into(), output: "Y".into(), mi_bits: Some((d as f64).log2()) },
        classical_map(Party::Bob, &["Y"], Register::classical("G", 2)?, (0..2 * d).map(|y| y / d).collect()),
        classical_map(Party::Bob, &["Y"], Register::classical("M", d)?, (0..2 * d).map(|y| y % d).collect()),
        Step::AuxBack { source: "G".into(), dest: "Z".into() },
        instrument(Party::Alice, correct),
    ];
    ProtocolDraft {
        name: name.into(),
        initial_alice: phi,
        initial_bob: DensityOperator::trivial(),
        steps,
        j: Extractor::of(&["Mhat", "Z"]),
        k: Extractor::of(&["M", "G"]),
        alphabet_k: 2 * d,
        c: None,
    }
    .build()
}

/// Alice flips a fair coin and sends it over a noiseless bit channel.
pub fn coin_copy_protocol() -> Result<Protocol> {
    ProtocolDraft {
        name: "coin-copy".into(),
        initial_alice: DensityOperator::trivial(),
        initial_bob: DensityOperator::trivial(),
        steps: vec![
            instrument(Party::Alice, Instrument::sample("A", &[0.5, 0.5])?),
            Step::NoisyUse { channel: Channel::classical_identity(2)?, input: "A".into(), output: "B".into(), mi_bits: Some(1.0) },
        ],
        j: Extractor::of(&["A"]),
        k: Extractor::of(&["B"]),
        alphabet_k: 2,
        c: None,
    }
    .build()
}

/// Alice sends one of the four qubit basis states `|0⟩, |1⟩, |+⟩, |−⟩`,
/// chosen uniformly, through `F_2`; Bob keeps the raw outcome.
pub fn f2_basis_forward_protocol() -> Result<Protocol> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let h = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
    let prep = vec![linalg::identity(2), x.clone(), h.clone(), &h * &x];
    ProtocolDraft {
        name: "f2-basis-forward".into(),
        initial_alice: DensityOperator::basis_state(Register::new("X", 2)?, 0)?,
        initial_bob: DensityOperator::trivial(),
        steps: vec![
            instrument(Party::Alice, Instrument::sample("W", &[0.25; 4])?),
            instrument(Party::Alice, Instrument::controlled_unitary(&["X"], &["W"], prep)),
            Step::NoisyUse { channel: example_channel_f(2)?, input: "X".into(), output: "Y".into(), mi_bits: Some(1.0) },
        ],
        j: Extractor::of(&["W"]),
        k: Extractor::of(&["Y"]),
        alphabet_k: 4,
        c: None,
    }
    .build()
}

/// A shipped protocol with its `χ(E^{⊗n})` when it is forward-assisted.
pub struct SuiteEntry {
    pub protocol: Protocol,
    pub chi_n: Option<f64>,
}

/// Protocols the audit command runs by default.
pub fn shipped_suite() -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    for d in [2, 3, 4, 8] {
        out.push(SuiteEntry { protocol: figure4_protocol(d)?, chi_n: None });
    }
    out.push(SuiteEntry { protocol: coin_copy_protocol()?, chi_n: Some(1.0) });
    out.push(SuiteEntry { protocol: f2_basis_forward_protocol()?, chi_n: Some(0.5) });
    Ok(out)
}

fn sqrt_psd(m: &CMatrix) -> CMatrix {
    linalg::hermitian_fn(m, |x| x.max(0.0).sqrt())
}

/// Random two-outcome qubit instrument `K_o = U_o √E_o`.
fn random_binary_instrument<R: Rng>(r: &mut R, target: &str, outcome: &str) -> Result<Instrument> {
    let povm = random_povm(r, 2, 2);
    let sets = povm.elements().iter().map(|e| vec![haar_unitary_with(r, 2) * sqrt_psd(e)]).collect();
    Ok(Instrument {
        acts_on: vec![target.into()],
        controls: vec![],
        outcome: Some(Register::classical(outcome, 2)?),
        kraus: vec![sets],
        discard: false,
    })
}

/// Random two-way protocol: 1–3 uses of random qubit Kraus channels, 0–3
/// auxiliary bits in random directions, each produced by a random local
/// measurement and consumed by a controlled unitary on the receiver's side.
pub fn random_protocol(seed: u64) -> Result<Protocol> {
    let mut r = rng(seed);
    let n = r.random_range(1..=3);
    let m = r.random_range(0..=3);
    let mut alice_regs = vec![Register::new("A", 2)?];
    alice_regs.extend((1..=n).map(|i| Register::new(format!("X{i}"), 2).expect("positive")));
    let d_alice = 1 << (n + 1);
    let rho = random_density_with(&mut r, d_alice, 2, "tmp");
    let initial_alice = DensityOperator::new(alice_regs, rho.into_matrix())?;
    let initial_bob = DensityOperator::new(vec![Register::new("B", 2)?], random_density_with(&mut r, 2, 2, "B").into_matrix())?;

    let mut events: Vec<Option<Party>> = vec![None; n];
    events.extend((0..m).map(|_| Some(if r.random_bool(0.5) { Party::Alice } else { Party::Bob })));
    events.shuffle(&mut r);

    let alice_q: Vec<String> = vec!["A".into()];
    let mut bob_q: Vec<String> = vec!["B".into()];
    let mut steps = Vec::new();
    let (mut used, mut sent) = (0, 0);
    for ev in events {
        match ev {
            None => {
                used += 1;
                let k = r.random_range(1..=3);
                steps.push(Step::NoisyUse {
                    channel: random_kraus_channel(&mut r, 2, 2, k),
                    input: format!("X{used}"),
                    output: format!("Y{used}"),
                    mi_bits: None,
                });
                bob_q.push(format!("Y{used}"));
            }
            Some(sender) => {
                sent += 1;
                let (own, other) = match sender {
                    Party::Alice => (&alice_q, &bob_q),
                    Party::Bob => (&bob_q, &alice_q),
                };
                let target = own[r.random_range(0..own.len())].clone();
                let mut receiver_targets: Vec<String> = other.clone();
                if sender == Party::Bob {
                    receiver_targets.extend((used + 1..=n).map(|i| format!("X{i}")));
                }
                let rt = receiver_targets[r.random_range(0..receiver_targets.len())].clone();
                let s = format!("S{sent}");
                let z = format!("Z{sent}");
                steps.push(instrument(sender, random_binary_instrument(&mut r, &target, &s)?));
                steps.push(match sender {
                    Party::Alice => Step::AuxForward { source: s, dest: z.clone() },
                    Party::Bob => Step::AuxBack { source: s, dest: z.clone() },
                });
                let receiver = if sender == Party::Alice { Party::Bob } else { Party::Alice };
                let us = vec![haar_unitary_with(&mut r, 2), haar_unitary_with(&mut r, 2)];
                steps.push(instrument(receiver, Instrument::controlled_unitary(&[&rt], &[&z], us)));
            }
        }
    }
    steps.push(instrument(Party::Alice, Instrument::measure("A", &linalg::identity(2), "J0", true)?));
    steps.push(instrument(Party::Bob, Instrument::measure("B", &linalg::identity(2), "K0", true)?));
    // Bob reads out every channel output so that none is discarded early.
    let mut k_regs = vec!["K0".to_string()];
    for i in 1..=n {
        let label = format!("KY{i}");
        steps.push(instrument(Party::Bob, Instrument::measure(&format!("Y{i}"), &linalg::identity(2), &label, true)?));
        k_regs.push(label);
    }
    let k_table = (0..1usize << (n + 1)).map(|_| r.random_range(0..2)).collect();
    ProtocolDraft {
        name: format!("random:{seed}"),
        initial_alice,
        initial_bob,
        steps,
        j: Extractor::of(&["J0"]),
        k: Extractor { registers: k_regs, table: Some(k_table) },
        alphabet_k: 2,
        c: None,
    }
    .build()
}

/// Random forward-assisted protocol over `F_2`: a random message, an
/// entangled reference, message-controlled unitaries on all channel inputs,
/// 1–3 channel uses and 0–3 forward auxiliary bits. Returns the protocol and
/// `χ(F_2^{⊗n}) = n/2`.
pub fn random_forward_protocol(seed: u64) -> Result<(Protocol, f64)> {
    let mut r = rng(seed);
    let n: usize = r.random_range(1..=3);
    let m: usize = r.random_range(0..=3);
    let w_dim = r.random_range(2..=4);
    let mut regs = vec![Register::new("R", 2)?];
    regs.extend((1..=n).map(|i| Register::new(format!("X{i}"), 2).expect("positive")));
    let dim = 1 << (n + 1);
    let initial_alice = DensityOperator::new(regs, random_density_with(&mut r, dim, 1, "tmp").into_matrix())?;

    let x_labels: Vec<String> = (1..=n).map(|i| format!("X{i}")).collect();
    let x_refs: Vec<&str> = x_labels.iter().map(String::as_str).collect();
    let dx = 1 << n;
    let mut steps = vec![
        instrument(Party::Alice, Instrument::sample("W", &vec![1.0 / w_dim as f64; w_dim])?),
        instrument(
            Party::Alice,
            Instrument::controlled_unitary(&x_refs, &["W"], (0..w_dim).map(|_| haar_unitary_with(&mut r, dx)).collect()),
        ),
    ];
    let mut events: Vec<bool> = vec![true; n];
    events.extend(vec![false; m]);
    events.shuffle(&mut r);
    let (mut used, mut sent) = (0, 0);
    let mut bob_inputs: Vec<(String, usize)> = Vec::new();
    for is_use in events {
        if is_use {
            used += 1;
            steps.push(Step::NoisyUse {
                channel: example_channel_f(2)?,
                input: format!("X{used}"),
                output: format!("Y{used}"),
                mi_bits: Some(1.0),
            });
            bob_inputs.push((format!("Y{used}"), 4));
        } else {
            sent += 1;
            let table = (0..w_dim).map(|_| r.random_range(0..2)).collect();
            steps.push(classical_map(Party::Alice, &["W"], Register::classical(format!("F{sent}"), 2)?, table));
            steps.push(Step::AuxForward { source: format!("F{sent}"), dest: format!("Z{sent}") });
            bob_inputs.push((format!("Z{sent}"), 2));
        }
    }
    steps.push(instrument(Party::Alice, Instrument::measure("R", &linalg::identity(2), "Rm", true)?));
    let alphabet = 4;
    let j_table = (0..w_dim * 2).map(|_| r.random_range(0..alphabet)).collect();
    let k_size: usize = bob_inputs.iter().map(|b| b.1).product();
    let k_table = (0..k_size).map(|_| r.random_range(0..alphabet)).collect();
    let draft = ProtocolDraft {
        name: format!("random-forward:{seed}"),
        initial_alice,
        initial_bob: DensityOperator::trivial(),
        steps,
        j: Extractor { registers: vec!["W".into(), "Rm".into()], table: Some(j_table) },
        k: Extractor { registers: bob_inputs.iter().map(|b| b.0.clone()).collect(), table: Some(k_table) },
        alphabet_k: alphabet,
        c: None,
    };
    Ok((draft.build()?, 0.5 * n as f64))
}
