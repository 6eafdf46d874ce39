use std::collections::{BTreeMap, HashMap};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::binning::{random_binning, Binning};
use super::decoder::{check_dim, BinDecoder, DEFAULT_MAX_DECODER_DIM};
use super::source::{build_source, CqSource};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quantum::random::rng;
use crate::quantum::{Channel, PureState};

/// `|Y|ⁿ` up to which the error probability is computed by enumeration.
pub const EXACT_LIMIT: usize = 4096;

pub const CSV_HEADER: &str = "n,delta,seed,num_bins,pr_err,stderr,net_rate,nominal_rate";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DwMode {
    /// Exact when `|Y|ⁿ ≤ EXACT_LIMIT`, sampled otherwise.
    #[default]
    Auto,
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwOptions {
    pub mode: DwMode,
    pub trials: usize,
    /// Cap on `dim Rⁿ`.
    pub max_dim: usize,
    pub execution: Execution,
}

impl Default for DwOptions {
    fn default() -> Self {
        Self { mode: DwMode::Auto, trials: 4000, max_dim: DEFAULT_MAX_DECODER_DIM, execution: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwReport {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    /// `Exact` or `Sampled`, never `Auto`.
    pub mode: DwMode,
    /// Sampled trials; 0 in exact mode.
    pub trials: usize,
    pub num_bins: u64,
    pub pr_err: f64,
    /// Standard error of `pr_err`; 0 in exact mode.
    pub std_err: f64,
    /// `(n·H(Y) − log₂ num_bins)/n`.
    #[serde(rename = "net_rate_bits_per_use")]
    pub net_rate: f64,
    /// `H(Y) − H(Y|R) − δ`.
    #[serde(rename = "nominal_rate_bits_per_use")]
    pub nominal_rate: f64,
    #[serde(rename = "h_y_bits")]
    pub h_y: f64,
    #[serde(rename = "h_y_given_r_bits")]
    pub h_y_given_r: f64,
    #[serde(rename = "i_yr_bits")]
    pub i_yr: f64,
    /// Probability that `Yⁿ` is atypical and therefore unbinned.
    pub unbinned_mass: f64,
    pub typical_sequences: usize,
    pub nonempty_bins: usize,
    pub mean_occupancy: f64,
    pub max_occupancy: usize,
    /// Largest conditional decoding error over bins (exact mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worst_bin_error: Option<f64>,
}

impl DwReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n, self.delta, self.seed, self.num_bins, self.pr_err, self.std_err, self.net_rate, self.nominal_rate
        )
    }
}

/// Simulates the back-assisted scheme: Bob keeps `K = Yⁿ` and sends the bin
/// label `Z` (label 0 when `Yⁿ` is unbinned), Alice decodes `J` with the
/// bin's pretty-good measurement on `Rⁿ`.
pub fn run_dw(src: &CqSource, delta: f64, seed: u64, opts: &DwOptions) -> Result<DwReport> {
    check_dim(src, opts.max_dim)?;
    let binning = random_binning(src, delta, seed)?;
    let bins: Vec<(u64, Vec<usize>)> = binning.bins().into_iter().collect();
    let total = binning.assignment.len();
    let mode = match opts.mode {
        DwMode::Auto if total <= EXACT_LIMIT => DwMode::Exact,
        DwMode::Auto => DwMode::Sampled,
        m => m,
    };
    let (pr_err, std_err, worst) = match mode {
        DwMode::Exact => {
            let per_bin = opts.execution.map(&bins, |(_, members)| {
                let dec = BinDecoder::new(src, members);
                let success: f64 = (0..members.len()).map(|k| dec.joint_success(k)).sum();
                let mass: f64 = members.iter().map(|&i| src.sequence_probability(&src.letters(i))).sum();
                (success, mass)
            });
            let success: f64 = per_bin.iter().map(|(s, _)| s).sum();
            let worst = per_bin
                .iter()
                .filter(|(_, m)| *m > 0.0)
                .map(|(s, m)| (1.0 - s / m).max(0.0))
                .fold(0.0, f64::max);
            ((1.0 - success).max(0.0), 0.0, Some(worst))
        }
        _ => {
            let (mean, se) = sampled_error(src, &binning, &bins, seed, opts)?;
            (mean, se, None)
        }
    };

    let n = src.n as f64;
    let occupancy: Vec<usize> = bins.iter().map(|(_, m)| m.len()).collect();
    let typical = binning.typical_count();
    Ok(DwReport {
        n: src.n,
        delta,
        seed,
        mode,
        trials: if mode == DwMode::Sampled { opts.trials } else { 0 },
        num_bins: binning.num_bins,
        pr_err,
        std_err,
        net_rate: (n * src.h_y - (binning.num_bins as f64).log2()) / n,
        nominal_rate: src.h_y - src.h_y_given_r - delta,
        h_y: src.h_y,
        h_y_given_r: src.h_y_given_r,
        i_yr: src.i_yr,
        unbinned_mass: binning.unbinned_mass(src),
        typical_sequences: typical,
        nonempty_bins: bins.len(),
        mean_occupancy: if bins.is_empty() { 0.0 } else { typical as f64 / bins.len() as f64 },
        max_occupancy: occupancy.iter().copied().max().unwrap_or(0),
        worst_bin_error: worst,
    })
}

/// Mean and standard error of the conditional decoding error over sampled
/// `Yⁿ`. Each trial contributes `1 − Pr(J = yⁿ | K = yⁿ)`.
fn sampled_error(
    src: &CqSource,
    binning: &Binning,
    bins: &[(u64, Vec<usize>)],
    seed: u64,
    opts: &DwOptions,
) -> Result<(f64, f64)> {
    if opts.trials < 2 {
        return Err(Error::Infeasible("sampling needs at least 2 trials".into()));
    }
    let letter = WeightedIndex::new(&src.p).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
    let radices = vec![src.alphabet; src.n];
    let draws: Vec<usize> = opts.execution.map_range(opts.trials, |t| {
        let mut r = rng(seed);
        r.set_stream(t as u64);
        let letters: Vec<usize> = (0..src.n).map(|_| letter.sample(&mut r)).collect();
        crate::linalg::mixed_radix(&letters, &radices)
    });
    let mut hit: BTreeMap<u64, ()> = BTreeMap::new();
    for &i in &draws {
        if let Some(b) = binning.bin_of(i) {
            hit.insert(b, ());
        }
    }
    let index: HashMap<u64, usize> = bins.iter().enumerate().map(|(k, (b, _))| (*b, k)).collect();
    let needed: Vec<usize> = hit.keys().map(|b| index[b]).collect();
    let decoders = opts.execution.map(&needed, |&k| BinDecoder::new(src, &bins[k].1));
    let by_bin: HashMap<u64, (&BinDecoder, &Vec<usize>)> =
        needed.iter().zip(&decoders).map(|(&k, d)| (bins[k].0, (d, &bins[k].1))).collect();
    let errors: Vec<f64> = opts.execution.map(&draws, |&i| match binning.bin_of(i) {
        None => 1.0,
        Some(b) => {
            let (dec, members) = by_bin[&b];
            let k = members.binary_search(&i).expect("member of its bin");
            let p = src.sequence_probability(&src.letters(i));
            (1.0 - dec.joint_success(k) / p).clamp(0.0, 1.0)
        }
    });
    let t = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / t;
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (t - 1.0);
    Ok((mean, (var / t).sqrt()))
}

/// Runs every `(n, seed)` pair, `n` outermost.
pub fn dw_sweep(
    psi: &PureState,
    channel: &Channel,
    ns: &[usize],
    delta: f64,
    seeds: &[u64],
    opts: &DwOptions,
) -> Result<Vec<DwReport>> {
    let mut out = Vec::with_capacity(ns.len() * seeds.len());
    for &n in ns {
        let src = build_source(psi, channel, n)?;
        for &s in seeds {
            out.push(run_dw(&src, delta, s, opts)?);
        }
    }
    Ok(out)
}
