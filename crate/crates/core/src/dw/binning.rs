use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::source::CqSource;
use crate::error::{Error, Result};
use crate::quantum::TAU_PROB;

/// Largest `|Y|ⁿ` for which sequences are enumerated to build bins.
pub const MAX_SEQUENCES: usize = 1 << 22;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random partition of the typical `yⁿ` into `num_bins` disjoint bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub n: usize,
    pub delta: f64,
    /// Typicality slack `δ/2`.
    pub delta_typ: f64,
    pub seed: u64,
    /// `⌈2^{n(H(Y|R)+δ)}⌉`.
    pub num_bins: u64,
    /// Every typical sequence has its own bin.
    pub exhaustive: bool,
    /// Bin of each sequence (mixed-radix index), `None` when atypical.
    #[serde(skip)]
    pub assignment: Vec<Option<u64>>,
}

/// Strong typicality: every empirical letter frequency within `slack` of
/// `p`, and no letter of probability zero.
pub fn is_typical(src: &CqSource, letters: &[usize], slack: f64) -> bool {
    let mut counts = vec![0usize; src.alphabet];
    for &y in letters {
        counts[y] += 1;
    }
    let n = letters.len() as f64;
    counts.iter().zip(&src.p).all(|(&c, &p)| {
        if p <= TAU_PROB {
            c == 0
        } else {
            (c as f64 / n - p).abs() <= slack + 1e-12
        }
    })
}

pub fn bin_count(src: &CqSource, delta: f64) -> Result<u64> {
    let exponent = src.n as f64 * (src.h_y_given_r.max(0.0) + delta);
    if exponent > 62.0 {
        return Err(Error::Infeasible(format!("2^{exponent:.1} bins do not fit in 64 bits")));
    }
    // The relative shave keeps exact powers of two from rounding up.
    Ok(((exponent.exp2() * (1.0 - 1e-12)).ceil() as u64).max(1))
}

pub fn random_binning(src: &CqSource, delta: f64, seed: u64) -> Result<Binning> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Infeasible(format!("binning slack delta must be positive, got {delta}")));
    }
    let total = match src.sequences() {
        Some(t) if t <= MAX_SEQUENCES => t,
        _ => {
            return Err(Error::Infeasible(format!(
                "|Y|^n = {}^{} sequences exceeds the enumeration cap {MAX_SEQUENCES}",
                src.alphabet, src.n
            )))
        }
    };
    let num_bins = bin_count(src, delta)?;
    let exhaustive = num_bins >= total as u64;
    let delta_typ = delta / 2.0;
    let key = splitmix64(seed);
    let assignment = (0..total)
        .map(|i| {
            if !is_typical(src, &src.letters(i), delta_typ) {
                None
            } else if exhaustive {
                Some(i as u64)
            } else {
                Some(splitmix64(key ^ i as u64) % num_bins)
            }
        })
        .collect();
    Ok(Binning { n: src.n, delta, delta_typ, seed, num_bins, exhaustive, assignment })
}

impl Binning {
    pub fn bin_of(&self, index: usize) -> Option<u64> {
        self.assignment[index]
    }

    /// Members of every nonempty bin, in bin order.
    pub fn bins(&self) -> BTreeMap<u64, Vec<usize>> {
        let mut out: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, b) in self.assignment.iter().enumerate() {
            if let Some(b) = b {
                out.entry(*b).or_default().push(i);
            }
        }
        out
    }

    pub fn typical_count(&self) -> usize {
        self.assignment.iter().filter(|b| b.is_some()).count()
    }

    /// `Pr(Yⁿ is atypical)`, computed exactly.
    pub fn unbinned_mass(&self, src: &CqSource) -> f64 {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_none())
            .map(|(i, _)| src.sequence_probability(&src.letters(i)))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dw::build_source;
    use crate::quantum::{example_channel_f, maximally_entangled_state};

    fn f2(n: usize) -> CqSource {
        build_source(&maximally_entangled_state(2), &example_channel_f(2).unwrap(), n).unwrap()
    }

    #[test]
    fn bin_count_matches_rate() {
        assert_eq!(bin_count(&f2(2), 0.5).unwrap(), 8);
        assert_eq!(bin_count(&f2(4), 0.5).unwrap(), 64);
        assert_eq!(bin_count(&f2(3), 0.5).unwrap(), 23);
    }

    #[test]
    fn deterministic_and_disjoint() {
        let src = f2(4);
        let a = random_binning(&src, 0.5, 7).unwrap();
        let b = random_binning(&src, 0.5, 7).unwrap();
        assert_eq!(a.assignment, b.assignment);
        let c = random_binning(&src, 0.5, 8).unwrap();
        assert_ne!(a.assignment, c.assignment);
        let members: usize = a.bins().values().map(Vec::len).sum();
        assert_eq!(members, a.typical_count());
        assert!(a.bins().keys().all(|&z| z < a.num_bins));
    }

    #[test]
    fn huge_delta_is_exhaustive() {
        let src = f2(3);
        let b = random_binning(&src, 4.0, 1).unwrap();
        assert!(b.exhaustive);
        assert_eq!(b.typical_count(), 64);
        assert!(b.bins().values().all(|m| m.len() == 1));
        assert!(b.unbinned_mass(&src) < 1e-15);
    }

    #[test]
    fn strong_typicality_tail() {
        // n = 2, uniform over 4 letters: repeated letters are atypical.
        let src = f2(2);
        let b = random_binning(&src, 0.5, 0).unwrap();
        assert_eq!(b.typical_count(), 12);
        assert!((b.unbinned_mass(&src) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(random_binning(&f2(2), 0.0, 0).is_err());
        assert!(random_binning(&f2(2), f64::NAN, 0).is_err());
    }
}
