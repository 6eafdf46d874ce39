use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::model::Protocol;
use crate::linalg;

/// One cell `Pr(J = j, K = k, Z = z)` of the final joint distribution;
/// `z` is the mixed-radix index of all auxiliary messages in temporal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointEntry {
    pub j: usize,
    pub k: usize,
    pub z: usize,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 0 is the initial state.
    pub index: usize,
    pub kind: String,
    /// `I(A_j : B_j)` across the Alice/Bob cut after the step.
    #[serde(rename = "mutual_information_bits")]
    pub mutual_information: f64,
    /// `H(Z_k | Z^{(k−1)})` for auxiliary steps.
    #[serde(rename = "aux_entropy_bits", default, skip_serializing_if = "Option::is_none")]
    pub aux_entropy: Option<f64>,
    /// `I(E)` of the channel used, when known.
    #[serde(rename = "channel_mi_bits", default, skip_serializing_if = "Option::is_none")]
    pub channel_mi: Option<f64>,
    pub branches: usize,
    /// Total branch probability before renormalization.
    pub probability_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub protocol: String,
    pub n: usize,
    pub c: f64,
    pub alphabet_k: usize,
    pub has_back_steps: bool,
    #[serde(rename = "joint_jkz")]
    pub joint: Vec<JointEntry>,
    pub pr_err: f64,
    #[serde(rename = "h_k_bits")]
    pub h_k: f64,
    #[serde(rename = "h_j_bits")]
    pub h_j: f64,
    #[serde(rename = "h_k_given_j_bits")]
    pub h_k_given_j: f64,
    #[serde(rename = "i_jk_bits")]
    pub i_jk: f64,
    #[serde(rename = "log_az_bits")]
    pub log_az: f64,
    #[serde(rename = "log_af_bits")]
    pub log_af: f64,
    /// `(H(K) − log|A_Z|)/n`: randomness-distribution accounting.
    #[serde(rename = "net_rate_bits_per_use")]
    pub net_rate: f64,
    /// `(H(K) − log|A_F|)/n`: only forward auxiliary messages subtracted.
    #[serde(rename = "net_rate_forward_only_bits_per_use")]
    pub net_rate_forward_only: f64,
    pub steps: Vec<StepRecord>,
}

fn entropy_of_counts(m: BTreeMap<usize, f64>) -> f64 {
    linalg::spectrum_entropy(m.into_values())
}

impl TraceReport {
    pub(crate) fn from_joint(
        protocol: &Protocol,
        joint: Vec<JointEntry>,
        log_az: f64,
        log_af: f64,
        steps: Vec<StepRecord>,
    ) -> Self {
        let mut pj = BTreeMap::new();
        let mut pk = BTreeMap::new();
        let mut pjk: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut pr_err = 0.0;
        for e in &joint {
            *pj.entry(e.j).or_default() += e.p;
            *pk.entry(e.k).or_default() += e.p;
            *pjk.entry((e.j, e.k)).or_default() += e.p;
            if e.j != e.k {
                pr_err += e.p;
            }
        }
        let h_j = entropy_of_counts(pj);
        let h_k = entropy_of_counts(pk);
        let h_jk = linalg::spectrum_entropy(pjk.into_values());
        let n = protocol.n();
        Self {
            protocol: protocol.name().to_string(),
            n,
            c: protocol.c(),
            alphabet_k: protocol.alphabet_k(),
            has_back_steps: protocol.has_back_steps(),
            joint,
            pr_err,
            h_k,
            h_j,
            h_k_given_j: (h_jk - h_j).max(0.0),
            i_jk: h_j + h_k - h_jk,
            log_az,
            log_af,
            net_rate: (h_k - log_az) / n as f64,
            net_rate_forward_only: (h_k - log_af) / n as f64,
            steps,
        }
    }

    /// `Pr(J = K)`.
    pub fn pr_agree(&self) -> f64 {
        self.joint.iter().filter(|e| e.j == e.k).map(|e| e.p).sum()
    }

    /// Joint table as CSV with header `j,k,z,p`.
    pub fn joint_csv(&self) -> String {
        let mut s = String::from("j,k,z,p\n");
        for e in &self.joint {
            s.push_str(&format!("{},{},{},{:.17e}\n", e.j, e.k, e.z, e.p));
        }
        s
    }
}
