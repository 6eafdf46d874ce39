//! Channel-spec JSON files.
//!
//! ```json
//! {"variant": "qc", "dim_in": 2, "dim_out": 4, "matrices": [[[0.5, 0.0], ...], ...]}
//! ```
//!
//! `matrices` is a list of matrices. Each matrix is either a flat row-major
//! list of `[re, im]` pairs or a list of rows of such pairs. Shapes by variant:
//!
//! | variant     | count          | shape of each            |
//! |-------------|----------------|--------------------------|
//! | `kraus`     | any (≥ 1)      | `dim_out × dim_in`       |
//! | `qc`        | `dim_out`      | `dim_in × dim_in` (POVM element for outcome `y`) |
//! | `cq`        | `dim_in`       | `dim_out × dim_out` (output state for letter `x`) |
//! | `classical` | 1              | `dim_out × dim_in`, real, entry `(y, x)` = W(y\|x) |

use serde::{Deserialize, Serialize};

use super::{Channel, ChannelKind, Povm};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Kraus,
    Qc,
    Cq,
    Classical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntries {
    Flat(Vec<[f64; 2]>),
    Rows(Vec<Vec<[f64; 2]>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub variant: Variant,
    pub dim_in: usize,
    pub dim_out: usize,
    pub matrices: Vec<MatrixEntries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn to_matrix(idx: usize, entries: &MatrixEntries, rows: usize, cols: usize) -> Result<CMatrix> {
    let flat: Vec<[f64; 2]> = match entries {
        MatrixEntries::Flat(v) => v.clone(),
        MatrixEntries::Rows(r) => {
            if r.len() != rows || r.iter().any(|row| row.len() != cols) {
                return Err(Error::Spec(format!("matrices[{idx}]: expected {rows} rows of {cols} entries")));
            }
            r.concat()
        }
    };
    if flat.len() != rows * cols {
        return Err(Error::Spec(format!(
            "matrices[{idx}]: expected {} entries ({rows}x{cols} row-major), found {}",
            rows * cols,
            flat.len()
        )));
    }
    if let Some(bad) = flat.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(Error::Spec(format!("matrices[{idx}]: entry {bad} is not finite")));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let z = flat[i * cols + j];
        c(z[0], z[1])
    }))
}

fn from_matrix(m: &CMatrix) -> MatrixEntries {
    MatrixEntries::Flat(
        (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect(),
    )
}

impl ChannelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("channel spec: {e}")))
    }

    pub fn to_channel(&self) -> Result<Channel> {
        let (d_in, d_out) = (self.dim_in, self.dim_out);
        if d_in == 0 || d_out == 0 {
            return Err(Error::Spec("dim_in and dim_out must be positive".into()));
        }
        let expect_count = |n: usize| -> Result<()> {
            if self.matrices.len() != n {
                return Err(Error::Spec(format!(
                    "variant {:?} needs {n} matrices, found {}",
                    self.variant,
                    self.matrices.len()
                )));
            }
            Ok(())
        };
        let wrap = |e: Error| Error::Spec(e.to_string());
        match self.variant {
            Variant::Kraus => {
                if self.matrices.is_empty() {
                    return Err(Error::Spec("variant kraus needs at least one matrix".into()));
                }
                let ops = self
                    .matrices
                    .iter()
                    .enumerate()
                    .map(|(i, m)| to_matrix(i, m, d_out, d_in))
                    .collect::<Result<Vec<_>>>()?;
                Channel::kraus(ops).map_err(wrap)
            }
            Variant::Qc => {
                expect_count(d_out)?;
                let elems = self
                    .matrices
                    .iter()
                    .enumerate()
                    .map(|(i, m)| to_matrix(i, m, d_in, d_in))
                    .collect::<Result<Vec<_>>>()?;
                Channel::qc(Povm::unlabeled(elems).map_err(wrap)?).map_err(wrap)
            }
            Variant::Cq => {
                expect_count(d_in)?;
                let states = self
                    .matrices
                    .iter()
                    .enumerate()
                    .map(|(i, m)| to_matrix(i, m, d_out, d_out))
                    .collect::<Result<Vec<_>>>()?;
                Channel::cq(states).map_err(wrap)
            }
            Variant::Classical => {
                expect_count(1)?;
                let m = to_matrix(0, &self.matrices[0], d_out, d_in)?;
                if m.iter().any(|z| z.im != 0.0) {
                    return Err(Error::Spec("classical transition matrix must be real".into()));
                }
                let w = (0..d_out).map(|y| (0..d_in).map(|x| m[(y, x)].re).collect()).collect();
                Channel::classical(w).map_err(wrap)
            }
        }
    }

    pub fn from_channel(ch: &Channel) -> Self {
        let (variant, matrices) = match ch.kind() {
            ChannelKind::Kraus(ops) => (Variant::Kraus, ops.iter().map(from_matrix).collect()),
            ChannelKind::Qc(p) => (Variant::Qc, p.elements().iter().map(from_matrix).collect()),
            ChannelKind::Cq(s) => (Variant::Cq, s.iter().map(from_matrix).collect()),
            ChannelKind::Classical(w) => {
                let m = CMatrix::from_fn(w.len(), w[0].len(), |y, x| c(w[y][x], 0.0));
                (Variant::Classical, vec![from_matrix(&m)])
            }
        };
        Self { variant, dim_in: ch.dim_in(), dim_out: ch.dim_out(), matrices, name: None }
    }
}

pub fn load_channel(text: &str) -> Result<Channel> {
    ChannelSpec::parse(text)?.to_channel()
}

/// Channels embedded in other JSON documents use the channel-spec layout.
/// Register labels are not part of it.
impl Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelSpec::from_channel(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = ChannelSpec::deserialize(d)?;
        spec.to_channel().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let r = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != cols) {
        return Err(Error::Spec("matrix rows have unequal lengths".into()));
    }
    if rows.iter().flatten().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(Error::Spec("matrix entry is not finite".into()));
    }
    Ok(CMatrix::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::example_channel_f;

    #[test]
    fn roundtrip_through_spec() {
        let f = example_channel_f(2).unwrap();
        let text = serde_json::to_string(&ChannelSpec::from_channel(&f)).unwrap();
        let back = load_channel(&text).unwrap();
        let rho = crate::quantum::random::random_density(2, 2, 1, "X").into_matrix();
        assert!(crate::linalg::max_abs(&(back.apply_matrix(&rho) - f.apply_matrix(&rho))) < 1e-14);
    }

    #[test]
    fn nested_rows_accepted() {
        let text = r#"{"variant":"classical","dim_in":2,"dim_out":2,
            "matrices":[[[[0.9,0],[0.1,0]],[[0.1,0],[0.9,0]]]]}"#;
        let ch = load_channel(text).unwrap();
        assert_eq!(ch.dim_in(), 2);
    }

    #[test]
    fn diagnostics_are_precise() {
        let short = r#"{"variant":"kraus","dim_in":2,"dim_out":2,"matrices":[[[1,0],[0,0],[0,0]]]}"#;
        let e = load_channel(short).unwrap_err().to_string();
        assert!(e.contains("matrices[0]") && e.contains("expected 4 entries"), "{e}");
        let not_tp = r#"{"variant":"kraus","dim_in":1,"dim_out":1,"matrices":[[[0.5,0]]]}"#;
        assert!(load_channel(not_tp).unwrap_err().to_string().contains("trace preserving"));
        let wrong_count = r#"{"variant":"qc","dim_in":1,"dim_out":2,"matrices":[[[1,0]]]}"#;
        assert!(load_channel(wrong_count).unwrap_err().to_string().contains("needs 2 matrices"));
        assert!(load_channel("{not json").is_err());
        let extra = r#"{"variant":"kraus","dim_in":1,"dim_out":1,"matrices":[[[1,0]]],"bogus":1}"#;
        assert!(load_channel(extra).is_err());
    }
}
