use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A labeled tensor factor. Classical registers hold diagonal states only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawRegister")]
pub struct Register {
    label: String,
    dim: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    classical: bool,
}

#[derive(Deserialize)]
struct RawRegister {
    label: String,
    dim: usize,
    #[serde(default)]
    classical: bool,
}

impl TryFrom<RawRegister> for Register {
    type Error = Error;

    fn try_from(raw: RawRegister) -> Result<Self> {
        let r = Register::new(raw.label, raw.dim)?;
        Ok(if raw.classical { r.into_classical() } else { r })
    }
}

impl Register {
    pub fn new(label: impl Into<String>, dim: usize) -> Result<Self> {
        let label = label.into();
        if dim == 0 {
            return Err(Error::DimensionMismatch(format!("register {label:?} has dimension 0")));
        }
        Ok(Self { label, dim, classical: false })
    }

    pub fn classical(label: impl Into<String>, dim: usize) -> Result<Self> {
        Ok(Self::new(label, dim)?.into_classical())
    }

    pub fn into_classical(mut self) -> Self {
        self.classical = true;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_classical(&self) -> bool {
        self.classical
    }

    pub fn relabeled(&self, label: impl Into<String>) -> Self {
        Self { label: label.into(), ..self.clone() }
    }
}

pub(crate) fn check_unique(registers: &[Register]) -> Result<()> {
    for (i, r) in registers.iter().enumerate() {
        if registers[..i].iter().any(|o| o.label == r.label) {
            return Err(Error::LabelCollision(r.label.clone()));
        }
    }
    Ok(())
}

pub(crate) fn total_dim(registers: &[Register]) -> usize {
    registers.iter().map(|r| r.dim).product()
}
