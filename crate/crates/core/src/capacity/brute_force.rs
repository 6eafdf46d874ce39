use std::f64::consts::PI;

use super::channel_mi_objective;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{c, CMatrix};
use crate::quantum::Channel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceResult {
    pub value: f64,
    /// Bloch vector of the best grid point.
    pub bloch: [f64; 3],
    pub evaluations: usize,
    /// Grid spacing `1/grid` in radius and `π/grid` in angle.
    pub resolution: f64,
}

fn bloch_state(r: f64, theta: f64, phi: f64) -> (CMatrix, [f64; 3]) {
    let (x, y, z) = (r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
    let m = CMatrix::from_row_slice(2, 2, &[c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y), c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)]);
    (m, [x, y, z])
}

/// Grid search for the qubit channel mutual information: `grid + 1` radii,
/// `grid + 1` polar angles and `2·grid` azimuths.
pub fn brute_force_qubit_mi(ch: &Channel, grid: usize, execution: Execution) -> Result<BruteForceResult> {
    if ch.dim_in() != 2 {
        return Err(Error::DimensionMismatch(format!("brute force needs a qubit input, got dimension {}", ch.dim_in())));
    }
    let grid = grid.max(1);
    let n = grid as f64;
    let rows = execution.map_range(grid + 1, |i| {
        let r = i as f64 / n;
        let mut best = (f64::MIN, [0.0; 3]);
        let mut count = 0usize;
        for j in 0..=grid {
            let theta = PI * j as f64 / n;
            for k in 0..2 * grid {
                let phi = PI * k as f64 / n;
                let (rho, v) = bloch_state(r, theta, phi);
                let f = channel_mi_objective(ch, &rho);
                count += 1;
                if f > best.0 {
                    best = (f, v);
                }
            }
        }
        (best, count)
    });
    let mut out = BruteForceResult { value: f64::MIN, bloch: [0.0; 3], evaluations: 0, resolution: 1.0 / n };
    for ((f, v), count) in rows {
        out.evaluations += count;
        if f > out.value {
            out.value = f;
            out.bloch = v;
        }
    }
    Ok(out)
}
