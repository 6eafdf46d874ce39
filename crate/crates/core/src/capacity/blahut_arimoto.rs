use super::{CapacityReport, Witness};
use crate::error::{Error, Result};

/// `I(X;Y)` in bits for input distribution `p` and `transition[y][x]`.
pub fn classical_mutual_information(transition: &[Vec<f64>], p: &[f64]) -> f64 {
    let q: Vec<f64> = transition.iter().map(|row| row.iter().zip(p).map(|(w, px)| w * px).sum()).collect();
    let mut i = 0.0;
    for (y, row) in transition.iter().enumerate() {
        for (x, &w) in row.iter().enumerate() {
            if w > 0.0 && p[x] > 0.0 {
                i += p[x] * w * (w / q[y]).log2();
            }
        }
    }
    i
}

/// Relative entropies `D(W(·|x) ‖ q)` in bits.
fn divergences(transition: &[Vec<f64>], q: &[f64], nx: usize) -> Vec<f64> {
    (0..nx)
        .map(|x| {
            transition
                .iter()
                .zip(q)
                .filter(|(row, _)| row[x] > 0.0)
                .map(|(row, &qy)| row[x] * (row[x] / qy).log2())
                .sum()
        })
        .collect()
}

/// Classical capacity of a discrete memoryless channel by Blahut–Arimoto.
/// Stops when the gap between the standard upper and lower bounds drops
/// below `tol`. The objective history is nondecreasing.
pub fn blahut_arimoto(transition: &[Vec<f64>], tol: f64, max_iters: usize) -> Result<CapacityReport> {
    let ny = transition.len();
    let nx = transition.first().map_or(0, Vec::len);
    if ny == 0 || nx == 0 || transition.iter().any(|r| r.len() != nx) {
        return Err(Error::InvalidChannel("stochastic matrix must be nonempty and rectangular".into()));
    }
    for x in 0..nx {
        let s: f64 = transition.iter().map(|r| r[x]).sum();
        if (s - 1.0).abs() > crate::quantum::TAU_TRACE || transition.iter().any(|r| !(r[x] >= 0.0)) {
            return Err(Error::InvalidChannel(format!("column {x} is not a probability vector")));
        }
    }
    let mut p = vec![1.0 / nx as f64; nx];
    let mut history = Vec::new();
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iters {
        let q: Vec<f64> = transition.iter().map(|row| row.iter().zip(&p).map(|(w, px)| w * px).sum()).collect();
        let d = divergences(transition, &q, nx);
        let weights: Vec<f64> = p.iter().zip(&d).map(|(px, dx)| px * dx.exp2()).collect();
        let z: f64 = weights.iter().sum();
        let lower = z.log2();
        let upper = d.iter().zip(&p).filter(|(_, &px)| px > 0.0).map(|(dx, _)| *dx).fold(f64::MIN, f64::max);
        gap = upper - lower;
        history.push(classical_mutual_information(transition, &p));
        iterations += 1;
        if gap < tol {
            break;
        }
        p = weights.iter().map(|w| w / z).collect();
    }
    let value = classical_mutual_information(transition, &p);
    Ok(CapacityReport {
        value,
        witness: Witness::Distribution(p),
        iterations,
        final_step_norm: gap,
        converged: gap < tol,
        upper_bound: Some(value + gap.max(0.0)),
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn identity_channel() {
        let w: Vec<Vec<f64>> = (0..4).map(|y| (0..4).map(|x| if x == y { 1.0 } else { 0.0 }).collect()).collect();
        let r = blahut_arimoto(&w, 1e-12, 1000).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn binary_symmetric_closed_form() {
        let f = 0.11;
        let w = vec![vec![1.0 - f, f], vec![f, 1.0 - f]];
        let r = blahut_arimoto(&w, 1e-12, 1000).unwrap();
        assert!((r.value - (1.0 - h2(f))).abs() <= 1e-6);
        assert!(r.converged);
    }

    #[test]
    fn objective_is_monotone() {
        let w = vec![vec![0.7, 0.1, 0.3], vec![0.2, 0.6, 0.3], vec![0.1, 0.3, 0.4]];
        let r = blahut_arimoto(&w, 1e-14, 500).unwrap();
        assert!(r.history.windows(2).all(|h| h[1] >= h[0] - 1e-15));
        assert!(r.upper_bound.unwrap() >= r.value);
    }

    #[test]
    fn rejects_bad_matrix() {
        assert!(blahut_arimoto(&[vec![0.5], vec![0.6]], 1e-9, 10).is_err());
        assert!(blahut_arimoto(&[], 1e-9, 10).is_err());
    }
}
