//! Mild (integral) form of the difference equation, evaluated from stored
//! snapshots by exponential quadrature.

use num_complex::Complex64;

use super::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::heatflow::heat_flow;
use crate::phi::exp_moments;
use crate::spectral::nonlinear_combination;

/// Floor of the denominator in the relative residual.
const RESIDUAL_FLOOR: f64 = 1e-300;

/// Solves `V c = y` for the 4×4 Vandermonde matrix `V_{ij} = x_i^j` by
/// returning `V^{-1}`.
fn vandermonde_inverse(x: [f64; 4]) -> [[f64; 4]; 4] {
    let mut a = [[0.0; 8]; 4];
    for i in 0..4 {
        let mut p = 1.0;
        for j in 0..4 {
            a[i][j] = p;
            p *= x[i];
        }
        a[i][4 + i] = 1.0;
    }
    for col in 0..4 {
        let piv = (col..4).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for c in 0..8 {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let mut inv = [[0.0; 4]; 4];
    for i in 0..4 {
        inv[i].copy_from_slice(&a[i][4..]);
    }
    inv
}

/// `w(T) = e^{TΔ} w(0) + ∫_0^T e^{(T−s)Δ} 𝒩(s) ds` with `𝒩` the nonlinear
/// part of the right-hand side, cubic in `s` on panels of three snapshot
/// intervals and integrated exactly against the exponential.
pub fn duhamel_solution(traj: &TrajectoryRecord, f_omega: &SpectralField) -> Result<SpectralField> {
    let times = &traj.times;
    if times.len() < 4 || traj.snapshots.len() != times.len() {
        return Err(Error::InvalidArgument(format!(
            "Duhamel quadrature needs at least 4 snapshots, got {}",
            times.len()
        )));
    }
    f_omega.check_same(&traj.snapshots[0])?;
    let grid = traj.grid;
    let horizon = *times.last().unwrap();
    let forced = f_omega.coeffs().iter().any(|c| c.norm_sqr() > 0.0);
    let weights = traj.params.weights(forced);
    let nl: Vec<SpectralField> = traj
        .snapshots
        .iter()
        .zip(times)
        .map(|(w, &t)| {
            let g = if forced { heat_flow(f_omega, t)? } else { SpectralField::zeros(grid) };
            nonlinear_combination(w, &g, weights)
        })
        .collect::<Result<_>>()?;

    let kk = grid.squared_wavenumbers();
    let len = kk.len();
    let mut acc: Vec<Complex64> = heat_flow(&traj.snapshots[0], horizon)?.into_coeffs();

    let last = times.len() - 1;
    let mut start = 0;
    while start < last {
        // integrate [times[a], times[b]] with the cubic through nodes[0..4]
        let (a, b, nodes) = if start + 3 <= last {
            (start, start + 3, [start, start + 1, start + 2, start + 3])
        } else {
            (start, last, [last - 3, last - 2, last - 1, last])
        };
        let (ta, tb) = (times[a], times[b]);
        let width = tb - ta;
        let sigma = nodes.map(|i| (times[i] - ta) / width);
        let inv = vandermonde_inverse(sigma);
        let mut last_k = f64::NAN;
        let mut moments = [0.0; 4];
        let mut decay = 0.0;
        for i in 0..acc.len() {
            let k = kk[i % len];
            if k != last_k {
                moments = exp_moments::<4>(-k * width);
                decay = (-k * (horizon - tb)).exp();
                last_k = k;
            }
            if decay == 0.0 {
                continue;
            }
            let y = nodes.map(|n| nl[n].coeffs()[i]);
            let mut sum = Complex64::new(0.0, 0.0);
            for (m, row) in inv.iter().enumerate() {
                let c = row[0] * y[0] + row[1] * y[1] + row[2] * y[2] + row[3] * y[3];
                sum += c * moments[m];
            }
            acc[i] += width * decay * sum;
        }
        start = b;
    }
    let mut out = SpectralField::from_raw(grid, acc, false);
    out.symmetrize();
    out.refresh_solenoidal();
    Ok(out)
}

/// `‖w_ODE(T) − w_Duhamel(T)‖_{L²} / max(‖w_ODE(T)‖_{L²}, ε)`.
pub fn duhamel_residual(traj: &TrajectoryRecord, f_omega: &SpectralField) -> Result<f64> {
    let mild = duhamel_solution(traj, f_omega)?;
    let ode = traj.final_state();
    let diff = ode.sub(&mild)?.l2_sq().sqrt();
    if diff == 0.0 {
        return Ok(0.0);
    }
    Ok(diff / ode.l2_sq().sqrt().max(RESIDUAL_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vandermonde_inverse_reproduces_cubic() {
        let x = [-1.0, 0.0, 0.4, 1.0];
        let inv = vandermonde_inverse(x);
        let coeffs = [0.3, -1.2, 2.0, 0.7];
        let y = x.map(|s| coeffs[0] + coeffs[1] * s + coeffs[2] * s * s + coeffs[3] * s * s * s);
        for (m, row) in inv.iter().enumerate() {
            let c: f64 = row.iter().zip(&y).map(|(a, b)| a * b).sum();
            assert!((c - coeffs[m]).abs() < 1e-12);
        }
    }
}
