//! Full velocity `u = e^{tΔ} f^ω + w` and its Navier–Stokes residual.

use num_complex::Complex64;

use super::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::heatflow::heat_flow;
use crate::spectral::nonlinear_term;

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub times: Vec<f64>,
    pub u: Vec<SpectralField>,
    /// `‖∂_t u − Δu + P(u·∇)u‖_{L²}` per snapshot, with `∂_t w` from
    /// three-point finite differences over neighbouring snapshots.
    pub ns_residual: Vec<f64>,
}

/// Derivative at `x` of the quadratic through `(xs, ·)`, as node weights.
fn lagrange_derivative(xs: [f64; 3], x: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        out[i] = ((x - xs[j]) + (x - xs[k])) / ((xs[i] - xs[j]) * (xs[i] - xs[k]));
    }
    out
}

pub fn reconstruct_u(traj: &TrajectoryRecord, f_omega: &SpectralField) -> Result<Reconstruction> {
    let times = traj.times.clone();
    let n = times.len();
    let u = traj
        .snapshots
        .iter()
        .zip(&times)
        .map(|(w, &t)| heat_flow(f_omega, t)?.axpy(1.0, w))
        .collect::<Result<Vec<_>>>()?;
    if n < 3 {
        return Err(Error::InvalidArgument("need at least 3 snapshots for time differences".into()));
    }
    let kk = traj.grid.squared_wavenumbers();
    let len = kk.len();
    let mut ns_residual = Vec::with_capacity(n);
    for i in 0..n {
        let c = i.clamp(1, n - 2);
        let nodes = [c - 1, c, c + 1];
        let wts = lagrange_derivative(nodes.map(|j| times[j]), times[i]);
        let w = &traj.snapshots[i];
        let adv = nonlinear_term(&u[i], &u[i])?;
        // the heat part of u satisfies ∂_t g = Δg exactly
        let res: Vec<Complex64> = (0..w.coeffs().len())
            .map(|m| {
                let dw: Complex64 = nodes.iter().zip(&wts).map(|(&j, &a)| a * traj.snapshots[j].coeffs()[m]).sum();
                dw + kk[m % len] * w.coeffs()[m] + adv.coeffs()[m]
            })
            .collect();
        ns_residual.push(res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    Ok(Reconstruction { times, u, ns_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_derivative_exact_on_quadratics() {
        let xs = [0.0, 0.3, 1.0];
        let f = |x: f64| 2.0 * x * x - x + 1.0;
        for x in [0.0, 0.3, 1.0, 0.5] {
            let w = lagrange_derivative(xs, x);
            let d: f64 = w.iter().zip(xs).map(|(a, s)| a * f(s)).sum();
            assert!((d - (4.0 * x - 1.0)).abs() < 1e-12);
        }
    }
}
