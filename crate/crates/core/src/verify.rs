//! Diagnostics on finished trajectories: energy boundedness, the dual rate
//! norm of `∂_t w`, Gronwall envelopes for 2D uniqueness and step-refinement
//! orders.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::galerkin::{solve, DifferenceEqParams, TrajectoryRecord};
use crate::grid::GridSpec;
use crate::heatflow::heat_flow;
use crate::randomize::{site_rng, Domain, SeedSpec};
use crate::spectral::{leray_project, lp_norm, nonlinear_combination, AdvectionWeights};
use crate::stats::observed_order;

/// Energy bookkeeping sampled at snapshot times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub dim: usize,
    /// Time exponent of the rate norm: 2 in 2D, 4/3 in 3D.
    pub rate_exponent: f64,
    pub times: Vec<f64>,
    pub l2sq: Vec<f64>,
    /// `2 ∫_0^t ‖∇w‖²`.
    pub cum_enstrophy: Vec<f64>,
    /// `E(w) = ‖w‖² + 2 ∫_0^t ‖∇w‖²`.
    pub energy: Vec<f64>,
    /// `E(w) + E((−Δ)^{1/4} w)`.
    pub energy_half: Vec<f64>,
    /// `∫_0^t ‖∂_t w‖_{H^{−1}}^p`.
    pub dual_rate: Vec<f64>,
    pub forcing_labels: Vec<String>,
    /// Realized forcing norms on `[0, t]`, one row per time.
    pub forcing: Vec<Vec<f64>>,
    pub duhamel_residual: Option<f64>,
}

impl EnergyTrace {
    pub fn empty(dim: usize, rate_exponent: f64) -> Self {
        EnergyTrace {
            dim,
            rate_exponent,
            times: Vec::new(),
            l2sq: Vec::new(),
            cum_enstrophy: Vec::new(),
            energy: Vec::new(),
            energy_half: Vec::new(),
            dual_rate: Vec::new(),
            forcing_labels: Vec::new(),
            forcing: Vec::new(),
            duhamel_residual: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        [&self.l2sq, &self.cum_enstrophy, &self.energy, &self.energy_half, &self.dual_rate]
            .iter()
            .all(|c| c.iter().all(|v| v.is_finite()))
    }

    /// Writes the trace as CSV. `duhamel_residual` is filled on the last row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header: Vec<String> =
            ["t", "l2sq_w", "cum_enstrophy", "energy_E", "energy_E_half", "dual_rate_p"].map(String::from).to_vec();
        header.extend(self.forcing_labels.iter().cloned());
        header.push("duhamel_residual".into());
        wtr.write_record(&header)?;
        for i in 0..self.len() {
            let mut row = vec![
                fmt_num(self.times[i]),
                fmt_num(self.l2sq[i]),
                fmt_num(self.cum_enstrophy[i]),
                fmt_num(self.energy[i]),
                fmt_num(self.energy_half[i]),
                fmt_num(self.dual_rate[i]),
            ];
            if let Some(f) = self.forcing.get(i) {
                row.extend(f.iter().map(|&v| fmt_num(v)));
            }
            let last = i + 1 == self.len();
            row.push(match (last, self.duhamel_residual) {
                (true, Some(r)) => fmt_num(r),
                _ => String::new(),
            });
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:.17e}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyBoundReport {
    pub sup_e: f64,
    pub final_e: f64,
    /// Sum of the realized forcing norms over `[0, T]`.
    pub lambda_hat: Option<f64>,
    pub finite: bool,
    pub enstrophy_monotone: bool,
    /// `sup E` of the refined reruns, if any.
    pub refined_sup_e: Vec<f64>,
    /// Largest `|ΔsupE| / supE` against the refined reruns.
    pub refinement_delta: Option<f64>,
    pub stable: Option<bool>,
}

/// Tolerated relative change of `sup E` under one refinement.
pub const REFINEMENT_TOLERANCE: f64 = 0.10;

pub fn energy_bound_monitor(trace: &EnergyTrace, horizon: f64, alpha: f64) -> Result<EnergyBoundReport> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("α must be positive, got {alpha}")));
    }
    let complete = trace.times.last().is_some_and(|&t| (t - horizon).abs() <= 1e-9 * horizon.max(1.0));
    if !complete {
        return Err(Error::InvalidArgument("energy trace does not reach the horizon".into()));
    }
    let sup_e = trace.energy.iter().cloned().fold(0.0, f64::max);
    let lambda_hat = trace.forcing.last().filter(|r| !r.is_empty()).map(|r| r.iter().sum());
    Ok(EnergyBoundReport {
        sup_e,
        final_e: *trace.energy.last().unwrap(),
        lambda_hat,
        finite: trace.is_finite(),
        enstrophy_monotone: trace.cum_enstrophy.windows(2).all(|w| w[1] >= w[0]),
        refined_sup_e: Vec::new(),
        refinement_delta: None,
        stable: None,
    })
}

impl EnergyBoundReport {
    /// Compares against `sup E` of refined reruns (finer `M` or `dt`).
    pub fn with_refinements(mut self, refined: &[f64]) -> Self {
        let delta = refined
            .iter()
            .map(|&r| (r - self.sup_e).abs() / r.abs().max(self.sup_e.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        self.refined_sup_e = refined.to_vec();
        self.refinement_delta = Some(delta);
        self.stable = Some(self.finite && refined.iter().all(|r| r.is_finite()) && delta <= REFINEMENT_TOLERANCE);
        self
    }

    pub fn pass(&self) -> bool {
        self.finite && self.enstrophy_monotone && self.stable.unwrap_or(true)
    }
}

/// `‖∂_t w‖_{L^p_t H^{−1}_x}` with `p = 2` in 2D and `4/3` in 3D.
pub fn rate_norm(trace: &EnergyTrace, dim: usize) -> Result<f64> {
    let p = match dim {
        2 => 2.0,
        3 => 4.0 / 3.0,
        _ => return Err(Error::InvalidArgument(format!("dimension must be 2 or 3, got {dim}"))),
    };
    if trace.dim != dim {
        return Err(Error::GridMismatch(format!("trace is {}-dimensional, not {dim}", trace.dim)));
    }
    Ok(trace.dual_rate.last().copied().unwrap_or(0.0).powf(1.0 / p))
}

/// Frozen bound for `‖v‖_{L⁴} <= C ‖v‖_{L²}^{1/2} ‖∇v‖_{L²}^{1/2}` on mean-zero
/// 2D fields, from [`calibrate_ladyzhenskaya`] at `M = 4` (1.1067, attained by a
/// single solenoidal pair) rounded up.
pub const LADYZHENSKAYA_CONSTANT: f64 = 1.11;

/// `‖v‖_{L⁴} / (‖v‖_{L²} ‖∇v‖_{L²})^{1/2}`, or 0 for `v = 0`.
pub fn ladyzhenskaya_ratio(v: &SpectralField) -> Result<f64> {
    let l2 = v.l2_sq().sqrt();
    let grad = v.weighted_sq(|k| k).sqrt();
    if l2 == 0.0 {
        return Ok(0.0);
    }
    Ok(lp_norm(v, 4.0)? / (l2 * grad).sqrt())
}

/// Largest interpolation ratio found by randomized hill climbing over
/// divergence-free fields on a 2D grid of size `m`.
pub fn calibrate_ladyzhenskaya(m: usize, restarts: usize, iterations: usize, seed: u64) -> Result<f64> {
    let grid = GridSpec::new(2, m)?;
    let mut best = 0.0f64;
    // every single solenoidal pair
    for idx in 0..grid.zero_index() {
        let n = grid.wavevector(idx);
        let mut f = SpectralField::zeros(grid);
        f.set_pair(0, &n[..2], Complex64::new(-(n[1] as f64), 0.0))?;
        f.set_pair(1, &n[..2], Complex64::new(n[0] as f64, 0.0))?;
        best = best.max(ladyzhenskaya_ratio(&f)?);
    }
    for r in 0..restarts {
        let mut rng = site_rng(SeedSpec::new(seed, r as u64), Domain::Calibration, [0, 0, 0]);
        let random_field = |scale: f64, rng: &mut rand_chacha::ChaCha8Rng| -> SpectralField {
            let mut f = SpectralField::zeros(grid);
            for idx in 0..grid.zero_index() {
                let n = grid.wavevector(idx);
                for c in 0..2 {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    f.set_pair(c, &n[..2], Complex64::new(re, im) * scale).unwrap();
                }
            }
            leray_project(&f)
        };
        // sparse starting points concentrate energy in few modes
        let mut current = random_field(1.0, &mut rng);
        let keep: f64 = rng.random_range(0.05..1.0);
        for v in current.coeffs_mut() {
            if rng.random::<f64>() > keep {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        current.symmetrize();
        let mut current = leray_project(&current);
        if current.l2_sq() == 0.0 {
            continue;
        }
        let mut score = ladyzhenskaya_ratio(&current)?;
        let mut step = 0.3;
        for _ in 0..iterations {
            let trial = current.axpy(step * current.l2_sq().sqrt() / (grid.modes() as f64).sqrt(), &random_field(1.0, &mut rng))?;
            let s = ladyzhenskaya_ratio(&trial)?;
            if s > score {
                current = trial;
                score = s;
            } else {
                step *= 0.98;
            }
        }
        best = best.max(score);
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallConfig {
    pub nu: [f64; 3],
    pub mu: f64,
    /// Interval `[0, ρ]`; defaults to `min(T, 1)`.
    pub rho: Option<f64>,
    /// Absolute allowance for time-discretization error in `‖v‖²`.
    pub slack: f64,
}

impl GronwallConfig {
    /// `ν_j = 1/4` and `μ = 1/(4|c₁|)`.
    pub fn default_for(c1: f64) -> Self {
        GronwallConfig { nu: [0.25; 3], mu: 1.0 / (4.0 * c1.abs()), rho: None, slack: 0.0 }
    }

    /// `|c₁| μ + ν₁ + ν₂ + ν₃ = 1` with positive weights.
    pub fn validate(&self, c1: f64) -> Result<()> {
        if self.nu.iter().any(|&v| !(v > 0.0)) || !(self.mu > 0.0) {
            return Err(Error::InvalidArgument("Gronwall weights must be positive".into()));
        }
        let total = c1.abs() * self.mu + self.nu.iter().sum::<f64>();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights give |c1|·μ + Σν = {total}, expected 1")));
        }
        if !(self.slack >= 0.0) {
            return Err(Error::InvalidArgument("slack must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GronwallReport {
    pub times: Vec<f64>,
    pub v_sq: Vec<f64>,
    pub envelope: Vec<f64>,
    /// `ln` of the envelope; stays finite when the envelope overflows.
    pub log_envelope: Vec<f64>,
    /// Minimum of `ln(envelope / ‖v‖²)` over `[0, ρ]`; `None` when `v ≡ 0`.
    pub log_margin: Option<f64>,
    /// Minimum of `envelope / ‖v‖²` over `[0, ρ]`; `None` when `v ≡ 0`.
    pub envelope_margin: Option<f64>,
    pub max_interpolation_ratio: f64,
    pub interpolation_ok: bool,
    pub pass: bool,
}

/// `‖v(t)‖² <= ‖v(0)‖² exp(K ∫_0^t Σ_j ν_j^{−1}‖∇w_j‖² + c₁² μ^{−2} ν₃^{−1} ‖g‖⁴_{L⁴})`
/// for `v = w₁ − w₂`, with `K` the fourth power of the frozen interpolation
/// constant.
pub fn gronwall_uniqueness_check(
    traj1: &TrajectoryRecord,
    traj2: &TrajectoryRecord,
    f_omega: &SpectralField,
    config: &GronwallConfig,
) -> Result<GronwallReport> {
    if traj1.grid.dim != 2 || traj2.grid.dim != 2 {
        return Err(Error::InvalidArgument("the uniqueness check is two-dimensional".into()));
    }
    if !traj1.grid.same_lattice(&traj2.grid) || !traj1.grid.same_lattice(f_omega.grid()) {
        return Err(Error::GridMismatch("trajectories and forcing must share the grid".into()));
    }
    let same_times = traj1.times.len() == traj2.times.len()
        && traj1.times.iter().zip(&traj2.times).all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same_times || traj1.params.c1 != traj2.params.c1 || traj1.params.c2 != traj2.params.c2 {
        return Err(Error::InvalidArgument("trajectories must share snapshot times and couplings".into()));
    }
    let c1 = traj1.params.c1;
    config.validate(c1)?;
    let horizon = *traj1.times.last().unwrap();
    let rho = config.rho.unwrap_or(horizon.min(1.0));
    let kappa = LADYZHENSKAYA_CONSTANT.powi(4);
    let [n1, n2, n3] = config.nu;

    let mut times = Vec::new();
    let mut v_sq = Vec::new();
    let mut envelope = Vec::new();
    let mut log_envelope = Vec::new();
    let mut rate_prev = 0.0;
    let mut exponent = 0.0;
    let mut v0 = 0.0;
    let mut max_ratio = 0.0f64;
    for (i, &t) in traj1.times.iter().enumerate() {
        if t > rho * (1.0 + 1e-12) {
            break;
        }
        let (w1, w2) = (&traj1.snapshots[i], &traj2.snapshots[i]);
        let v = w1.sub(w2)?;
        max_ratio = max_ratio.max(ladyzhenskaya_ratio(&v)?);
        let g4 = lp_norm(&heat_flow(f_omega, t)?, 4.0)?.powi(4);
        let rate = w1.weighted_sq(|k| k) / n1 + w2.weighted_sq(|k| k) / n2 + c1 * c1 / (config.mu * config.mu * n3) * g4;
        if i == 0 {
            v0 = v.l2_sq();
        } else {
            exponent += 0.5 * (t - times[i - 1]) * (rate + rate_prev);
        }
        rate_prev = rate;
        times.push(t);
        v_sq.push(v.l2_sq());
        envelope.push(v0 * (kappa * exponent).exp());
        log_envelope.push(v0.ln() + kappa * exponent);
    }
    let mut log_margin: Option<f64> = None;
    let mut pass = true;
    for (v, le) in v_sq.iter().zip(&log_envelope) {
        if *v > 0.0 {
            let m = le - v.ln();
            log_margin = Some(log_margin.map_or(m, |x| x.min(m)));
        }
        if *v > config.slack && v.ln() > le + 1e-9 {
            pass = false;
        }
    }
    let margin = log_margin.map(f64::exp);
    let interpolation_ok = max_ratio <= LADYZHENSKAYA_CONSTANT;
    Ok(GronwallReport {
        times,
        v_sq,
        envelope,
        log_envelope,
        log_margin,
        envelope_margin: margin,
        max_interpolation_ratio: max_ratio,
        interpolation_ok,
        pass: pass && interpolation_ok,
    })
}

/// `F = c₁(N(w,g) + N(g,w)) + c₂ N(g,g)`, the heat-flow-driven part of the
/// right-hand side, at every snapshot. `cumulative_sq` is the trapezoid
/// running `∫_0^t ‖F‖²`, so `‖F‖_{L²([0,δ];L²)}` can be read off for any `δ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingForcing {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub cumulative_sq: Vec<f64>,
}

pub fn coupling_forcing_profile(traj: &TrajectoryRecord, f_omega: &SpectralField) -> Result<CouplingForcing> {
    if !traj.grid.same_lattice(f_omega.grid()) {
        return Err(Error::GridMismatch("trajectory and forcing must share the grid".into()));
    }
    let (c1, c2) = (traj.params.c1, traj.params.c2);
    let weights = AdvectionWeights { ww: 0.0, wg: c1, gw: c1, gg: c2 };
    let mut l2 = Vec::with_capacity(traj.times.len());
    let mut cumulative_sq = Vec::with_capacity(traj.times.len());
    for (i, (&t, w)) in traj.times.iter().zip(&traj.snapshots).enumerate() {
        let g = heat_flow(f_omega, t)?;
        let sq = nonlinear_combination(w, &g, weights)?.l2_sq();
        let acc = match i {
            0 => 0.0,
            _ => cumulative_sq[i - 1] + 0.5 * (t - traj.times[i - 1]) * (sq + l2[i - 1] * l2[i - 1]),
        };
        l2.push(sq.sqrt());
        cumulative_sq.push(acc);
    }
    Ok(CouplingForcing { times: traj.times.clone(), l2, cumulative_sq })
}

/// Differences of `w(T)` between successive step halvings and the implied
/// orders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderReport {
    pub dts: Vec<f64>,
    /// `‖w_{dt_i}(T) − w_{dt_{i+1}}(T)‖_{L²}`.
    pub diffs: Vec<f64>,
    pub orders: Vec<f64>,
}

/// Reruns with `dt, dt/2, …` (`levels >= 3`) from zero data.
pub fn step_refinement_order(f_omega: &SpectralField, params: &DifferenceEqParams, levels: usize) -> Result<OrderReport> {
    if levels < 3 {
        return Err(Error::InvalidArgument("need at least three step sizes".into()));
    }
    let mut dts = Vec::new();
    let mut finals = Vec::new();
    for l in 0..levels {
        let p = DifferenceEqParams { dt: params.dt / (1u32 << l) as f64, ..*params };
        finals.push(solve(f_omega, &p)?.final_state().clone());
        dts.push(p.dt);
    }
    let diffs: Vec<f64> =
        finals.windows(2).map(|w| w[0].sub(&w[1]).map(|d| d.l2_sq().sqrt())).collect::<Result<_>>()?;
    let orders = diffs.windows(2).map(|d| observed_order(d[0], d[1])).collect();
    Ok(OrderReport { dts, diffs, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_gronwall_weights_satisfy_identity() {
        for c1 in [-1.0, 1.0, 2.5] {
            GronwallConfig::default_for(c1).validate(c1).unwrap();
        }
        let bad = GronwallConfig { nu: [0.3; 3], ..GronwallConfig::default_for(-1.0) };
        assert!(bad.validate(-1.0).is_err());
    }

    #[test]
    fn interpolation_ratio_of_single_pair() {
        // 2cos x: ‖·‖₄ = 6^{1/4}, ‖·‖₂ = ‖∇·‖₂ = √2
        let g = GridSpec::new(2, 3).unwrap();
        let f = crate::spectral::single_pair(g, 1, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
        let r = ladyzhenskaya_ratio(&f).unwrap();
        assert!((r - 6f64.powf(0.25) / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rate_norm_dimension_checks() {
        let t = EnergyTrace::empty(2, 2.0);
        assert_eq!(rate_norm(&t, 2).unwrap(), 0.0);
        assert!(rate_norm(&t, 3).is_err());
        assert!(rate_norm(&t, 4).is_err());
    }

    #[test]
    fn coupling_forcing_starts_at_the_gg_term() {
        let grid = GridSpec::new(2, 4).unwrap();
        let f = crate::datum::power_law(grid, 0.9, 1.0).unwrap();
        let params = DifferenceEqParams { horizon: 0.02, dt: 1e-3, c2: -0.5, ..DifferenceEqParams::default() };
        let traj = solve(&f, &params).unwrap();
        let prof = coupling_forcing_profile(&traj, &f).unwrap();
        let n_ff = crate::spectral::nonlinear_term(&f, &f).unwrap().l2_sq().sqrt();
        assert!((prof.l2[0] - 0.5 * n_ff).abs() <= 1e-12 * n_ff);
        assert_eq!(prof.cumulative_sq[0], 0.0);
        assert!(prof.cumulative_sq.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(prof.times.len(), traj.times.len());
    }
}
