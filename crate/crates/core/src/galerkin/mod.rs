//! Truncated difference equation for `w = u − e^{tΔ} f^ω`.
//!
//! The Galerkin system
//! `∂_t ŵ = −|k|² ŵ − N(w,w) + c₁ (N(w,g) + N(g,w)) + c₂ N(g,g)`,
//! `g = e^{tΔ} f^ω`, is integrated from `w(0) = 0` with integrating-factor
//! Runge–Kutta schemes. `c₁ = c₂ = −1` recovers Navier–Stokes for
//! `u = w + g`.

mod duhamel;
mod reconstruct;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, DIVERGENCE_TOL};
use crate::grid::GridSpec;
use crate::heatflow::{geometric_times, heat_flow, spatial_norm, ForcingProbe, NormProbeSpec};
use crate::spectral::{fractional_laplacian, nonlinear_combination, nonlinear_term, AdvectionWeights};
use crate::verify::EnergyTrace;

pub use duhamel::{duhamel_residual, duhamel_solution};
pub use reconstruct::{reconstruct_u, Reconstruction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    #[serde(rename = "exponential-rk2")]
    ExpRk2,
    #[serde(rename = "exponential-rk4")]
    ExpRk4,
}

impl Integrator {
    pub fn order(self) -> u32 {
        match self {
            Integrator::ExpRk2 => 2,
            Integrator::ExpRk4 => 4,
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::ExpRk2 => "exponential-rk2",
            Integrator::ExpRk4 => "exponential-rk4",
        })
    }
}

impl FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential-rk2" | "rk2" => Ok(Integrator::ExpRk2),
            "exponential-rk4" | "rk4" => Ok(Integrator::ExpRk4),
            _ => Err(Error::Config(format!("unknown integrator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DifferenceEqParams {
    pub c1: f64,
    pub c2: f64,
    pub horizon: f64,
    pub dt: f64,
    /// If set, the first steps follow `t_j = (j·dt)^{1/(1−a/2)}` with this
    /// `a`, until the mesh spacing reaches `dt`.
    pub graded_start: Option<f64>,
    pub integrator: Integrator,
    /// Snapshot cadence in steps once the mesh is uniform.
    pub snapshot_every: usize,
    /// Snapshots are also taken at every step while `t < dense_until`.
    pub dense_until: f64,
    /// `‖w‖_{L²}` beyond this value aborts the run.
    pub blowup_threshold: f64,
    /// Evaluate `b(w,w,w)` and `b(g,w,w)` after every accepted step.
    pub check_trilinear: bool,
}

impl Default for DifferenceEqParams {
    fn default() -> Self {
        DifferenceEqParams {
            c1: -1.0,
            c2: -1.0,
            horizon: 1.0,
            dt: 2.5e-4,
            graded_start: None,
            integrator: Integrator::ExpRk4,
            snapshot_every: 10,
            dense_until: 0.01,
            blowup_threshold: 1e8,
            check_trilinear: false,
        }
    }
}

impl DifferenceEqParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("T must be > 0, got {}", self.horizon)));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::InvalidArgument(format!("need 0 < dt <= T, got dt = {}", self.dt)));
        }
        if !self.c1.is_finite() || !self.c2.is_finite() {
            return Err(Error::InvalidArgument("coupling constants must be finite".into()));
        }
        if self.snapshot_every == 0 || self.snapshot_every > 10 {
            return Err(Error::InvalidArgument(format!(
                "snapshot cadence must be between 1 and 10 steps, got {}",
                self.snapshot_every
            )));
        }
        if let Some(a) = self.graded_start {
            if !(0.0..2.0).contains(&a) {
                return Err(Error::InvalidArgument(format!("grading parameter must lie in [0, 2), got {a}")));
            }
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::InvalidArgument("blow-up threshold must be positive".into()));
        }
        Ok(())
    }

    fn weights(&self, forced: bool) -> AdvectionWeights {
        if forced {
            AdvectionWeights { ww: -1.0, wg: self.c1, gw: self.c1, gg: self.c2 }
        } else {
            AdvectionWeights { ww: -1.0, wg: 0.0, gw: 0.0, gg: 0.0 }
        }
    }
}

/// Step times `0 = t_0 < t_1 < … < t_n = T` and the index where the mesh
/// becomes uniform.
pub fn time_mesh(params: &DifferenceEqParams) -> Result<(Vec<f64>, usize)> {
    params.validate()?;
    let (h, horizon) = (params.dt, params.horizon);
    let mut mesh = vec![0.0];
    if let Some(a) = params.graded_start {
        let beta = 1.0 / (1.0 - a / 2.0);
        let mut j = 1.0;
        loop {
            let t = (j * h).powf(beta);
            let prev = *mesh.last().unwrap();
            if t - prev >= h || t >= horizon {
                break;
            }
            mesh.push(t);
            j += 1.0;
        }
    }
    let graded = mesh.len() - 1;
    let start = *mesh.last().unwrap();
    let rest = horizon - start;
    let n = ((rest / h) - 1e-9).ceil().max(1.0) as usize;
    let step = rest / n as f64;
    for i in 1..=n {
        mesh.push(if i == n { horizon } else { start + step * i as f64 });
    }
    Ok((mesh, graded))
}

/// Right-hand side `−|k|² ŵ − N(w,w) + c₁ (N(w,g) + N(g,w)) + c₂ N(g,g)`.
pub fn rhs(w: &SpectralField, g: &SpectralField, params: &DifferenceEqParams) -> Result<SpectralField> {
    w.check_same(g)?;
    let nl = nonlinear_combination(w, g, params.weights(true))?;
    let kk = w.grid().squared_wavenumbers();
    let mut out = nl.into_coeffs();
    let len = kk.len();
    for (i, (o, v)) in out.iter_mut().zip(w.coeffs()).enumerate() {
        *o -= v * kk[i % len];
    }
    let mut f = SpectralField::from_raw(*w.grid(), out, false);
    f.refresh_solenoidal();
    Ok(f)
}

/// Largest `|b(u,v,w)| / (‖w‖ ‖N(u,v)‖)` seen for the two neutral forms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrilinearDiagnostics {
    pub steps_checked: usize,
    pub max_www: f64,
    pub max_gww: f64,
}

/// Normalized `b(u, v, w) = ⟨w, N(u, v)⟩`.
pub fn relative_trilinear(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<f64> {
    let n = nonlinear_term(u, v)?;
    let scale = (w.l2_sq() * n.l2_sq()).sqrt();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(w.inner(&n)?.abs() / scale)
}

#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub params: DifferenceEqParams,
    pub grid: GridSpec,
    /// Snapshot times, strictly increasing, first `0`, last `T`.
    pub times: Vec<f64>,
    pub snapshots: Vec<SpectralField>,
    pub trace: EnergyTrace,
    pub steps: usize,
    pub trilinear: Option<TrilinearDiagnostics>,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &SpectralField {
        self.snapshots.last().expect("trajectory has snapshots")
    }

    pub fn initial_state(&self) -> &SpectralField {
        &self.snapshots[0]
    }
}

/// Integrates from `w(0) = 0`.
pub fn solve(f_omega: &SpectralField, params: &DifferenceEqParams) -> Result<TrajectoryRecord> {
    let w0 = SpectralField::zeros(*f_omega.grid());
    solve_from(f_omega, &w0, params)
}

/// Integrates from an arbitrary solenoidal `w(0)` (regression mode).
pub fn solve_from(f_omega: &SpectralField, w0: &SpectralField, params: &DifferenceEqParams) -> Result<TrajectoryRecord> {
    let (record, failure) = solve_partial(f_omega, w0, params, None)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(record),
    }
}

/// Like [`solve_from`] but keeps everything up to a numerical failure. The
/// second value is the failure, if any. Realized forcing norms are attached
/// to the trace when `probe` is given.
pub fn solve_partial(
    f_omega: &SpectralField,
    w0: &SpectralField,
    params: &DifferenceEqParams,
    probe: Option<&ForcingProbe>,
) -> Result<(TrajectoryRecord, Option<Error>)> {
    params.validate()?;
    f_omega.check_same(w0)?;
    for (name, f) in [("f_omega", f_omega), ("w(0)", w0)] {
        if !f.has_zero_mean() || !f.is_hermitian(0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be real with zero mean")));
        }
        if f.divergence_ratio() > DIVERGENCE_TOL {
            return Err(Error::InvalidArgument(format!("{name} is not divergence-free")));
        }
    }
    if let Some(p) = probe {
        if p.dim != f_omega.dim() {
            return Err(Error::GridMismatch("forcing probe dimension differs from the datum".into()));
        }
        p.validate()?;
    }
    let (mesh, graded) = time_mesh(params)?;
    let mut stepper = Stepper::new(f_omega, params);
    let mut w = w0.clone();
    w.set_solenoidal(true);
    let mut r = stepper.rhs(0.0, &w)?;
    let mut acc = TraceAccumulator::new(&w, &r);
    let mut times = vec![0.0];
    let mut snapshots = vec![w.clone()];
    let mut trilinear = params.check_trilinear.then(TrilinearDiagnostics::default);
    let mut failure = None;
    let mut steps = 0;
    let mut since_snapshot = 0;

    for j in 1..mesh.len() {
        let (t0, t1) = (mesh[j - 1], mesh[j]);
        let next = match stepper.step(t0, t1 - t0, &w, &r) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        if let Some(reason) = health(&next, params) {
            failure = Some(Error::Numerical { time: t1, reason });
            break;
        }
        let r_next = match stepper.rhs(t1, &next) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        if let Some(diag) = trilinear.as_mut() {
            let g = heat_flow(f_omega, t1)?;
            diag.max_www = diag.max_www.max(relative_trilinear(&next, &next, &next)?);
            diag.max_gww = diag.max_gww.max(relative_trilinear(&g, &next, &next)?);
            diag.steps_checked += 1;
        }
        acc.advance(t1 - t0, &next, &r_next);
        w = next;
        r = r_next;
        steps += 1;
        since_snapshot += 1;
        let dense = j <= graded || t1 <= params.dense_until;
        if dense || since_snapshot >= params.snapshot_every || j == mesh.len() - 1 {
            times.push(t1);
            snapshots.push(w.clone());
            acc.record(t1);
            since_snapshot = 0;
        }
    }
    if failure.is_some() && times.last() != mesh.get(steps) {
        // keep the last accepted state
        times.push(mesh[steps]);
        snapshots.push(w.clone());
        acc.record(mesh[steps]);
    }
    let mut trace = acc.finish();
    if let Some(p) = probe {
        let (labels, cols) = realized_forcing(f_omega, p, &trace.times)?;
        trace.forcing_labels = labels;
        trace.forcing = cols;
    }
    let record = TrajectoryRecord { params: *params, grid: *w.grid(), times, snapshots, trace, steps, trilinear };
    Ok((record, failure))
}

fn health(w: &SpectralField, params: &DifferenceEqParams) -> Option<String> {
    if !w.is_finite() {
        return Some("non-finite coefficients".into());
    }
    let l2 = w.l2_sq().sqrt();
    if l2 > params.blowup_threshold {
        return Some(format!("‖w‖ = {l2:e} exceeds the blow-up threshold {:e}", params.blowup_threshold));
    }
    let div = w.divergence_ratio();
    if div > DIVERGENCE_TOL {
        return Some(format!("divergence ratio {div:e} above {DIVERGENCE_TOL:e}"));
    }
    None
}

/// Integrating-factor Runge–Kutta on `v = e^{−tΔ} w`.
struct Stepper<'a> {
    f_omega: &'a SpectralField,
    params: &'a DifferenceEqParams,
    forced: bool,
    kk: Vec<f64>,
    cached_h: f64,
    half: Vec<f64>,
    full: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(f_omega: &'a SpectralField, params: &'a DifferenceEqParams) -> Self {
        let forced = f_omega.coeffs().iter().any(|c| c.norm_sqr() > 0.0);
        Stepper {
            f_omega,
            params,
            forced,
            kk: f_omega.grid().squared_wavenumbers(),
            cached_h: f64::NAN,
            half: Vec::new(),
            full: Vec::new(),
        }
    }

    fn nonlinear(&self, t: f64, w: &SpectralField) -> Result<SpectralField> {
        let g = if self.forced { heat_flow(self.f_omega, t)? } else { SpectralField::zeros(*w.grid()) };
        nonlinear_combination(w, &g, self.params.weights(self.forced))
    }

    fn rhs(&self, t: f64, w: &SpectralField) -> Result<SpectralField> {
        let nl = self.nonlinear(t, w)?;
        let len = self.kk.len();
        let coeffs = nl
            .coeffs()
            .iter()
            .zip(w.coeffs())
            .enumerate()
            .map(|(i, (n, v))| n - v * self.kk[i % len])
            .collect();
        Ok(SpectralField::from_raw(*w.grid(), coeffs, true))
    }

    fn propagators(&mut self, h: f64) {
        if h != self.cached_h {
            self.half = self.kk.iter().map(|k| (-k * h / 2.0).exp()).collect();
            self.full = self.kk.iter().map(|k| (-k * h).exp()).collect();
            self.cached_h = h;
        }
    }

    /// `r0` is the full right-hand side at `(t, w)`; its nonlinear part is
    /// recovered as `r0 + |k|² w`.
    fn step(&mut self, t: f64, h: f64, w: &SpectralField, r0: &SpectralField) -> Result<SpectralField> {
        self.propagators(h);
        let grid = *w.grid();
        let len = self.kk.len();
        let kk = &self.kk;
        let k1: Vec<Complex64> =
            r0.coeffs().iter().zip(w.coeffs()).enumerate().map(|(i, (r, v))| r + v * kk[i % len]).collect();
        let (e_half, e_full) = (&self.half, &self.full);
        let wc = w.coeffs();
        let field = |c: Vec<Complex64>| SpectralField::from_raw(grid, c, true);
        let out: Vec<Complex64> = match self.params.integrator {
            Integrator::ExpRk2 => {
                let a: Vec<Complex64> =
                    (0..wc.len()).map(|i| e_full[i % len] * (wc[i] + h * k1[i])).collect();
                let k2 = self.nonlinear(t + h, &field(a))?;
                let k2 = k2.coeffs();
                (0..wc.len())
                    .map(|i| {
                        let ef = e_full[i % len];
                        ef * wc[i] + 0.5 * h * (ef * k1[i] + k2[i])
                    })
                    .collect()
            }
            Integrator::ExpRk4 => {
                let a: Vec<Complex64> =
                    (0..wc.len()).map(|i| e_half[i % len] * (wc[i] + 0.5 * h * k1[i])).collect();
                let k2 = self.nonlinear(t + h / 2.0, &field(a))?;
                let b: Vec<Complex64> =
                    (0..wc.len()).map(|i| e_half[i % len] * wc[i] + 0.5 * h * k2.coeffs()[i]).collect();
                let k3 = self.nonlinear(t + h / 2.0, &field(b))?;
                let c: Vec<Complex64> = (0..wc.len())
                    .map(|i| e_full[i % len] * wc[i] + h * e_half[i % len] * k3.coeffs()[i])
                    .collect();
                let k4 = self.nonlinear(t + h, &field(c))?;
                let (k2, k3, k4) = (k2.coeffs(), k3.coeffs(), k4.coeffs());
                (0..wc.len())
                    .map(|i| {
                        let (eh, ef) = (e_half[i % len], e_full[i % len]);
                        ef * wc[i] + h / 6.0 * (ef * k1[i] + 2.0 * eh * (k2[i] + k3[i]) + k4[i])
                    })
                    .collect()
            }
        };
        Ok(SpectralField::from_raw(grid, out, true))
    }
}

/// Running energy bookkeeping, advanced every step and sampled at snapshots.
struct TraceAccumulator {
    p: f64,
    cum_enstrophy: f64,
    cum_enstrophy_half: f64,
    dual: f64,
    // value and time derivative of ‖∇w‖², ‖∇(−Δ)^{1/4}w‖² and ‖ẇ‖_{H^{−1}}^p
    grad: (f64, f64),
    grad_half: (f64, f64),
    dual_now: f64,
    l2: f64,
    l2_half: f64,
    rows: EnergyTrace,
}

fn weighted_pair(w: &SpectralField, r: &SpectralField, weight: impl Fn(f64) -> f64) -> (f64, f64) {
    let kk = w.grid().squared_wavenumbers();
    let len = kk.len();
    let mut val = 0.0;
    let mut der = 0.0;
    for (i, (a, b)) in w.coeffs().iter().zip(r.coeffs()).enumerate() {
        let k = kk[i % len];
        if k == 0.0 {
            continue;
        }
        let wt = weight(k);
        val += wt * a.norm_sqr();
        der += 2.0 * wt * (a.conj() * b).re;
    }
    (val, der)
}

impl TraceAccumulator {
    fn new(w: &SpectralField, r: &SpectralField) -> Self {
        let p = if w.dim() == 2 { 2.0 } else { 4.0 / 3.0 };
        let mut acc = TraceAccumulator {
            p,
            cum_enstrophy: 0.0,
            cum_enstrophy_half: 0.0,
            dual: 0.0,
            grad: (0.0, 0.0),
            grad_half: (0.0, 0.0),
            dual_now: 0.0,
            l2: 0.0,
            l2_half: 0.0,
            rows: EnergyTrace::empty(w.dim(), p),
        };
        acc.sample(w, r);
        acc.record(0.0);
        acc
    }

    fn sample(&mut self, w: &SpectralField, r: &SpectralField) {
        self.grad = weighted_pair(w, r, |k| k);
        self.grad_half = weighted_pair(w, r, |k| k * k.sqrt());
        self.l2 = w.l2_sq();
        self.l2_half = w.weighted_sq(|k| k.sqrt());
        self.dual_now = r.weighted_sq(|k| 1.0 / (1.0 + k)).sqrt().powf(self.p);
    }

    fn advance(&mut self, h: f64, w: &SpectralField, r: &SpectralField) {
        let (g0, h0, d0) = (self.grad, self.grad_half, self.dual_now);
        self.sample(w, r);
        // trapezoid with endpoint-derivative correction (fourth order)
        let hermite = |a: (f64, f64), b: (f64, f64)| h / 2.0 * (a.0 + b.0) + h * h / 12.0 * (a.1 - b.1);
        self.cum_enstrophy += 2.0 * hermite(g0, self.grad);
        self.cum_enstrophy_half += 2.0 * hermite(h0, self.grad_half);
        self.dual += h / 2.0 * (d0 + self.dual_now);
    }

    fn record(&mut self, t: f64) {
        let rows = &mut self.rows;
        rows.times.push(t);
        rows.l2sq.push(self.l2);
        rows.cum_enstrophy.push(self.cum_enstrophy);
        rows.energy.push(self.l2 + self.cum_enstrophy);
        rows.energy_half.push(self.l2 + self.cum_enstrophy + self.l2_half + self.cum_enstrophy_half);
        rows.dual_rate.push(self.dual);
    }

    fn finish(self) -> EnergyTrace {
        self.rows
    }
}

/// Running `‖t^γ … g‖_{L^q([0,t]; L^p)}` for each probe term at the given
/// times. One cumulative log-time trapezoid runs over the probe's geometric
/// grid merged with `times`.
pub fn realized_forcing(
    f_omega: &SpectralField,
    probe: &ForcingProbe,
    times: &[f64],
) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let terms = probe.terms();
    let labels = terms.iter().map(probe_label).collect();
    let mut cols = vec![vec![0.0; terms.len()]; times.len()];
    let horizon = times.iter().cloned().fold(0.0, f64::max);
    if horizon <= probe.t_min {
        return Ok((labels, cols));
    }
    let mut grid = geometric_times(probe.t_min, horizon, probe.points)?;
    grid.extend(times.iter().filter(|&&t| t > probe.t_min));
    grid.sort_by(|a, b| a.total_cmp(b));
    grid.dedup();
    for (ti, term) in terms.iter().enumerate() {
        let base = fractional_laplacian(f_omega, term.sigma)?;
        let vals = grid
            .iter()
            .map(|&t| Ok(t.powf(term.gamma * term.q + 1.0) * spatial_norm(&heat_flow(&base, t)?, term.p)?.powf(term.q)))
            .collect::<Result<Vec<f64>>>()?;
        let mut cum = vec![0.0; grid.len()];
        for j in 1..grid.len() {
            cum[j] = cum[j - 1] + 0.5 * (grid[j] / grid[j - 1]).ln() * (vals[j] + vals[j - 1]);
        }
        for (row, &t) in times.iter().enumerate() {
            if t > probe.t_min {
                let j = grid.partition_point(|&s| s < t);
                cols[row][ti] = cum[j].powf(1.0 / term.q);
            }
        }
    }
    Ok((labels, cols))
}

fn probe_label(p: &NormProbeSpec) -> String {
    let fmt_exp = |v: f64| if v.fract() == 0.0 { format!("{v}") } else { format!("{v:.4}") };
    if p.sigma == 0.0 {
        format!("g_L{}L{}", fmt_exp(p.q), fmt_exp(p.p))
    } else {
        format!("g_s{}_L{}L{}", fmt_exp(p.sigma), fmt_exp(p.q), fmt_exp(p.p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::taylor_green;
    use crate::spectral::nonlinear_term_direct;

    #[test]
    fn mesh_is_uniform_without_grading() {
        let p = DifferenceEqParams { dt: 0.1, horizon: 1.0, ..Default::default() };
        let (mesh, graded) = time_mesh(&p).unwrap();
        assert_eq!(graded, 0);
        assert_eq!(mesh.len(), 11);
        assert_eq!(*mesh.last().unwrap(), 1.0);
    }

    #[test]
    fn graded_mesh_refines_near_zero() {
        let p = DifferenceEqParams { dt: 0.01, horizon: 1.0, graded_start: Some(0.8), ..Default::default() };
        let (mesh, graded) = time_mesh(&p).unwrap();
        assert!(graded > 0);
        assert!(mesh[1] < 0.01);
        assert!(mesh.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*mesh.last().unwrap(), 1.0);
    }

    #[test]
    fn rhs_examples() {
        let g = GridSpec::new(2, 4).unwrap();
        let zero = SpectralField::zeros(g);
        let p = DifferenceEqParams::default();
        assert_eq!(rhs(&zero, &zero, &p).unwrap().l2_sq(), 0.0);

        let tg = taylor_green(g, 1.0).unwrap();
        let r = rhs(&tg, &zero, &p).unwrap();
        assert!(r.sub(&tg.scaled(-2.0)).unwrap().l2_sq().sqrt() < 1e-14);

        let gf = crate::datum::power_law(g, 1.0, 1.0).unwrap();
        let r = rhs(&zero, &gf, &p).unwrap();
        let oracle = nonlinear_term_direct(&gf, &gf).unwrap().scaled(p.c2);
        assert!(r.sub(&oracle).unwrap().l2_sq().sqrt() <= 1e-12 * oracle.l2_sq().sqrt());
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let g = GridSpec::new(2, 4).unwrap();
        let p = DifferenceEqParams { dt: 0.05, horizon: 0.5, ..Default::default() };
        let traj = solve(&SpectralField::zeros(g), &p).unwrap();
        assert!(traj.snapshots.iter().all(|s| s.coeffs().iter().all(|c| c.re == 0.0 && c.im == 0.0)));
        assert!(traj.trace.energy.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = DifferenceEqParams { dt: 2.0, horizon: 1.0, ..Default::default() };
        assert!(p.validate().is_err());
        p.dt = 0.1;
        p.snapshot_every = 11;
        assert!(p.validate().is_err());
    }

    #[test]
    fn navier_stokes_residual_selects_the_sign_convention() {
        let grid = GridSpec::new(2, 8).unwrap();
        let f = crate::datum::power_law(grid, 0.9, 1.0).unwrap();
        let mean_interior = |c: f64| {
            let p = DifferenceEqParams { c1: c, c2: c, horizon: 0.05, dt: 5e-4, snapshot_every: 1, ..Default::default() };
            let r = reconstruct_u(&solve(&f, &p).unwrap(), &f).unwrap().ns_residual;
            r[2..r.len() - 2].iter().sum::<f64>() / (r.len() - 4) as f64
        };
        let physical = mean_interior(-1.0);
        let flipped = mean_interior(1.0);
        assert!(physical < 1e-3 * flipped, "{physical:e} vs {flipped:e}");
    }
}
