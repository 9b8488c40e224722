//! Free heat flow of (randomized) data: deterministic bounds, space-time
//! probe norms and Monte Carlo tail estimates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::randomize::{randomize, MultiplierLaw, SeedSpec};
use crate::spectral::{fractional_laplacian, gradient_sup, lp_norm, lp_norm_oversampled, sobolev_norm};
use crate::stats::{fit_line, wilson_interval};

/// `e^{tΔ} f`: multiplies the coefficient at `n` by `e^{−|n|² t}`.
pub fn heat_flow(f: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("heat flow time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.apply_radial(|kk| (-kk * t).exp()))
}

/// `‖∇^k e^{tΔ} f‖_{L²}`.
pub fn heat_gradient_l2(f: &SpectralField, k: u32, t: f64) -> f64 {
    f.weighted_sq(|kk| kk.powi(k as i32) * (-2.0 * kk * t).exp()).sqrt()
}

/// `‖∇^k e^{tΔ} f‖_{L^∞}` on the oversampled grid, `k ∈ {0, 1}`.
pub fn heat_gradient_sup(f: &SpectralField, k: u32, t: f64) -> Result<f64> {
    let g = heat_flow(f, t)?;
    match k {
        0 => lp_norm(&g, f64::INFINITY),
        1 => Ok(gradient_sup(&g)),
        _ => Err(Error::InvalidArgument(format!("derivative order must be 0 or 1, got {k}"))),
    }
}

/// Geometric grid `t_j = t_min r^j`, `j = 0..points`, ending at `horizon`.
pub fn geometric_times(t_min: f64, horizon: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && horizon > t_min && points >= 2) {
        return Err(Error::InvalidArgument(format!(
            "geometric grid needs 0 < t_min < T and >= 2 points (t_min={t_min}, T={horizon}, points={points})"
        )));
    }
    let ratio = (horizon / t_min).ln() / (points - 1) as f64;
    let mut out: Vec<f64> = (0..points).map(|j| t_min * (ratio * j as f64).exp()).collect();
    out[points - 1] = horizon;
    Ok(out)
}

/// Smallest constants making the two heat-flow bounds hold on a time grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeterministicBoundReport {
    pub alpha: f64,
    pub k: u32,
    pub times: Vec<f64>,
    pub l2_norms: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub data_norm: f64,
    /// `max_t ‖∇^k e^{tΔ}f‖_{L²} / ((1 + t^{−(α+k)/2}) ‖f‖_{H^{−α}})`.
    pub c_l2: f64,
    /// `max_t ‖∇^k e^{tΔ}f‖_{L^∞} / (max{t^{−1}, t^{−(k+α+d/2)}}^{1/2} ‖f‖_{H^{−α}})`.
    pub c_sup: f64,
}

pub fn l2_envelope(alpha: f64, k: u32, t: f64) -> f64 {
    1.0 + t.powf(-(alpha + k as f64) / 2.0)
}

pub fn sup_envelope(alpha: f64, k: u32, dim: usize, t: f64) -> f64 {
    (1.0 / t).max(t.powf(-(k as f64 + alpha + dim as f64 / 2.0))).sqrt()
}

pub fn deterministic_bound_check(f: &SpectralField, alpha: f64, k: u32, times: &[f64]) -> Result<DeterministicBoundReport> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("time grid is empty".into()));
    }
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("time grid must be strictly positive".into()));
    }
    if k > 1 {
        return Err(Error::InvalidArgument(format!("derivative order must be 0 or 1, got {k}")));
    }
    let data_norm = sobolev_norm(f, -alpha);
    let mut l2_norms = Vec::with_capacity(times.len());
    let mut sup_norms = Vec::with_capacity(times.len());
    let (mut c_l2, mut c_sup) = (0.0f64, 0.0f64);
    for &t in times {
        let l2 = heat_gradient_l2(f, k, t);
        let sup = heat_gradient_sup(f, k, t)?;
        if data_norm > 0.0 {
            c_l2 = c_l2.max(l2 / (l2_envelope(alpha, k, t) * data_norm));
            c_sup = c_sup.max(sup / (sup_envelope(alpha, k, f.dim(), t) * data_norm));
        }
        l2_norms.push(l2);
        sup_norms.push(sup);
    }
    Ok(DeterministicBoundReport { alpha, k, times: times.to_vec(), l2_norms, sup_norms, data_norm, c_l2, c_sup })
}

/// Constants on successively refined geometric grids and their stability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundRefinement {
    pub points: Vec<usize>,
    pub c_l2: Vec<f64>,
    pub c_sup: Vec<f64>,
    /// Finite and within a factor 2 across all refinements.
    pub stable: bool,
}

pub fn deterministic_bound_refinement(
    f: &SpectralField,
    alpha: f64,
    k: u32,
    t_min: f64,
    horizon: f64,
    base_points: usize,
    refinements: usize,
) -> Result<BoundRefinement> {
    let mut points = Vec::new();
    let mut c_l2 = Vec::new();
    let mut c_sup = Vec::new();
    for level in 0..=refinements {
        let np = (base_points - 1) * (1 << level) + 1;
        let rep = deterministic_bound_check(f, alpha, k, &geometric_times(t_min, horizon, np)?)?;
        points.push(np);
        c_l2.push(rep.c_l2);
        c_sup.push(rep.c_sup);
    }
    let within = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0, f64::max);
        v.iter().all(|x| x.is_finite()) && (hi == 0.0 || hi <= 2.0 * lo)
    };
    let stable = within(&c_l2) && within(&c_sup);
    Ok(BoundRefinement { points, c_l2, c_sup, stable })
}

/// Parameters of `‖t^γ (−Δ)^{σ/2} e^{tΔ} f‖_{L^q([0,T]; L^p_x)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormProbeSpec {
    pub sigma: f64,
    pub gamma: f64,
    pub p: f64,
    pub q: f64,
    pub horizon: f64,
    pub alpha: f64,
    pub t_min: f64,
    pub points: usize,
}

pub const DEFAULT_T_MIN: f64 = 1e-6;
pub const DEFAULT_TIME_POINTS: usize = 400;

impl NormProbeSpec {
    pub fn new(sigma: f64, gamma: f64, p: f64, q: f64, horizon: f64, alpha: f64) -> Self {
        NormProbeSpec { sigma, gamma, p, q, horizon, alpha, t_min: DEFAULT_T_MIN, points: DEFAULT_TIME_POINTS }
    }

    /// `(σ + α − 2γ) q`, which must stay below 2.
    pub fn admissibility_index(&self) -> f64 {
        (self.sigma + self.alpha - 2.0 * self.gamma) * self.q
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) {
            return Err(Error::Inadmissible(format!("σ = {} must be >= 0", self.sigma)));
        }
        if !(2.0 <= self.q && self.q <= self.p) {
            return Err(Error::Inadmissible(format!("need 2 <= q <= p, got q = {}, p = {}", self.q, self.p)));
        }
        let idx = self.admissibility_index();
        if !(idx < 2.0) {
            return Err(Error::Inadmissible(format!(
                "(σ + α − 2γ) q = ({} + {} − 2·{}) · {} = {idx} is not < 2",
                self.sigma, self.alpha, self.gamma, self.q
            )));
        }
        if !(self.horizon > 0.0 && self.t_min > 0.0 && self.t_min < self.horizon && self.points >= 2) {
            return Err(Error::InvalidArgument("probe needs 0 < t_min < T and >= 2 time points".into()));
        }
        Ok(())
    }
}

/// Probe value plus a bound on the omitted `[0, t_min]` contribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedNormValue {
    pub value: f64,
    /// Upper bound on `∫_0^{t_min} t^{γq} ‖…‖^q dt`, from the `L^p` contraction
    /// of the heat semigroup.
    pub omitted_mass_bound: f64,
}

pub(crate) fn spatial_norm(f: &SpectralField, p: f64) -> Result<f64> {
    if p.fract() == 0.0 && (2.0..=8.0).contains(&p) && (p as u32) % 2 == 0 {
        lp_norm(f, p)
    } else {
        lp_norm_oversampled(f, p)
    }
}

pub fn mixed_norm_detailed(source: &SpectralField, probe: &NormProbeSpec) -> Result<MixedNormValue> {
    probe.validate()?;
    let times = geometric_times(probe.t_min, probe.horizon, probe.points)?;
    let base = fractional_laplacian(source, probe.sigma)?;
    let q = probe.q;
    // integrand in log-time: t^{γq+1} ‖(−Δ)^{σ/2} e^{tΔ} f‖_p^q
    let mut vals = Vec::with_capacity(times.len());
    for &t in &times {
        let norm = spatial_norm(&heat_flow(&base, t)?, probe.p)?;
        vals.push(t.powf(probe.gamma * q + 1.0) * norm.powf(q));
    }
    let mut integral = 0.0;
    for j in 1..times.len() {
        let du = (times[j] / times[j - 1]).ln();
        integral += 0.5 * du * (vals[j] + vals[j - 1]);
    }
    let expo = probe.gamma * q + 1.0;
    let head = spatial_norm(&base, probe.p)?.powf(q);
    let omitted_mass_bound = head * probe.t_min.powf(expo) / expo;
    Ok(MixedNormValue { value: integral.powf(1.0 / q), omitted_mass_bound })
}

/// `‖t^γ (−Δ)^{σ/2} e^{tΔ} f‖_{L^q([0,T]; L^p_x)}` by log-time trapezoid.
pub fn mixed_norm(source: &SpectralField, probe: &NormProbeSpec) -> Result<f64> {
    Ok(mixed_norm_detailed(source, probe)?.value)
}

/// The forcing-size functional used to classify samples: in 2D
/// `‖t^γ g‖_{L⁴L⁴}`; in 3D the sum of `‖t^γ(−Δ)^{1/4} g‖_{L²L⁶}`,
/// `‖t^γ(−Δ)^{1/4} g‖_{L^{8/3}L^{8/3}}` and `‖t^γ g‖_{L⁸L⁸}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingProbe {
    pub dim: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub horizon: f64,
    pub t_min: f64,
    pub points: usize,
}

impl ForcingProbe {
    pub fn new(dim: usize, alpha: f64, gamma: f64, horizon: f64) -> Self {
        ForcingProbe { dim, alpha, gamma, horizon, t_min: DEFAULT_T_MIN, points: DEFAULT_TIME_POINTS }
    }

    /// Component probes whose norms add up to the functional.
    pub fn terms(&self) -> Vec<NormProbeSpec> {
        let mk = |sigma, p, q| NormProbeSpec {
            sigma,
            gamma: self.gamma,
            p,
            q,
            horizon: self.horizon,
            alpha: self.alpha,
            t_min: self.t_min,
            points: self.points,
        };
        if self.dim == 2 {
            vec![mk(0.0, 4.0, 4.0)]
        } else {
            vec![mk(0.5, 6.0, 2.0), mk(0.5, 8.0 / 3.0, 8.0 / 3.0), mk(0.0, 8.0, 8.0)]
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidArgument("forcing probe needs d in {2, 3}".into()));
        }
        self.terms().iter().try_for_each(|t| t.validate())
    }

    pub fn evaluate(&self, source: &SpectralField) -> Result<f64> {
        self.terms().iter().map(|t| mixed_norm(source, t)).sum()
    }
}

/// Monte Carlo estimate of `P(‖…‖ >= λ)` with its tail shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExceedanceReport {
    pub lambda: Vec<f64>,
    pub exceedances: Vec<usize>,
    pub p_hat: Vec<f64>,
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    /// Slope of `log P̂` against `λ²` over bins with enough exceedances.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub fit_bins: usize,
    pub n_samples: usize,
    pub norms: Vec<f64>,
    /// Smallest `j >= 0` with `norm <= 2^j` per sample.
    pub level: Vec<u32>,
}

/// Bins with fewer exceedances are excluded from the tail fit.
pub const MIN_FIT_EXCEEDANCES: usize = 10;
/// Normal quantile of the reported Wilson intervals (95%).
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Smallest `j >= 0` with `value <= 2^j`.
pub fn dyadic_level(value: f64) -> u32 {
    if value <= 1.0 {
        0
    } else {
        value.log2().ceil() as u32
    }
}

pub fn summarize_exceedance(norms: Vec<f64>, lambdas: &[f64]) -> ExceedanceReport {
    let n = norms.len();
    let mut exceedances = Vec::with_capacity(lambdas.len());
    let mut p_hat = Vec::new();
    let mut ci_lo = Vec::new();
    let mut ci_hi = Vec::new();
    for &lam in lambdas {
        let k = norms.iter().filter(|&&v| v >= lam).count();
        let (lo, hi) = wilson_interval(k, n, WILSON_Z);
        exceedances.push(k);
        p_hat.push(k as f64 / n as f64);
        ci_lo.push(lo);
        ci_hi.push(hi);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&exceedances)
        .filter(|(_, &k)| k >= MIN_FIT_EXCEEDANCES)
        .map(|(&lam, &k)| (lam * lam, (k as f64 / n as f64).ln()))
        .unzip();
    let fit = fit_line(&xs, &ys);
    let level = norms.iter().map(|&v| dyadic_level(v)).collect();
    ExceedanceReport {
        lambda: lambdas.to_vec(),
        exceedances,
        p_hat,
        ci_lo,
        ci_hi,
        slope: fit.map(|f| f.slope),
        intercept: fit.map(|f| f.intercept),
        r_squared: fit.map(|f| f.r_squared),
        fit_bins: xs.len(),
        n_samples: n,
        norms,
        level,
    }
}

pub fn monte_carlo_exceedance(
    f: &SpectralField,
    law: MultiplierLaw,
    master_seed: u64,
    probe: &ForcingProbe,
    lambdas: &[f64],
    samples: usize,
) -> Result<ExceedanceReport> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 samples, got {samples}")));
    }
    if lambdas.is_empty() || lambdas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument("λ list must be nonempty and strictly increasing".into()));
    }
    if f.l2_sq() == 0.0 {
        return Err(Error::InvalidArgument("degenerate datum: f = 0".into()));
    }
    if probe.dim != f.dim() {
        return Err(Error::GridMismatch("probe dimension differs from the datum".into()));
    }
    probe.validate()?;
    let norms = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let fw = randomize(f, law, SeedSpec::new(master_seed, s))?;
            probe.evaluate(&fw)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize_exceedance(norms, lambdas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::spectral::single_pair;
    use num_complex::Complex64;

    fn pair() -> SpectralField {
        single_pair(GridSpec::new(2, 3).unwrap(), 1, &[1, 0], Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn heat_flow_examples() {
        let f = pair();
        assert_eq!(heat_flow(&f, 0.0).unwrap(), f);
        let g = heat_flow(&f, 1.0).unwrap();
        assert!((g.coeff(1, &[1, 0]).re - (-1.0f64).exp()).abs() < 1e-16);
        assert!(heat_flow(&f, -1.0).is_err());
    }

    #[test]
    fn mixed_norm_single_pair_closed_form() {
        let f = pair();
        let probe = NormProbeSpec::new(0.0, 0.0, 2.0, 2.0, 1.0, 0.0);
        let expect = (1.0 - (-2.0f64).exp()).sqrt();
        let got = mixed_norm(&f, &probe).unwrap();
        assert!((got - expect).abs() < 1e-4 * expect, "{got} vs {expect}");
        let zero = SpectralField::zeros(*f.grid());
        assert_eq!(mixed_norm(&zero, &probe).unwrap(), 0.0);
    }

    #[test]
    fn inadmissible_probe_rejected() {
        let f = pair();
        let probe = NormProbeSpec::new(0.0, -0.4, 4.0, 4.0, 1.0, 0.3);
        assert!(matches!(mixed_norm(&f, &probe), Err(Error::Inadmissible(_))));
        let probe = NormProbeSpec::new(0.0, 0.0, 2.0, 4.0, 1.0, 0.0);
        assert!(mixed_norm(&f, &probe).is_err());
    }

    #[test]
    fn dyadic_levels() {
        assert_eq!(dyadic_level(0.3), 0);
        assert_eq!(dyadic_level(1.0), 0);
        assert_eq!(dyadic_level(1.01), 1);
        assert_eq!(dyadic_level(4.0), 2);
        assert_eq!(dyadic_level(4.5), 3);
    }

    #[test]
    fn exceedance_summary_is_monotone() {
        let norms: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin().abs() * 3.0).collect();
        let r = summarize_exceedance(norms, &[0.5, 1.0, 1.5, 2.0, 2.5]);
        assert!(r.p_hat.windows(2).all(|w| w[0] >= w[1]));
        assert!(r.ci_lo.iter().zip(&r.ci_hi).all(|(a, b)| a <= b));
    }

    #[test]
    fn monte_carlo_rejects_bad_inputs() {
        let f = pair();
        let probe = ForcingProbe::new(2, 0.3, -0.05, 1.0);
        let law = MultiplierLaw::Gaussian;
        assert!(monte_carlo_exceedance(&f, law, 0, &probe, &[1.0], 10).is_err());
        assert!(monte_carlo_exceedance(&f, law, 0, &probe, &[2.0, 1.0], 100).is_err());
        let zero = SpectralField::zeros(*f.grid());
        assert!(monte_carlo_exceedance(&zero, law, 0, &probe, &[1.0], 100).is_err());
    }
}
