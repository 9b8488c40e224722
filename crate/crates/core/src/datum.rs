//! Deterministic initial data: exact-solution fields and rough power-law data.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::GridSpec;
use crate::randomize::{canonical_site, site_rng, Domain, SeedSpec};
use crate::spectral::leray_project;

/// `u = a (sin x cos y, −cos x sin y)`; decays like `e^{−2t}` under the
/// unforced flow.
pub fn taylor_green(grid: GridSpec, amplitude: f64) -> Result<SpectralField> {
    if grid.dim != 2 {
        return Err(Error::InvalidArgument("Taylor-Green field is two-dimensional".into()));
    }
    let mut f = SpectralField::zeros(grid);
    let q = amplitude / 4.0;
    for (a, b) in [(1i64, 1i64), (1, -1)] {
        let sa = a.signum() as f64;
        let sb = b.signum() as f64;
        f.set_pair(0, &[a, b], Complex64::new(0.0, -sa * q))?;
        f.set_pair(1, &[a, b], Complex64::new(0.0, sb * q))?;
    }
    f.refresh_solenoidal();
    Ok(f)
}

/// ABC (Beltrami) flow `(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`
/// with `∇×u = u`; decays like `e^{−t}` under the unforced flow.
pub fn abc_flow(grid: GridSpec, a: f64, b: f64, c: f64) -> Result<SpectralField> {
    if grid.dim != 3 {
        return Err(Error::InvalidArgument("ABC flow is three-dimensional".into()));
    }
    let mut f = SpectralField::zeros(grid);
    let sin = |amp: f64| Complex64::new(0.0, -amp / 2.0);
    let cos = |amp: f64| Complex64::new(amp / 2.0, 0.0);
    f.set_pair(0, &[0, 0, 1], sin(a))?;
    f.set_pair(0, &[0, 1, 0], cos(c))?;
    f.set_pair(1, &[1, 0, 0], sin(b))?;
    f.set_pair(1, &[0, 0, 1], cos(a))?;
    f.set_pair(2, &[0, 1, 0], sin(c))?;
    f.set_pair(2, &[1, 0, 0], cos(b))?;
    f.refresh_solenoidal();
    Ok(f)
}

/// Seed of the fixed shape of [`power_law`] data; independent of `ω`.
pub const DATUM_SEED: u64 = 0x5eed_da7a;

/// Divergence-free datum with `|f̂(n)| = amplitude ⟨n⟩^{−decay}`,
/// deterministic phases and polarizations. Coefficients do not depend on `M`,
/// so refining the grid only adds modes.
///
/// With `decay` slightly above `d/2 − α` the datum stays bounded in `H^{−α}`
/// but not in `L²` as `M → ∞`.
pub fn power_law(grid: GridSpec, decay: f64, amplitude: f64) -> Result<SpectralField> {
    if !(amplitude >= 0.0) || !decay.is_finite() {
        return Err(Error::InvalidArgument("power-law datum needs finite decay and amplitude >= 0".into()));
    }
    let d = grid.dim;
    let mut f = SpectralField::zeros(grid);
    for idx in 0..grid.zero_index() {
        let n = grid.wavevector(idx);
        let mut rng = site_rng(SeedSpec::new(DATUM_SEED, 0), Domain::Datum, canonical_site(n));
        let mut r = [0.0f64; 3];
        for v in r.iter_mut().take(d) {
            *v = StandardNormal.sample(&mut rng);
        }
        let theta = 2.0 * PI * rng.random::<f64>();
        let k2: f64 = n[..d].iter().map(|&c| (c * c) as f64).sum();
        let dot: f64 = (0..d).map(|a| r[a] * n[a] as f64).sum::<f64>() / k2;
        let mut dir = [0.0f64; 3];
        for a in 0..d {
            dir[a] = r[a] - dot * n[a] as f64;
        }
        let len = dir[..d].iter().map(|v| v * v).sum::<f64>().sqrt();
        if len == 0.0 {
            continue;
        }
        let amp = amplitude * (1.0 + k2).powf(-0.5 * decay);
        let phase = Complex64::from_polar(amp / len, theta);
        // the stored site is -canonical when idx is the mirrored half
        let sign = if canonical_site(n) == n { 1.0 } else { -1.0 };
        for a in 0..d {
            let mut v = phase * dir[a];
            if sign < 0.0 {
                v = v.conj();
            }
            f.set_pair(a, &n[..d], v)?;
        }
    }
    Ok(leray_project(&f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{lp_norm, physical_components};

    #[test]
    fn taylor_green_matches_physical_formula() {
        let g = GridSpec::new(2, 2).unwrap();
        let f = taylor_green(g, 1.0).unwrap();
        assert!(f.is_solenoidal());
        let n = 8;
        let phys = physical_components(&f, n);
        for j0 in 0..n {
            for j1 in 0..n {
                let (x, y) = (2.0 * PI * j0 as f64 / n as f64, 2.0 * PI * j1 as f64 / n as f64);
                let pos = j0 * n + j1;
                assert!((phys[0][pos] - x.sin() * y.cos()).abs() < 1e-14);
                assert!((phys[1][pos] + x.cos() * y.sin()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn abc_is_beltrami() {
        let g = GridSpec::new(3, 2).unwrap();
        let f = abc_flow(g, 1.0, 1.0, 1.0).unwrap();
        assert!(f.is_solenoidal());
        // curl in Fourier space: i n × û
        let len = g.modes();
        for idx in 0..len {
            let n = g.wavevector(idx);
            let u: Vec<Complex64> = (0..3).map(|c| f.component(c)[idx]).collect();
            let i = Complex64::new(0.0, 1.0);
            let curl = [
                i * (n[1] as f64 * u[2] - n[2] as f64 * u[1]),
                i * (n[2] as f64 * u[0] - n[0] as f64 * u[2]),
                i * (n[0] as f64 * u[1] - n[1] as f64 * u[0]),
            ];
            for c in 0..3 {
                assert!((curl[c] - u[c]).norm() < 1e-15);
            }
        }
        assert!((lp_norm(&f, 2.0).unwrap().powi(2) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_is_nested_and_solenoidal() {
        let g = GridSpec::new(2, 6).unwrap();
        let f = power_law(g, 0.8, 2.0).unwrap();
        assert!(f.is_solenoidal());
        assert!(f.is_hermitian(0.0));
        assert_eq!(f, power_law(g, 0.8, 2.0).unwrap());
        let coarse = power_law(GridSpec::new(2, 4).unwrap(), 0.8, 2.0).unwrap();
        assert_eq!(f.resample(*coarse.grid()).unwrap(), coarse);
        let n = [3i64, -2];
        let amp: f64 = (0..2).map(|c| f.coeff(c, &n).norm_sqr()).sum::<f64>().sqrt();
        assert!((amp - 2.0 * 14f64.powf(-0.4)).abs() < 1e-14);
    }
}
