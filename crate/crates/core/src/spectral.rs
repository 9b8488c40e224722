//! Fourier-side operators on the truncated lattice.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::SpectralField;
use crate::grid::GridSpec;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Applies `I - n nᵀ/|n|²` mode by mode. The zero mode is set to zero.
pub fn leray_project(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    let len = g.modes();
    let mut out = f.clone();
    let z = g.zero_index();
    let coeffs = out.coeffs_mut();
    for idx in 0..len {
        if idx == z {
            for c in 0..g.dim {
                coeffs[c * len + idx] = Complex64::new(0.0, 0.0);
            }
            continue;
        }
        let n = g.wavevector(idx);
        let n2: i64 = n[..g.dim].iter().map(|v| v * v).sum();
        let mut dot = Complex64::new(0.0, 0.0);
        for c in 0..g.dim {
            dot += coeffs[c * len + idx] * n[c] as f64;
        }
        let dot = dot / n2 as f64;
        for c in 0..g.dim {
            coeffs[c * len + idx] -= dot * n[c] as f64;
        }
    }
    out.set_solenoidal(true);
    out
}

/// `‖f‖_{H^s} = (Σ_n ⟨n⟩^{2s} Σ_c |ĉ(n)|²)^{1/2}`, `⟨n⟩² = 1 + |n|²`.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    f.weighted_sq(|kk| (1.0 + kk).powf(s)).sqrt()
}

/// Homogeneous seminorm `(Σ_n |n|^{2s} |f̂(n)|²)^{1/2}`; `s = 1` gives `‖∇f‖_{L²}`.
pub fn homogeneous_norm(f: &SpectralField, s: f64) -> f64 {
    f.weighted_sq(|kk| kk.powf(s)).sqrt()
}

/// Multiplies the coefficient at `n` by `|n|^σ`.
pub fn fractional_laplacian(f: &SpectralField, sigma: f64) -> Result<SpectralField> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!("fractional order must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(f.clone());
    }
    Ok(f.apply_radial(|kk| kk.powf(0.5 * sigma)))
}

/// Physical values of all components on the `n^d` grid.
pub fn physical_components(f: &SpectralField, n: usize) -> Vec<Vec<f64>> {
    let blocks: Vec<&[Complex64]> = (0..f.dim()).map(|c| f.component(c)).collect();
    fft::to_physical(f.grid(), &blocks, n)
}

/// Pointwise Euclidean magnitude `|f(x)|²` on the `n^d` grid.
fn magnitude_sq(f: &SpectralField, n: usize) -> Vec<f64> {
    let comps = physical_components(f, n);
    let mut out = vec![0.0; comps[0].len()];
    for comp in &comps {
        for (o, v) in out.iter_mut().zip(comp) {
            *o += v * v;
        }
    }
    out
}

/// `L^p` norm under the normalized measure `dx/(2π)^d`.
///
/// Finite `p` must be an even integer in `2..=8`; the value is exact (uniform
/// quadrature on `pM + 2` points per axis integrates `|f|^p` exactly).
/// `p = ∞` takes the maximum over the `pad_factor`-oversampled grid, which is
/// an approximation from below.
pub fn lp_norm(f: &SpectralField, p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        let n = f.grid().oversampled_grid();
        return Ok(magnitude_sq(f, n).into_iter().fold(0.0f64, f64::max).sqrt());
    }
    if !(p.fract() == 0.0 && (2.0..=8.0).contains(&p) && (p as u32) % 2 == 0) {
        return Err(Error::InvalidArgument(format!(
            "exact L^p norms need p in {{2, 4, 6, 8}} or infinity, got {p}"
        )));
    }
    let half = (p as u32) / 2;
    let n = f.grid().lp_grid(p as u32);
    let mag = magnitude_sq(f, n);
    let mean = mag.iter().map(|v| v.powi(half as i32)).sum::<f64>() / mag.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// `L^p` norm for any real `p >= 1` by uniform quadrature on a grid with at
/// least `max(pad_factor (2M+1), ceil(p) M + 2)` points per axis. Exact for even
/// integers; otherwise a quadrature approximation of a non-polynomial integrand.
pub fn lp_norm_oversampled(f: &SpectralField, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be finite and >= 1, got {p}")));
    }
    let g = f.grid();
    let need = (p.ceil() as usize * g.m + 2).max(g.oversampled_grid());
    let n = crate::grid::fft_friendly(need);
    let mag = magnitude_sq(f, n);
    let mean = mag.iter().map(|v| v.powf(0.5 * p)).sum::<f64>() / mag.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// Max over the oversampled grid of the Frobenius norm of `∇f(x)`.
pub fn gradient_sup(f: &SpectralField) -> f64 {
    let g = *f.grid();
    let n = g.oversampled_grid();
    let grads = gradient_blocks(f);
    let refs: Vec<&[Complex64]> = grads.iter().map(|b| b.as_slice()).collect();
    let phys = fft::to_physical(&g, &refs, n);
    let mut acc = vec![0.0; phys[0].len()];
    for comp in &phys {
        for (a, v) in acc.iter_mut().zip(comp) {
            *a += v * v;
        }
    }
    acc.into_iter().fold(0.0f64, f64::max).sqrt()
}

/// Coefficients of `∂_j f_i`, ordered `i * d + j`.
fn gradient_blocks(f: &SpectralField) -> Vec<Vec<Complex64>> {
    let g = f.grid();
    let len = g.modes();
    let wave: Vec<[i64; 3]> = (0..len).map(|i| g.wavevector(i)).collect();
    let mut out = Vec::with_capacity(g.dim * g.dim);
    for i in 0..g.dim {
        let block = f.component(i);
        for j in 0..g.dim {
            out.push(block.iter().zip(&wave).map(|(v, n)| v * I * n[j] as f64).collect());
        }
    }
    out
}

/// Weights of the four advection terms `(a·∇)b` combined by
/// [`nonlinear_combination`]: `(w,w)`, `(w,g)`, `(g,w)`, `(g,g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectionWeights {
    pub ww: f64,
    pub wg: f64,
    pub gw: f64,
    pub gg: f64,
}

/// Leray-projected, truncated `(u·∇)v`:
/// `P_M [ i (I − kkᵀ/k²) Σ_{k′+k″=k} (û(k′)·k″) v̂(k″) ]`.
///
/// Evaluated exactly by zero-padded transforms on `3M + 2` points per axis.
pub fn nonlinear_term(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    nonlinear_combination(u, v, AdvectionWeights { ww: 0.0, wg: 1.0, gw: 0.0, gg: 0.0 })
}

/// `Σ weight · P_M P[(a·∇)b]` over the pairs drawn from `{w, g}`, sharing the
/// physical-space evaluations.
///
/// With `C = [[ww, wg], [gw, gg]]` the sum is `Σ_ab C_ab (x_a·∇)x_b`. A rank-one
/// `C = p qᵀ` needs a single product `((p·x)·∇)(q·x)`; otherwise the sum is
/// `(w·∇)(ww w + wg g) + (g·∇)(gw w + gg g)`.
pub fn nonlinear_combination(w: &SpectralField, g: &SpectralField, weights: AdvectionWeights) -> Result<SpectralField> {
    w.check_same(g)?;
    let grid = *w.grid();
    let AdvectionWeights { ww, wg, gw, gg } = weights;
    let combine = |a: f64, b: f64| -> Option<SpectralField> {
        match (a != 0.0, b != 0.0) {
            (false, false) => None,
            (true, false) => Some(w.scaled(a)),
            (false, true) => Some(g.scaled(b)),
            (true, true) => Some(SpectralField::from_raw(
                grid,
                w.coeffs().iter().zip(g.coeffs()).map(|(x, y)| a * x + b * y).collect(),
                false,
            )),
        }
    };
    let mut products: Vec<(SpectralField, SpectralField)> = Vec::new();
    if ww * gg - wg * gw == 0.0 {
        // rank one: rows are multiples of a common row q
        let (q, p) = if ww != 0.0 || wg != 0.0 {
            let r = if ww != 0.0 { gw / ww } else { gg / wg };
            ((ww, wg), (1.0, r))
        } else {
            ((gw, gg), (0.0, 1.0))
        };
        if let (Some(vel), Some(tgt)) = (combine(p.0, p.1), combine(q.0, q.1)) {
            products.push((vel, tgt));
        }
    } else {
        if let Some(tgt) = combine(ww, wg) {
            products.push((w.clone(), tgt));
        }
        if let Some(tgt) = combine(gw, gg) {
            products.push((g.clone(), tgt));
        }
    }
    if products.is_empty() {
        return Ok(SpectralField::zeros(grid));
    }
    let d = grid.dim;
    let n = grid.product_grid();
    let total = n.pow(d as u32);
    let mut blocks: Vec<Vec<Complex64>> = Vec::new();
    for (vel, tgt) in &products {
        for c in 0..d {
            blocks.push(vel.component(c).to_vec());
        }
        blocks.extend(gradient_blocks(tgt));
    }
    let refs: Vec<&[Complex64]> = blocks.iter().map(|b| b.as_slice()).collect();
    let phys = fft::to_physical(&grid, &refs, n);

    let mut acc = vec![vec![0.0f64; total]; d];
    let per = d + d * d;
    for k in 0..products.len() {
        let base = k * per;
        for (i, out) in acc.iter_mut().enumerate() {
            for j in 0..d {
                let a = &phys[base + j];
                let b = &phys[base + d + i * d + j];
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o += x * y;
                }
            }
        }
    }

    let refs: Vec<&[f64]> = acc.iter().map(|v| v.as_slice()).collect();
    let spectra = fft::from_physical(&grid, &refs, n);
    let coeffs: Vec<Complex64> = spectra.into_iter().flatten().collect();
    let mut out = SpectralField::from_raw(grid, coeffs, false);
    out.symmetrize();
    Ok(leray_project(&out))
}

/// Direct `O(M^{2d})` evaluation of [`nonlinear_term`] by explicit convolution.
pub fn nonlinear_term_direct(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_same(v)?;
    let grid = *u.grid();
    let d = grid.dim;
    let len = grid.modes();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); d * len];
    for k_idx in 0..len {
        let k = grid.wavevector(k_idx);
        let mut sum = [Complex64::new(0.0, 0.0); 3];
        for kp_idx in 0..len {
            let kp = grid.wavevector(kp_idx);
            let kpp = [k[0] - kp[0], k[1] - kp[1], k[2] - kp[2]];
            if !grid.contains(&kpp[..d]) {
                continue;
            }
            let kpp_idx = grid.index_of(&kpp[..d]);
            let mut dot = Complex64::new(0.0, 0.0);
            for j in 0..d {
                dot += u.component(j)[kp_idx] * kpp[j] as f64;
            }
            for i in 0..d {
                sum[i] += dot * v.component(i)[kpp_idx];
            }
        }
        for i in 0..d {
            coeffs[i * len + k_idx] = I * sum[i];
        }
    }
    let mut out = SpectralField::from_raw(grid, coeffs, false);
    out.symmetrize();
    Ok(leray_project(&out))
}

/// Discrete trilinear form `b(u, v, w) = ∫ (u·∇v)·w` for solenoidal `w`.
pub fn trilinear(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<f64> {
    w.inner(&nonlinear_term(u, v)?)
}

/// Single real Fourier pair `a e_n + conj(a) e_{-n}` on one component.
pub fn single_pair(grid: GridSpec, component: usize, n: &[i64], amplitude: Complex64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(grid);
    f.set_pair(component, n, amplitude)?;
    f.refresh_solenoidal();
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid2(m: usize) -> GridSpec {
        GridSpec::new(2, m).unwrap()
    }

    #[test]
    fn leray_examples() {
        let g = grid2(2);
        let c = |re| Complex64::new(re, 0.0);
        let f = single_pair(g, 0, &[1, 0], c(1.0)).unwrap();
        let p = leray_project(&f);
        assert_eq!(p.coeff(0, &[1, 0]), c(0.0));

        let f = single_pair(g, 1, &[1, 0], c(1.0)).unwrap();
        assert_eq!(leray_project(&f), {
            let mut e = f.clone();
            e.set_solenoidal(true);
            e
        });

        let f = single_pair(g, 0, &[1, 1], c(1.0)).unwrap();
        let p = leray_project(&f);
        assert_relative_eq!(p.coeff(0, &[1, 1]).re, 0.5);
        assert_relative_eq!(p.coeff(1, &[1, 1]).re, -0.5);
        assert!(p.is_hermitian(0.0));
    }

    #[test]
    fn sobolev_examples() {
        let g = grid2(2);
        let f = single_pair(g, 0, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(sobolev_norm(&f, 0.0), 2f64.sqrt(), epsilon = 1e-15);
        let alpha = 0.3;
        assert_relative_eq!(sobolev_norm(&f, -alpha), 2f64.sqrt() * 2f64.powf(-alpha / 2.0), epsilon = 1e-15);
    }

    #[test]
    fn lp_examples() {
        let g = grid2(3);
        let a = 0.7;
        let f = single_pair(g, 0, &[2, -1], Complex64::new(a, 0.0)).unwrap();
        assert_relative_eq!(lp_norm(&f, 2.0).unwrap(), a * 2f64.sqrt(), max_relative = 1e-14);
        // 2cos(x1): ∫cos⁴ = 3/8, so ‖f‖⁴ = 16·3/8 = 6
        let f = single_pair(g, 0, &[1, 0], Complex64::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(lp_norm(&f, 4.0).unwrap().powi(4), 6.0, max_relative = 1e-13);
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - 2.0).abs() < 1e-6);
        assert!(lp_norm(&f, 3.0).is_err());
        assert!(lp_norm(&f, 5.0).is_err());
        assert_relative_eq!(lp_norm_oversampled(&f, 4.0).unwrap().powi(4), 6.0, max_relative = 1e-13);
    }

    #[test]
    fn fractional_laplacian_examples() {
        let g = grid2(3);
        let f = single_pair(g, 1, &[1, 2], Complex64::new(0.3, -0.2)).unwrap();
        assert_eq!(fractional_laplacian(&f, 0.0).unwrap(), f);
        let two = fractional_laplacian(&f, 2.0).unwrap();
        assert_relative_eq!(two.coeff(1, &[1, 2]).re, 1.5, max_relative = 1e-15);
        let half_twice = fractional_laplacian(&fractional_laplacian(&f, 0.5).unwrap(), 0.5).unwrap();
        let once = fractional_laplacian(&f, 1.0).unwrap();
        for (a, b) in half_twice.coeffs().iter().zip(once.coeffs()) {
            assert!((a - b).norm() <= 1e-15 * b.norm().max(1.0));
        }
        assert!(fractional_laplacian(&f, -1.0).is_err());
    }

    #[test]
    fn nonlinear_zero_and_mismatch() {
        let g = grid2(3);
        let u = leray_project(&single_pair(g, 0, &[1, 2], Complex64::new(1.0, 0.0)).unwrap());
        let zero = SpectralField::zeros(g);
        assert_eq!(nonlinear_term(&u, &zero).unwrap().l2_sq(), 0.0);
        let other = SpectralField::zeros(grid2(4));
        assert!(nonlinear_term(&u, &other).is_err());
    }

    #[test]
    fn single_pair_self_interaction() {
        let g = grid2(4);
        let check = |u: &SpectralField| {
            let fast = nonlinear_term(u, u).unwrap();
            let slow = nonlinear_term_direct(u, u).unwrap();
            for (a, b) in fast.coeffs().iter().zip(slow.coeffs()) {
                assert!((a - b).norm() < 1e-13);
            }
            fast
        };
        // solenoidal pair: û(n)·n = 0 kills the whole product
        let u = leray_project(&single_pair(g, 0, &[1, 2], Complex64::new(0.4, 0.3)).unwrap());
        assert!(check(&u).l2_sq().sqrt() < 1e-14);

        // coefficient parallel to n: the 2n part is parallel to 2n and is projected out
        let mut par = single_pair(g, 0, &[1, 1], Complex64::new(1.0, 0.0)).unwrap();
        par.set_pair(1, &[1, 1], Complex64::new(1.0, 0.0)).unwrap();
        assert!(check(&par).l2_sq().sqrt() < 1e-14);

        // coefficient not parallel to n: survives, supported only on ±2n
        let raw = single_pair(g, 0, &[1, 1], Complex64::new(1.0, 0.0)).unwrap();
        let out = check(&raw);
        assert!(out.l2_sq() > 0.1);
        for idx in 0..g.modes() {
            let n = g.wavevector(idx);
            let on_2n = (n[0] == 2 && n[1] == 2) || (n[0] == -2 && n[1] == -2);
            if !on_2n {
                assert!(out.component(0)[idx].norm() < 1e-15 && out.component(1)[idx].norm() < 1e-15);
            }
        }
    }
}
