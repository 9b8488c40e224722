//! Band-limited real vector fields stored by their Fourier coefficients.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Relative divergence tolerance for fields flagged solenoidal.
pub const DIVERGENCE_TOL: f64 = 1e-12;

/// `d`-component complex coefficient tensor on `[-M, M]^d`.
///
/// Coefficients are stored component-major, each component in the lexicographic
/// lattice order of [`GridSpec::index_of`]. The field is real, so
/// `coeff(-n) == conj(coeff(n))`, and has zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
    solenoidal: bool,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.dim * grid.modes()],
            solenoidal: true,
        }
    }

    /// Wraps raw coefficients; rejects a wrong length, non-Hermitian data or a
    /// nonzero mean.
    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if coeffs.len() != grid.dim * grid.modes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.dim * grid.modes(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        let mut f = SpectralField { grid, coeffs, solenoidal: false };
        if !f.is_hermitian(0.0) {
            return Err(Error::InvalidArgument("coefficients are not Hermitian (field not real)".into()));
        }
        if !f.has_zero_mean() {
            return Err(Error::InvalidArgument("field must have zero mean".into()));
        }
        f.solenoidal = f.divergence_ratio() <= DIVERGENCE_TOL;
        Ok(f)
    }

    /// Builds a field without any invariant checks; callers restore symmetry.
    pub(crate) fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>, solenoidal: bool) -> Self {
        debug_assert_eq!(coeffs.len(), grid.dim * grid.modes());
        SpectralField { grid, coeffs, solenoidal }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    #[inline]
    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.modes();
        &self.coeffs[c * len..(c + 1) * len]
    }

    /// True when the field carries the divergence-free flag.
    #[inline]
    pub fn is_solenoidal(&self) -> bool {
        self.solenoidal
    }

    pub(crate) fn set_solenoidal(&mut self, flag: bool) {
        self.solenoidal = flag;
    }

    pub fn coeff(&self, component: usize, n: &[i64]) -> Complex64 {
        self.coeffs[component * self.grid.modes() + self.grid.index_of(n)]
    }

    /// Sets the coefficient at `n` and its conjugate at `-n`.
    ///
    /// Setting the zero mode is rejected. The divergence-free flag is
    /// recomputed lazily by [`SpectralField::refresh_solenoidal`].
    pub fn set_pair(&mut self, component: usize, n: &[i64], value: Complex64) -> Result<()> {
        if component >= self.grid.dim || n.len() != self.grid.dim || !self.grid.contains(n) {
            return Err(Error::InvalidArgument(format!("mode {n:?} / component {component} out of range")));
        }
        let idx = self.grid.index_of(n);
        if idx == self.grid.zero_index() {
            return Err(Error::InvalidArgument("the zero mode must stay zero".into()));
        }
        let len = self.grid.modes();
        self.coeffs[component * len + idx] = value;
        self.coeffs[component * len + self.grid.mirror_index(idx)] = value.conj();
        self.solenoidal = false;
        Ok(())
    }

    /// Recomputes the divergence-free flag from the coefficients.
    pub fn refresh_solenoidal(&mut self) -> bool {
        self.solenoidal = self.divergence_ratio() <= DIVERGENCE_TOL;
        self.solenoidal
    }

    /// `‖n·f̂(n)/|n|‖_{ℓ²} / ‖f̂‖_{ℓ²}`, the relative size of the gradient part.
    pub fn divergence_ratio(&self) -> f64 {
        let g = &self.grid;
        let len = g.modes();
        let mut div2 = 0.0;
        let mut norm2 = 0.0;
        for i in 0..len {
            if i == g.zero_index() {
                continue;
            }
            let n = g.wavevector(i);
            let mut dot = Complex64::new(0.0, 0.0);
            let mut n2 = 0.0;
            for c in 0..g.dim {
                let v = self.coeffs[c * len + i];
                dot += v * n[c] as f64;
                norm2 += v.norm_sqr();
                n2 += (n[c] * n[c]) as f64;
            }
            div2 += dot.norm_sqr() / n2;
        }
        if norm2 == 0.0 {
            0.0
        } else {
            (div2 / norm2).sqrt()
        }
    }

    /// Checks `coeff(-n) == conj(coeff(n))` to absolute tolerance `tol`
    /// (relative to the largest coefficient).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let g = &self.grid;
        let len = g.modes();
        let scale = self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        (0..g.dim).all(|c| {
            let block = &self.coeffs[c * len..(c + 1) * len];
            (0..len).all(|i| (block[i] - block[g.mirror_index(i)].conj()).norm() <= tol * scale)
        })
    }

    pub fn has_zero_mean(&self) -> bool {
        let len = self.grid.modes();
        let z = self.grid.zero_index();
        (0..self.grid.dim).all(|c| self.coeffs[c * len + z] == Complex64::new(0.0, 0.0))
    }

    /// Exact Hermitian symmetrization and zero-mean reset.
    pub(crate) fn symmetrize(&mut self) {
        let g = self.grid;
        let len = g.modes();
        let z = g.zero_index();
        for c in 0..g.dim {
            let block = &mut self.coeffs[c * len..(c + 1) * len];
            for i in 0..z {
                let j = g.mirror_index(i);
                let a = block[i];
                let b = block[j];
                let s = (a + b.conj()) * 0.5;
                block[i] = s;
                block[j] = s.conj();
            }
            block[z] = Complex64::new(0.0, 0.0);
        }
    }

    /// `Σ_n Σ_c |ĉ(n)|²`, the squared `L²` norm under the probability measure.
    pub fn l2_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ_n |n|^{2s} Σ_c |ĉ(n)|²` with `|0|^{2s}` taken as 0.
    pub fn weighted_sq(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let g = &self.grid;
        let len = g.modes();
        let k2 = g.squared_wavenumbers();
        let mut acc = 0.0;
        for c in 0..g.dim {
            let block = &self.coeffs[c * len..(c + 1) * len];
            for (v, &kk) in block.iter().zip(&k2) {
                if kk > 0.0 {
                    acc += weight(kk) * v.norm_sqr();
                }
            }
        }
        acc
    }

    /// `Re Σ conj(self)·other`, the real `L²` pairing.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum())
    }

    pub fn check_same(&self, other: &SpectralField) -> Result<()> {
        if !self.grid.same_lattice(&other.grid) {
            return Err(Error::GridMismatch(format!(
                "(d={}, M={}) vs (d={}, M={})",
                self.grid.dim, self.grid.m, other.grid.dim, other.grid.m
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b * s).collect();
        Ok(SpectralField::from_raw(self.grid, coeffs, self.solenoidal && other.solenoidal))
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.axpy(-1.0, other)
    }

    /// Applies a real radial multiplier `m(|n|²)` to every coefficient.
    pub fn apply_radial(&self, multiplier: impl Fn(f64) -> f64) -> SpectralField {
        let g = &self.grid;
        let len = g.modes();
        let factors: Vec<f64> = g
            .squared_wavenumbers()
            .into_iter()
            .map(|kk| if kk > 0.0 { multiplier(kk) } else { 0.0 })
            .collect();
        let mut out = self.clone();
        for c in 0..g.dim {
            for (v, f) in out.coeffs[c * len..(c + 1) * len].iter_mut().zip(&factors) {
                *v *= *f;
            }
        }
        out
    }

    /// Copies coefficients onto another truncation radius (dropping or
    /// zero-filling modes).
    pub fn resample(&self, grid: GridSpec) -> Result<SpectralField> {
        if grid.dim != self.grid.dim {
            return Err(Error::GridMismatch("cannot resample across dimensions".into()));
        }
        let mut out = SpectralField::zeros(grid);
        let (src_len, dst_len) = (self.grid.modes(), grid.modes());
        for i in 0..src_len {
            let n = self.grid.wavevector(i);
            if grid.contains(&n[..grid.dim]) {
                let j = grid.index_of(&n[..grid.dim]);
                for c in 0..grid.dim {
                    out.coeffs[c * dst_len + j] = self.coeffs[c * src_len + i];
                }
            }
        }
        out.solenoidal = self.solenoidal;
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_pair_keeps_reality() {
        let g = GridSpec::new(2, 3).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_pair(0, &[1, -2], Complex64::new(0.5, 0.25)).unwrap();
        assert!(f.is_hermitian(0.0));
        assert_eq!(f.coeff(0, &[-1, 2]), Complex64::new(0.5, -0.25));
        assert!(f.set_pair(0, &[0, 0], Complex64::new(1.0, 0.0)).is_err());
        assert!(f.set_pair(0, &[4, 0], Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn from_coeffs_rejects_non_hermitian_and_mean() {
        let g = GridSpec::new(2, 1).unwrap();
        let mut raw = vec![Complex64::new(0.0, 0.0); 18];
        raw[0] = Complex64::new(1.0, 0.0);
        assert!(SpectralField::from_coeffs(g, raw.clone()).is_err());
        raw[0] = Complex64::new(0.0, 0.0);
        raw[g.zero_index()] = Complex64::new(1.0, 0.0);
        assert!(SpectralField::from_coeffs(g, raw).is_err());
    }

    #[test]
    fn resample_roundtrip() {
        let g = GridSpec::new(3, 2).unwrap();
        let mut f = SpectralField::zeros(g);
        f.set_pair(1, &[1, 2, -1], Complex64::new(0.3, 0.1)).unwrap();
        let big = f.resample(GridSpec::new(3, 4).unwrap()).unwrap();
        assert_eq!(big.coeff(1, &[1, 2, -1]), Complex64::new(0.3, 0.1));
        let back = big.resample(g).unwrap();
        assert_eq!(back, f);
    }
}
