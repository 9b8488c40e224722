//! Truncated Fourier lattice `[-M, M]^d` on the 2π-periodic torus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice description shared by every field.
///
/// Modes are integer wavevectors `n` with `max_i |n_i| <= m`; the zero mode is
/// stored but always kept at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub m: usize,
    /// Oversampling used for sup-norm and non-even `L^p` evaluation.
    pub pad_factor: f64,
}

pub const DEFAULT_PAD_FACTOR: f64 = 4.0;

impl GridSpec {
    pub fn new(dim: usize, m: usize) -> Result<Self> {
        Self::with_padding(dim, m, DEFAULT_PAD_FACTOR)
    }

    pub fn with_padding(dim: usize, m: usize, pad_factor: f64) -> Result<Self> {
        let g = GridSpec { dim, m, pad_factor };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {}", self.dim)));
        }
        if self.m == 0 {
            return Err(Error::InvalidGrid("truncation radius M must be >= 1".into()));
        }
        if self.m >= (1 << 19) {
            return Err(Error::InvalidGrid(format!("truncation radius {} too large", self.m)));
        }
        if !(self.pad_factor >= 1.0) || !self.pad_factor.is_finite() {
            return Err(Error::InvalidGrid(format!("pad_factor must be >= 1, got {}", self.pad_factor)));
        }
        Ok(())
    }

    /// Points per axis of the lattice, `2M + 1`.
    #[inline]
    pub fn side(&self) -> usize {
        2 * self.m + 1
    }

    /// Number of lattice sites per component.
    #[inline]
    pub fn modes(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    /// Index of the zero mode within one component block.
    #[inline]
    pub fn zero_index(&self) -> usize {
        (self.modes() - 1) / 2
    }

    /// Flat index (within a component) of wavevector `n`; lexicographic with
    /// `n_1` slowest.
    #[inline]
    pub fn index_of(&self, n: &[i64]) -> usize {
        debug_assert_eq!(n.len(), self.dim);
        let side = self.side() as i64;
        let m = self.m as i64;
        n.iter().fold(0i64, |acc, &c| acc * side + (c + m)) as usize
    }

    #[inline]
    pub fn contains(&self, n: &[i64]) -> bool {
        let m = self.m as i64;
        n.iter().all(|&c| -m <= c && c <= m)
    }

    /// Wavevector at flat index `idx`. Unused trailing entries are zero in 2D.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let side = self.side();
        let m = self.m as i64;
        let mut out = [0i64; 3];
        let mut rem = idx;
        for axis in (0..self.dim).rev() {
            out[axis] = (rem % side) as i64 - m;
            rem /= side;
        }
        out
    }

    /// Flat index of `-n` given the index of `n`.
    #[inline]
    pub fn mirror_index(&self, idx: usize) -> usize {
        self.modes() - 1 - idx
    }

    /// `|n|^2` for every lattice site, in storage order.
    pub fn squared_wavenumbers(&self) -> Vec<f64> {
        (0..self.modes())
            .map(|i| {
                let n = self.wavevector(i);
                (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]) as f64
            })
            .collect()
    }

    /// Largest `|n|^2` on the lattice.
    pub fn max_squared_wavenumber(&self) -> f64 {
        (self.dim * self.m * self.m) as f64
    }

    /// Points per axis for exact quadratic products (truncated convolution).
    pub fn product_grid(&self) -> usize {
        fft_friendly(3 * self.m + 2)
    }

    /// Points per axis for exact `L^p` quadrature with even `p`.
    pub fn lp_grid(&self, p: u32) -> usize {
        fft_friendly(p as usize * self.m + 2)
    }

    /// Points per axis of the oversampled grid used for sup norms.
    pub fn oversampled_grid(&self) -> usize {
        fft_friendly((self.pad_factor * self.side() as f64).ceil() as usize)
    }

    pub fn same_lattice(&self, other: &GridSpec) -> bool {
        self.dim == other.dim && self.m == other.m
    }
}

/// Smallest integer `>= n` of the form `2^a 3^b 5^c`.
pub fn fft_friendly(n: usize) -> usize {
    let mut k = n.max(1);
    loop {
        let mut r = k;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return k;
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip_and_mirror() {
        for dim in [2, 3] {
            let g = GridSpec::new(dim, 3).unwrap();
            for i in 0..g.modes() {
                let n = g.wavevector(i);
                assert_eq!(g.index_of(&n[..dim]), i);
                let neg: Vec<i64> = n[..dim].iter().map(|c| -c).collect();
                assert_eq!(g.index_of(&neg), g.mirror_index(i));
            }
            assert_eq!(g.wavevector(g.zero_index()), [0, 0, 0]);
        }
    }

    #[test]
    fn storage_is_lexicographic() {
        let g = GridSpec::new(2, 1).unwrap();
        assert_eq!(g.wavevector(0), [-1, -1, 0]);
        assert_eq!(g.wavevector(1), [-1, 0, 0]);
        assert_eq!(g.wavevector(3), [0, -1, 0]);
    }

    #[test]
    fn grid_sizes_meet_quadrature_bounds() {
        for m in 1..40 {
            let g = GridSpec::new(2, m).unwrap();
            assert!(g.product_grid() >= 3 * m + 2);
            for p in [2, 4, 6, 8] {
                assert!(g.lp_grid(p) >= p as usize * m + 2);
            }
        }
        assert_eq!(fft_friendly(50), 50);
        assert_eq!(fft_friendly(98), 100);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(4, 3).is_err());
        assert!(GridSpec::new(2, 0).is_err());
        assert!(GridSpec::with_padding(2, 3, 0.5).is_err());
    }
}
