#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randns::spectral::leray_project;
use randns::{GridSpec, SpectralField};

/// Solenoidal field with i.i.d. uniform coefficients on `[-1, 1]²`,
/// optionally damped by `⟨n⟩^{-decay}`.
pub fn random_solenoidal(dim: usize, m: usize, decay: f64, seed: u64) -> SpectralField {
    let grid = GridSpec::new(dim, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    for idx in 0..grid.zero_index() {
        let n = grid.wavevector(idx);
        let k2 = n.iter().map(|v| (v * v) as f64).sum::<f64>();
        let damp = (1.0 + k2).powf(-decay / 2.0);
        for c in 0..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * damp;
            f.set_pair(c, &n[..dim], z).unwrap();
        }
    }
    leray_project(&f)
}

pub fn rel_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    let d = a.sub(b).unwrap().l2_sq().sqrt();
    let s = a.l2_sq().sqrt().max(b.l2_sq().sqrt());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}
