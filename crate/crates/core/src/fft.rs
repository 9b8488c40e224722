//! Pruned multi-dimensional FFTs between the truncated lattice and uniform
//! physical grids.
//!
//! Two real fields share one complex transform (`a + i b`), and only lines
//! that can carry lattice data are transformed. Physical values are
//! `u(x_j) = Σ_n û(n) e^{i n·x_j}` with `x_j = 2π j / N`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::GridSpec;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let key = (n, direction == FftDirection::Forward);
    let mut plans = PLANS.lock().expect("fft plan cache poisoned");
    plans
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

/// Position of lattice coordinate `c` along an axis of length `n`.
#[inline]
fn wrap(c: i64, n: usize) -> usize {
    if c >= 0 {
        c as usize
    } else {
        (n as i64 + c) as usize
    }
}

/// Mask of grid indices along one axis that hold lattice frequencies.
fn lattice_mask(m: usize, n: usize) -> Vec<bool> {
    let mut mask = vec![false; n];
    for c in -(m as i64)..=(m as i64) {
        mask[wrap(c, n)] = true;
    }
    mask
}

/// Columns gathered per batch when transforming a strided axis.
const BATCH: usize = 16;

/// Transforms every active line along `axis` of an `n^dim` row-major array.
/// A line is active when all coordinates on axes before `axis` hit the mask.
fn transform_axis(buf: &mut [Complex64], n: usize, dim: usize, axis: usize, mask: &[bool], fft: &dyn Fft<f64>) {
    let stride = n.pow((dim - 1 - axis) as u32);
    let block = n * stride;
    let outers = n.pow(axis as u32);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut tbuf = vec![Complex64::new(0.0, 0.0); if stride > 1 { BATCH.min(stride) * n } else { 0 }];
    for outer in 0..outers {
        let mut rem = outer;
        let mut active = true;
        for _ in 0..axis {
            if !mask[rem % n] {
                active = false;
                break;
            }
            rem /= n;
        }
        if !active {
            continue;
        }
        let chunk = &mut buf[outer * block..(outer + 1) * block];
        if stride == 1 {
            fft.process_with_scratch(chunk, &mut scratch);
            continue;
        }
        let mut i0 = 0;
        while i0 < stride {
            let b = BATCH.min(stride - i0);
            let t = &mut tbuf[..b * n];
            for j in 0..n {
                let row = &chunk[j * stride + i0..j * stride + i0 + b];
                for (c, v) in row.iter().enumerate() {
                    t[c * n + j] = *v;
                }
            }
            fft.process_with_scratch(t, &mut scratch);
            for j in 0..n {
                let row = &mut chunk[j * stride + i0..j * stride + i0 + b];
                for (c, v) in row.iter_mut().enumerate() {
                    *v = t[c * n + j];
                }
            }
            i0 += b;
        }
    }
}

fn scatter(grid: &GridSpec, n: usize, a: &[Complex64], b: Option<&[Complex64]>) -> Vec<Complex64> {
    let dim = grid.dim;
    let mut out = vec![Complex64::new(0.0, 0.0); n.pow(dim as u32)];
    for idx in 0..grid.modes() {
        let k = grid.wavevector(idx);
        let pos = k[..dim].iter().fold(0usize, |acc, &c| acc * n + wrap(c, n));
        let mut v = a[idx];
        if let Some(b) = b {
            let w = b[idx];
            v += Complex64::new(-w.im, w.re);
        }
        out[pos] = v;
    }
    out
}

fn inverse_in_place(buf: &mut [Complex64], grid: &GridSpec, n: usize) {
    let fft = plan(n, FftDirection::Inverse);
    let mask = lattice_mask(grid.m, n);
    for axis in (0..grid.dim).rev() {
        transform_axis(buf, n, grid.dim, axis, &mask, fft.as_ref());
    }
}

fn forward_in_place(buf: &mut [Complex64], grid: &GridSpec, n: usize) {
    let fft = plan(n, FftDirection::Forward);
    let mask = lattice_mask(grid.m, n);
    for axis in 0..grid.dim {
        transform_axis(buf, n, grid.dim, axis, &mask, fft.as_ref());
    }
}

/// Evaluates real lattice blocks on the uniform `n^d` grid.
pub fn to_physical(grid: &GridSpec, blocks: &[&[Complex64]], n: usize) -> Vec<Vec<f64>> {
    assert!(n > 2 * grid.m, "physical grid too coarse for the lattice");
    let mut out = Vec::with_capacity(blocks.len());
    for pair in blocks.chunks(2) {
        let mut buf = scatter(grid, n, pair[0], pair.get(1).copied());
        inverse_in_place(&mut buf, grid, n);
        out.push(buf.iter().map(|z| z.re).collect());
        if pair.len() == 2 {
            out.push(buf.iter().map(|z| z.im).collect());
        }
    }
    out
}

/// Projects real physical fields on the `n^d` grid back to lattice blocks.
///
/// Returned blocks are exactly Hermitian; the zero mode is left as computed.
pub fn from_physical(grid: &GridSpec, fields: &[&[f64]], n: usize) -> Vec<Vec<Complex64>> {
    let dim = grid.dim;
    let total = n.pow(dim as u32);
    let norm = 1.0 / total as f64;
    let len = grid.modes();
    let positions: Vec<usize> = (0..len)
        .map(|idx| {
            let k = grid.wavevector(idx);
            k[..dim].iter().fold(0usize, |acc, &c| acc * n + wrap(c, n))
        })
        .collect();
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let mut buf: Vec<Complex64> = match pair {
            [a, b] => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
            [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            _ => unreachable!(),
        };
        debug_assert_eq!(buf.len(), total);
        forward_in_place(&mut buf, grid, n);
        let z: Vec<Complex64> = positions.iter().map(|&p| buf[p] * norm).collect();
        let mut first = vec![Complex64::new(0.0, 0.0); len];
        let mut second = if pair.len() == 2 { vec![Complex64::new(0.0, 0.0); len] } else { Vec::new() };
        for idx in 0..len {
            let zm = z[grid.mirror_index(idx)].conj();
            first[idx] = (z[idx] + zm) * 0.5;
            if pair.len() == 2 {
                let d = (z[idx] - zm) * 0.5;
                second[idx] = Complex64::new(d.im, -d.re);
            }
        }
        out.push(first);
        if pair.len() == 2 {
            out.push(second);
        }
    }
    out
}
