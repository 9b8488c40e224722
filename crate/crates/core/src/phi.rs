//! Exponential integrator weights `φ_k(z) = Σ_{j≥0} z^j / (j + k)!`.
//!
//! `φ_0 = e^z` and `φ_{k+1}(z) = (φ_k(z) − 1/k!) / z`. Small `|z|` uses the
//! series, larger `|z|` the recurrence, which is stable for `z <= -1`.

/// `[φ_0(z), …, φ_K(z)]`.
pub fn phi_all<const K: usize>(z: f64) -> [f64; K] {
    let mut out = [0.0; K];
    if K == 0 {
        return out;
    }
    if z.abs() < 1.0 {
        for (k, o) in out.iter_mut().enumerate() {
            // Σ z^j / (j+k)!
            let mut term = 1.0 / factorial(k);
            let mut sum = term;
            for j in 1..40 {
                term *= z / (j + k) as f64;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *o = sum;
        }
    } else {
        out[0] = z.exp();
        for k in 1..K {
            out[k] = (out[k - 1] - 1.0 / factorial(k - 1)) / z;
        }
    }
    out
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// `∫_0^1 e^{z(1−θ)} θ^m dθ = m! φ_{m+1}(z)` for `m = 0..K-1`.
pub fn exp_moments<const K: usize>(z: f64) -> [f64; K] {
    let phis = phi_all::<8>(z);
    let mut out = [0.0; K];
    for (m, o) in out.iter_mut().enumerate() {
        *o = factorial(m) * phis[m + 1];
    }
    out
}
