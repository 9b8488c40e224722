//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::{random_solenoidal, rel_diff};
use num_complex::Complex64;
use randns::cli::{perturbation, regression_suites, RunConfig};
use randns::galerkin::{duhamel_residual, solve, solve_from, DifferenceEqParams, TrajectoryRecord};
use randns::heatflow::{deterministic_bound_refinement, monte_carlo_exceedance, ForcingProbe};
use randns::randomize::{moment_growth_check, randomize};
use randns::spectral::{fractional_laplacian, leray_project, nonlinear_term, nonlinear_term_direct, single_pair, sobolev_norm};
use randns::stats::{observed_order, wilson_interval};
use randns::verify::{gronwall_uniqueness_check, step_refinement_order, GronwallConfig};
use randns::{GridSpec, MultiplierLaw, SeedSpec, SpectralField};
use statrs::function::erf::erfc;

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sup_energy(traj: &TrajectoryRecord) -> f64 {
    traj.trace.energy.iter().cloned().fold(0.0, f64::max)
}

fn exact_regression() -> Outcome {
    let r = regression_suites().map_err(|e| e.to_string())?;
    let suites = r["suites"].as_array().unwrap();
    let worst = suites.iter().map(|s| s["l2_error"].as_f64().unwrap()).fold(0.0, f64::max);
    verdict(worst <= 1e-8, format!("max L2 error {worst:.2e} (Taylor-Green d=2, Beltrami d=3, M=8)"))
}

fn energy_identity() -> Outcome {
    let params = DifferenceEqParams { dt: 1e-3, horizon: 1.0, ..DifferenceEqParams::default() };
    let mut worst = regression_suites().map_err(|e| e.to_string())?["suites"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["energy_identity_error"].as_f64().unwrap())
        .fold(0.0, f64::max);
    for (dim, m, seed) in [(2, 16, 1), (3, 8, 2)] {
        let w0 = random_solenoidal(dim, m, 1.5 + dim as f64 / 2.0, seed);
        let traj = solve_from(&SpectralField::zeros(*w0.grid()), &w0, &params).map_err(|e| e.to_string())?;
        let e = traj.trace.energy.last().unwrap();
        worst = worst.max((e - w0.l2_sq()).abs() / w0.l2_sq());
    }
    verdict(worst <= 1e-6, format!("max relative error {worst:.2e} over exact and random unforced runs"))
}

fn trilinear_neutrality() -> Outcome {
    let cfg = RunConfig { m: 16, horizon: 0.5, ..RunConfig::default() };
    let fw = cfg.f_omega().map_err(|e| e.to_string())?;
    let params = DifferenceEqParams { dt: 1e-3, check_trilinear: true, ..cfg.params() };
    let traj = solve(&fw, &params).map_err(|e| e.to_string())?;
    let d = traj.trilinear.ok_or("no trilinear diagnostics")?;
    let worst = d.max_www.max(d.max_gww);
    verdict(
        worst <= 1e-12 && d.steps_checked == traj.steps,
        format!("{} steps, max |b(w,w,w)| {:.1e}, max |b(g,w,w)| {:.1e} (relative)", d.steps_checked, d.max_www, d.max_gww),
    )
}

fn convolution_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for seed in 0..120u64 {
        let (dim, m) = if seed % 3 == 0 { (3, 1 + (seed as usize / 3) % 4) } else { (2, 1 + seed as usize % 6) };
        let u = random_solenoidal(dim, m, 0.5, seed);
        let v = random_solenoidal(dim, m, 0.5, seed + 1000);
        let fast = nonlinear_term(&u, &v).map_err(|e| e.to_string())?;
        let slow = nonlinear_term_direct(&u, &v).map_err(|e| e.to_string())?;
        worst = worst.max(rel_diff(&fast, &slow));
        cases += 1;
    }
    verdict(worst <= 1e-12, format!("{cases} random solenoidal pairs at M <= 6, max relative gap {worst:.1e}"))
}

fn randomization_invariants() -> Outcome {
    let grid = GridSpec::new(2, 8).unwrap();
    let f = randns::datum::power_law(grid, 0.85, 1.0).map_err(|e| e.to_string())?;
    let rough = random_solenoidal(2, 8, 0.0, 77);
    let rough = rough.axpy(1.0, &f).unwrap();

    let mut bit_exact = true;
    let mut gauss_gap = 0.0f64;
    for s in 0..20 {
        let seed = SeedSpec::new(11, s);
        for law in [MultiplierLaw::Rademacher, MultiplierLaw::Gaussian] {
            let a = randomize(&leray_project(&rough), law, seed).unwrap();
            let b = leray_project(&randomize(&rough, law, seed).unwrap());
            let c = randomize(&fractional_laplacian(&rough, 0.7).unwrap(), law, seed).unwrap();
            let d = fractional_laplacian(&randomize(&rough, law, seed).unwrap(), 0.7).unwrap();
            if law == MultiplierLaw::Rademacher {
                bit_exact &= a.coeffs() == b.coeffs() && c.coeffs() == d.coeffs();
            } else {
                gauss_gap = gauss_gap.max(rel_diff(&a, &b)).max(rel_diff(&c, &d));
            }
        }
    }

    let alpha = 0.3;
    let target = sobolev_norm(&f, -alpha).powi(2);
    let n = 10_000u64;
    let vals: Vec<f64> = (0..n)
        .map(|s| sobolev_norm(&randomize(&f, MultiplierLaw::Gaussian, SeedSpec::new(5, s)).unwrap(), -alpha).powi(2))
        .collect();
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let z = (mean - target).abs() / (var / n as f64).sqrt();

    let c: Vec<f64> = (1..=64).map(|r| (r as f64).powf(-0.7)).collect();
    let q = [2.0, 4.0, 6.0, 8.0];
    let mut fitted = Vec::new();
    let mut moments_ok = true;
    for law in [MultiplierLaw::Gaussian, MultiplierLaw::Rademacher] {
        let rep = moment_growth_check(&c, law, &q, 10_000, 3).map_err(|e| e.to_string())?;
        moments_ok &= !rep.violation;
        fitted.push(rep.fitted_c);
    }
    verdict(
        bit_exact && gauss_gap <= 4.0 * f64::EPSILON && z <= 3.0 && moments_ok,
        format!(
            "sign commutation bit-exact {bit_exact}, gaussian gap {gauss_gap:.1e}; \
             mean H^-a energy {z:.2} SE off; moment constants {:.3}/{:.3} <= sqrt 2",
            fitted[0], fitted[1]
        ),
    )
}

fn tail_shape() -> Outcome {
    let cfg = RunConfig { m: 16, alpha: 0.3, gamma: -0.05, ..RunConfig::default() };
    let f = cfg.datum().map_err(|e| e.to_string())?;
    let rep = monte_carlo_exceedance(&f, cfg.law, cfg.seed, &cfg.forcing_probe(), &cfg.lambdas, 1000)
        .map_err(|e| e.to_string())?;
    let (slope, r2) = (rep.slope.unwrap_or(f64::NAN), rep.r_squared.unwrap_or(f64::NAN));
    let fit_ok = slope < 0.0 && r2 >= 0.8;

    // one gaussian multiplier: P(|l| A > λ) = erfc(λ / (A √2))
    let grid = GridSpec::new(2, 4).unwrap();
    let g = single_pair(grid, 0, &[0, 1], Complex64::new(1.0, 0.0)).unwrap();
    let probe = ForcingProbe::new(2, 0.3, -0.05, 1.0);
    let a = probe.evaluate(&g).map_err(|e| e.to_string())?;
    let lambdas: Vec<f64> = [0.25, 0.5, 1.0, 1.5, 2.0, 2.5].iter().map(|x| x * a).collect();
    let single = monte_carlo_exceedance(&g, MultiplierLaw::Gaussian, 21, &probe, &lambdas, 4000).map_err(|e| e.to_string())?;
    let mut oracle_ok = true;
    for (i, lam) in lambdas.iter().enumerate() {
        let (lo, hi) = wilson_interval(single.exceedances[i], single.n_samples, 3.0);
        let p = erfc(lam / (a * std::f64::consts::SQRT_2));
        oracle_ok &= lo <= p && p <= hi;
    }
    verdict(
        fit_ok && oracle_ok,
        format!("slope {slope:.3}, R^2 {r2:.3} over {} bins; erfc oracle inside z=3 Wilson intervals {oracle_ok}", rep.fit_bins),
    )
}

fn heat_bounds() -> Outcome {
    let mut unstable = 0;
    let mut worst: f64 = 1.0;
    let mut runs = 0;
    for alpha in [0.1, 0.3] {
        for seed in 0..20u64 {
            let f = random_solenoidal(2, 16, 1.0 - alpha / 2.0, 1000 * seed + (alpha * 10.0) as u64);
            for k in [0, 1] {
                let r = deterministic_bound_refinement(&f, alpha, k, 1e-6, 1.0, 101, 2).map_err(|e| e.to_string())?;
                runs += 1;
                if !r.stable {
                    unstable += 1;
                }
                for v in [&r.c_l2, &r.c_sup] {
                    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = v.iter().cloned().fold(0.0, f64::max);
                    worst = worst.max(hi / lo);
                }
            }
        }
    }
    verdict(unstable == 0, format!("{runs} calibrations, {unstable} unstable, max spread x{worst:.3}"))
}

struct SupE {
    coarse: f64,
    fine: f64,
}

fn sup_e_pair(cfg: &RunConfig, m_coarse: usize, m_fine: usize) -> Result<(SupE, TrajectoryRecord), String> {
    let run = |m| {
        let c = RunConfig { m, ..cfg.clone() };
        let fw = c.f_omega().map_err(|e| e.to_string())?;
        solve(&fw, &c.params()).map_err(|e| e.to_string())
    };
    let a = run(m_coarse)?;
    let b = run(m_fine)?;
    Ok((SupE { coarse: sup_energy(&a), fine: sup_energy(&b) }, a))
}

fn energy_refinement(default_run: &mut Option<TrajectoryRecord>) -> Outcome {
    let d2 = RunConfig::default();
    let t0 = Instant::now();
    let (s2, traj) = sup_e_pair(&d2, 32, 48)?;
    *default_run = Some(traj);
    let t2 = t0.elapsed().as_secs_f64();
    let d3 = RunConfig { dim: 3, alpha: 0.1, dt: 2e-3, ..RunConfig::default() };
    let t0 = Instant::now();
    let (s3, _) = sup_e_pair(&d3, 12, 16)?;
    let t3 = t0.elapsed().as_secs_f64();
    let delta = |s: &SupE| (s.coarse - s.fine).abs() / s.fine;
    let ok = [&s2, &s3].iter().all(|s| s.coarse.is_finite() && s.fine.is_finite() && delta(s) <= 0.10);
    verdict(
        ok,
        format!(
            "d=2 sup E {:.4} -> {:.4} ({:.1}%, {t2:.0}s); d=3 sup E {:.4} -> {:.4} ({:.1}%, {t3:.0}s)",
            s2.coarse,
            s2.fine,
            100.0 * delta(&s2),
            s3.coarse,
            s3.fine,
            100.0 * delta(&s3)
        ),
    )
}

fn duhamel_equivalence(default_run: Option<&TrajectoryRecord>) -> Outcome {
    let cfg = RunConfig { m: 16, ..RunConfig::default() };
    let fw = cfg.f_omega().map_err(|e| e.to_string())?;
    let mut residuals = Vec::new();
    for dt in [2e-3, 1e-3, 5e-4, 2.5e-4] {
        let params = DifferenceEqParams { dt, graded_start: Some(cfg.alpha), ..cfg.params() };
        let traj = solve(&fw, &params).map_err(|e| e.to_string())?;
        residuals.push(duhamel_residual(&traj, &fw).map_err(|e| e.to_string())?);
    }
    let orders: Vec<f64> = residuals.windows(2).map(|r| observed_order(r[0], r[1])).collect();
    let target = cfg.params().integrator.order() as f64;
    let converges = orders.iter().all(|&p| p >= target - 0.5);

    let default_cfg = RunConfig::default();
    let owned;
    let traj = match default_run {
        Some(t) => t,
        None => {
            owned = solve(&default_cfg.f_omega().unwrap(), &default_cfg.params()).map_err(|e| e.to_string())?;
            &owned
        }
    };
    let at_default = duhamel_residual(traj, &default_cfg.f_omega().unwrap()).map_err(|e| e.to_string())?;
    verdict(
        converges && at_default <= 1e-4,
        format!(
            "residuals {} with orders {} (target {target}); default settings {at_default:.2e}",
            residuals.iter().map(|r| format!("{r:.1e}")).collect::<Vec<_>>().join(", "),
            orders.iter().map(|p| format!("{p:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn uniqueness_2d() -> Outcome {
    let cfg = RunConfig { m: 16, horizon: 0.5, ..RunConfig::default() };
    let fw = cfg.f_omega().map_err(|e| e.to_string())?;
    let order = step_refinement_order(&fw, &DifferenceEqParams { dt: 2e-3, ..cfg.params() }, 4).map_err(|e| e.to_string())?;
    let last = *order.orders.last().unwrap();
    let order_ok = (last - 4.0).abs() <= 0.3;

    let params = DifferenceEqParams { dt: 1e-3, ..cfg.params() };
    let base = solve(&fw, &params).map_err(|e| e.to_string())?;
    let bump = perturbation(*fw.grid(), 1e-6).map_err(|e| e.to_string())?;
    let pert = solve_from(&fw, &bump, &params).map_err(|e| e.to_string())?;
    let g = gronwall_uniqueness_check(&pert, &base, &fw, &GronwallConfig::default_for(cfg.c1)).map_err(|e| e.to_string())?;
    verdict(
        order_ok && g.pass,
        format!(
            "observed orders {}; Gronwall envelope respected {} (min log-margin {:.2}, max interpolation ratio {:.3})",
            order.orders.iter().map(|p| format!("{p:.2}")).collect::<Vec<_>>().join(", "),
            g.pass,
            g.log_margin.unwrap_or(f64::NAN),
            g.max_interpolation_ratio
        ),
    )
}

fn collect_files(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut snapshots = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        for cmd in [&["tail", "--samples", "150"][..], &["solve", "--horizon", "0.1"], &["check", "--no-refine"]] {
            let status = Command::new(env!("CARGO_BIN_EXE_randns"))
                .args(["-m", "8", "--seed", "42", "--time-points", "120"])
                .args(cmd)
                .env("RANDNS_OUT", &out)
                .env("RANDNS_WORKERS", workers)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{cmd:?} exited {:?}", status.status.code()));
            }
        }
        snapshots.push(collect_files(&out));
    }
    let same = snapshots[0] == snapshots[1];
    verdict(same, format!("{} artifacts byte-identical with 1 and 3 workers: {same}", snapshots[0].len()))
}

fn main() {
    let mut default_run = None;
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut record = |n, name, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {n:>2} {tag} {name}: {detail} [{secs:.1}s]");
        results.push((n, name, outcome, secs));
    };
    record(1, "exact-solution regression", &mut exact_regression);
    record(2, "energy identity", &mut energy_identity);
    record(3, "trilinear neutrality", &mut trilinear_neutrality);
    record(4, "convolution oracle", &mut convolution_oracle);
    record(5, "randomization invariants", &mut randomization_invariants);
    record(6, "tail shape", &mut tail_shape);
    record(7, "deterministic heat bounds", &mut heat_bounds);
    record(8, "energy boundedness under refinement", &mut || energy_refinement(&mut default_run));
    record(9, "Duhamel equivalence", &mut || duhamel_equivalence(default_run.as_ref()));
    record(10, "2D uniqueness", &mut uniqueness_2d);
    record(11, "determinism across workers", &mut determinism);

    let failed: Vec<usize> = results.iter().filter(|r| r.2.is_err()).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
