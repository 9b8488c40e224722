//! C ABI over the `randns` toolkit.
//!
//! Every entry point returns a [`RandnsStatus`]; results come back through
//! out-pointers. Fields and trajectories are opaque heap handles owned by the
//! caller and released with the matching `*_free`. On failure the message is
//! kept per thread and can be read with [`randns_last_error`].
//!
//! Coefficient buffers use the core layout: component-major, lexicographic
//! over `[-M, M]^d`, split into separate real and imaginary arrays of
//! length [`randns_field_len`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use randns::galerkin::{self, DifferenceEqParams, Integrator, TrajectoryRecord};
use randns::heatflow::{self, NormProbeSpec};
use randns::{checkpoint, datum, randomize, spectral, Error, GridSpec, MultiplierLaw, SeedSpec, SpectralField};

/// Result codes. `Ok` is zero; everything else carries a message.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandnsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidGrid = 2,
    GridMismatch = 3,
    InvalidArgument = 4,
    Inadmissible = 5,
    Config = 6,
    Numerical = 7,
    Format = 8,
    Io = 9,
    Panic = 10,
}

/// Multiplier law for [`randns_randomize`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandnsLaw {
    Gaussian = 0,
    Rademacher = 1,
}

/// Time stepper for [`randns_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandnsIntegrator {
    ExpRk2 = 2,
    ExpRk4 = 4,
}

/// Parameters of [`randns_solve`]. Start from [`randns_solve_params_default`].
/// `graded_start` is ignored when NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RandnsSolveParams {
    pub c1: f64,
    pub c2: f64,
    pub horizon: f64,
    pub dt: f64,
    pub graded_start: f64,
    pub integrator: RandnsIntegrator,
    pub snapshot_every: usize,
    pub dense_until: f64,
    pub blowup_threshold: f64,
}

/// Opaque spectral field.
pub struct RandnsField(SpectralField);

/// Opaque solver output.
pub struct RandnsTrajectory(TrajectoryRecord);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RandnsStatus {
    match err {
        Error::InvalidGrid(_) => RandnsStatus::InvalidGrid,
        Error::GridMismatch(_) => RandnsStatus::GridMismatch,
        Error::InvalidArgument(_) => RandnsStatus::InvalidArgument,
        Error::Inadmissible(_) => RandnsStatus::Inadmissible,
        Error::Config(_) => RandnsStatus::Config,
        Error::Numerical { .. } => RandnsStatus::Numerical,
        Error::Format(_) | Error::Json(_) | Error::Csv(_) => RandnsStatus::Format,
        Error::Io(_) => RandnsStatus::Io,
    }
}

struct Fail(RandnsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RandnsStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> RandnsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RandnsStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            RandnsStatus::Panic
        }
    }
}

unsafe fn field_ref<'a>(f: *const RandnsField, what: &str) -> Result<&'a SpectralField, Fail> {
    f.as_ref().map(|h| &h.0).ok_or_else(|| null(what))
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn emit_f64(out: *mut f64, value: f64) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output value"));
    }
    *out = value;
    Ok(())
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Fail> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Fail(RandnsStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn randns_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Zero field on `[-m, m]^dim`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn randns_field_new(dim: usize, m: usize, out: *mut *mut RandnsField) -> RandnsStatus {
    guard(|| emit(out, RandnsField(SpectralField::zeros(GridSpec::new(dim, m)?))))
}

/// Releases a field. Null is accepted.
///
/// # Safety
/// `field` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn randns_field_free(field: *mut RandnsField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_field_clone(field: *const RandnsField, out: *mut *mut RandnsField) -> RandnsStatus {
    guard(|| emit(out, RandnsField(field_ref(field, "field")?.clone())))
}

/// Number of complex coefficients, `d (2M+1)^d`; 0 for null.
///
/// # Safety
/// `field` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn randns_field_len(field: *const RandnsField) -> usize {
    field.as_ref().map_or(0, |h| h.0.coeffs().len())
}

/// Writes dimension and truncation.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_field_shape(field: *const RandnsField, dim: *mut usize, m: *mut usize) -> RandnsStatus {
    guard(|| {
        let f = field_ref(field, "field")?;
        if dim.is_null() || m.is_null() {
            return Err(null("shape output"));
        }
        *dim = f.grid().dim;
        *m = f.grid().m;
        Ok(())
    })
}

/// Copies the coefficients out.
///
/// # Safety
/// `re` and `im` must hold `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn randns_field_get_coeffs(
    field: *const RandnsField,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> RandnsStatus {
    guard(|| {
        let f = field_ref(field, "field")?;
        if re.is_null() || im.is_null() {
            return Err(null("coefficient buffer"));
        }
        if len != f.coeffs().len() {
            return Err(Fail(RandnsStatus::InvalidArgument, format!("buffer length {len}, field has {}", f.coeffs().len())));
        }
        let (re, im) = (std::slice::from_raw_parts_mut(re, len), std::slice::from_raw_parts_mut(im, len));
        for (i, c) in f.coeffs().iter().enumerate() {
            re[i] = c.re;
            im[i] = c.im;
        }
        Ok(())
    })
}

/// Replaces the coefficients. The data must be Hermitian with zero mean.
///
/// # Safety
/// `re` and `im` must hold `len` doubles each.
#[no_mangle]
pub unsafe extern "C" fn randns_field_set_coeffs(
    field: *mut RandnsField,
    re: *const f64,
    im: *const f64,
    len: usize,
) -> RandnsStatus {
    guard(|| {
        let h = field.as_mut().ok_or_else(|| null("field"))?;
        if re.is_null() || im.is_null() {
            return Err(null("coefficient buffer"));
        }
        let (re, im) = (std::slice::from_raw_parts(re, len), std::slice::from_raw_parts(im, len));
        let coeffs = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        h.0 = SpectralField::from_coeffs(*h.0.grid(), coeffs)?;
        Ok(())
    })
}

/// Sets `f̂_c(n) = value` and `f̂_c(−n) = conj(value)`.
///
/// # Safety
/// `n` must hold the field's dimension many entries.
#[no_mangle]
pub unsafe extern "C" fn randns_field_set_pair(
    field: *mut RandnsField,
    component: usize,
    n: *const i64,
    re: f64,
    im: f64,
) -> RandnsStatus {
    guard(|| {
        let h = field.as_mut().ok_or_else(|| null("field"))?;
        if n.is_null() {
            return Err(null("wavevector"));
        }
        let n = std::slice::from_raw_parts(n, h.0.dim());
        h.0.set_pair(component, n, Complex64::new(re, im))?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn randns_field_load(path: *const c_char, out: *mut *mut RandnsField) -> RandnsStatus {
    guard(|| emit(out, RandnsField(checkpoint::read(path_arg(path)?)?)))
}

/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn randns_field_save(field: *const RandnsField, path: *const c_char) -> RandnsStatus {
    guard(|| Ok(checkpoint::write(path_arg(path)?, field_ref(field, "field")?)?))
}

/// Solenoidal power-law datum, `|f̂(n)| = amplitude ⟨n⟩^{−decay}`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_power_law(
    dim: usize,
    m: usize,
    decay: f64,
    amplitude: f64,
    out: *mut *mut RandnsField,
) -> RandnsStatus {
    guard(|| emit(out, RandnsField(datum::power_law(GridSpec::new(dim, m)?, decay, amplitude)?)))
}

/// Leray projection.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_leray(field: *const RandnsField, out: *mut *mut RandnsField) -> RandnsStatus {
    guard(|| emit(out, RandnsField(spectral::leray_project(field_ref(field, "field")?))))
}

/// `‖f‖_{H^s}`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_sobolev_norm(field: *const RandnsField, s: f64, out: *mut f64) -> RandnsStatus {
    guard(|| emit_f64(out, spectral::sobolev_norm(field_ref(field, "field")?, s)))
}

/// `‖f‖_{L^p}`, `p >= 1` or `+inf`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_lp_norm(field: *const RandnsField, p: f64, out: *mut f64) -> RandnsStatus {
    guard(|| emit_f64(out, spectral::lp_norm(field_ref(field, "field")?, p)?))
}

/// `e^{tΔ} f`, `t >= 0`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_heat_flow(field: *const RandnsField, t: f64, out: *mut *mut RandnsField) -> RandnsStatus {
    guard(|| emit(out, RandnsField(heatflow::heat_flow(field_ref(field, "field")?, t)?)))
}

/// Randomized field for sample `sample_index` of stream `master_seed`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_randomize(
    field: *const RandnsField,
    law: RandnsLaw,
    master_seed: u64,
    sample_index: u64,
    out: *mut *mut RandnsField,
) -> RandnsStatus {
    guard(|| {
        let law = match law {
            RandnsLaw::Gaussian => MultiplierLaw::Gaussian,
            RandnsLaw::Rademacher => MultiplierLaw::Rademacher,
        };
        let f = field_ref(field, "field")?;
        emit(out, RandnsField(randomize::randomize(f, law, SeedSpec::new(master_seed, sample_index))?))
    })
}

/// Dealiased, projected `(u·∇)v`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_nonlinear(
    u: *const RandnsField,
    v: *const RandnsField,
    out: *mut *mut RandnsField,
) -> RandnsStatus {
    guard(|| emit(out, RandnsField(spectral::nonlinear_term(field_ref(u, "u")?, field_ref(v, "v")?)?)))
}

/// `‖t^γ (−Δ)^{σ/2} e^{tΔ} f‖_{L^q_t([0,T]; L^p_x)}`. Fails with
/// `Inadmissible` outside the admissible range for `alpha`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_mixed_norm(
    field: *const RandnsField,
    sigma: f64,
    gamma: f64,
    p: f64,
    q: f64,
    horizon: f64,
    alpha: f64,
    out: *mut f64,
) -> RandnsStatus {
    guard(|| {
        let probe = NormProbeSpec::new(sigma, gamma, p, q, horizon, alpha);
        emit_f64(out, heatflow::mixed_norm(field_ref(field, "field")?, &probe)?)
    })
}

/// Default solver parameters.
#[no_mangle]
pub extern "C" fn randns_solve_params_default() -> RandnsSolveParams {
    let d = DifferenceEqParams::default();
    RandnsSolveParams {
        c1: d.c1,
        c2: d.c2,
        horizon: d.horizon,
        dt: d.dt,
        graded_start: d.graded_start.unwrap_or(f64::NAN),
        integrator: match d.integrator {
            Integrator::ExpRk2 => RandnsIntegrator::ExpRk2,
            Integrator::ExpRk4 => RandnsIntegrator::ExpRk4,
        },
        snapshot_every: d.snapshot_every,
        dense_until: d.dense_until,
        blowup_threshold: d.blowup_threshold,
    }
}

/// Integrates the truncated difference equation from `w(0) = 0`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_solve(
    forcing: *const RandnsField,
    params: *const RandnsSolveParams,
    out: *mut *mut RandnsTrajectory,
) -> RandnsStatus {
    guard(|| {
        let f = field_ref(forcing, "forcing")?;
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        let params = DifferenceEqParams {
            c1: p.c1,
            c2: p.c2,
            horizon: p.horizon,
            dt: p.dt,
            graded_start: (!p.graded_start.is_nan()).then_some(p.graded_start),
            integrator: match p.integrator {
                RandnsIntegrator::ExpRk2 => Integrator::ExpRk2,
                RandnsIntegrator::ExpRk4 => Integrator::ExpRk4,
            },
            snapshot_every: p.snapshot_every,
            dense_until: p.dense_until,
            blowup_threshold: p.blowup_threshold,
            check_trilinear: false,
        };
        emit(out, RandnsTrajectory(galerkin::solve(f, &params)?))
    })
}

/// # Safety
/// `traj` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn randns_trajectory_free(traj: *mut RandnsTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of snapshots; 0 for null.
///
/// # Safety
/// `traj` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn randns_trajectory_len(traj: *const RandnsTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.times.len())
}

/// Time and `sup_s E(s)` up to snapshot `index`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_trajectory_time(
    traj: *const RandnsTrajectory,
    index: usize,
    time: *mut f64,
    energy: *mut f64,
) -> RandnsStatus {
    guard(|| {
        let t = &traj.as_ref().ok_or_else(|| null("trajectory"))?.0;
        if index >= t.times.len() {
            return Err(Fail(RandnsStatus::InvalidArgument, format!("snapshot {index} of {}", t.times.len())));
        }
        emit_f64(time, t.times[index])?;
        emit_f64(energy, t.trace.energy[..=index].iter().copied().fold(0.0, f64::max))
    })
}

/// Copy of snapshot `index`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn randns_trajectory_snapshot(
    traj: *const RandnsTrajectory,
    index: usize,
    out: *mut *mut RandnsField,
) -> RandnsStatus {
    guard(|| {
        let t = &traj.as_ref().ok_or_else(|| null("trajectory"))?.0;
        let s = t
            .snapshots
            .get(index)
            .ok_or_else(|| Fail(RandnsStatus::InvalidArgument, format!("snapshot {index} of {}", t.snapshots.len())))?;
        emit(out, RandnsField(s.clone()))
    })
}

/// Writes the energy trace as CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn randns_trajectory_write_trace(traj: *const RandnsTrajectory, path: *const c_char) -> RandnsStatus {
    guard(|| {
        let t = &traj.as_ref().ok_or_else(|| null("trajectory"))?.0;
        let file = std::fs::File::create(path_arg(path)?).map_err(Error::from)?;
        Ok(t.trace.write_csv(std::io::BufWriter::new(file))?)
    })
}
