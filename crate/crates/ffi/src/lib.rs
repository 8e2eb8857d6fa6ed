//! C ABI over `rotinv`.
//!
//! Every function returns a [`RotinvStatus`]; results go through out
//! pointers. Sphere sets and fields are opaque handles owned by the caller
//! and released with the matching `_free`. After a non-`OK` status,
//! [`rotinv_last_error`] describes the failure on the calling thread.
//! Complex arrays are interleaved `re, im` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use rotinv::manakov::{apply_jones_unitary, random_haar_unitary, split_step_propagate};
use rotinv::mc_oracle::{mc_mi_radial, mc_mi_vector};
use rotinv::mi::{awgn_capacity, mi_multisphere};
use rotinv::radial::{average_power, log_chi_kernel, uniform_sphere_set};
use rotinv::specfun::{log_bessel_i_scaled, BesselOrder};
use rotinv::{
    ChannelParams, Error, FiberParams, FieldGrid, JonesUnitary, QuadratureConfig, SphereSet,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotinvStatus {
    Ok = 0,
    Domain = 1,
    InvalidArgument = 2,
    Quadrature = 3,
    /// Refinement budget exhausted; the out value holds the best estimate.
    NonConvergence = 4,
    Parse = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Channel `Y = X + N` with `N ~ N(0, sigma^2 I_dims)` and SNR
/// `A = E|X|^2 / (2 sigma^2)`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RotinvChannel {
    pub dims: u32,
    pub sigma: f64,
    pub snr: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RotinvQuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub peak_halfwidth: f64,
    pub base_panels: u32,
    pub max_refinements: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RotinvMiResult {
    pub bits_per_nd_use: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RotinvMcEstimate {
    pub estimate: f64,
    /// Standard error of `estimate`.
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RotinvFiberParams {
    /// Group-velocity dispersion, s^2/m.
    pub beta2: f64,
    /// Nonlinear coefficient, 1/(W m).
    pub gamma: f64,
    /// Fiber length, m.
    pub length: f64,
    pub steps: u32,
    /// Noise power spectral density per polarization; 0 disables noise.
    pub noise_psd: f64,
}

/// Opaque sphere set.
pub struct RotinvSphereSet(SphereSet);

/// Opaque dual-polarization field.
pub struct RotinvField(FieldGrid);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RotinvStatus {
    match err {
        Error::Domain(_) => RotinvStatus::Domain,
        Error::InvalidArgument(_) => RotinvStatus::InvalidArgument,
        Error::Quadrature(_) => RotinvStatus::Quadrature,
        Error::NonConvergence { .. } => RotinvStatus::NonConvergence,
        Error::Parse { .. } => RotinvStatus::Parse,
    }
}

struct Fail(RotinvStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RotinvStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RotinvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RotinvStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RotinvStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn channel(c: &RotinvChannel) -> Result<ChannelParams, Fail> {
    Ok(ChannelParams::new(c.dims as usize, c.sigma, c.snr)?)
}

fn mi_result(r: rotinv::MiResult) -> RotinvMiResult {
    RotinvMiResult {
        bits_per_nd_use: r.bits_per_nd_use,
        error_estimate: r.error_estimate,
        evaluations: r.evaluations as u64,
    }
}

fn mc_estimate(e: rotinv::McEstimate) -> RotinvMcEstimate {
    RotinvMcEstimate {
        estimate: e.estimate,
        std_error: e.stderr,
        samples: e.samples as u64,
        seed: e.seed,
    }
}

unsafe fn complex_vec(p: *const f64, samples: usize, what: &str) -> Result<Vec<Complex64>, Fail> {
    let raw = as_slice(p, 2 * samples, what)?;
    Ok(raw
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect())
}

fn jones(u: &[f64; 8]) -> Result<JonesUnitary, Fail> {
    let c = |i: usize| Complex64::new(u[2 * i], u[2 * i + 1]);
    Ok(JonesUnitary::new([[c(0), c(1)], [c(2), c(3)]])?)
}

/// Static description of a status code; unknown codes get a generic text.
#[no_mangle]
pub extern "C" fn rotinv_status_string(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"argument outside the mathematical domain\0",
        2 => b"invalid argument\0",
        3 => b"quadrature failure\0",
        4 => b"refinement budget exhausted\0",
        5 => b"parse error\0",
        6 => b"null pointer\0",
        7 => b"internal panic\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rotinv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn rotinv_quadrature_config_default() -> RotinvQuadratureConfig {
    let d = QuadratureConfig::default();
    RotinvQuadratureConfig {
        rel_tol: d.rel_tol,
        abs_tol: d.abs_tol,
        peak_halfwidth: d.peak_halfwidth,
        base_panels: d.base_panels as u32,
        max_refinements: d.max_refinements as u32,
    }
}

/// `(N/2) log2(1 + 2A/N)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_awgn_capacity(dims: u32, snr: f64, out: *mut f64) -> RotinvStatus {
    guard(|| write(out, awgn_capacity(dims as usize, snr)?, "out"))
}

/// `ln(I_nu(x) e^{-x})`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_log_bessel_i_scaled(
    nu: f64,
    x: f64,
    out: *mut f64,
) -> RotinvStatus {
    guard(|| write(out, log_bessel_i_scaled(BesselOrder::new(nu)?, x)?, "out"))
}

/// Log density of the normalized output radius given normalized input
/// radius `s_tilde`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_log_chi_kernel(
    r_tilde: f64,
    s_tilde: f64,
    dims: u32,
    out: *mut f64,
) -> RotinvStatus {
    guard(|| write(out, log_chi_kernel(r_tilde, s_tilde, dims as usize)?, "out"))
}

/// # Safety
/// `radii` and `probs` must point to `len` doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_sphere_set_new(
    radii: *const f64,
    probs: *const f64,
    len: usize,
    out: *mut *mut RotinvSphereSet,
) -> RotinvStatus {
    guard(|| {
        let r = as_slice(radii, len, "radii")?.to_vec();
        let p = as_slice(probs, len, "probs")?.to_vec();
        let set = SphereSet::new(r, p)?;
        write(out, Box::into_raw(Box::new(RotinvSphereSet(set))), "out")
    })
}

/// Equiprobable, uniformly spaced spheres meeting the channel's SNR.
///
/// # Safety
/// `channel` must be valid for reads and `out` for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_sphere_set_uniform(
    rings: u32,
    channel_params: *const RotinvChannel,
    out: *mut *mut RotinvSphereSet,
) -> RotinvStatus {
    guard(|| {
        let p = channel(as_ref(channel_params, "channel")?)?;
        let set = uniform_sphere_set(rings as usize, &p)?;
        write(out, Box::into_raw(Box::new(RotinvSphereSet(set))), "out")
    })
}

/// # Safety
/// `set` must come from a `rotinv_sphere_set_*` constructor and not be
/// used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn rotinv_sphere_set_free(set: *mut RotinvSphereSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of spheres, 0 for NULL.
///
/// # Safety
/// `set` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rotinv_sphere_set_len(set: *const RotinvSphereSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Copies radii and probabilities into caller buffers of `len` entries.
///
/// # Safety
/// `set` must be live; `radii` and `probs` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_sphere_set_copy(
    set: *const RotinvSphereSet,
    radii: *mut f64,
    probs: *mut f64,
    len: usize,
) -> RotinvStatus {
    guard(|| {
        let s = &as_ref(set, "set")?.0;
        if len != s.len() {
            return Err(Fail(
                RotinvStatus::InvalidArgument,
                format!("buffer length {len} does not match set length {}", s.len()),
            ));
        }
        if radii.is_null() || probs.is_null() {
            return Err(null("output buffer"));
        }
        slice::from_raw_parts_mut(radii, len).copy_from_slice(s.radii());
        slice::from_raw_parts_mut(probs, len).copy_from_slice(s.probs());
        Ok(())
    })
}

/// `E|X|^2 = sum p_k r_k^2`.
///
/// # Safety
/// `set` must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_sphere_set_average_power(
    set: *const RotinvSphereSet,
    out: *mut f64,
) -> RotinvStatus {
    guard(|| write(out, average_power(&as_ref(set, "set")?.0), "out"))
}

/// Mutual information of a multisphere input by quadrature. `config` may
/// be NULL for defaults. On `NON_CONVERGENCE`, `out` holds the best
/// estimate.
///
/// # Safety
/// Pointers must be valid; `set` must be live.
#[no_mangle]
pub unsafe extern "C" fn rotinv_mi_multisphere(
    set: *const RotinvSphereSet,
    channel_params: *const RotinvChannel,
    config: *const RotinvQuadratureConfig,
    out: *mut RotinvMiResult,
) -> RotinvStatus {
    guard(|| {
        let s = &as_ref(set, "set")?.0;
        let p = channel(as_ref(channel_params, "channel")?)?;
        let cfg = match config.as_ref() {
            None => QuadratureConfig::default(),
            Some(c) => QuadratureConfig {
                rel_tol: c.rel_tol,
                abs_tol: c.abs_tol,
                peak_halfwidth: c.peak_halfwidth,
                base_panels: c.base_panels as usize,
                max_refinements: c.max_refinements as usize,
            },
        };
        match mi_multisphere(s, &p, &cfg) {
            Ok(r) => write(out, mi_result(r), "out"),
            Err(e @ Error::NonConvergence { best, .. }) => {
                write(out, mi_result(best), "out")?;
                Err(e.into())
            }
            Err(e) => Err(e.into()),
        }
    })
}

/// Monte Carlo MI from full N-D vector samples.
///
/// # Safety
/// Pointers must be valid; `set` must be live.
#[no_mangle]
pub unsafe extern "C" fn rotinv_mc_mi_vector(
    set: *const RotinvSphereSet,
    channel_params: *const RotinvChannel,
    samples: u64,
    seed: u64,
    out: *mut RotinvMcEstimate,
) -> RotinvStatus {
    guard(|| {
        let s = &as_ref(set, "set")?.0;
        let p = channel(as_ref(channel_params, "channel")?)?;
        write(
            out,
            mc_estimate(mc_mi_vector(s, &p, samples as usize, seed)?),
            "out",
        )
    })
}

/// Monte Carlo MI from output radii only.
///
/// # Safety
/// Pointers must be valid; `set` must be live.
#[no_mangle]
pub unsafe extern "C" fn rotinv_mc_mi_radial(
    set: *const RotinvSphereSet,
    channel_params: *const RotinvChannel,
    samples: u64,
    seed: u64,
    out: *mut RotinvMcEstimate,
) -> RotinvStatus {
    guard(|| {
        let s = &as_ref(set, "set")?.0;
        let p = channel(as_ref(channel_params, "channel")?)?;
        write(
            out,
            mc_estimate(mc_mi_radial(s, &p, samples as usize, seed)?),
            "out",
        )
    })
}

/// Field from `samples` interleaved complex values per polarization.
///
/// # Safety
/// `ex` and `ey` must point to `2 * samples` doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_field_new(
    ex: *const f64,
    ey: *const f64,
    samples: usize,
    dt: f64,
    out: *mut *mut RotinvField,
) -> RotinvStatus {
    guard(|| {
        let field = FieldGrid::new(
            complex_vec(ex, samples, "ex")?,
            complex_vec(ey, samples, "ey")?,
            dt,
        )?;
        write(out, Box::into_raw(Box::new(RotinvField(field))), "out")
    })
}

/// # Safety
/// `field` must come from this library and not be used afterwards. NULL
/// is ignored.
#[no_mangle]
pub unsafe extern "C" fn rotinv_field_free(field: *mut RotinvField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Samples per polarization, 0 for NULL.
///
/// # Safety
/// `field` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rotinv_field_len(field: *const RotinvField) -> usize {
    field.as_ref().map_or(0, |f| f.0.len())
}

/// `dt * sum(|Ex|^2 + |Ey|^2)`.
///
/// # Safety
/// `field` must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_field_energy(
    field: *const RotinvField,
    out: *mut f64,
) -> RotinvStatus {
    guard(|| write(out, as_ref(field, "field")?.0.energy(), "out"))
}

/// Copies both polarizations into interleaved buffers of `2 * samples`
/// doubles.
///
/// # Safety
/// `field` must be live; `ex` and `ey` valid for `2 * samples` writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_field_copy(
    field: *const RotinvField,
    ex: *mut f64,
    ey: *mut f64,
    samples: usize,
) -> RotinvStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        if samples != f.len() {
            return Err(Fail(
                RotinvStatus::InvalidArgument,
                format!(
                    "buffer length {samples} does not match field length {}",
                    f.len()
                ),
            ));
        }
        if ex.is_null() || ey.is_null() {
            return Err(null("output buffer"));
        }
        for (dst, src) in [(ex, f.ex()), (ey, f.ey())] {
            let d = slice::from_raw_parts_mut(dst, 2 * samples);
            for (pair, z) in d.chunks_exact_mut(2).zip(src) {
                pair[0] = z.re;
                pair[1] = z.im;
            }
        }
        Ok(())
    })
}

/// Split-step propagation; returns a new field. `seed` drives the noise.
///
/// # Safety
/// Pointers must be valid; `field` must be live.
#[no_mangle]
pub unsafe extern "C" fn rotinv_field_propagate(
    field: *const RotinvField,
    fiber: *const RotinvFiberParams,
    seed: u64,
    out: *mut *mut RotinvField,
) -> RotinvStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        let fp = as_ref(fiber, "fiber")?;
        let params = FiberParams::new(
            fp.beta2,
            fp.gamma,
            fp.length,
            fp.steps as usize,
            fp.noise_psd,
        )?;
        let next = split_step_propagate(f, &params, seed)?;
        write(out, Box::into_raw(Box::new(RotinvField(next))), "out")
    })
}

/// Applies the 2x2 unitary `u` (row-major, interleaved complex, 8
/// doubles) to every sample; returns a new field.
///
/// # Safety
/// `field` must be live, `u` must point to 8 doubles, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_field_apply_unitary(
    field: *const RotinvField,
    u: *const f64,
    out: *mut *mut RotinvField,
) -> RotinvStatus {
    guard(|| {
        let f = &as_ref(field, "field")?.0;
        let raw: [f64; 8] = as_slice(u, 8, "u")?.try_into().expect("length 8");
        let rotated = apply_jones_unitary(f, &jones(&raw)?);
        write(out, Box::into_raw(Box::new(RotinvField(rotated))), "out")
    })
}

/// Haar-distributed 2x2 unitary, row-major interleaved complex.
///
/// # Safety
/// `out` must be valid for 8 writes.
#[no_mangle]
pub unsafe extern "C" fn rotinv_random_haar_unitary(seed: u64, out: *mut f64) -> RotinvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = random_haar_unitary(seed).matrix();
        let d = slice::from_raw_parts_mut(out, 8);
        for (i, z) in m.iter().flatten().enumerate() {
            d[2 * i] = z.re;
            d[2 * i + 1] = z.im;
        }
        Ok(())
    })
}
