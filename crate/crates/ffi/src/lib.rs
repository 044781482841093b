//! C ABI over the biortho library.
//!
//! Objects are opaque handles created by `*_new` functions and released by the
//! matching `*_free`. Every function returns a [`BiorthoStatus`]; on failure the
//! message is kept per thread and can be read with
//! [`biortho_last_error_message`]. Panics never cross the boundary.

use biortho::kernels::{EnsembleSpec, Family, FiniteKernel};
use biortho::sampler::{sample, ChainConfig, SampleBatch};
use biortho::scaling::ScaledKernel;
use biortho::special::{limit_kernel, limit_kernel_hermite, wright_bessel, LimitKernelParams, Method};
use biortho::verify::{run_suite, Suite};
use biortho::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiorthoStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Accuracy = 3,
    Singular = 4,
    Io = 5,
    Format = 6,
    InvalidArgument = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiorthoFamily {
    Jacobi = 0,
    Laguerre = 1,
    Hermite = 2,
}

impl From<BiorthoFamily> for Family {
    fn from(f: BiorthoFamily) -> Self {
        match f {
            BiorthoFamily::Jacobi => Family::Jacobi,
            BiorthoFamily::Laguerre => Family::Laguerre,
            BiorthoFamily::Hermite => Family::Hermite,
        }
    }
}

/// Markov chain settings; see `biortho_chain_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BiorthoChainConfig {
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub proposal_scale: f64,
    pub seed: u64,
    pub chains: u32,
}

/// A finite-N correlation kernel.
pub struct BiorthoKernel {
    kernel: FiniteKernel,
    scaled: Option<ScaledKernel<Box<FiniteKernel>>>,
}

/// Draws from a Metropolis run, configurations sorted ascending.
pub struct BiorthoSampleBatch {
    batch: SampleBatch,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> BiorthoStatus {
    match e {
        Error::Domain(_) => BiorthoStatus::Domain,
        Error::Accuracy { .. } | Error::NonFinite { .. } => BiorthoStatus::Accuracy,
        Error::Singular(_) | Error::Decomposition { .. } => BiorthoStatus::Singular,
        Error::Io(_) => BiorthoStatus::Io,
        Error::Format(_) => BiorthoStatus::Format,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Invalid(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status and the last-error slot.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BiorthoStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (BiorthoStatus::Ok, String::new()),
        Ok(Err(Fail::Lib(e))) => (status_of(&e), e.to_string()),
        Ok(Err(Fail::Null(what))) => (BiorthoStatus::NullPointer, format!("{what} is null")),
        Ok(Err(Fail::Invalid(m))) => (BiorthoStatus::InvalidArgument, m),
        Err(p) => {
            let m = p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned());
            (BiorthoStatus::Panic, format!("internal panic: {}", m.unwrap_or_default()))
        }
    };
    set_error(msg);
    status
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

/// Copies the calling thread's last error message (NUL-terminated, truncated to
/// `len` bytes) into `buf` and returns the full message length without the NUL.
/// Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn biortho_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn biortho_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates the finite kernel K_N for the given ensemble.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to release
/// with `biortho_kernel_free`.
#[no_mangle]
pub unsafe extern "C" fn biortho_kernel_new(
    family: BiorthoFamily,
    alpha: f64,
    theta: f64,
    n: usize,
    out: *mut *mut BiorthoKernel,
) -> BiorthoStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let spec = EnsembleSpec::new(family.into(), alpha, theta, n)?;
        let kernel = FiniteKernel::new(spec)?;
        let scaled = ScaledKernel::new(spec).ok();
        *out = Box::into_raw(Box::new(BiorthoKernel { kernel, scaled }));
        Ok(())
    })
}

/// # Safety
/// `kernel` must be null or a handle from `biortho_kernel_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn biortho_kernel_free(kernel: *mut BiorthoKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// K_N(x, y).
///
/// # Safety
/// `kernel` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biortho_kernel_eval(kernel: *const BiorthoKernel, x: f64, y: f64, out: *mut f64) -> BiorthoStatus {
    guard(|| {
        let k = in_ref(kernel, "kernel")?;
        *out_ref(out, "out")? = k.kernel.eval(x, y)?;
        Ok(())
    })
}

/// The kernel at its scaling-limit coordinates.
///
/// # Safety
/// `kernel` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biortho_kernel_eval_scaled(
    kernel: *const BiorthoKernel,
    x: f64,
    y: f64,
    out: *mut f64,
) -> BiorthoStatus {
    guard(|| {
        let k = in_ref(kernel, "kernel")?;
        let s = k.scaled.as_ref().ok_or_else(|| Fail::Invalid("no scaling limit for this kernel (Hermite needs N >= 2)".into()))?;
        *out_ref(out, "out")? = s.eval(x, y)?;
        Ok(())
    })
}

/// ∏ω(x_i) det[K_N(x_i, x_j)] for `len` points.
///
/// # Safety
/// `kernel` must be a live handle, `points` must hold `len` doubles and `out`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biortho_kernel_correlation(
    kernel: *const BiorthoKernel,
    points: *const f64,
    len: usize,
    out: *mut f64,
) -> BiorthoStatus {
    guard(|| {
        let k = in_ref(kernel, "kernel")?;
        let pts = if len == 0 { &[][..] } else { std::slice::from_raw_parts(in_ref(points, "points")?, len) };
        *out_ref(out, "out")? = k.kernel.correlation(pts)?;
        Ok(())
    })
}

/// The hard-edge limit kernel at x, y >= 0.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biortho_limit_kernel(alpha: f64, theta: f64, x: f64, y: f64, out: *mut f64) -> BiorthoStatus {
    guard(|| {
        let p = LimitKernelParams::new(alpha, theta)?;
        *out_ref(out, "out")? = limit_kernel(p, x, y, Method::Auto)?;
        Ok(())
    })
}

/// The Hermite-type limit kernel on the real line.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biortho_limit_kernel_hermite(alpha: f64, theta: f64, x: f64, y: f64, out: *mut f64) -> BiorthoStatus {
    guard(|| {
        let p = LimitKernelParams::new(alpha, theta)?;
        *out_ref(out, "out")? = limit_kernel_hermite(p, x, y)?;
        Ok(())
    })
}

/// Wright's function J_{a,b}(x).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biortho_wright_bessel(a: f64, b: f64, x: f64, out: *mut f64) -> BiorthoStatus {
    guard(|| {
        *out_ref(out, "out")? = wright_bessel(a, b, x)?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn biortho_chain_config_default() -> BiorthoChainConfig {
    let c = ChainConfig::default();
    BiorthoChainConfig {
        steps: c.steps,
        burn_in: c.burn_in,
        thin: c.thin,
        proposal_scale: c.proposal_scale,
        seed: c.seed,
        chains: c.chains,
    }
}

/// Runs the Metropolis sampler.
///
/// # Safety
/// `config` and `out` must be valid pointers; on success `out` receives a
/// handle to release with `biortho_sample_free`.
#[no_mangle]
pub unsafe extern "C" fn biortho_sample(
    family: BiorthoFamily,
    alpha: f64,
    theta: f64,
    n: usize,
    config: *const BiorthoChainConfig,
    out: *mut *mut BiorthoSampleBatch,
) -> BiorthoStatus {
    guard(|| {
        let c = in_ref(config, "config")?;
        let out = out_ref(out, "out")?;
        let spec = EnsembleSpec::new(family.into(), alpha, theta, n)?;
        let cfg = ChainConfig {
            steps: c.steps,
            burn_in: c.burn_in,
            thin: c.thin,
            proposal_scale: c.proposal_scale,
            seed: c.seed,
            chains: c.chains,
        };
        *out = Box::into_raw(Box::new(BiorthoSampleBatch { batch: sample(&spec, &cfg)? }));
        Ok(())
    })
}

/// # Safety
/// `batch` must be null or a handle from `biortho_sample` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn biortho_sample_free(batch: *mut BiorthoSampleBatch) {
    if !batch.is_null() {
        drop(Box::from_raw(batch));
    }
}

/// Number of kept configurations, points per configuration and the
/// post-burn-in acceptance rate. Any output pointer may be null.
///
/// # Safety
/// `batch` must be a live handle; non-null outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn biortho_sample_info(
    batch: *const BiorthoSampleBatch,
    count: *mut usize,
    n_points: *mut usize,
    acceptance_rate: *mut f64,
) -> BiorthoStatus {
    guard(|| {
        let b = &in_ref(batch, "batch")?.batch;
        if let Some(c) = count.as_mut() {
            *c = b.draws.len();
        }
        if let Some(n) = n_points.as_mut() {
            *n = b.draws.n;
        }
        if let Some(a) = acceptance_rate.as_mut() {
            *a = b.acceptance_rate;
        }
        Ok(())
    })
}

/// Copies all coordinates (count × n_points doubles, row-major) into `buf`.
///
/// # Safety
/// `batch` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn biortho_sample_positions(batch: *const BiorthoSampleBatch, buf: *mut f64, len: usize) -> BiorthoStatus {
    guard(|| {
        let p = &in_ref(batch, "batch")?.batch.draws.positions;
        if len < p.len() {
            return Err(Fail::Invalid(format!("buffer holds {len} values, {} needed", p.len())));
        }
        let dst = std::slice::from_raw_parts_mut(out_ref(buf, "buf")?, p.len());
        dst.copy_from_slice(p);
        Ok(())
    })
}

/// Runs the named verification suite; `passed` receives the verdict.
///
/// # Safety
/// `name` must be a NUL-terminated string and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn biortho_verify_suite(name: *const c_char, passed: *mut bool) -> BiorthoStatus {
    guard(|| {
        let name = CStr::from_ptr(in_ref(name, "name")?).to_str().map_err(|_| Fail::Invalid("suite name is not UTF-8".into()))?;
        let suite: Suite = name.parse()?;
        *out_ref(passed, "passed")? = run_suite(suite)?.passed;
        Ok(())
    })
}
