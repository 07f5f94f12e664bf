//! C ABI for `partcache`.
//!
//! Every fallible function returns a [`PcStatus`] and writes results through
//! out-pointers. On failure, [`pc_last_error_message`] describes the most
//! recent error on the calling thread. Handles are created by `pc_*_new`
//! style functions and must be released with the matching `pc_*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use partcache::analysis::{stp_rlnc, stp_uc};
use partcache::model::{Popularity, RlncAllocation, SystemConfig, SystemParams, UcAllocation};
use partcache::optimize::{solve_with_budget, Design, Method, DEFAULT_EXHAUSTIVE_BUDGET};
use partcache::sim::{simulate_baseline, simulate_rlnc, simulate_uc, Baseline, SimOptions};
use partcache::{Error, ExperimentConfig, Violation};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConstraintViolation = 3,
    BudgetExceeded = 4,
    NumericalFailure = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcDesign {
    Rlnc = 0,
    Uc = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcMethod {
    Greedy = 0,
    Exhaustive = 1,
    AsymptoticSmall = 2,
    AsymptoticLarge = 3,
}

/// Designs the simulator accepts.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcSimDesign {
    Rlnc = 0,
    Uc = 1,
    Baseline1 = 2,
    Baseline2 = 3,
    Baseline3 = 4,
}

/// Network and cache parameters plus the Zipf exponent.
pub struct PcConfig {
    inner: ExperimentConfig,
}

/// File request probabilities.
pub struct PcPopularity {
    inner: Popularity,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("NULs removed"));
}

fn status_of(e: &Error) -> PcStatus {
    match e {
        Error::Constraint(Violation::CodeExceedsSic { .. }) => PcStatus::InvalidArgument,
        Error::Constraint(_) => PcStatus::ConstraintViolation,
        Error::BudgetExceeded { .. } => PcStatus::BudgetExceeded,
        Error::Quadrature { .. } | Error::InsufficientBaseStations { .. } => PcStatus::NumericalFailure,
        _ => PcStatus::InvalidArgument,
    }
}

struct Fail(PcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PcStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn array<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out_config` must be a valid pointer to a `PcConfig*`.
#[no_mangle]
pub unsafe extern "C" fn pc_config_new(
    n_files: u32,
    cache_size: u32,
    sic_capability: u32,
    path_loss_exp: f64,
    bandwidth_hz: f64,
    slot_duration_s: f64,
    file_size_bits: f64,
    bs_density: f64,
    zipf_gamma: f64,
    out_config: *mut *mut PcConfig,
) -> PcStatus {
    guard(|| {
        let slot = out(out_config, "out_config")?;
        let system = SystemConfig::new(SystemParams {
            n_files,
            cache_size,
            sic_capability,
            path_loss_exp,
            bandwidth_hz,
            slot_duration_s,
            file_size_bits,
            bs_density,
        })?;
        if !(zipf_gamma > 0.0 && zipf_gamma.is_finite()) {
            return Err(Fail(PcStatus::InvalidArgument, format!("zipf_gamma must be positive, got {zipf_gamma}")));
        }
        *slot = Box::into_raw(Box::new(PcConfig { inner: ExperimentConfig { system, zipf_gamma } }));
        Ok(())
    })
}

/// Parses configuration text in the `key = value` file format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_config` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_config_parse(text: *const c_char, out_config: *mut *mut PcConfig) -> PcStatus {
    guard(|| {
        let slot = out(out_config, "out_config")?;
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| Fail(PcStatus::InvalidArgument, "configuration is not UTF-8".into()))?;
        *slot = Box::into_raw(Box::new(PcConfig { inner: ExperimentConfig::parse(text)? }));
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pc_config_free(config: *mut PcConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_config_n_files(config: *const PcConfig) -> u32 {
    config.as_ref().map_or(0, |c| c.inner.system.n_files() as u32)
}

/// # Safety
/// `probs` must point to `len` doubles; `out_popularity` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_popularity_new(
    probs: *const f64,
    len: usize,
    out_popularity: *mut *mut PcPopularity,
) -> PcStatus {
    guard(|| {
        let slot = out(out_popularity, "out_popularity")?;
        let probs = array(probs, len, "probs")?.to_vec();
        *slot = Box::into_raw(Box::new(PcPopularity { inner: Popularity::new(probs)? }));
        Ok(())
    })
}

/// Zipf popularity from the configuration's file count and exponent.
///
/// # Safety
/// `config` must be a live handle and `out_popularity` valid.
#[no_mangle]
pub unsafe extern "C" fn pc_config_popularity(
    config: *const PcConfig,
    out_popularity: *mut *mut PcPopularity,
) -> PcStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        let slot = out(out_popularity, "out_popularity")?;
        *slot = Box::into_raw(Box::new(PcPopularity { inner: cfg.inner.popularity()? }));
        Ok(())
    })
}

/// # Safety
/// `popularity` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pc_popularity_free(popularity: *mut PcPopularity) {
    if !popularity.is_null() {
        drop(Box::from_raw(popularity));
    }
}

/// `int_z^1 u^(x-1) (1-u)^(y-1) du`.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_beta_complement(x: f64, y: f64, z: f64, out_value: *mut f64) -> PcStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        *slot = partcache::special::beta_complement(x, y, z)?;
        Ok(())
    })
}

/// Probability that the `i`-th draw first completes a set of `code` coupons.
#[no_mangle]
pub extern "C" fn pc_coupon_pmf(code: u32, i: u32) -> f64 {
    partcache::coupon_pmf(code, i)
}

unsafe fn write_breakdown(per: &[f64], per_file_out: *mut f64, total: f64, total_out: *mut f64) -> Result<(), Fail> {
    let slot = out(total_out, "out_total")?;
    if !per_file_out.is_null() {
        slice::from_raw_parts_mut(per_file_out, per.len()).copy_from_slice(per);
    }
    *slot = total;
    Ok(())
}

/// Closed-form success probability of a coded allocation. `out_per_file`
/// may be null; otherwise it receives `len` values.
///
/// # Safety
/// Handles must be live, `codes` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn pc_stp_rlnc(
    config: *const PcConfig,
    popularity: *const PcPopularity,
    codes: *const u32,
    len: usize,
    out_per_file: *mut f64,
    out_total: *mut f64,
) -> PcStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        let a = deref(popularity, "popularity")?;
        let alloc = RlncAllocation::new(array(codes, len, "codes")?.to_vec());
        let b = stp_rlnc(&alloc, &a.inner, &cfg.inner.system)?;
        write_breakdown(&b.per_file, out_per_file, b.total, out_total)
    })
}

/// As [`pc_stp_rlnc`] for the uncoded design with serve counts.
///
/// # Safety
/// Handles must be live, `codes` and `serve_counts` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn pc_stp_uc(
    config: *const PcConfig,
    popularity: *const PcPopularity,
    codes: *const u32,
    serve_counts: *const u32,
    len: usize,
    out_per_file: *mut f64,
    out_total: *mut f64,
) -> PcStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        let a = deref(popularity, "popularity")?;
        let alloc = UcAllocation::new(array(codes, len, "codes")?.to_vec(), array(serve_counts, len, "serve_counts")?.to_vec());
        let b = stp_uc(&alloc, &a.inner, &cfg.inner.system)?;
        write_breakdown(&b.per_file, out_per_file, b.total, out_total)
    })
}

/// Chooses an allocation. `out_codes` receives N codes; `out_serve_counts`
/// (may be null) receives N serve counts for the uncoded design.
/// `budget` 0 means the default exhaustive budget.
///
/// # Safety
/// Handles must be live; output arrays must hold N entries.
#[no_mangle]
pub unsafe extern "C" fn pc_optimize(
    config: *const PcConfig,
    popularity: *const PcPopularity,
    design: PcDesign,
    method: PcMethod,
    budget: u64,
    out_codes: *mut u32,
    out_serve_counts: *mut u32,
    out_objective: *mut f64,
) -> PcStatus {
    guard(|| {
        let cfg = deref(config, "config")?;
        let a = deref(popularity, "popularity")?;
        let objective = out(out_objective, "out_objective")?;
        if out_codes.is_null() {
            return Err(null("out_codes"));
        }
        let kind = match design {
            PcDesign::Rlnc => Design::Rlnc,
            PcDesign::Uc => Design::Uc,
        };
        let method = match method {
            PcMethod::Greedy => Method::Greedy,
            PcMethod::Exhaustive => Method::Exhaustive,
            PcMethod::AsymptoticSmall => Method::AsymptoticSmall,
            PcMethod::AsymptoticLarge => Method::AsymptoticLarge,
        };
        let budget = if budget == 0 { DEFAULT_EXHAUSTIVE_BUDGET } else { budget };
        let r = solve_with_budget(kind, &a.inner, &cfg.inner.system, method, budget)?;
        let codes = r.allocation.codes();
        slice::from_raw_parts_mut(out_codes, codes.len()).copy_from_slice(codes);
        if let (Some(serve), false) = (r.allocation.serve_counts(), out_serve_counts.is_null()) {
            slice::from_raw_parts_mut(out_serve_counts, serve.len()).copy_from_slice(serve);
        }
        *objective = r.objective;
        Ok(())
    })
}

/// Monte Carlo estimate: mean and 95% half-width. `codes` is ignored (may be
/// null) for baselines; `serve_counts` is only read for the uncoded design.
///
/// # Safety
/// Handles must be live; arrays must hold `len` entries when read.
#[no_mangle]
pub unsafe extern "C" fn pc_simulate(
    config: *const PcConfig,
    popularity: *const PcPopularity,
    design: PcSimDesign,
    codes: *const u32,
    serve_counts: *const u32,
    len: usize,
    trials: u64,
    seed: u64,
    out_mean: *mut f64,
    out_ci_half_width: *mut f64,
) -> PcStatus {
    guard(|| {
        let cfg = &deref(config, "config")?.inner.system;
        let a = &deref(popularity, "popularity")?.inner;
        let mean = out(out_mean, "out_mean")?;
        let ci = out(out_ci_half_width, "out_ci_half_width")?;
        let opts = SimOptions::new(trials, seed);
        let report = match design {
            PcSimDesign::Rlnc => {
                simulate_rlnc(&RlncAllocation::new(array(codes, len, "codes")?.to_vec()), a, cfg, &opts)?
            }
            PcSimDesign::Uc => {
                let alloc =
                    UcAllocation::new(array(codes, len, "codes")?.to_vec(), array(serve_counts, len, "serve_counts")?.to_vec());
                simulate_uc(&alloc, a, cfg, &opts)?
            }
            PcSimDesign::Baseline1 => simulate_baseline(Baseline::MostPopular, a, cfg, &opts)?,
            PcSimDesign::Baseline2 => simulate_baseline(Baseline::Uniform, a, cfg, &opts)?,
            PcSimDesign::Baseline3 => simulate_baseline(Baseline::WaterFill, a, cfg, &opts)?,
        };
        *mean = report.overall.mean;
        *ci = report.overall.ci_half_width;
        Ok(())
    })
}
