//! C ABI for `rstat`.
//!
//! Every fallible function returns an [`RstatStatus`] and writes its result
//! through an out pointer. On failure the message is kept per thread and can
//! be read with [`rstat_last_error`]. Panics are caught at the boundary and
//! reported as `RSTAT_STATUS_PANIC`.
//!
//! Null tables are opaque [`RstatNull`] handles owned by the caller and
//! released with [`rstat_null_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rstat::null::{self, NullKey};
use rstat::records::Sample;
use rstat::sntest::{self, NullSource, TestConfig};
use rstat::{ref_stats, Alternative, DistributionSpec, Equalize, Error, Family, NullDistribution, RngSeed, SigmaParams, Variant};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RstatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Degenerate = 3,
    TableMismatch = 4,
    NonConvergence = 5,
    Format = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RstatVariant {
    SingleR0 = 0,
    RzPaired = 1,
    RzUnpaired = 2,
    Rplus2 = 3,
    Rminus2 = 4,
    Rd = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RstatAlternative {
    TwoSided = 0,
    Greater = 1,
    Less = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RstatEqualize {
    Trim = 0,
    Resample = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RstatFamily {
    Gaussian = 0,
    Uniform = 1,
    StudentT = 2,
    Exponential = 3,
}

/// Data law; `nu` is ignored unless `family` is Student-t.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RstatDistribution {
    pub family: RstatFamily,
    pub theta: f64,
    pub sigma: f64,
    pub nu: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RstatSigmaParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RstatPermEstimate {
    pub mean_r0: f64,
    pub mean_r_plus: f64,
    pub mean_r_minus: f64,
    /// NaN when `p == 1`.
    pub std_err: f64,
    pub p: usize,
    pub ties_seen: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RstatTestConfig {
    pub p_perms: usize,
    pub m_draws: usize,
    pub alternative: RstatAlternative,
    pub equalize: RstatEqualize,
    pub seed: u64,
    pub stream: u64,
    /// Borrowed prebuilt null table, or NULL to build one per call.
    pub null_table: *const RstatNull,
    pub generator: RstatDistribution,
    pub sigma: RstatSigmaParams,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RstatTestResult {
    pub statistic: f64,
    pub raw: f64,
    /// NaN when no normalisation applies.
    pub normalized: f64,
    pub p_value: f64,
    pub n_x: usize,
    /// 0 for single-sample tests.
    pub n_y: usize,
    pub p_perms: usize,
    pub m_draws: usize,
    pub ties_seen: u64,
    pub parametric: bool,
}

/// Opaque null table.
pub struct RstatNull {
    inner: NullDistribution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

type FfiResult<T> = Result<T, Fail>;

fn status_of(e: &Error) -> RstatStatus {
    match e {
        Error::InvalidInput(_) => RstatStatus::InvalidInput,
        Error::Degenerate(_) => RstatStatus::Degenerate,
        Error::Format(_) => RstatStatus::Format,
        Error::TableMismatch(_) => RstatStatus::TableMismatch,
        Error::NonConvergence { .. } => RstatStatus::NonConvergence,
        Error::Io(_) => RstatStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> RstatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RstatStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RstatStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            RstatStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &'static str) -> FfiResult<&'a T> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn sample(values: *const f64, n: usize, what: &'static str) -> FfiResult<Sample> {
    if n == 0 {
        return Err(Error::InvalidInput(format!("{what} is empty")).into());
    }
    if values.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(Sample::new(std::slice::from_raw_parts(values, n).to_vec())?)
}

impl From<RstatVariant> for Variant {
    fn from(v: RstatVariant) -> Self {
        match v {
            RstatVariant::SingleR0 => Variant::SingleR0,
            RstatVariant::RzPaired => Variant::RzPaired,
            RstatVariant::RzUnpaired => Variant::RzUnpaired,
            RstatVariant::Rplus2 => Variant::RPlus2,
            RstatVariant::Rminus2 => Variant::RMinus2,
            RstatVariant::Rd => Variant::Rd,
        }
    }
}

impl From<RstatAlternative> for Alternative {
    fn from(a: RstatAlternative) -> Self {
        match a {
            RstatAlternative::TwoSided => Alternative::TwoSided,
            RstatAlternative::Greater => Alternative::Greater,
            RstatAlternative::Less => Alternative::Less,
        }
    }
}

impl From<RstatEqualize> for Equalize {
    fn from(e: RstatEqualize) -> Self {
        match e {
            RstatEqualize::Trim => Equalize::Trim,
            RstatEqualize::Resample => Equalize::Resample,
        }
    }
}

impl RstatDistribution {
    fn to_spec(self) -> FfiResult<DistributionSpec> {
        let family = match self.family {
            RstatFamily::Gaussian => Family::Gaussian,
            RstatFamily::Uniform => Family::Uniform,
            RstatFamily::StudentT => Family::StudentT,
            RstatFamily::Exponential => Family::Exponential,
        };
        let spec = DistributionSpec {
            family,
            theta: self.theta,
            sigma: self.sigma,
            nu: (family == Family::StudentT).then_some(self.nu),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<RstatSigmaParams> for SigmaParams {
    fn from(p: RstatSigmaParams) -> Self {
        SigmaParams { a: p.a, b: p.b, c: p.c }
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rstat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Standard Gaussian with `theta = 0`.
#[no_mangle]
pub extern "C" fn rstat_distribution_default() -> RstatDistribution {
    RstatDistribution {
        family: RstatFamily::Gaussian,
        theta: 0.0,
        sigma: 1.0,
        nu: f64::NAN,
    }
}

#[no_mangle]
pub extern "C" fn rstat_sigma_params_default() -> RstatSigmaParams {
    let p = SigmaParams::default();
    RstatSigmaParams { a: p.a, b: p.b, c: p.c }
}

/// Library defaults: 10^4 permutations and draws, two-sided, trim, seed 0,
/// Gaussian generator, no cached table.
#[no_mangle]
pub extern "C" fn rstat_test_config_default() -> RstatTestConfig {
    let d = TestConfig::default();
    RstatTestConfig {
        p_perms: d.p_perms,
        m_draws: d.m_draws,
        alternative: RstatAlternative::TwoSided,
        equalize: RstatEqualize::Trim,
        seed: 0,
        stream: 0,
        null_table: ptr::null(),
        generator: rstat_distribution_default(),
        sigma: rstat_sigma_params_default(),
    }
}

/// `R_0` of the cumulative sum of `values[0..n]`.
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rstat_r0_of_sample(values: *const f64, n: usize, out: *mut i32) -> RstatStatus {
    guard(|| {
        let s = sample(values, n, "values")?;
        *out_ref(out, "out")? = rstat::records::r0_of_sample(&s);
        Ok(())
    })
}

/// Averages of `R_0`, `R_+`, `R_-` over `p` random permutations.
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rstat_mean_record_counts(
    values: *const f64,
    n: usize,
    p: usize,
    seed: u64,
    stream: u64,
    out: *mut RstatPermEstimate,
) -> RstatStatus {
    guard(|| {
        let s = sample(values, n, "values")?;
        let e = rstat::perm::mean_record_counts(&s, p, RngSeed::with_stream(seed, stream))?;
        *out_ref(out, "out")? = RstatPermEstimate {
            mean_r0: e.mean_r0,
            mean_r_plus: e.mean_r_plus,
            mean_r_minus: e.mean_r_minus,
            std_err: e.std_err,
            p: e.p,
            ties_seen: e.ties_seen,
        };
        Ok(())
    })
}

/// `sigma_N` for walks of length `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rstat_sigma_n(n: usize, params: RstatSigmaParams, out: *mut f64) -> RstatStatus {
    guard(|| {
        *out_ref(out, "out")? = null::sigma_n(n, &params.into())?;
        Ok(())
    })
}

/// Exact probabilities of `R = 1..=n_steps + 1` upper records (origin
/// included) into `out[0..=n_steps]`; `out_len` must be at least
/// `n_steps + 1`.
///
/// # Safety
/// `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rstat_exact_record_pmf(n_steps: usize, out: *mut f64, out_len: usize) -> RstatStatus {
    guard(|| {
        let pmf = null::exact_record_pmf(n_steps)?;
        if out_len < pmf.probs.len() {
            return Err(Error::InvalidInput(format!("buffer holds {out_len} values, need {}", pmf.probs.len())).into());
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        std::slice::from_raw_parts_mut(out, pmf.probs.len()).copy_from_slice(&pmf.probs);
        Ok(())
    })
}

unsafe fn test_config(cfg: &RstatTestConfig) -> FfiResult<TestConfig> {
    let null_source = match cfg.null_table.as_ref() {
        Some(t) => NullSource::Table(t.inner.clone()),
        None => NullSource::Fresh,
    };
    Ok(TestConfig {
        p_perms: cfg.p_perms,
        m_draws: cfg.m_draws,
        alternative: cfg.alternative.into(),
        equalize: cfg.equalize.into(),
        seed: RngSeed::with_stream(cfg.seed, cfg.stream),
        null_source,
        generator: cfg.generator.to_spec()?,
        sigma: cfg.sigma.into(),
    })
}

fn result_of(r: sntest::TestResult) -> RstatTestResult {
    RstatTestResult {
        statistic: r.statistic,
        raw: r.raw,
        normalized: r.normalized.unwrap_or(f64::NAN),
        p_value: r.p_value,
        n_x: r.n_x,
        n_y: r.n_y.unwrap_or(0),
        p_perms: r.p_perms,
        m_draws: r.m_draws,
        ties_seen: r.ties_seen,
        parametric: r.parametric,
    }
}

/// Single-sample r-test.
///
/// # Safety
/// `values` must point to `n` readable doubles; `cfg` must be valid (its
/// `null_table` NULL or a live handle); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rstat_r_test_single(
    values: *const f64,
    n: usize,
    cfg: *const RstatTestConfig,
    out: *mut RstatTestResult,
) -> RstatStatus {
    guard(|| {
        let s = sample(values, n, "values")?;
        let cfg = test_config(in_ref(cfg, "cfg")?)?;
        let out = out_ref(out, "out")?;
        *out = result_of(sntest::r_test_single(&s, &cfg)?);
        Ok(())
    })
}

/// Two-sample test of the given variant (not `SINGLE_R0`).
///
/// # Safety
/// `x` and `y` must point to `nx` and `ny` readable doubles; `cfg` and `out`
/// as for [`rstat_r_test_single`].
#[no_mangle]
pub unsafe extern "C" fn rstat_r_test_two(
    x: *const f64,
    nx: usize,
    y: *const f64,
    ny: usize,
    variant: RstatVariant,
    cfg: *const RstatTestConfig,
    out: *mut RstatTestResult,
) -> RstatStatus {
    guard(|| {
        let xs = sample(x, nx, "x")?;
        let ys = sample(y, ny, "y")?;
        let cfg = test_config(in_ref(cfg, "cfg")?)?;
        let out = out_ref(out, "out")?;
        *out = result_of(sntest::r_test_two(&xs, &ys, variant.into(), &cfg)?);
        Ok(())
    })
}

/// Build a null table. `n_y` and `equalize` are ignored for `SINGLE_R0`;
/// `generator` may be NULL for the standard Gaussian.
///
/// # Safety
/// `generator` must be NULL or valid; `out` must be writable. The handle
/// written to `*out` must be released with [`rstat_null_free`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn rstat_null_build(
    variant: RstatVariant,
    n: usize,
    n_y: usize,
    equalize: RstatEqualize,
    p_perms: usize,
    generator: *const RstatDistribution,
    m_draws: usize,
    seed: u64,
    stream: u64,
    out: *mut *mut RstatNull,
) -> RstatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let variant: Variant = variant.into();
        let key = if variant.is_two_sample() {
            NullKey::two(variant, n, n_y, equalize.into(), p_perms)
        } else {
            NullKey::single(n, p_perms)
        };
        let spec = match generator.as_ref() {
            Some(g) => g.to_spec()?,
            None => DistributionSpec::default(),
        };
        let inner = null::build_null(key.with_generator(spec), m_draws, RngSeed::with_stream(seed, stream))?;
        *out = Box::into_raw(Box::new(RstatNull { inner }));
        Ok(())
    })
}

/// Load a table written by [`rstat_null_save`] or the command-line tool.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rstat_null_load(path: *const c_char, out: *mut *mut RstatNull) -> RstatStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let path = CStr::from_ptr(in_ref(path, "path")?)
            .to_str()
            .map_err(|_| Error::InvalidInput("path is not UTF-8".into()))?;
        let inner = NullDistribution::load(path)?;
        *out = Box::into_raw(Box::new(RstatNull { inner }));
        Ok(())
    })
}

/// # Safety
/// `table` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rstat_null_save(table: *const RstatNull, path: *const c_char) -> RstatStatus {
    guard(|| {
        let table = in_ref(table, "table")?;
        let path = CStr::from_ptr(in_ref(path, "path")?)
            .to_str()
            .map_err(|_| Error::InvalidInput("path is not UTF-8".into()))?;
        table.inner.save(path)?;
        Ok(())
    })
}

/// Number of draws in the table, or 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rstat_null_len(table: *const RstatNull) -> usize {
    table.as_ref().map_or(0, |t| t.inner.values.len())
}

/// Monte Carlo p-value of `observed` against the table.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rstat_null_p_value(
    table: *const RstatNull,
    observed: f64,
    alternative: RstatAlternative,
    out: *mut f64,
) -> RstatStatus {
    guard(|| {
        let table = in_ref(table, "table")?;
        if observed.is_nan() {
            return Err(Error::InvalidInput("observed value is NaN".into()).into());
        }
        *out_ref(out, "out")? = null::p_value(&table.inner, observed, alternative.into());
        Ok(())
    })
}

/// Release a table; NULL is a no-op.
///
/// # Safety
/// `table` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rstat_null_free(table: *mut RstatNull) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// One-sample t statistic.
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rstat_t_statistic(values: *const f64, n: usize, out: *mut f64) -> RstatStatus {
    guard(|| {
        let s = sample(values, n, "values")?;
        *out_ref(out, "out")? = ref_stats::t_statistic(&s)?;
        Ok(())
    })
}

/// `#{x > 0} - #{x < 0}`.
///
/// # Safety
/// As for [`rstat_t_statistic`].
#[no_mangle]
pub unsafe extern "C" fn rstat_sign_statistic(values: *const f64, n: usize, out: *mut f64) -> RstatStatus {
    guard(|| {
        let s = sample(values, n, "values")?;
        *out_ref(out, "out")? = ref_stats::sign_statistic(&s);
        Ok(())
    })
}

/// Wilcoxon signed-rank sum.
///
/// # Safety
/// As for [`rstat_t_statistic`].
#[no_mangle]
pub unsafe extern "C" fn rstat_wilcoxon_signed_rank(values: *const f64, n: usize, out: *mut f64) -> RstatStatus {
    guard(|| {
        let s = sample(values, n, "values")?;
        *out_ref(out, "out")? = ref_stats::wilcoxon_signed_rank(&s);
        Ok(())
    })
}

/// Centered Mann-Whitney U.
///
/// # Safety
/// `x`, `y` must point to `nx`, `ny` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rstat_mann_whitney_u(
    x: *const f64,
    nx: usize,
    y: *const f64,
    ny: usize,
    out: *mut f64,
) -> RstatStatus {
    guard(|| {
        let (xs, ys) = (sample(x, nx, "x")?, sample(y, ny, "y")?);
        *out_ref(out, "out")? = ref_stats::mann_whitney_u(&xs, &ys);
        Ok(())
    })
}

/// Welch's t.
///
/// # Safety
/// As for [`rstat_mann_whitney_u`].
#[no_mangle]
pub unsafe extern "C" fn rstat_welch_t(x: *const f64, nx: usize, y: *const f64, ny: usize, out: *mut f64) -> RstatStatus {
    guard(|| {
        let (xs, ys) = (sample(x, nx, "x")?, sample(y, ny, "y")?);
        *out_ref(out, "out")? = ref_stats::welch_t(&xs, &ys)?;
        Ok(())
    })
}
