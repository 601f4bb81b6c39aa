//! One- and two-sample hypothesis tests of the signal-to-noise ratio.

use serde::Serialize;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::null::{build_null, p_value, sigma_n, Alternative, NullDistribution, NullKey, SigmaParams};
use crate::perm::{evaluate, Equalize, Variant};
use crate::records::Sample;
use crate::rng::RngSeed;

/// Substream of `TestConfig::seed` used for the observed statistic.
const OBSERVED_STREAM: u64 = 0;
/// Substream used when the null is built on the fly.
const NULL_STREAM: u64 = 1;

#[derive(Debug, Clone, Default)]
pub enum NullSource {
    /// Build a null table for this test.
    #[default]
    Fresh,
    /// Use a prebuilt table; its key must match the test exactly.
    Table(NullDistribution),
}

#[derive(Debug, Clone)]
pub struct TestConfig {
    pub p_perms: usize,
    pub m_draws: usize,
    pub alternative: Alternative,
    pub equalize: Equalize,
    pub seed: RngSeed,
    pub null_source: NullSource,
    /// Data law used to build nulls. Only material for the parametric
    /// variants (`rplus2`, `rminus2`, `rd`).
    pub generator: DistributionSpec,
    pub sigma: SigmaParams,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            p_perms: 10_000,
            m_draws: 10_000,
            alternative: Alternative::TwoSided,
            equalize: Equalize::Trim,
            seed: RngSeed::new(0),
            null_source: NullSource::Fresh,
            generator: DistributionSpec::default(),
            sigma: SigmaParams::default(),
        }
    }
}

impl TestConfig {
    fn null_for(&self, key: NullKey) -> Result<std::borrow::Cow<'_, NullDistribution>> {
        match &self.null_source {
            NullSource::Fresh => Ok(std::borrow::Cow::Owned(build_null(
                key,
                self.m_draws,
                self.seed.substream(NULL_STREAM),
            )?)),
            NullSource::Table(table) => {
                table.check_key(&key)?;
                Ok(std::borrow::Cow::Borrowed(table))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub method: Variant,
    /// `r` for the single-sample test, the raw averaged statistic otherwise.
    pub statistic: f64,
    /// Permutation average before any normalisation.
    pub raw: f64,
    /// `raw / sigma_N` where a normalisation applies.
    pub normalized: Option<f64>,
    pub p_value: f64,
    pub alternative: Alternative,
    #[serde(rename = "n")]
    pub n_x: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_y: Option<usize>,
    pub p_perms: usize,
    pub m_draws: usize,
    pub seed: RngSeed,
    pub ties_seen: u64,
    /// The null depends on the assumed data law.
    pub parametric: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Single-sample r-test of zero signal-to-noise ratio.
pub fn r_test_single(sample: &Sample, cfg: &TestConfig) -> Result<TestResult> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::invalid("the r-test needs at least 2 values"));
    }
    if sample.values().iter().all(|&v| v == 0.0) {
        return Err(Error::degenerate("every value is zero; the walk never leaves the origin"));
    }
    if n < 10 {
        log::warn!("n = {n} is below the range of the sigma_N fit; the p-value is still exact up to Monte Carlo error");
    }
    let seed = cfg.seed.substream(OBSERVED_STREAM);
    let stat = evaluate(Variant::SingleR0, sample, None, cfg.p_perms, cfg.equalize, seed)?;
    let r = stat.value / sigma_n(n, &cfg.sigma)?;
    let key = NullKey::single(n, cfg.p_perms).with_generator(cfg.generator);
    let null = cfg.null_for(key)?;
    Ok(TestResult {
        method: Variant::SingleR0,
        statistic: r,
        raw: stat.value,
        normalized: Some(r),
        p_value: p_value(&null, stat.value, cfg.alternative),
        alternative: cfg.alternative,
        n_x: n,
        n_y: None,
        p_perms: cfg.p_perms,
        m_draws: null.m_draws,
        seed: cfg.seed,
        ties_seen: stat.ties,
        parametric: false,
        note: None,
    })
}

/// Two-sample test; H0: both samples share distribution and SNR.
///
/// Statistics are `x`-quantity minus `y`-quantity, so with the default
/// orientation `greater` tests for a higher SNR of `x` (`rminus2` is the
/// exception: fewer lower records in `x` makes it negative).
pub fn r_test_two(x: &Sample, y: &Sample, variant: Variant, cfg: &TestConfig) -> Result<TestResult> {
    if !variant.is_two_sample() {
        return Err(Error::invalid("use r_test_single for single_r0"));
    }
    if variant == Variant::RzPaired && x.len() != y.len() {
        return Err(Error::invalid(format!(
            "paired test needs equal lengths ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::invalid("both samples need at least 2 values"));
    }
    let seed = cfg.seed.substream(OBSERVED_STREAM);
    let stat = evaluate(variant, x, Some(y), cfg.p_perms, cfg.equalize, seed)?;
    let normalized = match variant {
        Variant::RzPaired | Variant::RzUnpaired => Some(stat.value / sigma_n(stat.walk_len, &cfg.sigma)?),
        _ => None,
    };
    let key = NullKey::two(variant, x.len(), y.len(), cfg.equalize, cfg.p_perms).with_generator(cfg.generator);
    let null = cfg.null_for(key)?;
    let parametric = variant.is_parametric();
    Ok(TestResult {
        method: variant,
        statistic: stat.value,
        raw: stat.value,
        normalized,
        p_value: p_value(&null, stat.value, cfg.alternative),
        alternative: cfg.alternative,
        n_x: x.len(),
        n_y: Some(y.len()),
        p_perms: cfg.p_perms,
        m_draws: null.m_draws,
        seed: cfg.seed,
        ties_seen: stat.ties,
        parametric,
        note: parametric.then(|| {
            format!(
                "PARAMETRIC NULL: p-value assumes both samples follow {} (the law of {} is distribution-dependent)",
                null.key.generator, variant
            )
        }),
    })
}
