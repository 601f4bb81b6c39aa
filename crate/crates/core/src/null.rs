//! Record-number laws, the `sigma_N` normalisation, and empirical null
//! distributions of the permutation-averaged statistics.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::perm::{evaluate, Equalize, Variant};
use crate::rng::RngSeed;

/// Largest walk length for which the pmf is also kept as exact rationals.
pub const EXACT_RATIONAL_MAX: usize = 64;
pub const MAX_PMF_STEPS: usize = 10_000;
pub const MIN_NULL_DRAWS: usize = 100;
pub const TABLE_VERSION: u32 = 1;

/// Law of the number of upper records of an `n_steps`-step walk with
/// symmetric continuous i.i.d. increments, counting the starting point.
///
/// `P(R) = C(2N - R + 1, N) / 2^(2N - R + 1)` for `R = 1, ..., N + 1`.
#[derive(Debug, Clone)]
pub struct ExactRecordPmf {
    pub n_steps: usize,
    /// `probs[r - 1] = P(R = r)`.
    pub probs: Vec<f64>,
    /// Exact values, present when `n_steps <= EXACT_RATIONAL_MAX`.
    pub exact: Option<Vec<BigRational>>,
}

impl ExactRecordPmf {
    pub fn prob(&self, r: usize) -> f64 {
        if r == 0 || r > self.probs.len() {
            0.0
        } else {
            self.probs[r - 1]
        }
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| ((i + 1) as f64 - m).powi(2) * p)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn cdf(&self, r: usize) -> f64 {
        self.probs.iter().take(r).sum()
    }
}

pub fn exact_record_pmf(n_steps: usize) -> Result<ExactRecordPmf> {
    if !(1..=MAX_PMF_STEPS).contains(&n_steps) {
        return Err(Error::invalid(format!(
            "n_steps must be in 1..={MAX_PMF_STEPS}, got {n_steps}"
        )));
    }
    let n = n_steps;
    if n <= EXACT_RATIONAL_MAX {
        // C(k, n) for k = n..=2n, built upwards from C(n, n) = 1.
        let mut binom = vec![BigUint::one()];
        for k in n..2 * n {
            let next = binom.last().unwrap() * BigUint::from(k + 1) / BigUint::from(k + 1 - n);
            binom.push(next);
        }
        let exact: Vec<BigRational> = (1..=n + 1)
            .map(|r| {
                let k = 2 * n - r + 1;
                BigRational::new(
                    BigInt::from(binom[k - n].clone()),
                    BigInt::one() << k,
                )
            })
            .collect();
        let probs = exact
            .iter()
            .map(|q| q.to_f64().expect("probability is representable"))
            .collect();
        return Ok(ExactRecordPmf {
            n_steps,
            probs,
            exact: Some(exact),
        });
    }
    let probs = real_pmf(n);
    Ok(ExactRecordPmf {
        n_steps,
        probs,
        exact: None,
    })
}

fn real_pmf(n: usize) -> Vec<f64> {
    // Binomial terms C(k, n) / 2^k relative to the largest one (k = 2n),
    // via P(k - 1) / P(k) = 2 (k - n) / k, then normalised by their sum.
    // Log-gamma differences lose ~1e-11 to cancellation at n = 10^4; the
    // recurrence keeps the relative error near n * eps.
    let mut rel = vec![0.0; n + 1];
    rel[0] = 1.0;
    for r in 2..=n + 1 {
        let k = 2 * n - r + 2;
        rel[r - 1] = rel[r - 2] * 2.0 * (k - n) as f64 / k as f64;
    }
    let total: f64 = rel.iter().sum();
    rel.into_iter().map(|v| v / total).collect()
}

/// Large-`N` Gaussian limit of the record number: `(sqrt(4N/pi), (2 - 4/pi) N)`.
///
/// The variance prefactor is `2 - 4/pi`; the exact law's variance converges
/// to it (see the `pmf_variance_approaches_asymptote` test).
pub fn asymptotic_record_law(n_steps: usize) -> Result<(f64, f64)> {
    if n_steps < 1 {
        return Err(Error::invalid("n_steps must be >= 1"));
    }
    let n = n_steps as f64;
    let pi = std::f64::consts::PI;
    Ok(((4.0 * n / pi).sqrt(), (2.0 - 4.0 / pi) * n))
}

/// Constants of `sigma_N = sqrt((2 - 4/pi) N) * a * (1 - b N^-c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for SigmaParams {
    fn default() -> Self {
        SigmaParams {
            a: 1.66,
            b: 0.88,
            c: 0.5,
        }
    }
}

impl SigmaParams {
    pub fn validate(&self) -> Result<()> {
        if self.a > 0.0 && self.b >= 0.0 && self.c > 0.0 && self.c < 1.0 {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "sigma parameters need a > 0, b >= 0, 0 < c < 1; got {self:?}"
            )))
        }
    }

    /// The formula itself, for any real `n > 0` and without validation.
    pub fn eval(&self, n: f64) -> f64 {
        ((2.0 - 4.0 / std::f64::consts::PI) * n).sqrt() * self.a * (1.0 - self.b * n.powf(-self.c))
    }
}

/// Standard deviation of the permutation-averaged `R_0` for walks of length `n`.
///
/// The constants were fitted on `10 <= n <= 1000`; smaller `n` logs a warning.
pub fn sigma_n(n: usize, params: &SigmaParams) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("sigma_N needs n >= 2, got {n}")));
    }
    params.validate()?;
    if n < 10 {
        log::warn!("sigma_N fit is unreliable below n = 10 (n = {n})");
    }
    Ok(params.eval(n as f64))
}

/// `r = mean_r0 / sigma_N`.
pub fn r_statistic(mean_r0: f64, n: usize, params: &SigmaParams) -> Result<f64> {
    Ok(mean_r0 / sigma_n(n, params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    #[default]
    TwoSided,
    Greater,
    Less,
}

impl Alternative {
    pub fn name(self) -> &'static str {
        match self {
            Alternative::TwoSided => "two_sided",
            Alternative::Greater => "greater",
            Alternative::Less => "less",
        }
    }
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "two_sided" | "two" => Ok(Alternative::TwoSided),
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            other => Err(Error::invalid(format!("unknown alternative {other:?}"))),
        }
    }
}

/// Everything a null table depends on. Tables are only reused for tests
/// whose key matches exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullKey {
    pub variant: Variant,
    pub n: usize,
    /// Length of the second sample (two-sample variants only).
    pub n_y: Option<usize>,
    /// Only meaningful for `rz_unpaired`.
    pub equalize: Option<Equalize>,
    pub p_perms: usize,
    pub generator: DistributionSpec,
}

impl NullKey {
    pub fn single(n: usize, p_perms: usize) -> NullKey {
        NullKey {
            variant: Variant::SingleR0,
            n,
            n_y: None,
            equalize: None,
            p_perms,
            generator: DistributionSpec::default(),
        }
    }

    /// Key for a two-sample variant; `equalize` is dropped unless the
    /// variant uses it.
    pub fn two(variant: Variant, n_x: usize, n_y: usize, equalize: Equalize, p_perms: usize) -> NullKey {
        NullKey {
            variant,
            n: n_x,
            n_y: Some(n_y),
            equalize: (variant == Variant::RzUnpaired).then_some(equalize),
            p_perms,
            generator: DistributionSpec::default(),
        }
    }

    pub fn with_generator(mut self, generator: DistributionSpec) -> NullKey {
        self.generator = generator;
        self
    }

    fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        if self.generator.theta != 0.0 {
            return Err(Error::invalid(format!(
                "null generator must have theta = 0, got {}",
                self.generator
            )));
        }
        if self.p_perms == 0 {
            return Err(Error::invalid("p_perms must be >= 1"));
        }
        match (self.variant.is_two_sample(), self.n_y) {
            (true, None) => Err(Error::invalid(format!("{} needs n_y", self.variant))),
            (false, Some(_)) => Err(Error::invalid("single-sample null takes no n_y")),
            _ => Ok(()),
        }
    }

    /// Whether the statistic's null law is symmetric about zero, in which
    /// case draws are generated in antithetic pairs `(v, -v)`.
    pub fn is_symmetric(&self) -> bool {
        let equal_lengths = self.n_y == Some(self.n);
        let symmetric_data = self.generator.is_symmetric();
        match self.variant {
            Variant::SingleR0 => symmetric_data,
            // x - y with x, y i.i.d. is symmetric whatever the law.
            Variant::RzPaired => true,
            Variant::RzUnpaired | Variant::Rd => symmetric_data || equal_lengths,
            Variant::RPlus2 | Variant::RMinus2 => equal_lengths,
        }
    }
}

impl fmt::Display for NullKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} n={}", self.variant, self.n)?;
        if let Some(ny) = self.n_y {
            write!(f, " n_y={ny}")?;
        }
        if let Some(eq) = self.equalize {
            write!(f, " equalize={}", eq.name())?;
        }
        write!(f, " p_perms={} generator={}", self.p_perms, self.generator)
    }
}

/// Sorted Monte Carlo draws of a statistic under the null hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullDistribution {
    pub key: NullKey,
    pub m_draws: usize,
    pub values: Vec<f64>,
    pub seed: RngSeed,
}

#[derive(Debug, Clone, Serialize)]
pub struct NullSummary {
    pub mean: f64,
    pub sd: f64,
    /// `(probability, quantile)` pairs.
    pub quantiles: Vec<(f64, f64)>,
}

impl NullDistribution {
    pub fn variant(&self) -> Variant {
        self.key.variant
    }

    pub fn n(&self) -> usize {
        self.key.n
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sd(&self) -> f64 {
        let m = self.mean();
        let n = self.values.len() as f64;
        (self.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    /// Empirical quantile by linear interpolation between order statistics.
    pub fn quantile(&self, prob: f64) -> f64 {
        let v = &self.values;
        let h = prob.clamp(0.0, 1.0) * (v.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        v[lo] + (h - lo as f64) * (v[hi] - v[lo])
    }

    pub fn summary(&self) -> NullSummary {
        NullSummary {
            mean: self.mean(),
            sd: self.sd(),
            quantiles: [0.005, 0.025, 0.05, 0.5, 0.95, 0.975, 0.995]
                .into_iter()
                .map(|q| (q, self.quantile(q)))
                .collect(),
        }
    }

    /// Refuse to use this table for a test whose key differs.
    pub fn check_key(&self, expected: &NullKey) -> Result<()> {
        if &self.key == expected {
            return Ok(());
        }
        Err(Error::mismatch(format!(
            "table is for [{}] but the test needs [{}]",
            self.key, expected
        )))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        let k = &self.key;
        writeln!(w, "# version: {TABLE_VERSION}")?;
        writeln!(w, "# variant: {}", k.variant)?;
        writeln!(w, "# n: {}", k.n)?;
        if let Some(ny) = k.n_y {
            writeln!(w, "# n_y: {ny}")?;
        }
        if let Some(eq) = k.equalize {
            writeln!(w, "# equalize: {}", eq.name())?;
        }
        writeln!(w, "# m_draws: {}", self.m_draws)?;
        writeln!(w, "# p_perms: {}", k.p_perms)?;
        writeln!(w, "# generator: {}", k.generator)?;
        writeln!(w, "# seed: {}", self.seed)?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<NullDistribution> {
        let path = path.as_ref();
        let file = File::open(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("cannot open {}: {e}", path.display())))?;
        Self::read_from(BufReader::new(file))
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<NullDistribution> {
        let mut header: Vec<(String, String)> = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::format(format!("line {}: bad header {line:?}", lineno + 1)))?;
                header.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::format(format!("line {}: bad value {line:?}", lineno + 1)))?;
            if !v.is_finite() {
                return Err(Error::format(format!("line {}: non-finite value", lineno + 1)));
            }
            values.push(v);
        }
        let get = |key: &str| -> Result<Option<&str>> {
            let mut it = header.iter().filter(|(k, _)| k == key);
            let first = it.next().map(|(_, v)| v.as_str());
            if it.next().is_some() {
                return Err(Error::format(format!("duplicate header key {key:?}")));
            }
            Ok(first)
        };
        let need = |key: &str| -> Result<&str> {
            get(key)?.ok_or_else(|| Error::format(format!("missing header key {key:?}")))
        };
        let num = |key: &str, s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::format(format!("header {key:?}: bad integer {s:?}")))
        };
        let version: u32 = need("version")?
            .parse()
            .map_err(|_| Error::format("bad version"))?;
        if version != TABLE_VERSION {
            return Err(Error::format(format!(
                "unsupported table version {version} (expected {TABLE_VERSION})"
            )));
        }
        let variant: Variant = need("variant")?
            .parse()
            .map_err(|e: Error| Error::format(e.to_string()))?;
        let n = num("n", need("n")?)?;
        let n_y = get("n_y")?.map(|s| num("n_y", s)).transpose()?;
        let equalize = get("equalize")?
            .map(|s| s.parse::<Equalize>().map_err(|e| Error::format(e.to_string())))
            .transpose()?;
        let m_draws = num("m_draws", need("m_draws")?)?;
        let p_perms = num("p_perms", need("p_perms")?)?;
        let generator: DistributionSpec = need("generator")?
            .parse()
            .map_err(|e: Error| Error::format(e.to_string()))?;
        let seed: RngSeed = need("seed")?.parse().map_err(Error::format)?;

        if values.len() != m_draws {
            return Err(Error::format(format!(
                "expected {m_draws} values, found {} (truncated file?)",
                values.len()
            )));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::format("values are not sorted"));
        }
        let key = NullKey {
            variant,
            n,
            n_y,
            equalize,
            p_perms,
            generator,
        };
        key.validate().map_err(|e| Error::format(e.to_string()))?;
        Ok(NullDistribution {
            key,
            m_draws,
            values,
            seed,
        })
    }
}

/// Monte Carlo null of the statistic described by `key`.
///
/// Draw `i` generates its data and permutations from `seed.substream(i)`.
/// For symmetric nulls (see [`NullKey::is_symmetric`]) half the draws are
/// generated and each is paired with its negation, making the table exactly
/// symmetric.
pub fn build_null(key: NullKey, m_draws: usize, seed: RngSeed) -> Result<NullDistribution> {
    key.validate()?;
    if m_draws < MIN_NULL_DRAWS {
        return Err(Error::invalid(format!(
            "m_draws must be >= {MIN_NULL_DRAWS}, got {m_draws}"
        )));
    }
    let symmetric = key.is_symmetric();
    let base_draws = if symmetric { m_draws.div_ceil(2) } else { m_draws };
    let draw = |i: usize| -> Result<f64> {
        let unit = seed.substream(i as u64);
        let x = key.generator.generate(key.n, unit.substream(0))?;
        let y = match key.n_y {
            Some(ny) => Some(key.generator.generate(ny, unit.substream(1))?),
            None => None,
        };
        let stat = evaluate(
            key.variant,
            &x,
            y.as_ref(),
            key.p_perms,
            key.equalize.unwrap_or_default(),
            unit.substream(2),
        )?;
        Ok(stat.value)
    };
    let base: Vec<f64> = (0..base_draws)
        .into_par_iter()
        .map(draw)
        .collect::<Result<_>>()?;
    let mut values: Vec<f64> = if symmetric {
        base.iter().flat_map(|&v| [v, -v]).take(m_draws).collect()
    } else {
        base
    };
    values.sort_by(f64::total_cmp);
    Ok(NullDistribution {
        key,
        m_draws,
        values,
        seed,
    })
}

/// Add-one Monte Carlo p-value; always in `(0, 1]`.
pub fn p_value(null: &NullDistribution, observed: f64, alternative: Alternative) -> f64 {
    let v = &null.values;
    let denom = (v.len() + 1) as f64;
    let greater = || (1 + v.len() - v.partition_point(|&x| x < observed)) as f64 / denom;
    let less = || (1 + v.partition_point(|&x| x <= observed)) as f64 / denom;
    match alternative {
        Alternative::Greater => greater(),
        Alternative::Less => less(),
        Alternative::TwoSided => (2.0 * greater().min(less())).min(1.0),
    }
}
