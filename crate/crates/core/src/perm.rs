//! Permutation-averaged record statistics.
//!
//! Rounds are grouped into fixed blocks of [`BLOCK_ROUNDS`]; block `b` draws
//! from `seed.substream(b)` and all per-round tallies are integers, so the
//! reduction is exact and the estimate is bit-identical for any rayon worker
//! count.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::{records_of_increments, RecordCounts, Sample};
use crate::rng::{bounded_u32, partial_shuffle, shuffle, RngSeed};

/// Permutation rounds drawn from a single substream.
pub const BLOCK_ROUNDS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equalize {
    /// Use `min(Nx, Ny)` elements of each sample, re-drawing the subset of
    /// the larger sample every round.
    #[default]
    Trim,
    /// Use `max(Nx, Ny)` elements, drawing the smaller sample with
    /// replacement every round.
    Resample,
}

impl Equalize {
    pub fn name(self) -> &'static str {
        match self {
            Equalize::Trim => "trim",
            Equalize::Resample => "resample",
        }
    }

    /// Number of differences formed per round.
    pub fn effective_len(self, nx: usize, ny: usize) -> usize {
        match self {
            Equalize::Trim => nx.min(ny),
            Equalize::Resample => nx.max(ny),
        }
    }
}

impl FromStr for Equalize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "trim" => Ok(Equalize::Trim),
            "resample" => Ok(Equalize::Resample),
            other => Err(Error::invalid(format!("unknown equalize strategy {other:?}"))),
        }
    }
}

/// How sample elements are rearranged between rounds.
///
/// Only element-wise permutation is implemented; permuting blocks of
/// consecutive values (for serially correlated data) would slot in here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[non_exhaustive]
pub enum PermutationScheme {
    #[default]
    Elementwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermutationEstimate {
    pub mean_r0: f64,
    pub mean_r_plus: f64,
    pub mean_r_minus: f64,
    pub p: usize,
    /// Monte Carlo standard error of `mean_r0`; NaN when `p == 1`.
    pub std_err: f64,
    pub seed: RngSeed,
    /// Ties with a running extreme, summed over all rounds.
    pub ties_seen: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    rounds: u64,
    sum_r0: i64,
    sum_r0_sq: u64,
    sum_plus: u64,
    sum_minus: u64,
    ties: u64,
}

impl Tally {
    #[inline]
    fn push(&mut self, c: RecordCounts) {
        self.rounds += 1;
        self.sum_r0 += i64::from(c.r0);
        self.sum_r0_sq += (i64::from(c.r0) * i64::from(c.r0)) as u64;
        self.sum_plus += u64::from(c.r_plus);
        self.sum_minus += u64::from(c.r_minus);
        self.ties += u64::from(c.ties);
    }

    fn merge(a: Tally, b: Tally) -> Tally {
        Tally {
            rounds: a.rounds + b.rounds,
            sum_r0: a.sum_r0 + b.sum_r0,
            sum_r0_sq: a.sum_r0_sq + b.sum_r0_sq,
            sum_plus: a.sum_plus + b.sum_plus,
            sum_minus: a.sum_minus + b.sum_minus,
            ties: a.ties + b.ties,
        }
    }

    fn estimate(&self, seed: RngSeed) -> PermutationEstimate {
        let p = self.rounds as f64;
        let mean_r0 = self.sum_r0 as f64 / p;
        let std_err = if self.rounds > 1 {
            let var = (self.sum_r0_sq as f64 - p * mean_r0 * mean_r0) / (p - 1.0);
            (var.max(0.0) / p).sqrt()
        } else {
            f64::NAN
        };
        PermutationEstimate {
            mean_r0,
            mean_r_plus: self.sum_plus as f64 / p,
            mean_r_minus: self.sum_minus as f64 / p,
            p: self.rounds as usize,
            std_err,
            seed,
            ties_seen: self.ties,
        }
    }
}

/// Run `p` rounds split into seeded blocks. `init` builds per-block scratch
/// state and `round` performs one permutation round on it.
fn run_rounds<S, I, R>(p: usize, seed: RngSeed, init: I, round: R) -> Tally
where
    I: Fn() -> S + Sync,
    R: Fn(&mut S, &mut ChaCha8Rng) -> RecordCounts + Sync,
{
    let blocks = p.div_ceil(BLOCK_ROUNDS);
    let block = |b: usize| {
        let mut rng = seed.substream(b as u64).rng();
        let mut state = init();
        let rounds = BLOCK_ROUNDS.min(p - b * BLOCK_ROUNDS);
        let mut tally = Tally::default();
        for _ in 0..rounds {
            tally.push(round(&mut state, &mut rng));
        }
        tally
    };
    if blocks == 1 {
        return block(0);
    }
    (0..blocks)
        .into_par_iter()
        .map(block)
        .reduce(Tally::default, Tally::merge)
}

fn check_perms(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::invalid("number of permutations must be >= 1"));
    }
    Ok(())
}

/// Average `R_0`, `R_+` and `R_-` over `p` uniform random permutations.
pub fn mean_record_counts(sample: &Sample, p: usize, seed: RngSeed) -> Result<PermutationEstimate> {
    mean_record_counts_with(sample, p, seed, PermutationScheme::Elementwise)
}

pub fn mean_record_counts_with(
    sample: &Sample,
    p: usize,
    seed: RngSeed,
    scheme: PermutationScheme,
) -> Result<PermutationEstimate> {
    if sample.len() < 2 {
        return Err(Error::invalid(
            "permutation averages need at least 2 values (R0 is identically 0 for N = 1)",
        ));
    }
    check_perms(p)?;
    let PermutationScheme::Elementwise = scheme;
    let values = sample.values();
    let tally = run_rounds(
        p,
        seed,
        || values.to_vec(),
        |buf, rng| {
            shuffle(buf, rng);
            records_of_increments(buf)
        },
    );
    Ok(tally.estimate(seed))
}

/// Permutation average of `R_0`; see [`mean_record_counts`].
pub fn mean_r0(sample: &Sample, p: usize, seed: RngSeed) -> Result<PermutationEstimate> {
    mean_record_counts(sample, p, seed)
}

/// Element-wise `x - y`. Permuting the result is the same as applying one
/// shared permutation to both samples.
pub fn paired_difference(x: &Sample, y: &Sample) -> Result<Sample> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "paired samples must have equal lengths ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    Sample::new(x.values().iter().zip(y.values()).map(|(a, b)| a - b).collect())
}

/// Permutation average of `R_0` of `x - y` for independent samples, each
/// round permuting `x` and `y` independently and equalising lengths per
/// `equalize`.
pub fn unpaired_mean_rz(
    x: &Sample,
    y: &Sample,
    p: usize,
    equalize: Equalize,
    seed: RngSeed,
) -> Result<PermutationEstimate> {
    check_perms(p)?;
    let (nx, ny) = (x.len(), y.len());
    let m = equalize.effective_len(nx, ny);
    if m < 2 {
        return Err(Error::invalid(format!(
            "unpaired R_z needs at least 2 differences per round, got {m} (Nx={nx}, Ny={ny}, {})",
            equalize.name()
        )));
    }
    let (xv, yv) = (x.values(), y.values());
    let tally = run_rounds(
        p,
        seed,
        || (xv.to_vec(), yv.to_vec(), vec![0.0; m]),
        |(xb, yb, diff), rng| {
            match equalize {
                Equalize::Resample if nx != ny => {
                    // The larger sample keeps every element; the smaller one
                    // is drawn with replacement.
                    let x_small = nx < ny;
                    let (big, small) = if x_small { (&mut *yb, &*xb) } else { (&mut *xb, &*yb) };
                    shuffle(big, rng);
                    let k = small.len() as u32;
                    for (i, d) in diff.iter_mut().enumerate() {
                        let s = small[bounded_u32(rng, k) as usize];
                        *d = if x_small { s - big[i] } else { big[i] - s };
                    }
                }
                _ => {
                    partial_shuffle(xb, m, rng);
                    partial_shuffle(yb, m, rng);
                    for ((d, a), b) in diff.iter_mut().zip(xb.iter()).zip(yb.iter()) {
                        *d = a - b;
                    }
                }
            }
            records_of_increments(diff)
        },
    );
    Ok(tally.estimate(seed))
}

/// Identifier of a record-based test statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "single_r0")]
    SingleR0,
    #[serde(rename = "rz_paired")]
    RzPaired,
    #[serde(rename = "rz_unpaired")]
    RzUnpaired,
    #[serde(rename = "rplus2")]
    RPlus2,
    #[serde(rename = "rminus2")]
    RMinus2,
    #[serde(rename = "rd")]
    Rd,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::SingleR0,
        Variant::RzPaired,
        Variant::RzUnpaired,
        Variant::RPlus2,
        Variant::RMinus2,
        Variant::Rd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SingleR0 => "single_r0",
            Variant::RzPaired => "rz_paired",
            Variant::RzUnpaired => "rz_unpaired",
            Variant::RPlus2 => "rplus2",
            Variant::RMinus2 => "rminus2",
            Variant::Rd => "rd",
        }
    }

    pub fn is_two_sample(self) -> bool {
        !matches!(self, Variant::SingleR0)
    }

    /// Variants whose null depends on the data distribution.
    pub fn is_parametric(self) -> bool {
        matches!(self, Variant::RPlus2 | Variant::RMinus2 | Variant::Rd)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown statistic variant {s:?}")))
    }
}

/// A record statistic evaluated on data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticValue {
    pub value: f64,
    pub ties: u64,
    /// Length of the walk(s) the statistic was computed on.
    pub walk_len: usize,
}

/// Evaluate `variant` on `x` (and `y` for two-sample variants).
///
/// Two-sample statistics are `x`-quantity minus `y`-quantity. The
/// per-sample averages behind `rplus2`, `rminus2` and `rd` use the same
/// permutation stream for both samples, so identical inputs give exactly 0
/// and swapping the inputs negates the value.
pub fn evaluate(
    variant: Variant,
    x: &Sample,
    y: Option<&Sample>,
    p: usize,
    equalize: Equalize,
    seed: RngSeed,
) -> Result<StatisticValue> {
    let two = || {
        y.ok_or_else(|| Error::invalid(format!("{variant} needs a second sample")))
    };
    match variant {
        Variant::SingleR0 => {
            let e = mean_r0(x, p, seed)?;
            Ok(StatisticValue {
                value: e.mean_r0,
                ties: e.ties_seen,
                walk_len: x.len(),
            })
        }
        Variant::RzPaired => {
            let z = paired_difference(x, two()?)?;
            let e = mean_r0(&z, p, seed)?;
            Ok(StatisticValue {
                value: e.mean_r0,
                ties: e.ties_seen,
                walk_len: z.len(),
            })
        }
        Variant::RzUnpaired => {
            let y = two()?;
            let e = unpaired_mean_rz(x, y, p, equalize, seed)?;
            Ok(StatisticValue {
                value: e.mean_r0,
                ties: e.ties_seen,
                walk_len: equalize.effective_len(x.len(), y.len()),
            })
        }
        Variant::RPlus2 | Variant::RMinus2 | Variant::Rd => {
            let y = two()?;
            let ex = mean_record_counts(x, p, seed)?;
            let ey = mean_record_counts(y, p, seed)?;
            let plus = ex.mean_r_plus - ey.mean_r_plus;
            let minus = ex.mean_r_minus - ey.mean_r_minus;
            let value = match variant {
                Variant::RPlus2 => plus,
                Variant::RMinus2 => minus,
                _ => plus - minus,
            };
            Ok(StatisticValue {
                value,
                ties: ex.ties_seen + ey.ties_seen,
                walk_len: x.len().min(y.len()),
            })
        }
    }
}
