//! Classical statistics used as power baselines.
//!
//! All functions return raw scores (no p-values). Signs are oriented so that
//! a larger value means more evidence that the mean of the (first) sample is
//! positive or larger.

use crate::error::{Error, Result};
use crate::records::Sample;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased (N - 1) variance.
fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

/// One-sample t: `(mean / sd) * sqrt(N)`.
pub fn t_statistic(sample: &Sample) -> Result<f64> {
    let v = sample.values();
    if v.len() < 2 {
        return Err(Error::invalid("t statistic needs at least 2 values"));
    }
    let sd = variance(v).sqrt();
    if sd == 0.0 {
        return Err(Error::degenerate("sample has zero variance"));
    }
    Ok(mean(v) / sd * (v.len() as f64).sqrt())
}

/// `#{x > 0} - #{x < 0}`.
pub fn sign_statistic(sample: &Sample) -> f64 {
    sample
        .values()
        .iter()
        .map(|&x| {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
        .sum()
}

/// 1-based ranks with ties sharing their average rank. Input must be sorted.
fn average_ranks_sorted(sorted: &[f64]) -> Vec<f64> {
    let mut ranks = vec![0.0; sorted.len()];
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        ranks[i..j].fill(avg);
        i = j;
    }
    ranks
}

/// Signed-rank sum `sum sign(x) * rank(|x|)`, zeros dropped, tied
/// magnitudes sharing the average rank.
pub fn wilcoxon_signed_rank(sample: &Sample) -> f64 {
    let mut nonzero: Vec<f64> = sample.values().iter().copied().filter(|&x| x != 0.0).collect();
    nonzero.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let mags: Vec<f64> = nonzero.iter().map(|x| x.abs()).collect();
    average_ranks_sorted(&mags)
        .iter()
        .zip(&nonzero)
        .map(|(r, &x)| r.copysign(x))
        .sum()
}

/// Centered Mann-Whitney U: `#{x_i > y_j} + #{ties}/2 - Nx*Ny/2`.
pub fn mann_whitney_u(x: &Sample, y: &Sample) -> f64 {
    let (nx, ny) = (x.len(), y.len());
    let mut pooled: Vec<(f64, bool)> = x
        .values()
        .iter()
        .map(|&v| (v, true))
        .chain(y.values().iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let sorted: Vec<f64> = pooled.iter().map(|p| p.0).collect();
    let rank_sum_x: f64 = average_ranks_sorted(&sorted)
        .iter()
        .zip(&pooled)
        .filter(|(_, p)| p.1)
        .map(|(r, _)| r)
        .sum();
    let u = rank_sum_x - (nx * (nx + 1)) as f64 / 2.0;
    u - (nx * ny) as f64 / 2.0
}

/// Welch's t: `(mean(x) - mean(y)) / sqrt(var(x)/Nx + var(y)/Ny)`.
pub fn welch_t(x: &Sample, y: &Sample) -> Result<f64> {
    let (xv, yv) = (x.values(), y.values());
    if xv.len() < 2 || yv.len() < 2 {
        return Err(Error::invalid("Welch statistic needs at least 2 values per sample"));
    }
    let se2 = variance(xv) / xv.len() as f64 + variance(yv) / yv.len() as f64;
    if se2 == 0.0 {
        return Err(Error::degenerate("both samples have zero variance"));
    }
    Ok((mean(xv) - mean(yv)) / se2.sqrt())
}
