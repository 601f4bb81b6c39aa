//! ROC curves and AUC summaries.
//!
//! Larger scores mean "reject H0". Tied scores move the curve along a
//! diagonal segment, which splits ties evenly.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub method: String,
    /// `(false_positive_rate, true_positive_rate)` from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AucResult {
    pub auc: f64,
    /// Hanley-McNeil standard error (one standard deviation).
    pub std_err: f64,
    pub n_null: usize,
    pub n_alt: usize,
}

fn check(null_scores: &[f64], alt_scores: &[f64]) -> Result<()> {
    if null_scores.is_empty() || alt_scores.is_empty() {
        return Err(Error::invalid("ROC analysis needs non-empty null and alternative scores"));
    }
    if null_scores.iter().chain(alt_scores).any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    Ok(())
}

/// Threshold sweep over the pooled distinct scores, highest first.
pub fn roc(null_scores: &[f64], alt_scores: &[f64]) -> Result<RocCurve> {
    check(null_scores, alt_scores)?;
    let mut pooled: Vec<(f64, bool)> = null_scores
        .iter()
        .map(|&s| (s, false))
        .chain(alt_scores.iter().map(|&s| (s, true)))
        .collect();
    pooled.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (nn, na) = (null_scores.len() as f64, alt_scores.len() as f64);
    let mut points = vec![(0.0, 0.0)];
    let (mut fp, mut tp) = (0usize, 0usize);
    let mut i = 0;
    while i < pooled.len() {
        let s = pooled[i].0;
        while i < pooled.len() && pooled[i].0 == s {
            if pooled[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / nn, tp as f64 / na));
    }
    Ok(RocCurve {
        method: String::new(),
        points,
    })
}

impl RocCurve {
    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }

    /// Trapezoidal area under the curve.
    pub fn area(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
            .sum()
    }

    /// `int_0^fpr_max TPR(f) df`: power in the high-specificity corner.
    pub fn partial_auc_fpr(&self, fpr_max: f64) -> f64 {
        let mut area = 0.0;
        for w in self.points.windows(2) {
            let ((f0, t0), (f1, t1)) = (w[0], w[1]);
            if f1 <= f0 || f0 >= fpr_max {
                continue;
            }
            let hi = f1.min(fpr_max);
            let at = |f: f64| t0 + (t1 - t0) * (f - f0) / (f1 - f0);
            area += (hi - f0) * (at(f0) + at(hi)) / 2.0;
        }
        area
    }

    /// `int_tpr_min^1 (1 - FPR(t)) dt`: specificity in the high-sensitivity
    /// corner.
    pub fn partial_auc_tpr(&self, tpr_min: f64) -> f64 {
        let mut area = 0.0;
        for w in self.points.windows(2) {
            let ((f0, t0), (f1, t1)) = (w[0], w[1]);
            if t1 <= t0 || t1 <= tpr_min {
                continue;
            }
            let lo = t0.max(tpr_min);
            let spec = |t: f64| 1.0 - (f0 + (f1 - f0) * (t - t0) / (t1 - t0));
            area += (t1 - lo) * (spec(lo) + spec(t1)) / 2.0;
        }
        area
    }
}

/// 1-based average ranks of `values` (ties share their mean rank).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// `P(alt > null) + P(tie) / 2` via rank sums, with the Hanley-McNeil
/// standard error.
pub fn auc(null_scores: &[f64], alt_scores: &[f64]) -> Result<AucResult> {
    check(null_scores, alt_scores)?;
    let (nn, na) = (null_scores.len(), alt_scores.len());
    let pooled: Vec<f64> = alt_scores.iter().chain(null_scores).copied().collect();
    let ranks = average_ranks(&pooled);
    let rank_sum_alt: f64 = ranks[..na].iter().sum();
    let u = rank_sum_alt - (na * (na + 1)) as f64 / 2.0;
    let a = u / (na as f64 * nn as f64);
    Ok(AucResult {
        auc: a,
        std_err: hanley_mcneil_se(a, nn, na),
        n_null: nn,
        n_alt: na,
    })
}

pub fn hanley_mcneil_se(a: f64, n_null: usize, n_alt: usize) -> f64 {
    let q1 = a / (2.0 - a);
    let q2 = 2.0 * a * a / (1.0 + a);
    let (nn, na) = (n_null as f64, n_alt as f64);
    let var = (a * (1.0 - a) + (na - 1.0) * (q1 - a * a) + (nn - 1.0) * (q2 - a * a)) / (na * nn);
    var.max(0.0).sqrt()
}
