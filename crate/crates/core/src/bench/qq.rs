//! Normal quantile-quantile data for the null law of `mean_r0`.

use std::io::Write;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::Result;
use crate::null::{build_null, NullKey};
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QqPoint {
    pub normal_q: f64,
    pub empirical_q: f64,
}

/// Sorted null draws of `mean_r0`, standardised by their own mean and sd,
/// against standard normal quantiles at plotting positions `(i - 1/2) / m`.
pub fn qq_data(n: usize, m_draws: usize, p_perms: usize, seed: RngSeed) -> Result<Vec<QqPoint>> {
    let null = build_null(NullKey::single(n, p_perms), m_draws, seed)?;
    Ok(qq_points(&null.values))
}

/// QQ pairs for sorted `values`.
pub fn qq_points(values: &[f64]) -> Vec<QqPoint> {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let normal = Normal::standard();
    values
        .iter()
        .enumerate()
        .map(|(i, v)| QqPoint {
            normal_q: normal.inverse_cdf((i as f64 + 0.5) / m),
            empirical_q: (v - mean) / sd,
        })
        .collect()
}

/// Largest `|empirical - normal|` over points with `|normal_q| <= within`.
pub fn max_gap(points: &[QqPoint], within: f64) -> f64 {
    points
        .iter()
        .filter(|p| p.normal_q.abs() <= within)
        .map(|p| (p.empirical_q - p.normal_q).abs())
        .fold(0.0, f64::max)
}

/// `normal_q,empirical_q`
pub fn write_csv<W: Write>(points: &[QqPoint], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "normal_q,empirical_q")?;
    for p in points {
        writeln!(w, "{},{}", p.normal_q, p.empirical_q)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn gaussian_input_is_near_identity() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut v: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        v.sort_by(f64::total_cmp);
        let pts = qq_points(&v);
        assert!(max_gap(&pts, 2.0) < 0.06, "{}", max_gap(&pts, 2.0));
    }

    #[test]
    fn plotting_positions_are_symmetric() {
        let pts = qq_points(&[1.0, 2.0, 3.0, 4.0]);
        assert!((pts[0].normal_q + pts[3].normal_q).abs() < 1e-12);
        assert!((pts[0].empirical_q + pts[3].empirical_q).abs() < 1e-12);
        assert!(pts.windows(2).all(|w| w[0].normal_q < w[1].normal_q));
    }

    #[test]
    fn small_run() {
        let pts = qq_data(50, 400, 50, RngSeed::new(2)).unwrap();
        assert_eq!(pts.len(), 400);
        assert!(max_gap(&pts, 2.0) < 0.5);
        let mut out = Vec::new();
        write_csv(&pts, &mut out).unwrap();
        assert!(out.starts_with(b"normal_q,empirical_q\n"));
    }
}
