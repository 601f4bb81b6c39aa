//! Fit of the `sigma_N` constants from Monte Carlo record averages.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::optim::{nelder_mead, SimplexOptions};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::null::SigmaParams;
use crate::perm::mean_r0;
use crate::rng::RngSeed;

const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub n: usize,
    /// Standard deviation of `mean_r0` across samples.
    pub sd: f64,
    /// Standard error of `sd`, `sd / sqrt(2 (n_samples - 1))`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub se_a: f64,
    pub se_b: f64,
    pub se_c: f64,
    pub chi2: f64,
    pub grid: Vec<GridPoint>,
}

impl SigmaFit {
    pub fn params(&self) -> SigmaParams {
        SigmaParams {
            a: self.a,
            b: self.b,
            c: self.c,
        }
    }

    /// Grid as `n,sd,se` CSV followed by the fit as `#` comment lines.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "n,sd,se")?;
        for g in &self.grid {
            writeln!(w, "{},{},{}", g.n, g.sd, g.se)?;
        }
        writeln!(w, "# a: {} +- {}", self.a, self.se_a)?;
        writeln!(w, "# b: {} +- {}", self.b, self.se_b)?;
        writeln!(w, "# c: {} +- {}", self.c, self.se_c)?;
        writeln!(w, "# chi2: {}", self.chi2)
    }
}

/// `floor(10 * 100^(k/20))` for `k = 0..=20`, i.e. 21 lengths from 10 to 1000.
pub fn full_grid() -> Vec<usize> {
    (0..=20).map(|k| grid_point(k, 20)).collect()
}

/// Every other point of [`full_grid`]: 11 lengths from 10 to 1000.
pub fn coarse_grid() -> Vec<usize> {
    (0..=20).step_by(2).map(|k| grid_point(k, 20)).collect()
}

fn grid_point(k: u32, steps: u32) -> usize {
    // The epsilon keeps exact powers such as 100 from flooring to 99.
    (10.0 * 100f64.powf(f64::from(k) / f64::from(steps)) + 1e-9).floor() as usize
}

/// Monte Carlo `sd` of `mean_r0` over `n_samples` standard Gaussian samples
/// of length `n`. Sample `i` uses `seed.substream(i)`.
pub fn measure_sd(n: usize, n_samples: usize, p_perms: usize, seed: RngSeed) -> Result<GridPoint> {
    if n_samples < 2 {
        return Err(Error::invalid("need at least 2 samples to estimate an sd"));
    }
    let gauss = DistributionSpec::gaussian(0.0);
    let values: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let unit = seed.substream(i as u64);
            let x = gauss.generate(n, unit.substream(0))?;
            Ok(mean_r0(&x, p_perms, unit.substream(1))?.mean_r0)
        })
        .collect::<Result<_>>()?;
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    Ok(GridPoint {
        n,
        sd,
        se: sd / (2.0 * (m - 1.0)).sqrt(),
    })
}

/// Measure every grid length (length `n` uses `seed.substream(n)`) and fit.
pub fn calibrate_sigma(n_grid: &[usize], n_samples: usize, p_perms: usize, seed: RngSeed) -> Result<SigmaFit> {
    if n_grid.len() < 4 {
        return Err(Error::invalid("the fit needs at least 4 grid lengths"));
    }
    if let Some(&bad) = n_grid.iter().find(|&&n| !(10..=10_000).contains(&n)) {
        return Err(Error::invalid(format!("grid length {bad} outside [10, 10000]")));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::invalid(format!("n_samples must be >= {MIN_SAMPLES}")));
    }
    if p_perms == 0 {
        return Err(Error::invalid("p_perms must be >= 1"));
    }
    let grid = n_grid
        .iter()
        .map(|&n| {
            log::info!("measuring sd of mean_r0 at n = {n}");
            measure_sd(n, n_samples, p_perms, seed.substream(n as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    fit_sigma(&grid)
}

fn shape(p: &[f64], n: f64) -> f64 {
    p[0] * (1.0 - p[1] * n.powf(-p[2]))
}

fn feasible(p: &[f64]) -> bool {
    p[0] > 0.0 && p[1] >= 0.0 && p[2] > 0.0 && p[2] < 1.0
}

/// Weighted least squares of `sd / sqrt((2 - 4/pi) n)` against
/// `a (1 - b n^-c)`, weights `1 / se^2`.
pub fn fit_sigma(grid: &[GridPoint]) -> Result<SigmaFit> {
    let raw: Vec<(usize, f64, f64)> = grid.iter().map(|g| (g.n, g.sd, g.se)).collect();
    let fail = |reason: String| Error::NonConvergence {
        reason,
        grid: raw.clone(),
    };
    if grid.len() < 4 {
        return Err(fail(format!("{} grid points cannot determine 3 parameters", grid.len())));
    }
    if grid.iter().any(|g| !(g.sd.is_finite() && g.se.is_finite() && g.se > 0.0)) {
        return Err(fail("grid has non-finite or zero-error points".into()));
    }
    let scale = 2.0 - 4.0 / std::f64::consts::PI;
    // (n, y, weight)
    let pts: Vec<(f64, f64, f64)> = grid
        .iter()
        .map(|g| {
            let norm = (scale * g.n as f64).sqrt();
            let se = g.se / norm;
            (g.n as f64, g.sd / norm, 1.0 / (se * se))
        })
        .collect();
    let chi2 = |p: &[f64]| -> f64 {
        if !feasible(p) {
            return f64::INFINITY;
        }
        pts.iter().map(|&(n, y, w)| w * (y - shape(p, n)).powi(2)).sum()
    };

    let opts = SimplexOptions {
        rel_tol: 1e-6,
        max_iter: 20_000,
        initial_step: 0.1,
    };
    let mut best: Option<super::optim::Minimum> = None;
    for a in [1.0, 1.5, 2.0] {
        for b in [0.2, 0.8, 1.5] {
            for c in [0.25, 0.5, 0.75] {
                let mut m = nelder_mead(chi2, &[a, b, c], opts);
                // Restart from the optimum until the value stops improving;
                // a collapsed simplex can stall on the curved b-c valley.
                for _ in 0..20 {
                    if !m.converged {
                        break;
                    }
                    let again = nelder_mead(chi2, &m.x, opts);
                    let done = again.value >= m.value * (1.0 - 1e-12) || again.value.is_nan();
                    m = again;
                    if done {
                        break;
                    }
                }
                if m.converged && m.value.is_finite() && best.as_ref().map_or(true, |b| m.value < b.value) {
                    best = Some(m);
                }
            }
        }
    }
    let best = best.ok_or_else(|| fail("no simplex start converged".into()))?;
    let p = &best.x;

    // Covariance s^2 (J^T W J)^-1 with the residual variance s^2.
    let mut jtwj = [[0.0; 3]; 3];
    for &(n, _, w) in &pts {
        let nc = n.powf(-p[2]);
        let j = [1.0 - p[1] * nc, -p[0] * nc, p[0] * p[1] * nc * n.ln()];
        for r in 0..3 {
            for c in 0..3 {
                jtwj[r][c] += w * j[r] * j[c];
            }
        }
    }
    let cov = invert3(&jtwj).ok_or_else(|| fail("singular normal matrix at the optimum".into()))?;
    let dof = (pts.len() - 3).max(1) as f64;
    let s2 = best.value / dof;
    let se = |i: usize| (s2 * cov[i][i]).max(0.0).sqrt();
    let fit = SigmaFit {
        a: p[0],
        b: p[1],
        c: p[2],
        se_a: se(0),
        se_b: se(1),
        se_c: se(2),
        chi2: best.value,
        grid: grid.to_vec(),
    };
    if ![fit.se_a, fit.se_b, fit.se_c].iter().all(|v| v.is_finite()) {
        return Err(fail("non-finite parameter errors".into()));
    }
    Ok(fit)
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let det = m[0][0] * cof(1, 2, 1, 2) - m[0][1] * cof(1, 2, 0, 2) + m[0][2] * cof(1, 2, 0, 1);
    if !det.is_finite() || det.abs() < 1e-300 {
        return None;
    }
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let mut inv = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            inv[r][c] = adj[r][c] / det;
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = full_grid();
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[10], g[20]), (10, 100, 1000));
        assert_eq!(g[1], 12);
        let c = coarse_grid();
        assert_eq!(c, vec![10, 15, 25, 39, 63, 100, 158, 251, 398, 630, 1000]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn invert3_identity_and_product() {
        let m = [[4.0, 1.0, 2.0], [1.0, 3.0, 0.5], [2.0, 0.5, 5.0]];
        let inv = invert3(&m).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let v: f64 = (0..3).map(|k| m[r][k] * inv[k][c]).sum();
                assert!((v - if r == c { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
        assert!(invert3(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_none());
    }

    fn synthetic(truth: SigmaParams, ns: &[usize]) -> Vec<GridPoint> {
        ns.iter()
            .map(|&n| {
                let sd = truth.eval(n as f64);
                GridPoint { n, sd, se: 0.01 * sd }
            })
            .collect()
    }

    #[test]
    fn noiseless_fit_recovers_parameters() {
        for truth in [
            SigmaParams::default(),
            SigmaParams { a: 1.3, b: 0.4, c: 0.7 },
            SigmaParams { a: 2.0, b: 1.2, c: 0.3 },
        ] {
            let fit = fit_sigma(&synthetic(truth, &full_grid())).unwrap();
            assert!((fit.a - truth.a).abs() < 1e-4, "{fit:?}");
            assert!((fit.b - truth.b).abs() < 1e-4, "{fit:?}");
            assert!((fit.c - truth.c).abs() < 1e-4, "{fit:?}");
            assert!(fit.se_a < 1e-3);
        }
    }

    #[test]
    fn too_few_points_is_nonconvergence() {
        let grid = synthetic(SigmaParams::default(), &[10, 100, 1000]);
        match fit_sigma(&grid) {
            Err(Error::NonConvergence { grid, .. }) => assert_eq!(grid.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn preconditions() {
        let seed = RngSeed::new(0);
        assert!(calibrate_sigma(&[5, 10, 20, 40], 1000, 10, seed).is_err());
        assert!(calibrate_sigma(&[10, 20, 40, 80], 999, 10, seed).is_err());
        assert!(calibrate_sigma(&[10, 20, 40, 20_000], 1000, 10, seed).is_err());
    }

    #[test]
    fn measured_sd_tracks_formula() {
        // 2000 samples: sd known to ~1.6%; allow 4 SE plus the fit's own error.
        let g = measure_sd(60, 2000, 200, RngSeed::new(3)).unwrap();
        let expected = SigmaParams::default().eval(60.0);
        assert!((g.sd - expected).abs() < 4.0 * g.se + 0.02 * expected, "{g:?} vs {expected}");
    }

    #[test]
    fn csv_output() {
        let fit = fit_sigma(&synthetic(SigmaParams::default(), &coarse_grid())).unwrap();
        let mut out = Vec::new();
        fit.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("n,sd,se\n10,"));
        assert!(text.contains("# a: "));
    }
}
