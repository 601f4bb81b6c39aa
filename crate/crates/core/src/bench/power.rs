//! Monte Carlo power comparison of record statistics against classical ones.
//!
//! For each method, `n_samples` scores are computed on samples drawn under
//! the null and `n_samples` under the alternative; power is summarised by the
//! AUC of the two score sets. All methods see the same samples.
//!
//! Single-sample experiments draw `x` from `spec_null` (null arm) or
//! `spec_alt` (alternative arm). Two-sample experiments draw `y` from
//! `spec_null` in both arms and `x` as above, so under the alternative `x`
//! has the higher SNR.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::roc::{auc, roc, AucResult, RocCurve};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::null::{sigma_n, SigmaParams};
use crate::perm::{mean_r0, mean_record_counts, paired_difference, unpaired_mean_rz, Equalize};
use crate::records::Sample;
use crate::ref_stats;
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Single-sample r-statistic.
    R,
    T,
    Sign,
    Wilcoxon,
    RzPaired,
    RzUnpaired,
    #[serde(rename = "rplus2")]
    RPlus2,
    /// Scored as `-rminus2`, since a higher SNR of `x` lowers its lower-record count.
    #[serde(rename = "rminus2")]
    RMinus2,
    Rd,
    Welch,
    MannWhitney,
}

impl Method {
    pub const SINGLE: [Method; 4] = [Method::R, Method::T, Method::Sign, Method::Wilcoxon];
    pub const TWO: [Method; 7] = [
        Method::RzPaired,
        Method::RzUnpaired,
        Method::RPlus2,
        Method::RMinus2,
        Method::Rd,
        Method::Welch,
        Method::MannWhitney,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::R => "r",
            Method::T => "t",
            Method::Sign => "sign",
            Method::Wilcoxon => "wilcoxon",
            Method::RzPaired => "rz_paired",
            Method::RzUnpaired => "rz_unpaired",
            Method::RPlus2 => "rplus2",
            Method::RMinus2 => "rminus2",
            Method::Rd => "rd",
            Method::Welch => "welch",
            Method::MannWhitney => "mann_whitney",
        }
    }

    pub fn is_two_sample(self) -> bool {
        !Method::SINGLE.contains(&self)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Method::SINGLE
            .into_iter()
            .chain(Method::TWO)
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown method {s:?}")))
    }
}

fn default_samples() -> usize {
    2000
}

fn default_perms() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub methods: Vec<Method>,
    pub spec_null: DistributionSpec,
    pub spec_alt: DistributionSpec,
    pub n: usize,
    /// Length of `y` for two-sample methods; defaults to `n`.
    #[serde(default)]
    pub n_y: Option<usize>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_perms")]
    pub p_perms: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub equalize: Equalize,
}

impl PowerConfig {
    pub fn single(spec_alt: DistributionSpec, n: usize) -> PowerConfig {
        PowerConfig {
            methods: Method::SINGLE.to_vec(),
            spec_null: spec_alt.with_theta(0.0),
            spec_alt,
            n,
            n_y: None,
            n_samples: default_samples(),
            p_perms: default_perms(),
            seed: 0,
            equalize: Equalize::Trim,
        }
    }

    pub fn two(spec_alt: DistributionSpec, n: usize) -> PowerConfig {
        PowerConfig {
            methods: vec![
                Method::RzUnpaired,
                Method::RPlus2,
                Method::RMinus2,
                Method::Rd,
                Method::Welch,
                Method::MannWhitney,
            ],
            ..PowerConfig::single(spec_alt, n)
        }
    }

    fn n_y(&self) -> usize {
        self.n_y.unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.spec_null.validate()?;
        self.spec_alt.validate()?;
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods requested"));
        }
        if self.n < 2 || self.n_y() < 2 {
            return Err(Error::invalid("sample lengths must be >= 2"));
        }
        if self.n_samples == 0 || self.p_perms == 0 {
            return Err(Error::invalid("n_samples and p_perms must be >= 1"));
        }
        let single = self.methods.iter().any(|m| !m.is_two_sample());
        if single && self.spec_null.theta != 0.0 {
            return Err(Error::invalid("single-sample experiments need spec_null.theta = 0"));
        }
        if self.methods.contains(&Method::RzPaired) && self.n_y() != self.n {
            return Err(Error::invalid("rz_paired needs n_y == n"));
        }
        if self.methods.contains(&Method::RzUnpaired) && self.equalize.effective_len(self.n, self.n_y()) < 2 {
            return Err(Error::invalid("rz_unpaired needs at least 2 differences"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodScores {
    pub method: Method,
    pub null: Vec<f64>,
    pub alt: Vec<f64>,
}

impl MethodScores {
    pub fn auc(&self) -> AucResult {
        auc(&self.null, &self.alt).expect("scores are non-empty")
    }

    pub fn roc(&self) -> RocCurve {
        roc(&self.null, &self.alt).expect("scores are non-empty").with_method(self.method.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    pub method: Method,
    pub auc: AucResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerReport {
    pub config: PowerConfig,
    pub rows: Vec<PowerRow>,
    pub scores: Vec<MethodScores>,
}

impl PowerReport {
    pub fn scores_for(&self, method: Method) -> Option<&MethodScores> {
        self.scores.iter().find(|s| s.method == method)
    }

    pub fn auc_for(&self, method: Method) -> Option<AucResult> {
        self.rows.iter().find(|r| r.method == method).map(|r| r.auc)
    }

    /// `method,theta,nu,n,auc,se,n_samples,p_perms,seed`
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let c = &self.config;
        writeln!(w, "method,theta,nu,n,auc,se,n_samples,p_perms,seed")?;
        let nu = c.spec_alt.nu.map(|v| v.to_string()).unwrap_or_default();
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                row.method, c.spec_alt.theta, nu, c.n, row.auc.auc, row.auc.std_err, c.n_samples, c.p_perms, c.seed
            )?;
        }
        Ok(())
    }

    /// `method,fpr,tpr`
    pub fn write_roc_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "method,fpr,tpr")?;
        for s in &self.scores {
            for (f, t) in s.roc().points {
                writeln!(w, "{},{f},{t}", s.method)?;
            }
        }
        Ok(())
    }
}

struct Unit<'a> {
    cfg: &'a PowerConfig,
    x: Sample,
    y: Option<Sample>,
    perm_seed: RngSeed,
}

impl Unit<'_> {
    fn scores(&self) -> Result<Vec<f64>> {
        let cfg = self.cfg;
        let (x, p, seed) = (&self.x, cfg.p_perms, self.perm_seed);
        let y = || self.y.as_ref().expect("generated for two-sample methods");
        // Per-sample record averages shared by rplus2, rminus2 and rd.
        let mut counts = None;
        let mut counts = || -> Result<(f64, f64)> {
            if counts.is_none() {
                let ex = mean_record_counts(x, p, seed)?;
                let ey = mean_record_counts(y(), p, seed)?;
                counts = Some((ex.mean_r_plus - ey.mean_r_plus, ex.mean_r_minus - ey.mean_r_minus));
            }
            Ok(counts.unwrap())
        };
        cfg.methods
            .iter()
            .map(|m| {
                Ok(match m {
                    Method::R => mean_r0(x, p, seed)?.mean_r0 / sigma_n(x.len(), &SigmaParams::default())?,
                    Method::T => ref_stats::t_statistic(x)?,
                    Method::Sign => ref_stats::sign_statistic(x),
                    Method::Wilcoxon => ref_stats::wilcoxon_signed_rank(x),
                    Method::RzPaired => mean_r0(&paired_difference(x, y())?, p, seed)?.mean_r0,
                    Method::RzUnpaired => unpaired_mean_rz(x, y(), p, cfg.equalize, seed)?.mean_r0,
                    Method::RPlus2 => counts()?.0,
                    Method::RMinus2 => -counts()?.1,
                    Method::Rd => {
                        let (plus, minus) = counts()?;
                        plus - minus
                    }
                    Method::Welch => ref_stats::welch_t(x, y())?,
                    Method::MannWhitney => ref_stats::mann_whitney_u(x, y()),
                })
            })
            .collect()
    }
}

/// Run the experiment. Sample `i` of arm `a` (0 = null, 1 = alternative)
/// uses `RngSeed::new(seed).substream(a).substream(i)`, so the report is
/// identical for any thread count.
pub fn run_power_experiment(config: &PowerConfig) -> Result<PowerReport> {
    config.validate()?;
    let two = config.methods.iter().any(|m| m.is_two_sample());
    let root = RngSeed::new(config.seed);
    let arm = |a: u64, spec: DistributionSpec| -> Result<Vec<Vec<f64>>> {
        let arm_seed = root.substream(a);
        (0..config.n_samples)
            .into_par_iter()
            .map(|i| {
                let unit = arm_seed.substream(i as u64);
                let x = spec.generate(config.n, unit.substream(0))?;
                let y = if two {
                    Some(config.spec_null.generate(config.n_y(), unit.substream(1))?)
                } else {
                    None
                };
                Unit {
                    cfg: config,
                    x,
                    y,
                    perm_seed: unit.substream(2),
                }
                .scores()
            })
            .collect()
    };
    let null = arm(0, config.spec_null)?;
    let alt = arm(1, config.spec_alt)?;
    let scores: Vec<MethodScores> = config
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| MethodScores {
            method,
            null: null.iter().map(|s| s[k]).collect(),
            alt: alt.iter().map(|s| s[k]).collect(),
        })
        .collect();
    let rows = scores
        .iter()
        .map(|s| PowerRow {
            method: s.method,
            auc: s.auc(),
        })
        .collect();
    Ok(PowerReport {
        config: config.clone(),
        rows,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(mut cfg: PowerConfig) -> PowerConfig {
        cfg.n_samples = 300;
        cfg.p_perms = 100;
        cfg
    }

    #[test]
    fn null_vs_null_is_chance() {
        let mut cfg = quick(PowerConfig::single(DistributionSpec::gaussian(0.0), 50));
        cfg.methods.extend([Method::RzUnpaired, Method::Rd, Method::Welch]);
        let report = run_power_experiment(&cfg).unwrap();
        for row in &report.rows {
            assert!((row.auc.auc - 0.5).abs() < 2.5 * row.auc.std_err, "{row:?}");
        }
    }

    #[test]
    fn strong_signal_is_detected() {
        let cfg = quick(PowerConfig::two(DistributionSpec::gaussian(0.5), 60));
        let report = run_power_experiment(&cfg).unwrap();
        for row in &report.rows {
            // Lower records of a drifting walk saturate near 1, so rminus2
            // is driven by the noise in y alone and separates least.
            let floor = if row.method == Method::RMinus2 { 0.7 } else { 0.9 };
            assert!(row.auc.auc > floor, "{row:?}");
        }
    }

    #[test]
    fn r_auc_equals_raw_r0_auc() {
        let cfg = quick(PowerConfig::single(DistributionSpec::gaussian(0.2), 40));
        let report = run_power_experiment(&cfg).unwrap();
        let r = report.scores_for(Method::R).unwrap();
        let sigma = sigma_n(40, &SigmaParams::default()).unwrap();
        let raw = |v: &Vec<f64>| v.iter().map(|s| s * sigma).collect::<Vec<_>>();
        let raw_auc = auc(&raw(&r.null), &raw(&r.alt)).unwrap();
        assert_eq!(raw_auc.auc, r.auc().auc);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let mut cfg = quick(PowerConfig::two(DistributionSpec::uniform(0.2), 30));
        cfg.n_y = Some(25);
        cfg.equalize = Equalize::Resample;
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_power_experiment(&cfg).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        assert_eq!(ca, cb);
    }

    #[test]
    fn config_validation() {
        let mut cfg = PowerConfig::single(DistributionSpec::gaussian(0.1), 50);
        cfg.spec_null = DistributionSpec::gaussian(0.1);
        assert!(run_power_experiment(&cfg).is_err());
        let mut cfg = PowerConfig::two(DistributionSpec::gaussian(0.1), 50);
        cfg.methods.push(Method::RzPaired);
        cfg.n_y = Some(40);
        assert!(run_power_experiment(&cfg).is_err());
        let bad: std::result::Result<PowerConfig, _> =
            serde_json::from_str(r#"{"methods":["r"],"spec_null":{"family":"gaussian"},"spec_alt":{"family":"gaussian","theta":0.1},"n":100,"bogus":1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn json_config_defaults() {
        let cfg: PowerConfig = serde_json::from_str(
            r#"{"methods":["r","t","sign","wilcoxon","rplus2","mann_whitney"],"spec_null":{"family":"gaussian"},"spec_alt":{"family":"gaussian","theta":0.11},"n":100}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_samples, 2000);
        assert_eq!(cfg.p_perms, 500);
        assert_eq!(cfg.methods[4], Method::RPlus2);
        assert_eq!(cfg.equalize, Equalize::Trim);
    }

    #[test]
    fn csv_layout() {
        let cfg = PowerConfig {
            methods: vec![Method::T],
            n_samples: 20,
            ..PowerConfig::single(DistributionSpec::student_t(0.1, 4.0), 20)
        };
        let report = run_power_experiment(&cfg).unwrap();
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "method,theta,nu,n,auc,se,n_samples,p_perms,seed");
        assert!(lines.next().unwrap().starts_with("t,0.1,4,20,"));
        let mut roc_out = Vec::new();
        report.write_roc_csv(&mut roc_out).unwrap();
        assert!(String::from_utf8(roc_out).unwrap().starts_with("method,fpr,tpr\nt,0,0\n"));
    }
}
