//! Sample generators parameterised by signal-to-noise ratio.
//!
//! Every family is shifted and scaled so that variates have mean `theta *
//! sigma` and standard deviation `sigma`.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::records::Sample;
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gaussian,
    Uniform,
    StudentT,
    Exponential,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Uniform => "uniform",
            Family::StudentT => "student_t",
            Family::Exponential => "exponential",
        }
    }

    /// Whether `x` and `-x` are equiprobable at `theta = 0`.
    pub fn is_symmetric(self) -> bool {
        !matches!(self, Family::Exponential)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" | "gauss" => Ok(Family::Gaussian),
            "uniform" => Ok(Family::Uniform),
            "student_t" | "student" | "t" => Ok(Family::StudentT),
            "exponential" | "exp" => Ok(Family::Exponential),
            other => Err(Error::invalid(format!("unknown distribution family {other:?}"))),
        }
    }
}

fn default_sigma() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub family: Family,
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Tail parameter; only meaningful for `student_t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl Default for DistributionSpec {
    fn default() -> Self {
        DistributionSpec::gaussian(0.0)
    }
}

impl DistributionSpec {
    pub fn gaussian(theta: f64) -> Self {
        DistributionSpec {
            family: Family::Gaussian,
            theta,
            sigma: 1.0,
            nu: None,
        }
    }

    pub fn uniform(theta: f64) -> Self {
        DistributionSpec {
            family: Family::Uniform,
            ..DistributionSpec::gaussian(theta)
        }
    }

    pub fn student_t(theta: f64, nu: f64) -> Self {
        DistributionSpec {
            family: Family::StudentT,
            nu: Some(nu),
            ..DistributionSpec::gaussian(theta)
        }
    }

    pub fn exponential(theta: f64) -> Self {
        DistributionSpec {
            family: Family::Exponential,
            ..DistributionSpec::gaussian(theta)
        }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be > 0, got {}", self.sigma)));
        }
        match (self.family, self.nu) {
            (Family::StudentT, Some(nu)) if nu > 2.0 && nu.is_finite() => Ok(()),
            (Family::StudentT, Some(nu)) => Err(Error::invalid(format!(
                "student_t needs nu > 2 for a finite variance, got {nu}"
            ))),
            (Family::StudentT, None) => Err(Error::invalid("student_t requires nu")),
            (_, Some(_)) => Err(Error::invalid(format!(
                "nu is only valid for student_t, not {}",
                self.family.name()
            ))),
            (_, None) => Ok(()),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.family.is_symmetric()
    }

    /// Draw `n` i.i.d. variates from the stream identified by `seed`.
    pub fn generate(&self, n: usize, seed: RngSeed) -> Result<Sample> {
        self.validate()?;
        if n == 0 {
            return Err(Error::invalid("cannot generate an empty sample"));
        }
        let mut rng = seed.rng();
        let (shift, sigma) = (self.theta * self.sigma, self.sigma);
        let values: Vec<f64> = match self.family {
            Family::Gaussian => (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    shift + sigma * z
                })
                .collect(),
            Family::Uniform => {
                let width = 12f64.sqrt() * sigma;
                (0..n)
                    .map(|_| {
                        // 53-bit uniform on [0, 1)
                        let u = (rand::RngCore::next_u64(&mut rng) >> 11) as f64
                            * (1.0 / (1u64 << 53) as f64);
                        shift + width * (u - 0.5)
                    })
                    .collect()
            }
            Family::StudentT => {
                let nu = self.nu.expect("validated");
                let dist = StudentT::new(nu).map_err(|e| Error::invalid(e.to_string()))?;
                let scale = sigma * ((nu - 2.0) / nu).sqrt();
                (0..n).map(|_| shift + scale * dist.sample(&mut rng)).collect()
            }
            Family::Exponential => (0..n)
                .map(|_| {
                    let e: f64 = Exp1.sample(&mut rng);
                    shift + sigma * (e - 1.0)
                })
                .collect(),
        };
        Sample::new(values)
    }
}

impl fmt::Display for DistributionSpec {
    /// Canonical text form, e.g. `student_t(theta=0,sigma=1,nu=3)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(theta={},sigma={}",
            self.family.name(),
            self.theta,
            self.sigma
        )?;
        if let Some(nu) = self.nu {
            write!(f, ",nu={nu}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form; a bare family name means
    /// `theta = 0`, `sigma = 1`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, args) = match s.split_once('(') {
            Some((name, rest)) => {
                let args = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::invalid(format!("unterminated distribution spec {s:?}")))?;
                (name, args)
            }
            None => (s, ""),
        };
        let mut spec = DistributionSpec {
            family: family.parse()?,
            ..DistributionSpec::default()
        };
        for kv in args.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value, got {kv:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad number in {kv:?}")))?;
            match k.trim() {
                "theta" => spec.theta = v,
                "sigma" => spec.sigma = v,
                "nu" => spec.nu = Some(v),
                other => return Err(Error::invalid(format!("unknown parameter {other:?}"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(v: &[f64]) -> (f64, f64, f64) {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let skew = v.iter().map(|x| ((x - mean) / var.sqrt()).powi(3)).sum::<f64>() / n;
        (mean, var, skew)
    }

    const N: usize = 1_000_000;

    #[test]
    fn gaussian_moments() {
        let s = DistributionSpec::gaussian(0.0).generate(N, RngSeed::new(1)).unwrap();
        let (mean, var, _) = moments(s.values());
        let se = 1.0 / (N as f64).sqrt();
        assert!(mean.abs() < 5.0 * se, "mean {mean}");
        // Var of the sample variance of a unit normal is 2/N.
        assert!((var - 1.0).abs() < 5.0 * (2.0 / N as f64).sqrt(), "var {var}");
    }

    #[test]
    fn shifted_families_have_requested_mean() {
        for spec in [
            DistributionSpec::gaussian(0.5),
            DistributionSpec::uniform(0.5),
            DistributionSpec::student_t(0.5, 5.0),
            DistributionSpec::exponential(0.5),
        ] {
            let s = spec.generate(200_000, RngSeed::new(2)).unwrap();
            let (mean, var, _) = moments(s.values());
            assert!((mean - 0.5).abs() < 0.02, "{spec}: mean {mean}");
            assert!((var - 1.0).abs() < 0.05, "{spec}: var {var}");
        }
    }

    #[test]
    fn student_t_rescaled_to_unit_variance() {
        let s = DistributionSpec::student_t(0.0, 3.0)
            .generate(N, RngSeed::new(3))
            .unwrap();
        let (_, var, _) = moments(s.values());
        // The fourth moment of t(3) is infinite, so the sampling error of the
        // variance is heavy-tailed; a loose band is what is testable.
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn exponential_is_skewed() {
        let s = DistributionSpec::exponential(0.0).generate(N, RngSeed::new(4)).unwrap();
        let (mean, _, skew) = moments(s.values());
        assert!(mean.abs() < 5e-3);
        assert!((skew - 2.0).abs() < 0.1, "skew {skew}");
    }

    #[test]
    fn uniform_support() {
        let s = DistributionSpec::uniform(0.0).generate(10_000, RngSeed::new(5)).unwrap();
        let half = 3f64.sqrt();
        assert!(s.values().iter().all(|&x| (-half..half).contains(&x)));
    }

    #[test]
    fn invalid_specs() {
        assert!(DistributionSpec::student_t(0.0, 2.0).validate().is_err());
        assert!(DistributionSpec::student_t(0.0, 1.5).generate(10, RngSeed::new(0)).is_err());
        let mut g = DistributionSpec::gaussian(0.0);
        g.sigma = 0.0;
        assert!(g.validate().is_err());
        g.sigma = 1.0;
        g.nu = Some(3.0);
        assert!(g.validate().is_err());
        assert!(DistributionSpec::gaussian(0.0).generate(0, RngSeed::new(0)).is_err());
    }

    #[test]
    fn text_round_trip() {
        for spec in [
            DistributionSpec::gaussian(0.0),
            DistributionSpec::uniform(0.25),
            DistributionSpec::student_t(0.0, 3.5),
            DistributionSpec::exponential(-0.1),
        ] {
            let back: DistributionSpec = spec.to_string().parse().unwrap();
            assert_eq!(back, spec);
        }
        assert_eq!("gaussian".parse::<DistributionSpec>().unwrap(), DistributionSpec::gaussian(0.0));
        assert!("cauchy".parse::<DistributionSpec>().is_err());
        assert!("gaussian(theta=1".parse::<DistributionSpec>().is_err());
    }

    #[test]
    fn json_defaults() {
        let spec: DistributionSpec = serde_json::from_str(r#"{"family":"student_t","theta":0.11,"nu":4}"#).unwrap();
        assert_eq!(spec, DistributionSpec::student_t(0.11, 4.0));
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = DistributionSpec::student_t(0.1, 4.0);
        let a = spec.generate(50, RngSeed::with_stream(7, 1)).unwrap();
        let b = spec.generate(50, RngSeed::with_stream(7, 1)).unwrap();
        let c = spec.generate(50, RngSeed::with_stream(7, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
