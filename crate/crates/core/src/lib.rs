//! Nonparametric tests for the signal-to-noise ratio built on record counts
//! of cumulative sums.
//!
//! The single-sample statistic averages `R_0 = R_+ - R_-` (upper minus lower
//! records of the running sum) over random permutations of the sample and
//! normalises it by a fitted `sigma_N`. Two-sample variants compare record
//! averages of two samples or of their differences. P-values come from
//! Monte Carlo null tables, which can be cached on disk.
//!
//! ```
//! use rstat::{records::Sample, sntest::{r_test_single, TestConfig}};
//!
//! let x = Sample::new((0..50).map(|i| 0.2 + (i as f64 * 0.7).sin()).collect()).unwrap();
//! let cfg = TestConfig { p_perms: 200, m_draws: 200, ..TestConfig::default() };
//! let res = r_test_single(&x, &cfg).unwrap();
//! assert!(res.p_value > 0.0 && res.p_value <= 1.0);
//! ```

pub mod bench;
pub mod distributions;
pub mod error;
pub mod null;
pub mod perm;
pub mod records;
pub mod ref_stats;
pub mod rng;
pub mod sntest;

pub use distributions::{DistributionSpec, Family};
pub use error::{Error, Result};
pub use null::{Alternative, NullDistribution, NullKey, SigmaParams};
pub use perm::{Equalize, PermutationEstimate, Variant};
pub use records::{RecordCounts, Sample};
pub use rng::RngSeed;
pub use sntest::{TestConfig, TestResult};
