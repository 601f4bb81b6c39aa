//! Power studies, ROC summaries, `sigma_N` calibration and QQ diagnostics.

pub mod calibrate;
pub mod ks;
pub mod optim;
pub mod power;
pub mod qq;
pub mod roc;

pub use crate::distributions::{DistributionSpec, Family};
pub use calibrate::{calibrate_sigma, SigmaFit};
pub use power::{run_power_experiment, Method, PowerConfig, PowerReport};
pub use roc::{auc, roc, AucResult, RocCurve};
