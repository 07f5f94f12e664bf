//! Partition-based cache placement for SIC-enabled wireless networks.
//!
//! Files are split into `1/s` equal parts and each BS caches either one
//! random-linear-network-coded (RLNC) combination or one uniformly chosen
//! uncoded (UC) subfile. A user decodes the nearest BSs by successive
//! interference cancellation (SIC). The crate provides the closed-form
//! success probabilities, the MCKP-based allocation optimizer, a Monte Carlo
//! simulator over Poisson networks and the `partcache` command-line tool.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod optimize;
pub mod sim;
pub mod special;
pub mod validation;

pub use analysis::{coupon_pmf, stp_rlnc, stp_uc, StpBreakdown};
pub use config::ExperimentConfig;
pub use error::{Error, Result, Violation};
pub use model::{Popularity, RlncAllocation, SystemConfig, SystemParams, UcAllocation};
