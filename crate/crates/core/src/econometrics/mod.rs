//! Regression kernel: least squares, HAC covariance, shocks, local
//! projections and breakpoint search.

pub mod breakpoint;
pub mod hac;
pub mod irf;
pub mod lp;
pub mod ols;
pub mod shock;

pub use breakpoint::{breakpoint, BreakResult, LineFit};
pub use hac::hac_covariance;
pub use irf::{read_irf_file, write_irf_file, IrfMetadata, IrfRow, IrfTable};
pub use lp::{local_projection, LpConfig};
pub use ols::{ols, RegressionResult};
pub use shock::{ar_fit, build_shock, detrended_shock, standardize, ShockDefinition, ShockSeries};
