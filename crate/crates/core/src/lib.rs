//! Monetary base composition as an order parameter: phases, phase-conditional
//! impulse responses, and the two-compartment and Landau models built on them.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod series;
pub mod ingest;
pub mod phase;
pub mod econometrics;
pub(crate) mod optim;
pub mod compartment;
pub mod landau;
pub mod efficiency;
pub mod synth;
pub mod pipeline;
