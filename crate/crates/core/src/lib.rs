//! Weighted sum-rate analysis and optimization for joint uplink/downlink links assisted
//! by active reflecting surfaces.

pub mod channel;
pub mod error;
pub mod multiuser;
pub mod numerics;
pub mod qcqp;
pub mod single_user;
pub mod static_ao;

#[cfg(test)]
mod test_support;

pub use error::{Error, Result};
