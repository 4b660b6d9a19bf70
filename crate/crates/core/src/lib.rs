//! Full-duplex wireless powered communication network (FD H-AP with FD UEs).
//!
//! * [`model`]: energy balance and effective SNR coefficients.
//! * [`allocator`]: optimal TDMA slot durations and KKT checks.
//! * [`scenario`]: random topologies, fading and Monte-Carlo sweeps.
//! * [`cli`]: configuration, unit handling and CSV output for the binary.

// `!(x >= 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod cli;
pub mod exec;
pub mod model;
pub mod scenario;
pub mod units;

pub use allocator::{optimize_equal, optimize_weighted, verify_kkt, AllocationResult, Weights};
pub use exec::Executor;
pub use model::{ChannelState, Knowledge, SystemConfig, UeProfile};
