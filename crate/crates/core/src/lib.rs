//! Symmetric uncoded caching schemes over real byte payloads.
//!
//! The crate builds the placement of two schemes, runs their XOR delivery
//! and per-user decoding, and checks the structural identities every
//! symmetric scheme must satisfy:
//!
//! - [`mn`]: the rate-optimal scheme with subpacketization `h·C(K, t)`,
//!   leader-based delivery and recovery of the unsent messages.
//! - [`grouping`]: users labelled by `a`-subsets and subfiles by `b`-subsets
//!   of `[n]`, cached iff the labels meet.
//! - [`model`]: parameters, placement validation, counting identities and
//!   the closed-form optimum.
//! - [`simulator`]: file packing, cache materialization, bit-exact
//!   verification and demand sweeps.
//! - [`analysis`]: log-domain evaluation of the grouping scheme's large-`n`
//!   behaviour.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod combinatorics;
pub mod grouping;
pub mod mn;
pub mod model;
pub mod rng;
pub mod simulator;

mod error;

pub use error::Error;

/// Exact rational numbers for rates.
pub type Rational = num_rational::BigRational;
