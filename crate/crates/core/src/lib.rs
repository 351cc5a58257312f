//! Exact quantitative analysis of binarized neural networks (BNNs).
//!
//! A BNN together with an input region is compiled into one binary decision
//! diagram per output class; the class BDDs partition the region, so counting,
//! robustness, maximal-safe-distance and explanation queries are answered with
//! zero approximation error.
//!
//! The crate is `no_std` (it only needs `alloc`): all IO, file formats and the
//! command line front end live in the companion `bnnbdd-cli` crate. Budgets
//! that need a wall clock are injected from the std side through
//! [`bdd::BddManager::set_abort_hook`] and [`builder::BuildOptions`].

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod bdd;
pub mod builder;
pub mod encoder;
pub mod layout;
pub mod model;
pub mod oracle;
pub mod rational;

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
