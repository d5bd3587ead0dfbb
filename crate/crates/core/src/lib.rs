//! Group-based private information retrieval under asymmetric
//! database-communication constraints.
//!
//! A system of N databases stores K messages. Arbitrary subsets of databases
//! (the links of a binary communication matrix) may pool their stored data,
//! and any T databases may collude on the queried index. This crate
//!
//! * solves the grouping problem exactly: partition databases into disjoint
//!   super-database groups, none covered by a link, maximizing the group
//!   count ([`grouping`]);
//! * simulates the group-based retrieval protocol over a prime field, with
//!   noise-shared storage inside each group and capacity-achieving query
//!   structures for both the no-collusion and the colluding case ([`pir`]);
//! * computes exact-rational achieved rates, the classical symmetric
//!   baseline, and the converse upper bound ([`analysis`]);
//! * checks the security, privacy, and decodability contracts with
//!   independent oracles ([`verify`]).
//!
//! With the default `parallel` feature, batch entry points (trial
//! simulation, random-instance sweeps) fan out across threads via rayon;
//! disabling the feature falls back to equivalent sequential loops with
//! identical outputs.

pub mod analysis;
pub mod coding;
pub mod error;
pub mod fixtures;
pub mod grouping;
pub mod model;
pub mod pir;
pub mod verify;

mod par;

pub use error::{Error, Result};
