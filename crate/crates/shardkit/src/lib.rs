//! Threshold secret sharing over prime fields.
//!
//! The crate implements classic (t,n) Shamir sharing, an extended scheme with
//! crucial shares (required by every authorized set) and mutual redundant
//! shares (copies of one evaluation point that count only once), recursive
//! compartmented schemes built from the same primitive, and an access-structure
//! engine that checks schemes against monotone formulas by exhaustive
//! enumeration at desk scale.

pub mod access;
pub mod compartments;
pub mod dsl;
pub mod error;
pub mod extended;
pub mod field;
pub mod records;
pub mod shamir;
