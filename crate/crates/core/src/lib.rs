//! Joint source-channel coding over classical-quantum multiple access
//! channels, at desk scale.
//!
//! The crate models a correlated classical source observed by two senders,
//! a channel mapping classical input letter pairs to quantum output states,
//! and the joint coding scheme whose achievability region is governed by
//! four Holevo-information inequalities. It provides:
//!
//! - [`linalg`]: density operators, projectors, entropies, operator
//!   inequalities.
//! - [`source`]: joint pmfs, the common part of a pair of random variables,
//!   classical entropies.
//! - [`channel`]: classical-quantum multiple access channels and n-fold
//!   tensor outputs.
//! - [`info`]: reduced code states and the Holevo quantities entering the
//!   rate region.
//! - [`region`]: feasibility checks of the inequality system and a
//!   derivative-free search for good code distributions.
//! - [`typicality`]: weak typical sets, jointly typical triples, and
//!   (conditionally) typical projectors with property verification.
//! - [`codec`]: random codebooks, the square-root measurement decoder, and
//!   exact error-probability evaluation.

pub mod channel;
pub mod codec;
pub mod error;
pub mod info;
pub mod linalg;
pub mod region;
pub mod seeds;
pub mod source;
#[cfg(test)]
pub(crate) mod testutil;
pub mod typicality;

pub use channel::CqMac;
pub use codec::{Codebook, MonteCarloReport, Povm};
pub use error::{Error, Result};
pub use info::{CodeDistribution, InfoQuantities};
pub use linalg::{DensityOperator, Projector, PsdOperator};
pub use region::RegionReport;
pub use source::{CommonPart, JointSource};
pub use typicality::TypicalSpec;
