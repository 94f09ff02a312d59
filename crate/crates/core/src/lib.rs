//! Numerical toolkit for compound and arbitrarily varying wiretap channels:
//! distances between uncertainty sets, continuity bounds, symmetrizability,
//! capacities, and exact leakage of small codes.

pub mod bounds;
pub mod capacity;
pub mod channels;
pub mod codes;
pub mod error;
pub mod info;
pub mod lp;
pub mod sampling;
pub mod scenarios;
pub mod suites;
pub mod symmetrize;

pub use channels::{Channel, ChannelFamily, Distribution, WiretapUncertainty};
pub use error::{Error, Result};
