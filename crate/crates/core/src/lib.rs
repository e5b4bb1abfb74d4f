//! Price of equity for EQ1 allocations under binary additive and binary
//! submodular (matroid rank) valuations.
//!
//! Degenerate helpers aside, the crate is organised around three questions:
//! what the best allocation is ([`solver::nash_optimal`]), what the best
//! EQ1 allocation is ([`solver::truncate`]), and how far apart they can be
//! ([`bounds`]). The [`oracle`] answers the first two by brute force.

pub mod bounds;
pub mod doubly;
pub mod error;
pub mod flow;
pub mod generators;
pub mod gf2;
pub mod io;
pub mod model;
pub mod oracle;
pub mod poe;
pub mod rank;
pub mod solver;
pub mod verify;
pub mod welfare;

pub use error::{Error, Result};
pub use model::{Allocation, Instance, Valuation};
pub use poe::PoeValue;
pub use welfare::PParam;
