//! Many-to-one matching where students take a seat at a college together
//! with a regionally capped resource.
//!
//! The crate covers the market model, blocking-contract audits, cutoff
//! profiles, six allocation mechanisms, a brute-force oracle for small
//! markets, random market generators and a seeded simulation harness.

pub mod blocking;
pub mod cutoff;
pub mod fixtures;
pub mod gen;
pub mod market;
pub mod mechanisms;
pub mod oracle;
pub mod sim;

pub use blocking::{audit, BlockClass, BlockingCounts, BlockingReport, StabilityFlags};
pub use cutoff::{cutoffs_of, induced_matching, is_optimal, CutoffProfile};
pub use market::{
    is_feasible, is_individually_rational, CollegeId, Contract, Market, MarketDoc, Matching, Pair,
    ResourceId, StudentId,
};
pub use mechanisms::{MechanismKind, MechanismRun, RunTrace, Schedule};
