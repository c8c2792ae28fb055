//! Online Bayesian bipartite matching: exact value-to-go, baselines,
//! locality-based approximation, a message-passing VTG surrogate and a
//! seeded competitive-ratio benchmark harness.

pub mod baselines;
pub mod bench;
pub mod dp;
pub mod error;
pub mod generators;
pub mod locality;
pub mod lp;
pub mod model;
pub mod neural;
pub mod offline;
pub mod policy;
pub mod rng;

pub use error::{Error, Result};
pub use model::{Action, ArrivalSequence, Edge, Instance, MatchingState, OfflineSet};
