//! Episode simulation, competitive ratios and benchmark sweeps.

mod episode;
mod harness;
mod meta;
mod tasks;

pub use episode::*;
pub use harness::*;
pub use meta::*;
pub use tasks::*;
