//! Experiment runner: synthetic instance generators, the solver suite,
//! report writers and the property suites behind the `vopt` binary.

mod config;
mod generate;
mod props;
mod report;
mod suite;

pub use config::*;
pub use generate::*;
pub use props::*;
pub use report::*;
pub use suite::*;
