//! Oracles and checks shared by the integration tests and the acceptance
//! suite. Each check returns `Err` with a description instead of panicking.
#![allow(dead_code)]

pub mod adwin;
pub mod drift;
pub mod props;
pub mod reductions;
pub mod tree;
