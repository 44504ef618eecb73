//! MIMIC, a bivariate estimation-of-distribution algorithm, on the
//! EqualBlocksOneMax benchmark, together with tools that compare the learned
//! chain model against the ideal model and check how univariate models
//! concentrate their samples.

pub mod analysis;
pub mod bits;
pub mod builder;
pub mod error;
pub mod fitness;
pub mod model;
pub mod runner;
pub mod statistics;
pub mod theory;

pub use bits::BitString;
pub use error::{Error, Result};
