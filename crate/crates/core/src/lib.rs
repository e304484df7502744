//! Copula-based mean and quantile regression.
//!
//! Copulas are represented by the conditional distribution of the response
//! given the covariates. On top of that the crate computes regression and
//! quantile functions, checkerboard approximations and their empirical
//! estimators, deviation functionals, distances between conditional laws,
//! and the simulation study for the empirical estimators.
//!
//! The crate is `no_std` and only needs an allocator.
//!
//! ```
//! use copreg_core::{regression::lp_deviation, CopulaModel, QuadratureSpec};
//!
//! let m: CopulaModel = "cbperm N=3 sigma=2,3,1".parse().unwrap();
//! let d = lp_deviation(&m, 1.0, QuadratureSpec::default()).unwrap();
//! assert!((d - 2.0 / 9.0).abs() < 1e-15);
//! ```

#![no_std]

extern crate alloc;

pub mod checkerboard;
pub mod copula;
pub mod error;
pub mod metrics;
pub mod numerics;
pub mod regression;
pub mod simulation;

pub use checkerboard::{aggregate, empirical_checkerboard, pseudo_ranks, CheckerboardGrid, RankedSample};
pub use copula::{BoundMode, CopulaModel, CovariateRule, PiecewiseMap, SamplePoint};
pub use error::{Error, Result};
pub use numerics::{QuadratureSpec, RngStream};
pub use regression::{StepFunction1D, SurvivalCurve};
