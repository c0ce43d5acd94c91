//! Periodic perfect splines that interpolate a band-limited 2π-periodic
//! function in the mean.
//!
//! The construction goes through a discretized L1 extremal problem over the
//! span of smoothed Bernoulli-kernel translates. Its optimal integrand `g`
//! supplies the knots, a Lagrange certificate supplies amplitude and offset,
//! and a Gauss–Newton pass polishes the result so that the weighted means
//! match to near machine precision.
//!
//! ```
//! use perfspline::{app::pipeline, extremal::{MeanInterpolationProblem, Node}, kernels::WeightFunction, spectral::PeriodicFunction};
//! use std::f64::consts::PI;
//!
//! let f = PeriodicFunction::from_harmonics(&[(1, 0.0, 1.0)]);
//! let nodes = [PI / 2.0, PI, 1.5 * PI]
//!     .iter()
//!     .map(|&x| Node::new(x, WeightFunction::boxcar(0.1).unwrap()))
//!     .collect();
//! let problem = MeanInterpolationProblem::for_function(2, 1, nodes, &f, Default::default()).unwrap();
//! let out = pipeline::solve(&problem, &f).unwrap();
//! assert!(out.report.passed);
//! assert!(out.spline.amplitude().abs() <= 1.0 + 1e-6);
//! ```

pub mod app;
pub mod error;
pub mod extremal;
pub mod kernels;
pub mod refine;
pub mod spectral;
pub mod spline;

pub use error::{Error, Result};
