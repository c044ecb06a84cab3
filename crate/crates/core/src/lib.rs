//! Exact and numerical tools for the three-measurement Specker scenario.
//!
//! Correlations are tables of rational probabilities for the pairs (12),
//! (23), (13). The exact layer covers the no-disturbance polytope, the KS
//! and noncontextuality inequalities, the joint-distribution (marginal)
//! problem and finite ontological models; the [`quantum`] layer handles
//! unsharp qubit measurements numerically.

pub mod error;
pub mod inequalities;
pub mod lp;
pub mod marginal;
pub mod ontmodel;
pub mod polytope;
pub mod quantum;
pub mod rational;
pub mod sample;
pub mod scenario;

pub use error::{Error, Result};
pub use inequalities::{Inequality, Predictability, RValues};
pub use rational::Q;
pub use scenario::{CorrelationVector, Measurement, Pair, SixParams};
