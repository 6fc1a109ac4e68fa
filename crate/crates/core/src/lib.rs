//! Lift-and-project rounding algorithms for Set Cover and Knapsack, with exact oracles.
//!
//! Combinatorial code works in exact rationals. The convex solvers in [`convex`] are
//! generic over a [`Real`] scalar; the `f64` aliases below are what the algorithms use.

pub mod convex;
pub mod error;
pub mod greedy;
pub mod instances;
pub mod knapsack_lsplus;
pub mod ls_setcover;
pub mod rational;
pub mod sa_certificate;
pub mod scalar;
pub mod subexp;
pub mod subset;
pub mod tolerance;

pub use error::{Error, Result};
pub use rational::Rational;
pub use scalar::Real;
pub use subset::Subset;

pub type MomentVector = convex::MomentVector<f64>;
pub type MomentMatrix = convex::MomentMatrix<f64>;
pub type LpProblem = convex::LpProblem<f64>;
pub type LpSolution = convex::LpSolution<f64>;
pub type SdpProblem = convex::SdpProblem<f64>;
pub type SdpSolution = convex::SdpSolution<f64>;
