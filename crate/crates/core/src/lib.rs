//! Performance analysis for leader–follower LEO satellite clusters.
//!
//! Leaders form a binomial point process on a spherical shell; each leader
//! carries `N_F` followers spread uniformly over a small spherical cap
//! centred on it. Ground links see shadowed-Rician fading, inter-satellite
//! links are fading free. The crate evaluates outage probability and average
//! data rate by numerical quadrature, provides closed-form bounds, and ships a
//! seeded Monte Carlo simulator of the same model to check every expression.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and the parallel simulation driver live in the `leocluster`
//! crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod casestudy;
pub mod channel;
mod error;
pub mod geometry;
pub mod montecarlo;
pub mod quadrature;
pub mod roots;
pub mod scenario;
pub mod special;

pub use analysis::{EstimateKind, PerformanceEstimate, Precision};
pub use casestudy::{PowerSplit, Sweep};
pub use channel::{LinkBudget, ShadowedRicianParams};
pub use error::{Error, Result};
pub use geometry::{ConstellationConfig, MixedAngularDistribution, SphericalDirection};
pub use montecarlo::{SimulationPlan, TrialRecord};
pub use scenario::ScenarioParams;
