//! Cluster-blockade ballistic annihilation on the line.
//!
//! Particles start at i.i.d.-spaced sites. Each site independently holds a
//! cluster of blockades (probability `p`, size drawn from a [`ClusterLaw`])
//! or a single arrow moving left or right at unit speed. Arrows that meet
//! annihilate; an arrow that reaches a cluster dies and removes one blockade.
//!
//! The crate is organised as:
//!
//! - [`law`]: cluster-size distributions, generating functions, sampling
//! - [`config`]: initial configurations and their generation
//! - [`resolver`]: exact event-driven resolution and a quadratic oracle
//! - [`analytics`]: critical density, the implicit equation for the visit
//!   probability and the collision-type formulas
//! - [`estimators`]: Monte Carlo counterparts with confidence intervals
//! - [`diagram`]: SVG space-time diagrams

pub mod analytics;
pub mod config;
pub mod diagram;
pub mod estimators;
pub mod law;
pub mod resolver;
pub mod rng;

pub use config::{sample_config, Configuration, ExperimentParams, Side, SpacingLaw, Species};
pub use law::ClusterLaw;
pub use resolver::{resolve, resolve_naive, Outcome};
