//! Real-time trajectory-tunnel feedback for upper-limb exercises.
//!
//! The crate covers the calibrated working frame and exercise library
//! ([`geometry`]), the live scoring engine ([`feedback`]), a 4-DOF arm
//! model ([`arm`]), the offline error pipeline ([`analytics`]), study
//! statistics ([`stats`]), a seeded hand simulator ([`sim`]) and the
//! line-delimited session protocol ([`protocol`]).

pub mod analytics;
pub mod arm;
pub mod exec;
pub mod feedback;
pub mod geometry;
pub mod labels;
pub mod protocol;
pub mod sim;
pub mod stats;
pub mod sweep;

pub use geometry::Vec3;
