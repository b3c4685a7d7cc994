//! Thermodynamic formalism for discrete groups of isometries of the
//! hyperbolic plane.
//!
//! The crate computes Poincaré series and critical exponents of weighted
//! orbit sums, Gibbs cocycles and Patterson approximants, and a symbolic
//! (transfer-operator) model of the geodesic flow on Schottky quotients with
//! equilibrium measures and their concentration near a closed geodesic.
//!
//! The geometric kernel ([`geometry`]) is generic over the scalar type; the
//! aliases at the crate root fix it to `f64`, which is what every other
//! module uses.

pub mod coding;
pub mod error;
pub mod geometry;
pub mod group;
pub mod orbitsum;
pub mod potential;
pub mod quadrature;
pub mod scalar;

pub mod cli;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type HPoint = geometry::HPoint<f64>;
pub type BoundaryPoint = geometry::BoundaryPoint<f64>;
pub type Mobius = geometry::Mobius<f64>;
pub type Geodesic = geometry::Geodesic<f64>;
pub type UnitTangent = geometry::UnitTangent<f64>;
pub type ShadowArc = geometry::ShadowArc<f64>;
pub type HPointF32 = geometry::HPoint<f32>;
pub type MobiusF32 = geometry::Mobius<f32>;
