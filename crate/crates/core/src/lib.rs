//! Contact sets of swept parametric surfaces.
//!
//! A surface `S(u, v)` carried by a rigid motion `h(t) = (A(t), b(t))` sweeps
//! the map `σ(u, v, t) = A(t) S(u, v) + b(t)`. The crate locates the funnel
//! `f = ⟨σ_t, A N⟩ = 0`, traces its time slices, evaluates the θ invariant that
//! flags local self-intersections, and evaluates the envelope procedurally.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the textbook B-spline and spline recurrences
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod bspline;
pub mod corpus;
pub mod envelope;
pub mod error;
pub mod funnel;
pub mod kinematics;
pub mod spline;
pub mod surface;
pub mod sweep;

pub use error::{Result, SweepError};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
