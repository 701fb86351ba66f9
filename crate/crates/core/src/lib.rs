//! Numerical Lorentzian geometry.
//!
//! Spacetimes are given in a single chart by a metric formula written against
//! [`dual::Real`], so the same code evaluates the metric and, through nested
//! dual numbers, its first and second derivatives. On top of that sit
//! curvature, geodesics, Jacobi fields, congruence expansion and a small
//! laboratory of curve comparisons.

pub mod catalog;
pub mod curvature;
pub mod curves;
pub mod dual;
pub mod error;
pub mod exec;
pub mod focusing;
pub mod geodesic;
pub mod geometry;
pub mod jacobi;
pub mod linalg;
pub mod ode;

pub use error::{LabError, Result};
