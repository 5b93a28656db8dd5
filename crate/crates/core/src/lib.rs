//! Numerical toolkit for the proportional-derivative operator
//! D^α f = κ₁ f + κ₀ f′ and the second-order self-adjoint equations built on it.

pub mod confcalc;
pub mod corpus;
pub mod error;
pub mod field;
pub mod gains;
pub mod greens;
pub mod ode;
pub mod oscillation;
pub mod quad;
pub mod solver;
pub mod structure;
pub mod trajectory;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use gains::{make_pair, Alpha, Family, KappaPair};
pub use quad::QuadratureConfig;
pub use trajectory::Trajectory;
