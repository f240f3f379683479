//! Zero-homogeneous, O(2)-equivariant critical points of the Oseen-Frank
//! energy with unequal elastic constants: profile ODE solver, director
//! fields, reduced energy and minimality checks.

pub mod director;
pub mod error;
pub mod fd;
pub mod frank;
pub mod lifting;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod reduced;
pub mod variational;

pub use error::{Error, Result};
