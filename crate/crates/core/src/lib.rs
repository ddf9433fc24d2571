//! Numerical function theory on the unit ball of `C^n`: Möbius geometry,
//! `Q_p` seminorm estimators, Carleson-measure constants and the
//! Riemann-Stieltjes operators `T_g`, `L_g`, `M_g`.

pub mod carleson;
pub mod error;
pub mod geometry;
pub mod holo;
pub mod integrate;
pub mod operators;
pub mod qpnorm;
pub mod quadrature;
pub mod sampling;
pub mod search;

pub use error::{Error, Result};
