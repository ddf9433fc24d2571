//! Geometry of the unit ball of `C^n`: points, automorphisms, the
//! non-isotropic gauge, Carleson boxes, coverings and the Green-type function.

mod boxes;
mod cover;
mod green;
mod mobius;
mod point;

pub use boxes::{lens_mass, noniso_gauge, CarlesonBox, PseudoHyperbolicBall};
pub use cover::{cover_box, cover_box_with, coverage_fraction, min_separation, CoverConfig};
pub use green::{green_G, green_g, green_g_with};
pub use mobius::{mobius, pseudo_hyperbolic_dist, Automorphism};
pub use point::{CPoint, UNIT_TOL};
