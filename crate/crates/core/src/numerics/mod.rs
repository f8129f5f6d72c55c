//! Discretisation toolkit: velocity quadrature, Chebyshev collocation,
//! fixed-step RK4 and adaptive quadrature.

mod chebyshev;
mod hermite;
mod integrate;
mod rk4;

pub use chebyshev::{chebyshev_grid, SpatialGrid};
pub use hermite::{velocity_grid, VelocityGrid};
pub use integrate::{integrate_adaptive, integrate_semi_infinite};
pub use rk4::{rk4_step, Rk4, RkScalar};
