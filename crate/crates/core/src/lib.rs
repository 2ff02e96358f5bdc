//! Phase-field model of a straight screw dislocation gliding on the bottom
//! edge of a rectangular elastic body.
//!
//! The anti-plane displacement `u(x, y)` is harmonic in `(-L, L) x (0, H)`,
//! traction free on the lateral sides, loaded by a uniform traction `g(t)` on
//! the top side, and equal to the slip profile `u_S(x)` on the bottom side.
//! The slip profile follows the gradient flow
//!
//! ```text
//! alpha * u_t = eps * u_xx - W'(u) + gamma * u_y(x, 0)
//! ```
//!
//! with the double well `W(s) = (4 beta / b^2) s^2 (b/2 - s)^2` and
//! `gamma = mu b^2 / 2`.
//!
//! Module map:
//! - [`config`]: grid, parameters, loads, initial conditions and the TOML configuration document
//! - [`field`]: nodal fields on the grid and on the slip boundary
//! - [`elliptic`]: the mixed Laplace problem, its Dirichlet-to-Neumann map and the elastic energy
//! - [`dynamics`]: the slip-boundary evolution, energies and the adaptive BDF integrator
//! - [`elastica`]: 3D isotropic elasticity and Peach-Koehler force utilities

pub mod config;
pub mod dynamics;
pub mod elastica;
pub mod elliptic;
pub mod error;
pub mod field;

pub use config::{Config, GridSpec, InitialCondition, LoadSpec, ModelParams, OutputSpec};
pub use error::{ConfigError, Error, Result};
pub use field::{Field2D, Profile1D};
