//! Integrable top equations built on the projective space PG(n-1, 2).
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: points, lines and hyperplanes of PG(n-1, 2) generated from
//!   XOR arithmetic, plus collineation search used to relate other labellings.
//! - [`dynamics`]: the (2^n - 1)-dimensional quadratic top, the linear change
//!   to the `a` variables, and an adaptive Dormand-Prince integrator.
//! - [`invariants`]: the conserved quantities `T`, `N_ij` and `gamma_i`, and
//!   drift measurement along trajectories.
//! - [`reduction`]: the reduction of the flow to a single scalar ODE for
//!   `R(t)`, reconstruction of the full state, and the genus count.
//! - [`zktop`]: the (k+1)-variable product flow and its pairwise invariants.
//! - [`exec`] and [`sweep`]: batch evaluation over many initial states, in
//!   parallel when the `parallel` feature is enabled.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod invariants;
pub mod reduction;
pub mod sweep;
pub mod zktop;

pub use error::{Error, Result};

/// Version tag written into every JSON document produced by the crate.
pub const SCHEMA_VERSION: u32 = 1;
