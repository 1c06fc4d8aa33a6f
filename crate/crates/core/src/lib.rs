//! A laboratory for Toom's north-east-center voting rule R, its
//! consensus-forcing variant R+ = Q∘R², the triangle-span geometry used to
//! measure sets, and the cut-thickness functionals that R+ increases.
//!
//! Modules, bottom-up:
//! - [`lattice`]: sites, the plane and torus, the six-neighbor graph G.
//! - [`rules`]: tiles, R, Q, R+, evolution with injected failures.
//! - [`geometry`]: triangles `L(a,b,c)` in exact thirds, spans, covers.
//! - [`cuts`]: cuts, closure, and brute-force thickness Θ and θ.
//! - [`transfer`]: pulling cuts of R(S) and Q(S) back to S.
//! - [`app`]: pattern files, rendering, verification suites, experiments.

pub mod app;
pub mod cuts;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod rules;
pub mod transfer;

pub use error::{Error, Result};
pub use geometry::{Thirds, Triangle};
pub use lattice::{Site, SiteSet, Space};
