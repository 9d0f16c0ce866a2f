//! Dyadic Hausdorff contents, Choquet integrals and dimensional BMO on resolution-limited grids.
//!
//! Everything lives on a [`grid::RootCube`] cut into `2^{dn}` half-open leaf cells. Set functions
//! are the dyadic contents `C_β(E) = min Σ l(Q_i)^β` over covers by dyadic subcubes, computed
//! exactly by a tree recursion; the rest of the crate builds on that one primitive.

pub mod bmo;
pub mod calculus;
pub mod choquet;
pub mod content;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod io;
pub mod jn;
pub mod potential;
pub mod suite;

pub use content::ContentParams;
pub use error::{CapError, Result};
pub use grid::{DiscreteMeasure, DyadicCube, DyadicSet, GridFunction, RootCube};
