//! Data-driven identification of price-responsive flexible-load (PFL) models.
//!
//! A PFL picks its aggregate power profile over `T` periods by minimizing
//! price-weighted cost over a feasible region `Ω`.  Given a dataset of
//! price/power pairs this crate answers, end to end:
//!
//! * what the load would do under a new price ([`flex_model`]),
//! * which regions of power space the data pins down ([`identifiability`]:
//!   the sample hull `Conv(Γ*)`, the optimality polyhedron `Π`, and the
//!   undetermined gap `ΔΩ` between them),
//! * the best storage-like model explaining the data, via a single-level
//!   KKT/big-M mixed-integer reformulation ([`identification`]),
//! * which probing prices close the gap ([`probing`]), and
//! * how measurement noise shifts the identification loss ([`noise_stats`]).
//!
//! Everything runs on the self-contained dense-simplex LP and
//! branch-and-bound MILP solver in [`solver`], so results are reproducible
//! bit for bit with no external dependencies.

pub mod dataset;
pub mod demo;
pub mod error;
pub mod flex_model;
pub mod identifiability;
pub mod identification;
pub mod noise_stats;
pub mod plot;
pub mod polyhedra;
pub mod probing;
pub mod rng;
pub mod solver;
pub mod tol;

pub use error::{Error, Result};
