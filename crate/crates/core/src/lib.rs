//! Numerics for a family of meromorphic maps with two finite asymptotic
//! values: orbit classification, symbolic itineraries, Koenigs
//! linearization, fundamental-domain charts, the shift-locus coordinate
//! map, and solvers plus path tracers for boundary parameters.

pub mod atlas;
pub mod chart;
pub mod error;
pub mod family;
pub mod itinerary;
pub mod koenigs;
pub mod model;
pub mod orbit;
pub mod raster;
pub mod tree;

pub use error::{Error, Result};
pub use family::{ExtComplex, FamilySlice};
pub use koenigs::{build_linearizer, Linearizer, Normalization};
pub use orbit::{classify_orbit, classify_parameter, IterationBudget, OrbitKind, Region};
