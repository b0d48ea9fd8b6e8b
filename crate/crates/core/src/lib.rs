//! dGLI cloth coordinates.
//!
//! A rectangular cloth is represented by its closed boundary polyline. Eight
//! boundary segments next to the corners are selected, and for every pair of
//! them the directional derivative of their Gauss linking integral is taken
//! with the terminal endpoints pushed along the table normal. The 28 values
//! are compared with a rank-correlation (Spearman) distance.
//!
//! Modules:
//! - [`geometry`]: segment and curve linking integrals, the dGLI kernel
//! - [`quadrature`]: independent Gauss–Legendre evaluation of the integrand
//! - [`cloth`]: configurations, edge selection, coordinate vectors
//! - [`metrics`]: ranks, Pearson, Spearman and Euclidean distances
//! - [`baselines`]: edge/corner distance features, Procrustes, Fréchet, Hausdorff
//! - [`analysis`]: confusion matrices, Davies–Bouldin index, nearest-representative classification
//! - [`datagen`]: kinematic fold generator for synthetic datasets and sequences
//! - [`io`]: JSON configuration files, manifests, CSV matrices, SVG heatmaps

pub mod analysis;
pub mod baselines;
pub mod cloth;
pub mod datagen;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod quadrature;

pub use error::{Error, Result};
