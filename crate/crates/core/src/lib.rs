//! Interactive template-based ray-graph segmentation.
//!
//! A single seed point inside an object sends out rays shaped by a template
//! (circle, rectangle, triangle, polygon, sphere, cube). Nodes sampled along
//! the rays form a layered graph whose minimal s-t-cut is the segmentation.
//! Refinement seeds placed on the object contour force the cut through the
//! lattice node nearest to them.
//!
//! The pipeline is split into modules that mirror its stages:
//!
//! - [`imaging`]: scalar grids, masks, file formats, interpolation, phantoms
//! - [`templates`]: template shapes and the ray/node lattice
//! - [`flownet`]: flow networks and the max-flow/min-cut solver
//! - [`cutbuilder`]: cost model and network assembly, refinement wiring
//! - [`segmenter`]: the end-to-end segmentation pass
//! - [`evalbench`]: Dice, brute-force oracles and the latency benchmark
//! - [`service`]: the session-oriented HTTP interface

pub mod cutbuilder;
pub mod error;
pub mod evalbench;
pub mod flownet;
pub mod geom;
pub mod imaging;
pub mod segmenter;
pub mod service;
pub mod templates;

pub use error::{Error, Result};
pub use geom::Point;
