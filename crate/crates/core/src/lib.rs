//! Simulation toolkit for all-photonic one-way repeater chains built from
//! foliated CSS codes.
//!
//! The pipeline runs bottom-up:
//!
//! * [`gf2`]: packed GF(2) matrices and polynomials;
//! * [`codes`]: CSS code construction (Steane, toric, generalized bicycle);
//! * [`foliation`]: the `2N + 1`-site cluster and its primal/dual syndrome
//!   subgraphs;
//! * [`decoding`]: erasure decoders and the single-hop census;
//! * [`montecarlo`]: loss sampling and rate estimation;
//! * [`analysis`]: effective attenuation fits and repeater placement;
//! * [`io`]: CSV tables and SVG plots.

pub mod analysis;
pub mod codes;
pub mod decoding;
mod error;
pub mod foliation;
pub mod gf2;
pub mod io;
pub mod montecarlo;

pub use error::{Error, Result};
