//! Quantization of Markov-type measures with complete overlaps on
//! graph-directed fractals.
//!
//! A system is a transition matrix `P` on the doubled alphabet `{1..2N}`
//! together with an initial vector `χ`, one contraction ratio per cell of the
//! base alphabet `{1..N}` and the quantization order `r`. Letters `i` and
//! `i + N` share every similitude, so distinct lifted paths land on the same
//! cylinder and their probabilities add up.
//!
//! Modules, bottom up:
//! - [`symbolic`]: words, lifts, admissibility and enumeration of `S_n`.
//! - [`model`]: the [`model::SystemSpec`] aggregate, assumption checks, example systems, JSON input.
//! - [`geometry`]: seeds, similitudes, cylinder sets and separation checks.
//! - [`measure`]: cylinder masses, energies, reducibility and cycle rates.
//! - [`spectral`]: parametrized matrices, spectral radii, dimension roots and the pressure function.
//! - [`quantization`]: anti-chains, error surrogates, sampling and Lloyd's algorithm.
//! - [`report`]: CSV output with run manifests.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod measure;
pub mod model;
pub mod quantization;
pub mod report;
pub mod spectral;
pub mod symbolic;

pub use error::{Error, Result};
