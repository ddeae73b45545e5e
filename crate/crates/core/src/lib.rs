//! Modular robot co-evolution: body and brain genomes, decoding, a
//! reduced-order physics model, fitness, morphological descriptors, the
//! evolutionary loop and statistics.
//!
//! The crate is `no_std` with `alloc`; file formats, parallel evaluation and
//! the command line live in the `morphevo` crate.

#![no_std]
// `!(x > 0.0)` checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod controller;
pub mod decoder;
pub mod descriptors;
pub mod evolution;
pub mod fitness;
pub mod genome;
pub mod morphology;
pub mod rng;
pub mod simulation;
pub mod terrain;
