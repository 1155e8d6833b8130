//! Pure, allocation-only core for building diagnostic spatial-reasoning VQA
//! corpora of oriented objects.
//!
//! Everything here is deterministic and free of IO: geometry and direction
//! labels, scene sampling, a software rasterizer, question programs with their
//! enumeration, realization and balancing, split assignment, and scoring.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod eval;
pub mod geometry;
pub mod question;
pub mod rng;
pub mod render;
pub mod scene;
pub mod split;
pub mod stats;
