//! Core algorithms for platform-aware neural-architecture adaptation.
//!
//! The crate is `no_std` (with `alloc`) and fully deterministic: given the
//! same seeds and configuration, every routine reproduces its output exactly.
//! IO, file formats, and the command-line front end live in the companion
//! `chamnet` crate.

#![no_std]

extern crate alloc;

pub mod ees;
pub mod fitness;
pub mod gp;
pub mod oracle;
pub mod qmc;
pub mod resource;
pub mod sampler;
pub mod space;

pub use gp::{GpModel, Prediction};
pub use sampler::{EvalOracle, Observation, SamplerConfig};
pub use space::{Gene, SearchSpace};
