//! Gearbox fault detection through exact wavelet analysis.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`signal`]: load or synthesize a vibration record and cut it into frames.
//! 2. [`wavelet`] + [`optim`]: for every sample of a frame, search the Morlet
//!    scale whose daughter wavelet best matches the local signal shape
//!    (cosine of the angle between the two vectors) using a particle swarm
//!    or a genetic algorithm.
//! 3. [`features`]: histogram the per-sample best scales into 16 bins.
//! 4. [`svm`]: classify histograms as healthy or chipped with a two-class SVM.
//!
//! [`pipeline`] wires the stages together for the command line tool and
//! [`config`] holds its configuration document.

pub mod config;
pub mod error;
pub mod features;
pub mod optim;
pub mod pipeline;
pub mod rng;
pub mod signal;
pub mod svm;
pub mod wavelet;

pub use error::{Error, Result};
