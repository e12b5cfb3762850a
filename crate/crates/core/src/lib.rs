//! Sampling and interpolation certificates for band-limited functions whose
//! spectrum is a symmetric convex body (or a finite union of boxes).
//!
//! The crate is organized bottom-up: numerical helpers (`special`, `quad`,
//! `linalg`), the geometric substrate (`geometry`, `spectrum`, `lattice`),
//! and the certifiers built on them.

pub mod certificate;
pub mod concentration;
pub mod error;
pub mod expsys;
pub mod fourier;
pub mod geometry;
pub mod ingham;
pub mod lattice;
pub mod perturb;
pub mod linalg;
pub mod quad;
pub mod sampling_cert;
pub mod special;
pub mod spectrum;

pub use error::{CertError, Result};
