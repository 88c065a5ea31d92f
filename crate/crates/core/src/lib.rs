//! Spinor wavepacket simulation of neutron spin-orbit state preparation.
//!
//! A two-component field lives on a square grid in units of the transverse
//! coherence length. Operators act pointwise (phase plates, quadrupole and
//! gradient spin rotators, projections); analysis turns fields into intensity
//! and momentum maps, mode spectra and sinograms.

// NaN must fail the `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod angle;
pub mod config;
pub mod error;
pub mod field;
pub mod fft;
pub mod grid;
pub mod io;
pub mod lg;
pub mod operators;
mod reduce;
pub mod tomography;
pub mod validation;

pub use num_complex::Complex64;

pub use analysis::{Domain, ScalarMap2D, VectorMap2D};
pub use error::{Error, Result};
pub use field::{
    gaussian_wavepacket, inner_product, ScalarField, Spin, SpinDirection, Spinor, SpinorField,
    Warning,
};
pub use grid::GridSpec;
pub use lg::{ModeDecomposition, ModeIndex};
pub use operators::{OperatorStep, PhysicalParams, PipelineRun};
pub use tomography::Sinogram;
