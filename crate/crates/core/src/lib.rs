//! Physics-based synthesis and fitting toolkit for chemical-shift-encoded
//! (CSE) MRI fat quantification.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! - [`signal`]: multi-echo CSE forward model, fat spectrum handling, PDFF
//!   and complex noise injection
//! - [`phantom`]: procedural abdominal q-map phantoms with ground truth and
//!   liver ROIs
//! - [`latent`]: whitened principal-component embedding of q-maps
//! - [`diffusion`]: DDPM variance schedule, forward noising, MLP denoiser
//!   training and reverse samplers in latent space
//! - [`fit`]: voxelwise water-fat separation by multi-start variable
//!   projection
//! - [`metrics`]: MMD, SSIM/MS-SSIM, diversity, PDFF error and Bland-Altman
//!   agreement statistics
//! - [`container`]: the `CSEM` binary array container with CRC-protected
//!   payloads
//! - [`config`]: experiment configuration schema shared with the CLI

pub mod config;
pub mod container;
pub mod diffusion;
pub mod error;
pub mod fit;
pub mod grid;
pub mod latent;
pub mod metrics;
pub mod phantom;
pub mod pipeline;
pub mod report;
pub mod seed;
pub mod signal;

pub use error::{Error, ErrorCategory, Result};
pub use grid::{ComplexMap, Grid, RealMap};
pub use signal::{
    add_complex_noise, forward_signal_complex, forward_signal_shared_phase, ppm_to_hz,
    ComplexImageSeries, EchoProtocol, FatSpectrum, QMaps, QMapsComplex, SpectralPeak,
};
