//! Reflectionless potentials with prescribed spectra.
//!
//! Build a [`spectra::Spectrum`] (primes, zeta zeros, oscillator levels),
//! turn it into a potential with [`marchenko`] or [`dressing`], check it with
//! the forward solver in [`schrodinger`], compare against the WKB profiles of
//! [`semiclassical`] and measure the fluctuations with [`fractal`].

pub mod dressing;
pub mod error;
pub mod fractal;
pub mod marchenko;
pub mod numeric;
pub mod potential;
pub mod registry;
pub mod schrodinger;
pub mod semiclassical;
pub mod spectra;

pub use error::{Error, Result};
pub use potential::{Method, SampledPotential};
pub use spectra::{Spectrum, SpectrumKind};
