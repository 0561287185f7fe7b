//! Spectral analysis of a PT-symmetric tight-binding ring.
//!
//! The ring has `2N` sites with unit hopping, a gain site (`+iγ`) and a
//! loss site (`-iγ`) placed diametrically opposite, and a magnetic flux `Φ`
//! threading the ring. The crate builds the Hamiltonian in two gauges,
//! diagonalizes it with a dense complex QR solver, evaluates the closed-form
//! and implicit analytic results for the model, classifies the spectrum into
//! exact and broken PT phases, and runs parameter sweeps that produce
//! plot-ready tables.
//!
//! ```
//! use ptring::model::{build_flux_hamiltonian, RingParams};
//! use ptring::eig::eigenvalues;
//! use ptring::phase::classify;
//!
//! let params = RingParams::new(5, 0.5, 0.0).unwrap();
//! let spectrum = eigenvalues(&build_flux_hamiltonian(&params).unwrap());
//! assert!(classify(&spectrum).unwrap().is_exact());
//! ```

pub mod analytics;
pub mod cli;
pub mod eig;
mod error;
pub mod matching;
pub mod model;
pub mod phase;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
