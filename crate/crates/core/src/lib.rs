//! Pressure-field reconstruction from sampled pressure gradients.
//!
//! Three solvers share one set of containers:
//!
//! * [`siren`]: a sine-activated network whose input gradient is fitted to the
//!   samples; the network output is the pressure.
//! * [`osmodi`]: one-shot omni-directional integration, a single sparse system
//!   solved by conjugate gradients.
//! * [`gfi`]: a Green's-function boundary integral with midpoint quadrature.
//!
//! [`synth`] produces Taylor-Green ground truth, momentum source terms and
//! noisy velocity fields; [`metrics`] holds gauge alignment, error norms and
//! spectra.

pub mod error;
pub mod fields;
pub mod io;
pub mod mesh;
pub mod rng;

pub use error::{Error, Result};
pub mod fourier;
pub mod geometry;
pub mod synth;
pub mod osmodi;
pub mod gfi;
pub mod siren;
pub mod metrics;
pub mod pipeline;
