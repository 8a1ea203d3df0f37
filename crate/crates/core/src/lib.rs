//! Measurement collapse and which-way interferometry with recoiling beam splitters.
//!
//! - [`tensor`]: dense states and density operators on named tensor-product spaces.
//! - [`collapse`]: system–apparatus premeasurement, statistical reduction,
//!   post-selection, and Stern–Gerlach shot sampling.
//! - [`wavepacket`]: Gaussian momentum packets of the beam splitters and the
//!   recoil translation operator.
//! - [`interferometer`]: the single-photon Mach–Zehnder pipeline with optional
//!   which-way detector and output splitter.
//! - [`scenario`]: file-driven runs and parameter sweeps producing CSV/JSON tables.

pub mod collapse;
pub mod interferometer;
pub mod scenario;
pub mod tensor;
pub mod tolerance;
pub mod wavepacket;

pub use num_complex::Complex64;
