//! Exact two-polariton physics for a 1D chain of two-level atoms inside a
//! hollow-core fiber.
//!
//! Internal units: ħ = 1, energies are angular frequencies (rad/s), lengths
//! are meters. Two-particle energies are handled relative to `2·E0` and
//! single-particle ones relative to `E0`; see [`dispersion`].

pub mod bare_exciton;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod exact2p;
pub mod oracle;
pub mod params;
pub mod sweeps;
pub mod wavepacket;

mod linalg;
mod numeric;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
