//! Simulator for teleporting a photon's polarization onto the OAM parity of
//! its SPDC twin, with a spin-orbit Bell measurement made on one photon.
//!
//! The modules follow the protocol: [`spdc`] builds the pair state, [`bell`]
//! describes the measurement as projectors, [`apparatus`] models the optical
//! bench that realizes it, and [`protocol`] runs the whole exchange. Benches
//! can also be written declaratively in the [`dsl`] language.

pub mod apparatus;
pub mod bell;
pub mod dsl;
pub mod elements;
pub mod error;
pub mod hilbert;
pub mod protocol;
pub mod spdc;

pub use error::{Error, Result};
