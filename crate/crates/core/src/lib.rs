//! Quantum process tomography with and without self-consistent treatment of
//! state-preparation and measurement errors, in the Pauli transfer matrix
//! picture.

pub mod campaign;
pub mod channels;
pub mod error;
pub mod metrics;
pub mod optim;
pub mod pauli;
pub mod qpt;
pub mod random;
pub mod scqpt;
pub mod sim;
pub mod superop;

pub use error::{Error, Result};
