//! Multimode rotation-symmetric bosonic codes in truncated Fock space.
//!
//! The crate builds the codes, their noise channels and recovery maps, and
//! the tools used to analyse them: Knill-Laflamme checks, an optimal-recovery
//! SDP solver, logical gate circuits and canonical phase distributions.

pub mod channels;
pub mod circuits;
pub mod codes;
pub mod error;
pub mod fock;
pub mod klrecovery;
pub mod linalg;
pub mod optrec;
pub mod phasedist;

pub use error::{Error, Result};
