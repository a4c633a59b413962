//! Simulation of linear-optical quantum circuits over bosonic Fock states.
//!
//! States are sparse superpositions of occupation-number kets. A [`circuit::Circuit`]
//! composes element matrices into one mode-space transformation, which the
//! [`cores`] apply ket by ket, either by direct expansion or through matrix permanents.
//! [`samplers`] draw outcomes without the full distribution, and the remaining modules
//! model imperfections: partially distinguishable photons ([`packets`]), losses
//! ([`losses`]), quantum-dot sources ([`sources`]) and detectors ([`measurement`]).

pub mod circuit;
pub mod device;
pub mod cores;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod losses;
pub mod measurement;
pub mod modes;
pub mod packets;
pub mod permanent;
pub mod samplers;
pub mod sources;

pub use error::{Error, Result};
pub use fock::{Ket, State};

pub type C64 = num_complex::Complex64;
