//! Multi-DoF entanglement toolkit for distinguishable and indistinguishable
//! particles.

pub mod circuits;
pub mod cli;
pub mod error;
pub mod fidelity;
pub mod hardy;
pub mod linalg;
pub mod measurement;
pub mod measures;
pub mod protocols;
pub mod qstate;
pub mod trace;

pub use error::{Error, Result};
pub use qstate::{DensityMatrix, DofSpec, Ket, ParticleKind, SymState};
pub use trace::Subsystem;
