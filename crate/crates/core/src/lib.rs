//! Exact simulator for qudit entanglement distillation with generalized
//! (orbital angular momentum) beam splitters.
//!
//! The crate is layered bottom-up:
//!
//! * [`algebra`]: dense qudit registers, operators, density matrices.
//! * [`gates`]: CNOT, Fourier transform, phase gate, Bell and conserving states.
//! * [`beam_splitter`]: the mode-routing model `T_D` and its post-selection.
//! * [`protocols`]: BBPSSW, the single-step beam-splitter protocol and
//!   conserving-pair distillation, simulated and in closed form.
//! * [`verify`]: self-contained invariant checks over all of the above.

pub mod algebra;
pub mod beam_splitter;
mod error;
pub mod gates;
pub mod protocols;
pub mod verify;

pub use error::{Error, Result};
