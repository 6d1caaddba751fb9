//! Lindblad model of a single quantum dot with exciton complexes coupled to a
//! nanocavity mode, with emission spectra from the quantum regression theorem.

pub mod hamiltonian;
pub mod hilbert;
pub mod params;
pub mod transitions;
pub mod liouvillian;
pub mod steady_state;
pub mod spectra;
pub mod analysis;
pub mod experiments;
