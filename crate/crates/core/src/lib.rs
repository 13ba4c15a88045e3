//! Wavepacket dynamics of a diatomic molecule and a three-level atom
//! sharing a single lossy cavity mode.

pub mod config;
pub mod error;
pub mod grid;
pub mod observables;
pub mod polariton;
pub mod potential;
pub mod propagator;
pub mod system;
pub mod units;
pub mod vibrational;
pub mod xspace;

pub use config::{load_config, parse_config, Composition, SimulationConfig, Strategy};
pub use error::{Error, Result};
pub use grid::RGrid;
pub use system::{
    apply_hamiltonian, build_basis, envelope_field, initial_state, ChannelBasis, HamiltonianModel,
    WavefunctionState,
};
pub use observables::{diagnostics, DiagnosticsSummary, PopulationSnapshot};
pub use propagator::{field_free_propagate, propagate, step, TrajectoryRecord};
