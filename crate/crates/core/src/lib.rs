//! Simulator for a single photon in a Michelson interferometer whose arm-A
//! mirror is a classical harmonic oscillator, with the photon carried in
//! canonical (Heslot) variables so both sectors follow one Hamiltonian flow.
//!
//! Modules, bottom up:
//! - [`params`]: SI inputs, scaled units and derived constants.
//! - [`dynamics`]: hybrid Hamiltonian, equations of motion, RK4 integration.
//! - [`analytic`]: closed-form trajectories and the pointlike coherence.
//! - [`decoherence`]: thermal averages (closed form, quadrature, Monte Carlo),
//!   visibility and classical/quantum comparison.
//! - [`detection`]: density matrix and detector probabilities.

pub mod analytic;
pub mod decoherence;
pub mod detection;
pub mod dynamics;
pub mod hermite;
pub mod params;

pub use analytic::{CoherenceSample, MirrorPhasePoint, OscillationParams};
pub use decoherence::{AveragedCoherence, Method, MirrorModel, MonteCarloConfig, ThermalEnsemble};
pub use detection::{AveragedDensityMatrix, DetectorProbabilities};
pub use dynamics::{HybridState, StepControl, Trajectory};
pub use params::{DerivedParams, DimensionlessParams, ParamsInput, PhysicalParams, ReducedParams};
