//! Simulator for a linear chain of Ising-coupled nuclear spins driven by a
//! rotating rf field.
//!
//! * [`physics`] turns laboratory fields and geometry into the dimensionless
//!   model (frequencies in units of ω₀ = 2π MHz).
//! * [`spectrum`] holds the basis, the diagonal spectrum and the drive
//!   structure.
//! * [`dynamics`] integrates the interaction-picture amplitude equations and
//!   carries two independent references.
//! * [`gates`] builds NOT/CNOT pulses, fidelities and resonance scans.
//! * [`experiments`] runs the Rabi-frequency and separation sweeps and the
//!   CNOT population trace.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod integrator;
pub mod physics;
pub mod scenario;
pub mod spectrum;

pub use error::{Result, SpinChainError};
