//! Simulation and analysis toolkit for the inhomogeneous mass trap (IMT)
//! experienced by dark-state polaritons in a 2D counter-propagating EIT
//! medium: full optical-Bloch dynamics, the effective non-Hermitian
//! Schrödinger reduction, its analytic harmonic-trap solutions, and the
//! observables connecting them.

pub mod analysis;
pub mod analytic;
pub mod config;
pub mod fields;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod obe;
pub mod params;
pub mod run;
pub mod schrodinger;
pub mod synthetic;
