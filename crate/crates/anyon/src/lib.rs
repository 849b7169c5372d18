//! Two anyons on a chain with an extended Hubbard interaction, solved as the
//! equivalent 2D complex-hopping lattice, plus the electric circuit that
//! emulates it.
//!
//! The crate is split along the computation:
//!
//! * [`model`] builds the N×N full-plane Hamiltonian and the exchange symmetry.
//! * [`spectra`] diagonalizes the physical sector, classifies states and sweeps θ.
//! * [`topology`] computes effective SSH couplings and the Zak phase.
//! * [`circuit`] synthesizes the R/L/C/NIC netlist and exports SPICE.
//! * [`acsim`] assembles nodal admittance matrices and computes impedance spectra.

pub mod acsim;
pub mod circuit;
pub mod matrix;
pub mod model;
pub mod spectra;
pub mod topology;

pub use num_complex::Complex64 as C64;
