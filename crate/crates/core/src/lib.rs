// SPDX-License-Identifier: Apache-2.0

//! Desk-scale CI-matrix Hamiltonian simulation.

pub mod cimatrix;
pub mod coloring;
pub mod determinants;
pub mod driver;
pub mod error;
pub mod integrals;
pub mod lcu;
pub mod orbitals;
pub mod quadrature;
pub mod selfinverse;

pub use error::{Error, Result};
