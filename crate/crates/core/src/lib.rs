//! Two-mode parametric down-conversion with Kerr terms.
//!
//! The Hamiltonian conserves `R = n1 + 2 n2` and the parity of `n1`, so it
//! splits into tridiagonal blocks labelled by `(p, M)`. On the resonance
//! manifold each block is diagonalized in closed form by dual Hahn
//! polynomials; elsewhere a symmetric tridiagonal QL solver is used.
//!
//! Everything numeric is generic over [`Real`] (`f32`, `f64`). The `*64`
//! aliases below fix the scalar to `f64`.

#![allow(clippy::needless_range_loop)]

pub mod dual_hahn;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod fock;
pub mod hamiltonian;
pub mod linalg;
pub mod observable;
pub mod scalar;
pub mod spectral;
pub mod validate;

pub use dual_hahn::{DualHahnBasis, DualHahnParams, Lattice, TransformMatrix, WeightTable};
pub use dynamics::{CoherentExpectation, Evolver, PropagatorBlock, TimeSeries};
pub use error::{Error, Result};
pub use fock::{AmplitudeRecord, BlockCoord, FockLabel, Sector, StateVector, TruncationReport};
pub use hamiltonian::{ModelParams, ResonanceCheck, TridiagonalBlock, RESONANCE_TOL};
pub use linalg::Matrix;
pub use observable::{Observable, ObservableTable};
pub use scalar::Real;
pub use spectral::{BlockEigensystem, Comparison, SolverChoice};

pub type Complex64 = num_complex::Complex<f64>;
pub type StateVector64 = StateVector<f64>;
pub type ModelParams64 = ModelParams<f64>;
pub type DualHahnParams64 = DualHahnParams<f64>;
pub type DualHahnBasis64 = DualHahnBasis<f64>;
pub type TridiagonalBlock64 = TridiagonalBlock<f64>;
pub type BlockEigensystem64 = BlockEigensystem<f64>;
pub type PropagatorBlock64 = PropagatorBlock<f64>;
pub type Evolver64 = Evolver<f64>;
pub type Observable64 = Observable<f64>;
pub type TimeSeries64 = TimeSeries<f64>;
pub type Matrix64 = Matrix<f64>;

pub type StateVector32 = StateVector<f32>;
pub type ModelParams32 = ModelParams<f32>;
pub type BlockEigensystem32 = BlockEigensystem<f32>;
