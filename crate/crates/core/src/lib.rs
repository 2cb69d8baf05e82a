//! Upper bounds for the effective conductivity of multiphase periodic
//! composites, with a spectral cell-problem solver to check them.
//!
//! - [`phases`]: phase sets, the distribution function `F` and its tail
//!   integral.
//! - [`bounds`]: trivial, Hashin–Shtrikman and the `S`-parametrized family
//!   `H(S) + E(S)`, plus the three-phase refinement and optimization over `S`.
//! - [`microstructure`]: voxel grids, generators and the binary grid format.
//! - [`cell_solver`]: the effective tensor and the constructive
//!   potential-field bound.
//! - [`bmo_analysis`]: dyadic BMO norms and related empirical constants.

pub mod bmo_analysis;
pub mod bounds;
pub mod cell_solver;
pub mod fft;
pub mod field;
pub mod microstructure;
pub mod phases;

pub use bounds::{BoundConfig, BoundName, BoundReport, BoundsError};
pub use cell_solver::{EffectiveTensor, SolverConfig, SolverError};
pub use microstructure::{GridError, VoxelGrid};
pub use phases::{Phase, PhaseError, PhaseSet};
