//! Generalized eigenstates of linearly transformed position and momentum
//! observables.
//!
//! Given a symplectic matrix `W = [[E, F], [G, H]]` that defines new
//! observables `ŵ = W ŷ`, this crate builds the eigenstates of the new
//! coordinate block (`E x + F p`) and momentum block (`G x + H p`) in the
//! original position basis. Every eigenstate has the same shape: a
//! quadratic phase on an affine subspace of configuration space,
//!
//! ```text
//! |ω⟩ = ∫ dξ |V₁ξ + c⟩ · n · exp(i(−½ ξᵀMξ + ξᵀb)),   ξ ∈ ℝʳ
//! ```
//!
//! where `V₁` spans the row space of `F` (or `H`) and `c` solves the
//! null-space constraint. Degenerate blocks are handled through the
//! narrowed SVD and the Moore–Penrose pseudoinverse in [`subspace`].
//!
//! Module map:
//! - [`subspace`]: rank-revealing SVD, pseudoinverse, projectors.
//! - [`symplectic`]: validated matrices, inverse, generators.
//! - [`eigenstate`]: closed-form synthesis and algebraic residuals.
//! - [`overlap`]: delta-product overlaps and delta normalization.
//! - [`numeric`]: grid sampling, finite differences, quadrature oracles.
//! - [`format`]: text file formats used by the command-line tool.

pub mod eigenstate;
pub mod error;
pub mod format;
pub mod numeric;
pub mod overlap;
pub mod subspace;
pub mod symplectic;

pub use eigenstate::{coordinate_eigenstate, momentum_eigenstate, Flavor, QuadraticPhaseState};
pub use error::{Error, Result};
pub use overlap::{DeltaFactor, DeltaProduct};
pub use subspace::SubspaceData;
pub use symplectic::SymplecticMatrix;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

/// Default relative singular-value cutoff used to decide numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Default tolerance for symplectic validation.
pub const DEFAULT_SYMPLECTIC_TOL: f64 = 1e-10;
