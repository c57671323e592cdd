//! Closed-form eigenstates of the transformed coordinate and momentum
//! observables.
//!
//! For the coordinate block `ŵ_A = E x̂ + F p̂` the eigenstate with
//! eigenvalue `ω` is
//!
//! ```text
//! |ω⟩ = ∫ dξ |V₁ξ + c⟩ · n · exp(i(−½ ξᵀMξ + ξᵀb))
//!   c = E⁺U₂U₂ᵀω
//!   M = V₁ᵀF⁺EFᵀF⁺ᵀV₁
//!   b = V₁ᵀF⁺ω
//! ```
//!
//! with `F = U₁ΣV₁ᵀ` the narrowed SVD and `U₂` spanning `N(Fᵀ)`. The
//! momentum block `G x̂ + H p̂` has the same form with `(E, F)` replaced by
//! `(G, H)`. The free null-space vector in the linear phase is fixed to
//! zero, and the phase of `n` is zero (real positive normalization).

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::overlap;
use crate::subspace::{self, SubspaceData};
use crate::symplectic::SymplecticMatrix;

/// Which half of the transformed observables an eigenstate diagonalizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    /// `ŵ_A = E x̂ + F p̂`
    Coordinate,
    /// `ŵ_{A+q} = G x̂ + H p̂`
    Momentum,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flavor::Coordinate => "coordinate",
            Flavor::Momentum => "momentum",
        })
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "coordinate" | "c" => Ok(Flavor::Coordinate),
            "momentum" | "m" => Ok(Flavor::Momentum),
            other => Err(Error::InvalidInput(format!("unknown flavor '{other}'"))),
        }
    }
}

/// Decomposition data for one block row `(X, Y)` of a symplectic matrix,
/// where `X` multiplies positions and `Y` momenta.
#[derive(Debug, Clone)]
pub struct BlockAnalysis {
    pub flavor: Flavor,
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub y_svd: SubspaceData,
    pub x_pinv: DMatrix<f64>,
    pub y_pinv: DMatrix<f64>,
}

impl BlockAnalysis {
    pub fn new(m: &SymplecticMatrix, flavor: Flavor, rank_tol: f64) -> Result<Self> {
        let (x, y) = match flavor {
            Flavor::Coordinate => (m.e(), m.f()),
            Flavor::Momentum => (m.g(), m.h()),
        };
        let y_svd = subspace::decompose(&y, rank_tol)?;
        let y_pinv = subspace::pseudoinverse(&y_svd);
        let x_pinv = subspace::pinv(&x, rank_tol)?;
        Ok(BlockAnalysis {
            flavor,
            x,
            y,
            y_svd,
            x_pinv,
            y_pinv,
        })
    }

    pub fn q(&self) -> usize {
        self.x.nrows()
    }

    pub fn rank(&self) -> usize {
        self.y_svd.rank
    }

    /// `X⁺U₂U₂ᵀ`: maps an eigenvalue to the support offset.
    pub fn offset_map(&self) -> DMatrix<f64> {
        let u2 = &self.y_svd.u2;
        &self.x_pinv * u2 * u2.transpose()
    }

    /// `V₁ᵀY⁺` (`r × q`): maps an eigenvalue to the linear phase.
    pub fn linear_map(&self) -> DMatrix<f64> {
        self.y_svd.v1.transpose() * &self.y_pinv
    }

    /// `V₁ᵀY⁺XYᵀY⁺ᵀV₁` (`r × r`), symmetric for symplectic input.
    pub fn quad_form(&self) -> DMatrix<f64> {
        let v1 = &self.y_svd.v1;
        v1.transpose() * &self.y_pinv * &self.x * self.y.transpose() * self.y_pinv.transpose() * v1
    }

    /// `[V₂ᵀX⁺U₂U₂ᵀ; V₁ᵀY⁺]`, the `q × q` map whose kernel is the set of
    /// eigenvalue differences with nonzero overlap.
    pub fn stacked_map(&self) -> DMatrix<f64> {
        let q = self.q();
        let r = self.rank();
        let mut b = DMatrix::zeros(q, q);
        b.view_mut((0, 0), (q - r, q))
            .copy_from(&(self.y_svd.v2.transpose() * self.offset_map()));
        b.view_mut((q - r, 0), (r, q)).copy_from(&self.linear_map());
        b
    }
}

/// Symbolic eigenstate: a quadratic phase on the affine subspace
/// `{V₁ξ + c : ξ ∈ ℝʳ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPhaseState {
    pub q_dim: usize,
    pub support_offset: DVector<f64>,
    /// Orthonormal `q × r` basis of the support directions.
    pub support_basis: DMatrix<f64>,
    pub quad_form: DMatrix<f64>,
    pub linear_vec: DVector<f64>,
    pub norm_const: Complex64,
    pub eigenvalue: DVector<f64>,
    pub flavor: Flavor,
    pub source: SymplecticMatrix,
    pub rank_tol: f64,
}

impl QuadraticPhaseState {
    pub fn rank(&self) -> usize {
        self.support_basis.ncols()
    }

    /// `V₁MV₁ᵀ`: the quadratic form expressed in position coordinates.
    pub fn position_quad_form(&self) -> DMatrix<f64> {
        &self.support_basis * &self.quad_form * self.support_basis.transpose()
    }

    /// `V₁b`: the linear phase expressed in position coordinates.
    pub fn position_linear(&self) -> DVector<f64> {
        &self.support_basis * &self.linear_vec
    }

    /// Amplitude `n exp(i(−½ξᵀMξ + ξᵀb))` at support coordinate `ξ`.
    pub fn support_amplitude(&self, xi: &[f64]) -> Complex64 {
        let r = self.rank();
        debug_assert_eq!(xi.len(), r);
        let mut phase = 0.0;
        for i in 0..r {
            let mx: f64 = xi.iter().enumerate().map(|(j, x)| self.quad_form[(i, j)] * x).sum();
            phase += xi[i] * (self.linear_vec[i] - 0.5 * mx);
        }
        self.norm_const * Complex64::from_polar(1.0, phase)
    }

    /// Position-space wavefunction value; only defined for full-rank support.
    pub fn evaluate(&self, alpha: &[f64]) -> Result<Complex64> {
        if self.rank() != self.q_dim {
            return Err(Error::DeltaSupported {
                rank: self.rank(),
                q: self.q_dim,
            });
        }
        let shifted = DVector::from_fn(self.q_dim, |i, _| alpha[i] - self.support_offset[i]);
        let xi = self.support_basis.transpose() * shifted;
        Ok(self.support_amplitude(xi.as_slice()))
    }
}

fn check_omega(m: &SymplecticMatrix, omega: &DVector<f64>) -> Result<()> {
    if omega.len() != m.q() {
        return Err(Error::DimensionMismatch {
            what: "eigenvalue vector",
            expected: m.q(),
            got: omega.len(),
        });
    }
    if !omega.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("eigenvalue has non-finite entries".into()));
    }
    Ok(())
}

/// Synthesize the eigenstate of the requested block.
pub fn synthesize(
    m: &SymplecticMatrix,
    flavor: Flavor,
    omega: &DVector<f64>,
    rank_tol: f64,
) -> Result<QuadraticPhaseState> {
    check_omega(m, omega)?;
    let ba = BlockAnalysis::new(m, flavor, rank_tol)?;
    let u2 = &ba.y_svd.u2;
    let constrained = u2 * (u2.transpose() * omega);

    // The constrained component must lie in R(X); symplecticity guarantees it.
    let miss = (&constrained - &ba.x * (&ba.x_pinv * &constrained)).norm();
    let cond = 1.0 + ba.x.norm() * ba.x_pinv.norm();
    if miss > 1e-8 * cond * omega.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Internal(format!(
            "null-space component of ω is not in the range of the position block (miss {miss:.3e})"
        )));
    }

    let norm_const = overlap::norm_from_analysis(&ba)?;
    Ok(QuadraticPhaseState {
        q_dim: m.q(),
        support_offset: &ba.x_pinv * constrained,
        support_basis: ba.y_svd.v1.clone(),
        quad_form: ba.quad_form(),
        linear_vec: ba.linear_map() * omega,
        norm_const,
        eigenvalue: omega.clone(),
        flavor,
        source: m.clone(),
        rank_tol,
    })
}

pub fn coordinate_eigenstate(m: &SymplecticMatrix, omega: &DVector<f64>, rank_tol: f64) -> Result<QuadraticPhaseState> {
    synthesize(m, Flavor::Coordinate, omega, rank_tol)
}

pub fn momentum_eigenstate(m: &SymplecticMatrix, omega: &DVector<f64>, rank_tol: f64) -> Result<QuadraticPhaseState> {
    synthesize(m, Flavor::Momentum, omega, rank_tol)
}

/// Algebraic residuals of the eigenvalue equation restricted to the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    /// Component of the equation inside `R(Y)`.
    pub row_residual: f64,
    /// Component inside `N(Yᵀ)`, plus the support condition `Y V₂ = 0`.
    pub constraint_residual: f64,
    /// `‖Yc‖`. Diagnostic only: the support is `c + R(Yᵀ)` whatever the
    /// `R(Yᵀ)` part of `c`, and `X⁺U₂U₂ᵀω` generally has one when
    /// `0 < rank Y < q`.
    pub offset_null_residual: f64,
}

impl Residuals {
    /// Largest of the two equation residuals.
    pub fn max(&self) -> f64 {
        self.row_residual.max(self.constraint_residual)
    }
}

/// Check that the state's parameters solve `(X α + Y p) ψ = ω ψ` on its
/// support without sampling.
///
/// On the support `α = V₁ξ + c` the momentum acts as `V₁(−Mξ + b)`, so the
/// equation holds for all `ξ` iff `XV₁ = YV₁M` and `Xc + YV₁b = ω`. Both
/// identities are split along `U₁` (row residual) and `U₂` (constraint
/// residual).
pub fn residual_check(state: &QuadraticPhaseState, m: &SymplecticMatrix) -> Result<Residuals> {
    check_omega(m, &state.eigenvalue)?;
    let (x, y) = match state.flavor {
        Flavor::Coordinate => (m.e(), m.f()),
        Flavor::Momentum => (m.g(), m.h()),
    };
    let d = subspace::decompose(&y, state.rank_tol)?;
    let q = m.q();
    let r = state.rank();
    let mut u = DMatrix::zeros(q, q);
    u.view_mut((0, 0), (q, d.rank)).copy_from(&d.u1);
    u.view_mut((0, d.rank), (q, q - d.rank)).copy_from(&d.u2);
    let u1 = u.columns(0, r).into_owned();
    let u2 = u.columns(r, q - r).into_owned();

    let v1 = &state.support_basis;
    let c = &state.support_offset;
    let omega = &state.eigenvalue;
    let xv1 = &x * v1;
    let yv1 = &y * v1;

    let quad_eq = &xv1 - &yv1 * &state.quad_form;
    let lin_eq = &x * c + &yv1 * &state.linear_vec - omega;
    let row_residual = (u1.transpose() * &quad_eq)
        .norm()
        .max((u1.transpose() * &lin_eq).norm());

    let off_support = &y - &yv1 * v1.transpose();
    let constraint_residual = (u2.transpose() * &xv1)
        .norm()
        .max((u2.transpose() * (&x * c - omega)).norm())
        .max(off_support.norm());

    Ok(Residuals {
        row_residual,
        constraint_residual,
        offset_null_residual: (&y * c).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{generate, Generator};
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn identity_gives_point_support() {
        let m = SymplecticMatrix::identity(2);
        let s = coordinate_eigenstate(&m, &v(&[1.0, 2.0]), 1e-10).unwrap();
        assert_eq!(s.rank(), 0);
        assert!((&s.support_offset - v(&[1.0, 2.0])).norm() < 1e-15);
        assert!((s.norm_const - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sigma_gives_plane_wave() {
        let m = SymplecticMatrix::standard_form(1);
        let s = coordinate_eigenstate(&m, &v(&[1.5]), 1e-10).unwrap();
        assert_eq!(s.rank(), 1);
        assert!(s.quad_form.norm() < 1e-15);
        assert!((s.position_linear() - v(&[1.5])).norm() < 1e-15);
        assert!((s.norm_const.re - (2.0 * PI).powf(-0.5)).abs() < 1e-15);

        let p = momentum_eigenstate(&m, &v(&[0.7]), 1e-10).unwrap();
        assert_eq!(p.rank(), 0);
        assert!((&p.support_offset - v(&[-0.7])).norm() < 1e-15);
    }

    #[test]
    fn mixing_matrix_signs() {
        let m = generate(&Generator::PhaseRotation { q: 1, angle: FRAC_PI_4 }).unwrap();
        let w = 0.8;
        let c = coordinate_eigenstate(&m, &v(&[w]), 1e-10).unwrap();
        let p = momentum_eigenstate(&m, &v(&[w]), 1e-10).unwrap();
        assert!((c.position_quad_form()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((p.position_quad_form()[(0, 0)] + 1.0).abs() < 1e-14);
        assert!((c.position_linear()[0] - SQRT_2 * w).abs() < 1e-14);
        assert!((p.position_linear()[0] - SQRT_2 * w).abs() < 1e-14);
        let expect = (SQRT_2 * PI).powf(-0.5);
        assert!((c.norm_const.norm() - expect).abs() < 1e-14);
        assert!(residual_check(&c, &m).unwrap().max() < 1e-12);
        assert!(residual_check(&p, &m).unwrap().max() < 1e-12);
    }

    #[test]
    fn residuals_vanish_for_sigma() {
        let m = SymplecticMatrix::standard_form(2);
        let s = coordinate_eigenstate(&m, &v(&[0.3, -1.0]), 1e-10).unwrap();
        let r = residual_check(&s, &m).unwrap();
        assert_eq!(r.row_residual, 0.0);
        assert_eq!(r.constraint_residual, 0.0);
    }

    #[test]
    fn wrong_eigenvalue_length() {
        let m = SymplecticMatrix::identity(2);
        assert!(matches!(
            coordinate_eigenstate(&m, &v(&[1.0]), 1e-10),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn evaluate_refuses_delta_states() {
        let m = SymplecticMatrix::identity(1);
        let s = coordinate_eigenstate(&m, &v(&[1.0]), 1e-10).unwrap();
        assert!(matches!(s.evaluate(&[0.0]), Err(Error::DeltaSupported { .. })));
    }

    #[test]
    fn flavor_parses() {
        assert_eq!("momentum".parse::<Flavor>().unwrap(), Flavor::Momentum);
        assert_eq!(Flavor::Coordinate.to_string(), "coordinate");
        assert!("x".parse::<Flavor>().is_err());
    }
}
