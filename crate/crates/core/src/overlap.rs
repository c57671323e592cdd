//! Overlaps between synthesized eigenstates.
//!
//! Two eigenstates of the same block and the same matrix pair to a product
//! of delta functions in `η = ϱ − ω`,
//!
//! ```text
//! ⟨ϱ|ω⟩ = conj(n_ϱ) n_ω (2π)ʳ · δˢ(V₂ᵀX⁺U₂U₂ᵀη) · δʳ(V₁ᵀY⁺η)
//! ```
//!
//! which is kept symbolic as a [`DeltaProduct`]. Whenever the stacked
//! argument map is invertible the product collapses to `κ δ^q(η)` with
//! `κ = prefactor / |det B|`, and [`normalize`] picks `|n|` so that `κ = 1`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::eigenstate::{BlockAnalysis, Flavor, QuadraticPhaseState};
use crate::error::{Error, Result};
use crate::subspace;
use crate::symplectic::SymplecticMatrix;

/// One factor `δ^d(A η)` with `A` of shape `d × q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaFactor {
    pub matrix: DMatrix<f64>,
    pub dim: usize,
}

/// Structured overlap `prefactor · Πᵢ δ^{dᵢ}(Aᵢη) · exp(i(½ηᵀPη + vᵀη))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaProduct {
    pub q: usize,
    pub factors: Vec<DeltaFactor>,
    pub prefactor: Complex64,
    /// Residual quadratic phase; absent for same-flavor overlaps, where the
    /// quadratic phases of bra and ket cancel.
    pub phase_quadratic: Option<(DMatrix<f64>, DVector<f64>)>,
}

impl DeltaProduct {
    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).sum()
    }

    /// All factor matrices stacked row-wise.
    pub fn stacked(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.total_dim(), self.q);
        let mut row = 0;
        for f in &self.factors {
            out.view_mut((row, 0), (f.dim, self.q)).copy_from(&f.matrix);
            row += f.dim;
        }
        out
    }
}

fn check_pair(left: &QuadraticPhaseState, right: &QuadraticPhaseState) -> Result<()> {
    if left.source != right.source {
        return Err(Error::InvalidPairing(
            "states come from different symplectic matrices".into(),
        ));
    }
    if left.rank_tol != right.rank_tol {
        return Err(Error::InvalidPairing(
            "states were built with different rank tolerances".into(),
        ));
    }
    Ok(())
}

/// `⟨left|right⟩` for two eigenstates of the same block.
pub fn same_flavor_overlap(left: &QuadraticPhaseState, right: &QuadraticPhaseState) -> Result<DeltaProduct> {
    check_pair(left, right)?;
    if left.flavor != right.flavor {
        return Err(Error::InvalidPairing(format!(
            "flavors differ ({} vs {})",
            left.flavor, right.flavor
        )));
    }
    let ba = BlockAnalysis::new(&left.source, left.flavor, left.rank_tol)?;
    let r = ba.rank();
    let s = ba.q() - r;
    let mut factors = Vec::with_capacity(2);
    if s > 0 {
        factors.push(DeltaFactor {
            matrix: ba.y_svd.v2.transpose() * ba.offset_map(),
            dim: s,
        });
    }
    if r > 0 {
        factors.push(DeltaFactor {
            matrix: ba.linear_map(),
            dim: r,
        });
    }
    Ok(DeltaProduct {
        q: ba.q(),
        factors,
        prefactor: left.norm_const.conj() * right.norm_const * (2.0 * PI).powi(r as i32),
        phase_quadratic: None,
    })
}

/// True iff the delta factors pin `η` to zero, i.e. the stacked factor
/// matrix has numerical rank `q`.
pub fn forces_eta_zero(d: &DeltaProduct, rank_tol: f64) -> bool {
    d.total_dim() >= d.q && subspace::numerical_rank(&d.stacked(), rank_tol) == d.q
}

/// Coefficient `κ` with `d = κ δ^q(η)`, using `δ^q(Bη) = |det B|⁻¹ δ^q(η)`.
pub fn collapse(d: &DeltaProduct, rank_tol: f64) -> Result<Complex64> {
    if d.total_dim() != d.q || !forces_eta_zero(d, rank_tol) {
        return Err(Error::NotRepresentable("delta factors do not force η = 0".into()));
    }
    if d.phase_quadratic.is_some() {
        return Err(Error::NotRepresentable(
            "residual phase present; collapse is defined for pure delta products".into(),
        ));
    }
    let det = d.stacked().determinant().abs();
    Ok(d.prefactor / det)
}

pub(crate) fn norm_from_analysis(ba: &BlockAnalysis) -> Result<Complex64> {
    let b = ba.stacked_map();
    let sv = subspace::singular_values(&b);
    let (smin, smax) = (sv[sv.len() - 1], sv[0]);
    // Trivial intersection N(Xᵀ) ∩ N(Yᵀ) makes B invertible; failure here
    // means an upstream decomposition is wrong.
    if !(smax > 0.0 && smin > 1e-13 * smax) {
        return Err(Error::Internal(format!(
            "stacked delta map is singular (σ_min {smin:.3e}, σ_max {smax:.3e})"
        )));
    }
    let det = b.determinant().abs();
    let mag = (det / (2.0 * PI).powi(ba.rank() as i32)).sqrt();
    Ok(Complex64::new(mag, 0.0))
}

/// Real positive `n` such that same-flavor overlaps equal `δ^q(ϱ − ω)`:
/// `|n| = (|det B| / (2π)ʳ)^{1/2}`.
pub fn normalize(m: &SymplecticMatrix, flavor: Flavor, rank_tol: f64) -> Result<Complex64> {
    norm_from_analysis(&BlockAnalysis::new(m, flavor, rank_tol)?)
}

/// `(2πi)^{n/2} (det A)^{−1/2} exp(−½ i JᵀA⁻¹J)`, the η → 0⁺ limit of
/// `∫ exp(i(½xᵀAx + Jᵀx) − η xᵀx) dx`.
///
/// `(det A)^{−1/2}` is the product of principal branches `λ_k^{−1/2}`, so a
/// negative eigenvalue contributes `−i |λ_k|^{−1/2}`.
pub fn fresnel_closed_form(a: &DMatrix<f64>, j: &DVector<f64>) -> Result<Complex64> {
    let n = a.nrows();
    if !a.is_square() || j.len() != n {
        return Err(Error::DimensionMismatch {
            what: "Fresnel integral parameters",
            expected: n,
            got: if a.is_square() { j.len() } else { a.ncols() },
        });
    }
    if (a - a.transpose()).norm() > 1e-12 * a.norm().max(1.0) {
        return Err(Error::InvalidInput("Fresnel matrix must be symmetric".into()));
    }
    let eig = SymmetricEigen::new(a.clone());
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if eig.eigenvalues.iter().any(|l| l.abs() <= 1e-12 * lmax) || lmax == 0.0 {
        return Err(Error::InvalidInput("Fresnel matrix is singular".into()));
    }
    let jr = eig.eigenvectors.transpose() * j;
    let mut value = Complex64::from_polar((2.0 * PI).powf(n as f64 / 2.0), PI * n as f64 / 4.0);
    let mut quad = 0.0;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        let root = if l > 0.0 {
            Complex64::new(l.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-l).sqrt())
        };
        value /= root;
        quad += jr[k] * jr[k] / l;
    }
    Ok(value * Complex64::from_polar(1.0, -0.5 * quad))
}

/// Cross-flavor overlap between two full-rank eigenstates.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossOverlap {
    /// Quadratic coefficient `A = S_left − S_right` of the integrand.
    pub a: DMatrix<f64>,
    /// Linear coefficient `J = t_right − t_left`.
    pub j: DVector<f64>,
    /// `conj(n_left) n_right`
    pub prefactor: Complex64,
    /// The Fresnel integral itself.
    pub integral: Complex64,
    pub value: Complex64,
}

/// `⟨left|right⟩ = conj(n_l) n_r ∫ exp(i(½αᵀAα + Jᵀα)) dα` for two states
/// of different flavor with full-rank support.
pub fn cross_flavor_overlap(left: &QuadraticPhaseState, right: &QuadraticPhaseState) -> Result<CrossOverlap> {
    check_pair(left, right)?;
    if left.flavor == right.flavor {
        return Err(Error::InvalidPairing(
            "cross-flavor overlap needs one coordinate and one momentum state".into(),
        ));
    }
    for s in [left, right] {
        if s.rank() != s.q_dim {
            return Err(Error::NotRepresentable(format!(
                "{} state has rank {} < {}; the overlap is delta-type",
                s.flavor,
                s.rank(),
                s.q_dim
            )));
        }
    }
    let a = left.position_quad_form() - right.position_quad_form();
    let a = (&a + a.transpose()) * 0.5;
    let j = right.position_linear() - left.position_linear();
    let integral = fresnel_closed_form(&a, &j).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::NotRepresentable(msg),
        other => other,
    })?;
    let prefactor = left.norm_const.conj() * right.norm_const;
    Ok(CrossOverlap {
        value: prefactor * integral,
        a,
        j,
        prefactor,
        integral,
    })
}
