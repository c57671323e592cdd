use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::pairwise_sum;
use crate::error::{Error, Result};
use crate::overlap::fresnel_closed_form;

/// Damping strengths `ε/|λ|` used for the regularized limit: Chebyshev
/// points on `[0, 1/4]`, well inside the radius `1/2` at which the damped
/// integral stops being analytic in `ε`.
#[allow(clippy::excessive_precision)]
pub const DEFAULT_ETA_RATIOS: [f64; 24] = [
    0.00026763459517456512,
    0.0024018399495961962,
    0.006633733813111789,
    0.012890907308413954,
    0.021066298462181846,
    0.031020024065127827,
    0.042581773112491395,
    0.0555537208725497,
    0.069713913722624837,
    0.084820066837104788,
    0.10061370974798396,
    0.11682460884623209,
    0.13317539115376789,
    0.14938629025201602,
    0.1651799331628952,
    0.18028608627737513,
    0.19444627912745027,
    0.20741822688750861,
    0.21897997593487217,
    0.22893370153781811,
    0.23710909269158603,
    0.2433662661868882,
    0.2475981600504038,
    0.24973236540482543,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelResult {
    pub closed_form: Complex64,
    /// Damped integrals extrapolated to zero damping.
    pub regularized: Complex64,
    /// Change in the extrapolated value when the last node is dropped.
    pub extrapolation_error: f64,
    /// `|closed_form − regularized| / |closed_form|`.
    pub relative_difference: f64,
}

/// `∫ exp(i(½xᵀAx + Jᵀx)) dx` in closed form and as the `ε → 0⁺` limit of
/// the same integral damped by `exp(−ε|λ|u²)` along each eigenvector `u`
/// of `A`.
///
/// The orthogonal change of variables to the eigenbasis has unit Jacobian,
/// so the integral splits into one-dimensional factors; each factor is a
/// trapezoid sum of the damped integrand, evaluated at every ratio in
/// `eta_ratios` and extrapolated to zero by polynomial interpolation.
pub fn fresnel_integral(a: &DMatrix<f64>, j: &DVector<f64>, eta_ratios: &[f64]) -> Result<FresnelResult> {
    let closed_form = fresnel_closed_form(a, j)?;
    if eta_ratios.len() < 2 || eta_ratios.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidInput("need at least two positive damping ratios".into()));
    }
    let eig = SymmetricEigen::new(a.clone());
    let jt = eig.eigenvectors.transpose() * j;
    let mut regularized = Complex64::new(1.0, 0.0);
    let mut rel_err = 0.0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let scale = lambda.abs().sqrt();
        let sign = lambda.signum();
        let jk = jt[k] / scale;
        let values: Vec<Complex64> = eta_ratios.iter().map(|&eps| damped_chirp(sign, jk, eps)).collect();
        let (limit, err) = extrapolate_to_zero(eta_ratios, &values);
        rel_err += err / limit.norm().max(f64::MIN_POSITIVE);
        regularized *= limit / scale;
    }
    let relative_difference = (closed_form - regularized).norm() / closed_form.norm();
    Ok(FresnelResult {
        closed_form,
        regularized,
        extrapolation_error: rel_err * regularized.norm(),
        relative_difference,
    })
}

/// Trapezoid sum of `exp(−εu² + i(½su² + ju))` over the range where the
/// damping exceeds `e^{-40}`. The step keeps the aliased spectrum below
/// the same level.
fn damped_chirp(s: f64, j: f64, eps: f64) -> Complex64 {
    let x = (40.0 / eps).sqrt();
    let h = std::f64::consts::PI / (x + j.abs());
    let m = (x / h).ceil() as i64;
    let terms: Vec<Complex64> = (-m..=m)
        .map(|i| {
            let u = i as f64 * h;
            Complex64::from_polar((-eps * u * u).exp(), 0.5 * s * u * u + j * u)
        })
        .collect();
    pairwise_sum(&terms) * h
}

/// Neville evaluation at zero of the interpolant through `(x_i, y_i)`,
/// together with the change from the interpolant on all but the last
/// point.
pub(crate) fn extrapolate_to_zero(x: &[f64], y: &[Complex64]) -> (Complex64, f64) {
    let n = x.len();
    let mut p = y.to_vec();
    let mut prev = p[0];
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i] * x[i + m] - p[i + 1] * x[i]) / (x[i + m] - x[i]);
        }
        if m == n - 2 {
            prev = p[0];
        }
    }
    (p[0], (p[0] - prev).norm())
}
