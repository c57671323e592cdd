use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{map_indexed, pairwise_sum};
use crate::eigenstate::QuadraticPhaseState;
use crate::error::{Error, Result};

/// `φ(x) = a · exp(−|x − center|²/(2·width²) + i·tiltᵀx)`, left
/// unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTestFunction {
    pub center: DVector<f64>,
    pub width: f64,
    pub momentum_tilt: DVector<f64>,
    /// Constant factor `a`; 1 unless scaled.
    pub amplitude: Complex64,
}

impl GaussianTestFunction {
    pub fn new(center: DVector<f64>, width: f64, momentum_tilt: DVector<f64>) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "test function width {width} must be positive"
            )));
        }
        if center.len() != momentum_tilt.len() {
            return Err(Error::DimensionMismatch {
                what: "test function tilt",
                expected: center.len(),
                got: momentum_tilt.len(),
            });
        }
        Ok(GaussianTestFunction {
            center,
            width,
            momentum_tilt,
            amplitude: Complex64::new(1.0, 0.0),
        })
    }

    /// Unit-width Gaussian without tilt.
    pub fn standard(center: DVector<f64>) -> Self {
        let q = center.len();
        GaussianTestFunction {
            center,
            width: 1.0,
            momentum_tilt: DVector::zeros(q),
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Complex64 {
        let d = x - &self.center;
        self.amplitude
            * Complex64::from_polar(
                (-d.norm_squared() / (2.0 * self.width * self.width)).exp(),
                self.momentum_tilt.dot(x),
            )
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        GaussianTestFunction {
            amplitude: self.amplitude * factor,
            ..self.clone()
        }
    }

    /// Copy translated by `offset`.
    pub fn shifted(&self, offset: &DVector<f64>) -> Self {
        GaussianTestFunction {
            center: &self.center + offset,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Hermite nodes per dimension for the first pass.
    pub nodes: usize,
    /// Per-dimension node cap; refinement stops there.
    pub max_nodes: usize,
    /// Required relative agreement between successive resolutions.
    pub tolerance: f64,
    pub workers: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 48,
            max_nodes: 384,
            tolerance: 1e-8,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingResult {
    pub value: Complex64,
    /// Difference to the previous, coarser resolution.
    pub error_estimate: f64,
    pub nodes: usize,
}

/// Nodes and weights for `∫ e^{−u²} f(u) du` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `⟨φ|ω⟩ = ∫ dξ conj(φ(V₁ξ + c)) · n · exp(i(−½ξᵀMξ + ξᵀb))`.
///
/// The real Gaussian envelope of `φ` restricted to the support is used as
/// the Hermite weight, so the rule applies for every sign pattern of `M`.
/// The node count is raised by half until two successive resolutions
/// agree to `spec.tolerance`, relative to the integral of the integrand's
/// modulus (strongly cancelling integrals are resolved absolutely).
pub fn pair_against_test_function(
    state: &QuadraticPhaseState,
    phi: &GaussianTestFunction,
    spec: &QuadratureSpec,
) -> Result<PairingResult> {
    let q = state.q_dim;
    if phi.dim() != q {
        return Err(Error::DimensionMismatch {
            what: "test function",
            expected: q,
            got: phi.dim(),
        });
    }
    let r = state.rank();
    if r == 0 {
        let value = phi.eval(&state.support_offset).conj() * state.norm_const;
        return Ok(PairingResult {
            value,
            error_estimate: 0.0,
            nodes: 0,
        });
    }
    if spec.nodes < 2 || spec.max_nodes <= spec.nodes {
        return Err(Error::InvalidInput("quadrature node counts out of order".into()));
    }

    let v1 = &state.support_basis;
    let d = &state.support_offset - &phi.center;
    let vd = v1.transpose() * &d;
    let xi0 = -&vd;
    // Part of |V₁ξ + d|² that does not depend on ξ.
    let off_support = (d.norm_squared() - vd.norm_squared()).max(0.0);
    let envelope = (-off_support / (2.0 * phi.width * phi.width)).exp();
    let stretch = std::f64::consts::SQRT_2 * phi.width;

    let integrand = |xi: &DVector<f64>| -> Complex64 {
        let x = v1 * xi + &state.support_offset;
        let tilt = Complex64::from_polar(1.0, -phi.momentum_tilt.dot(&x));
        tilt * state.support_amplitude(xi.as_slice())
    };

    // The integrand has constant modulus |n| on the support.
    let modulus_integral = std::f64::consts::PI.powf(r as f64 / 2.0) * state.norm_const.norm();
    let mut nodes = spec.nodes;
    let mut previous = tensor_hermite(r, nodes, spec.workers, &xi0, stretch, &integrand)?;
    loop {
        let next_nodes = (nodes * 3 / 2).clamp(nodes + 1, spec.max_nodes);
        let current = tensor_hermite(r, next_nodes, spec.workers, &xi0, stretch, &integrand)?;
        let diff = (current - previous).norm();
        let scale = current.norm().max(previous.norm()).max(modulus_integral);
        let factor = phi.amplitude.conj() * envelope * stretch.powi(r as i32);
        if diff <= spec.tolerance * scale.max(f64::MIN_POSITIVE) {
            return Ok(PairingResult {
                value: current * factor,
                error_estimate: diff * factor.norm(),
                nodes: next_nodes,
            });
        }
        if next_nodes == spec.max_nodes {
            return Err(Error::NonConvergence {
                achieved: diff / scale.max(f64::MIN_POSITIVE),
                requested: spec.tolerance,
            });
        }
        previous = current;
        nodes = next_nodes;
    }
}

/// `∫ e^{−|u|²} f(ξ₀ + s·u) du` on an `n^dim` tensor rule.
fn tensor_hermite<F>(dim: usize, n: usize, workers: usize, xi0: &DVector<f64>, stretch: f64, f: &F) -> Result<Complex64>
where
    F: Fn(&DVector<f64>) -> Complex64 + Sync,
{
    let (x, w) = gauss_hermite(n);
    let count = n.pow(dim as u32);
    let terms = map_indexed(count, workers, |mut idx| {
        let mut xi = xi0.clone();
        let mut weight = 1.0;
        for axis in (0..dim).rev() {
            let k = idx % n;
            idx /= n;
            xi[axis] += stretch * x[k];
            weight *= w[k];
        }
        f(&xi) * weight
    })?;
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenstate::coordinate_eigenstate;
    use crate::symplectic::SymplecticMatrix;
    use std::f64::consts::PI;

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite(12);
        let m0: f64 = w.iter().sum();
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-13);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
        assert!((m4 - 3.0 * PI.sqrt() / 4.0).abs() < 1e-13);
    }

    #[test]
    fn point_state_evaluates_test_function() {
        let m = SymplecticMatrix::identity(2);
        let omega = DVector::from_vec(vec![0.3, -0.4]);
        let s = coordinate_eigenstate(&m, &omega, 1e-10).unwrap();
        let phi = GaussianTestFunction::new(DVector::zeros(2), 0.7, DVector::from_vec(vec![1.0, 0.5])).unwrap();
        let got = pair_against_test_function(&s, &phi, &QuadratureSpec::default()).unwrap();
        assert!((got.value - phi.eval(&omega).conj()).norm() < 1e-15);
    }

    #[test]
    fn plane_wave_against_unit_gaussian() {
        let m = SymplecticMatrix::standard_form(1);
        let s = coordinate_eigenstate(&m, &DVector::zeros(1), 1e-10).unwrap();
        let phi = GaussianTestFunction::standard(DVector::zeros(1));
        let got = pair_against_test_function(&s, &phi, &QuadratureSpec::default()).unwrap();
        // (2π)^{−1/2} · √(2π)
        assert!((got.value - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn bad_width_rejected() {
        assert!(GaussianTestFunction::new(DVector::zeros(1), 0.0, DVector::zeros(1)).is_err());
    }
}
