use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{map_indexed, pairwise_sum};
use crate::eigenstate::{synthesize, BlockAnalysis, Flavor};
use crate::error::{Error, Result};
use crate::symplectic::SymplecticMatrix;

/// Half-width of the trapezoid range in Hermite-scaled units (`e^{-u²}`
/// below `1e-18` at the edge).
const RANGE: f64 = 6.5;

/// Pair `⟨ϱ|` against `|ω⟩` smeared over eigenvalues with a normalized
/// Gaussian of each width `w`:
///
/// ```text
/// φ_w = ∫ dω' (2πw²)^{−q/2} exp(−|ω' − ω|²/(2w²)) |ω'⟩
/// ```
///
/// If the states are delta-normalized the result is the Gaussian
/// `(2πw²)^{−q/2} exp(−|ϱ − ω|²/(2w²))` itself.
///
/// Writing `ω' = U₁a + U₂β` with the singular vectors of the momentum-side
/// block, the `β` integral is fixed by the support condition of `|ω'⟩`
/// and the `a` integral is the characteristic function of a Gaussian, so
/// `φ_w` is an explicit function of position. The remaining pairing over
/// the support of `⟨ϱ|` is done by a trapezoid rule, with both
/// eigenstates evaluated from their stored parameters at each node.
pub fn delta_sequence_overlap(
    m: &SymplecticMatrix,
    flavor: Flavor,
    omega: &DVector<f64>,
    rho: &DVector<f64>,
    widths: &[f64],
    rank_tol: f64,
) -> Result<Vec<Complex64>> {
    if widths.is_empty() || widths.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidInput("widths must be positive".into()));
    }
    if widths.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::InvalidInput("widths must be strictly decreasing".into()));
    }
    let ket = synthesize(m, flavor, omega, rank_tol)?;
    let bra = synthesize(m, flavor, rho, rank_tol)?;
    let ba = BlockAnalysis::new(m, flavor, rank_tol)?;
    let q = m.q();
    let r = ba.rank();
    let s = q - r;
    let svd = &ba.y_svd;

    // β* = P⁻¹V₂ᵀα with P = V₂ᵀX⁺U₂.
    let p = svd.v2.transpose() * &ba.x_pinv * &svd.u2;
    let (p_det, beta_of_alpha) = if s == 0 {
        (1.0, DMatrix::zeros(0, q))
    } else {
        let lu = p.clone().lu();
        let det = lu.determinant();
        let sol = lu
            .solve(&svd.v2.transpose())
            .ok_or_else(|| Error::Internal("constraint block of the smeared state is singular".into()))?;
        (det.abs(), sol)
    };
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(p_det > 1e-13 * p.norm().max(1.0).powi(s as i32)) {
        return Err(Error::Internal(
            "constraint block of the smeared state is singular".into(),
        ));
    }
    let offset_dir = &ba.x_pinv * &svd.u2;
    let beta0 = svd.u2.transpose() * omega;
    let sigma = &svd.sigma_r;
    let sigma_det: f64 = sigma.iter().product();
    let v1 = &svd.v1;

    widths
        .iter()
        .map(|&w| {
            let two_pi_w2 = 2.0 * std::f64::consts::PI * w * w;
            let stretch = std::f64::consts::SQRT_2 / w;
            let smeared = |alpha: &DVector<f64>| -> Complex64 {
                let beta = &beta_of_alpha * alpha;
                let xi = v1.transpose() * (alpha - &offset_dir * &beta);
                let decay = DVector::from_fn(r, |i, _| xi[i] / sigma[i]).norm_squared();
                let log_env = -(&beta - &beta0).norm_squared() / (2.0 * w * w) - 0.5 * w * w * decay;
                ket.support_amplitude(xi.as_slice()) * log_env.exp()
            };
            let constant = two_pi_w2.powf(-(s as f64) / 2.0) / p_det;
            if r == 0 {
                let alpha = bra.support_offset.clone();
                return Ok(bra.norm_const.conj() * smeared(&alpha) * constant);
            }
            let freq = stretch * (omega - rho).norm();
            let h = 2.0 * std::f64::consts::PI / (freq + 14.0);
            let half = (RANGE / h).ceil() as usize;
            let n = 2 * half + 1;
            let count = n.pow(r as u32);
            let terms = map_indexed(count, 0, |mut idx| {
                let mut u = DVector::zeros(r);
                for axis in (0..r).rev() {
                    u[axis] = (idx % n) as f64 * h - half as f64 * h;
                    idx /= n;
                }
                let xi = DVector::from_fn(r, |i, _| stretch * sigma[i] * u[i]);
                let alpha = v1 * &xi + &bra.support_offset;
                bra.support_amplitude(xi.as_slice()).conj() * smeared(&alpha)
            })?;
            let jac = (stretch * h).powi(r as i32) * sigma_det;
            Ok(pairwise_sum(&terms) * jac * constant)
        })
        .collect()
}

/// Widths `0.2·2^{−k}`, `k = 0..count`.
pub fn default_widths(count: usize) -> Vec<f64> {
    (0..count).map(|k| 0.2 * 0.5f64.powi(k as i32)).collect()
}
