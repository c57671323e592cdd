use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::map_indexed;
use super::stencil::{differentiate_line, DerivativeScheme};
use crate::eigenstate::{Flavor, QuadraticPhaseState};
use crate::error::{Error, Result};
use crate::subspace;
use crate::symplectic::SymplecticMatrix;

/// Largest configuration dimension realized on a full tensor grid.
pub const MAX_GRID_DIM: usize = 3;

/// Uniform lattice over a box in `ℝ^q`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub box_min: Vec<f64>,
    pub box_max: Vec<f64>,
    pub points_per_axis: usize,
    /// Parallelism hint: 1 sequential, 0 global pool, n dedicated threads.
    pub workers: usize,
}

impl GridSpec {
    pub fn new(box_min: Vec<f64>, box_max: Vec<f64>, points_per_axis: usize) -> Self {
        GridSpec {
            box_min,
            box_max,
            points_per_axis,
            workers: 0,
        }
    }

    /// Cube of half-width `half` around `center`.
    pub fn centered(center: &[f64], half: f64, points_per_axis: usize) -> Self {
        GridSpec::new(
            center.iter().map(|c| c - half).collect(),
            center.iter().map(|c| c + half).collect(),
            points_per_axis,
        )
    }

    pub fn q(&self) -> usize {
        self.box_min.len()
    }

    fn validate(&self, q: usize) -> Result<()> {
        if self.box_min.len() != q || self.box_max.len() != q {
            return Err(Error::DimensionMismatch {
                what: "grid box",
                expected: q,
                got: self.box_min.len().min(self.box_max.len()),
            });
        }
        if q > MAX_GRID_DIM {
            return Err(Error::InvalidInput(format!(
                "full grids are limited to q ≤ {MAX_GRID_DIM}, got {q}"
            )));
        }
        if self.points_per_axis < 8 {
            return Err(Error::InvalidInput(format!(
                "need at least 8 points per axis, got {}",
                self.points_per_axis
            )));
        }
        let ok = self
            .box_min
            .iter()
            .zip(&self.box_max)
            .all(|(a, b)| a.is_finite() && b.is_finite() && a < b);
        if !ok {
            return Err(Error::InvalidInput("grid box must satisfy min < max".into()));
        }
        Ok(())
    }
}

/// Complex samples on a [`GridSpec`] lattice, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub box_min: Vec<f64>,
    pub box_max: Vec<f64>,
    pub points_per_axis: usize,
    pub samples: Vec<Complex64>,
    pub q_dim: usize,
}

impl GridWavefunction {
    pub fn spacing(&self, axis: usize) -> f64 {
        (self.box_max[axis] - self.box_min[axis]) / (self.points_per_axis - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn stride(&self, axis: usize) -> usize {
        self.points_per_axis.pow((self.q_dim - 1 - axis) as u32)
    }

    /// Position of the sample with flat index `idx`.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        point_of(&self.box_min, &self.box_max, self.points_per_axis, idx)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn with_samples(&self, samples: Vec<Complex64>) -> GridWavefunction {
        GridWavefunction {
            samples,
            ..self.clone()
        }
    }

    /// `∂ψ/∂x_axis` sampled on the same grid.
    pub fn derivative(&self, axis: usize, scheme: DerivativeScheme) -> Vec<Complex64> {
        let n = self.points_per_axis;
        let stride = self.stride(axis);
        let h = self.spacing(axis);
        let mut out = vec![Complex64::new(0.0, 0.0); self.samples.len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for start in 0..self.samples.len() {
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (k, v) in line.iter_mut().enumerate() {
                *v = self.samples[start + k * stride];
            }
            let d = differentiate_line(&line, h, scheme);
            for (k, v) in d.into_iter().enumerate() {
                out[start + k * stride] = v;
            }
        }
        out
    }
}

fn point_of(box_min: &[f64], box_max: &[f64], n: usize, mut idx: usize) -> Vec<f64> {
    let q = box_min.len();
    let mut x = vec![0.0; q];
    for axis in (0..q).rev() {
        let i = idx % n;
        idx /= n;
        let h = (box_max[axis] - box_min[axis]) / (n - 1) as f64;
        x[axis] = box_min[axis] + i as f64 * h;
    }
    x
}

/// Sample `ψ(α) = n exp(i(−½αᵀ(V₁MV₁ᵀ)α + αᵀV₁b))` on a grid.
pub fn sample_state(state: &QuadraticPhaseState, grid: &GridSpec) -> Result<GridWavefunction> {
    let q = state.q_dim;
    grid.validate(q)?;
    if state.rank() != q {
        return Err(Error::DeltaSupported { rank: state.rank(), q });
    }
    let n = grid.points_per_axis;
    let count = n.pow(q as u32);
    let samples = map_indexed(count, grid.workers, |idx| {
        let x = point_of(&grid.box_min, &grid.box_max, n, idx);
        state.evaluate(&x).expect("full rank checked")
    })?;
    Ok(GridWavefunction {
        box_min: grid.box_min.clone(),
        box_max: grid.box_max.clone(),
        points_per_axis: n,
        samples,
        q_dim: q,
    })
}

/// Result of applying one block of transformed observables to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableOutput {
    /// One grid per observable component `A = 1..q`.
    pub components: Vec<GridWavefunction>,
    /// Relative disagreement between the chosen scheme and its companion.
    pub derivative_error_estimate: f64,
    pub resolution_warning: bool,
}

/// Relative derivative disagreement above which the grid is flagged.
pub const RESOLUTION_WARNING_THRESHOLD: f64 = 0.05;

/// Apply `X x̂ + Y p̂` (with `p̂ = −i∂`) to sampled `ψ`, where `(X, Y)` is
/// `(E, F)` for the coordinate block and `(G, H)` for the momentum block.
pub fn apply_observable(
    m: &SymplecticMatrix,
    flavor: Flavor,
    psi: &GridWavefunction,
    scheme: DerivativeScheme,
) -> Result<ObservableOutput> {
    let q = m.q();
    if psi.q_dim != q {
        return Err(Error::DimensionMismatch {
            what: "grid dimension",
            expected: q,
            got: psi.q_dim,
        });
    }
    if psi.points_per_axis < scheme.min_points().max(5) {
        return Err(Error::InvalidInput("grid too small for derivative stencil".into()));
    }
    let (x, y) = match flavor {
        Flavor::Coordinate => (m.e(), m.f()),
        Flavor::Momentum => (m.g(), m.h()),
    };
    let derivs: Vec<Vec<Complex64>> = (0..q).map(|b| psi.derivative(b, scheme)).collect();

    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (b, d) in derivs.iter().enumerate() {
        let other = psi.derivative(b, scheme.companion());
        for (u, v) in d.iter().zip(&other) {
            worst = worst.max((u - v).norm());
            scale = scale.max(u.norm());
        }
    }
    // Floor the scale at the slope of a unit change across the box, so
    // nearly constant samples do not amplify rounding noise.
    let span = (0..q).map(|b| psi.box_max[b] - psi.box_min[b]).fold(0.0, f64::max);
    let scale = scale.max(psi.max_abs() / span);
    let derivative_error_estimate = if scale > 0.0 { worst / scale } else { 0.0 };

    let minus_i = Complex64::new(0.0, -1.0);
    let components = (0..q)
        .map(|a| {
            let samples = (0..psi.len())
                .map(|idx| {
                    let pt = psi.point(idx);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..q {
                        acc += psi.samples[idx] * (x[(a, b)] * pt[b]);
                        acc += derivs[b][idx] * minus_i * y[(a, b)];
                    }
                    acc
                })
                .collect();
            psi.with_samples(samples)
        })
        .collect();
    Ok(ObservableOutput {
        components,
        derivative_error_estimate,
        resolution_warning: derivative_error_estimate > RESOLUTION_WARNING_THRESHOLD,
    })
}

/// Grid residual of the eigenvalue equation for one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenResidual {
    /// `max |ŵψ − ωψ| / max |ψ|` over all components and samples.
    pub max_relative: f64,
    pub resolution_warning: bool,
}

pub fn eigen_residual(state: &QuadraticPhaseState, grid: &GridSpec, scheme: DerivativeScheme) -> Result<EigenResidual> {
    let psi = sample_state(state, grid)?;
    let out = apply_observable(&state.source, state.flavor, &psi, scheme)?;
    let mut worst = 0.0f64;
    for (a, comp) in out.components.iter().enumerate() {
        let w = state.eigenvalue[a];
        for (u, p) in comp.samples.iter().zip(&psi.samples) {
            worst = worst.max((u - p * w).norm());
        }
    }
    Ok(EigenResidual {
        max_relative: worst / psi.max_abs(),
        resolution_warning: out.resolution_warning,
    })
}

/// Point where the phase gradient `−Sα + t` is smallest (least squares).
fn stationary_point(state: &QuadraticPhaseState) -> Result<DVector<f64>> {
    let s = state.position_quad_form();
    let t = state.position_linear();
    Ok(subspace::pinv(&s, 1e-10)? * t)
}

/// Half-width of the default sampling box.
pub const DEFAULT_HALF_WIDTH: f64 = 8.0;

/// `n` points per axis on a box of half-width [`DEFAULT_HALF_WIDTH`]
/// around the stationary point of the phase.
pub fn default_grid(state: &QuadraticPhaseState, points_per_axis: usize) -> Result<GridSpec> {
    if state.rank() != state.q_dim {
        return Err(Error::DeltaSupported {
            rank: state.rank(),
            q: state.q_dim,
        });
    }
    let center = stationary_point(state)?;
    Ok(GridSpec::centered(
        center.as_slice(),
        DEFAULT_HALF_WIDTH,
        points_per_axis,
    ))
}

/// Grid centered on the stationary point of the phase, with the half-width
/// chosen so that the largest local wavenumber times the spacing stays at
/// `kh`, capped at `max_half`.
pub fn resolved_grid(state: &QuadraticPhaseState, points_per_axis: usize, kh: f64, max_half: f64) -> Result<GridSpec> {
    if state.rank() != state.q_dim {
        return Err(Error::DeltaSupported {
            rank: state.rank(),
            q: state.q_dim,
        });
    }
    let center = stationary_point(state)?;
    let s: DMatrix<f64> = state.position_quad_form();
    let g0 = (state.position_linear() - &s * &center).amax();
    let slope = s.norm() * (state.q_dim as f64).sqrt();
    let budget = kh * (points_per_axis - 1) as f64 / 2.0;
    // slope·L² + g0·L = budget
    let half = if slope > 0.0 {
        (-g0 + (g0 * g0 + 4.0 * slope * budget).sqrt()) / (2.0 * slope)
    } else if g0 > 0.0 {
        budget / g0
    } else {
        max_half
    };
    Ok(GridSpec::centered(
        center.as_slice(),
        half.min(max_half),
        points_per_axis,
    ))
}
