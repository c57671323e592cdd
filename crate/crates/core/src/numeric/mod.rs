//! Grid realization and brute-force numerical checks of the symbolic layer.
//!
//! Nothing in here is used to build eigenstates; it only samples them,
//! differentiates them on a lattice, and integrates them against test
//! functions so the closed forms can be checked independently.
//!
//! Sums over sample points use a fixed pairwise reduction tree on an
//! ordered buffer, so results do not depend on the number of worker
//! threads.

mod delta;
mod fresnel;
mod grid;
mod quadrature;
mod stencil;

pub use delta::{default_widths, delta_sequence_overlap};
pub use fresnel::{fresnel_integral, FresnelResult, DEFAULT_ETA_RATIOS};
pub use grid::{
    apply_observable, default_grid, eigen_residual, resolved_grid, sample_state, EigenResidual, GridSpec,
    GridWavefunction, ObservableOutput, DEFAULT_HALF_WIDTH, MAX_GRID_DIM,
};
pub use quadrature::{gauss_hermite, pair_against_test_function, GaussianTestFunction, PairingResult, QuadratureSpec};
pub use stencil::{differentiate_line, DerivativeScheme};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sum with a fixed binary reduction tree.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Evaluate `f` on `0..count` in index order. `workers == 1` runs on the
/// calling thread, `0` uses the global pool, larger values a dedicated pool.
pub(crate) fn map_indexed<F>(count: usize, workers: usize, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    match workers {
        1 => Ok((0..count).map(f).collect()),
        0 => Ok((0..count).into_par_iter().with_min_len(512).map(f).collect()),
        n => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(|| (0..count).into_par_iter().with_min_len(512).map(f).collect()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_independent_of_workers() {
        let f = |i: usize| Complex64::new((i as f64 * 0.37).sin(), (i as f64).sqrt());
        let a = map_indexed(10_000, 1, f).unwrap();
        let b = map_indexed(10_000, 3, f).unwrap();
        assert_eq!(pairwise_sum(&a).re.to_bits(), pairwise_sum(&b).re.to_bits());
        assert_eq!(pairwise_sum(&a).im.to_bits(), pairwise_sum(&b).im.to_bits());
    }
}
