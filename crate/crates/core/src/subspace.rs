//! Narrowed SVD, Moore–Penrose pseudoinverse and the four fundamental
//! subspace projectors of a real square matrix.
//!
//! For `A = U Σ Vᵀ` with numerical rank `r`, the columns of `U` and `V`
//! split as `U = [U₁ U₂]`, `V = [V₁ V₂]`:
//!
//! | factor | spans    |
//! |--------|----------|
//! | `U₁`   | `R(A)`   |
//! | `U₂`   | `N(Aᵀ)`  |
//! | `V₁`   | `R(Aᵀ)`  |
//! | `V₂`   | `N(A)`   |
//!
//! Rank zero and full rank are ordinary cases here: the corresponding
//! factors are matrices with zero columns and every formula accepts them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Narrowed singular value decomposition `A = U₁ diag(σ) V₁ᵀ` together with
/// orthonormal completions `U₂`, `V₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceData {
    pub u1: DMatrix<f64>,
    pub u2: DMatrix<f64>,
    pub v1: DMatrix<f64>,
    pub v2: DMatrix<f64>,
    /// Retained singular values, strictly descending and above the cutoff.
    pub sigma_r: DVector<f64>,
    pub rank: usize,
    pub source: DMatrix<f64>,
}

/// The four orthogonal projectors onto the fundamental subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Projectors {
    /// `P_R(A) = U₁U₁ᵀ`
    pub range: DMatrix<f64>,
    /// `P_R(Aᵀ) = V₁V₁ᵀ`
    pub row_space: DMatrix<f64>,
    /// `P_N(Aᵀ) = U₂U₂ᵀ`
    pub left_null: DMatrix<f64>,
    /// `P_N(A) = V₂V₂ᵀ`
    pub null: DMatrix<f64>,
}

/// Solution family `particular + V₂ c` of `A x = b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedSolution {
    /// Whether `b` lies in `R(A)` within tolerance.
    pub consistent: bool,
    /// `A⁺ b`; the least-squares solution when inconsistent.
    pub particular: DVector<f64>,
    pub null_basis: DMatrix<f64>,
    /// `‖U₂U₂ᵀ b‖`
    pub inconsistency: f64,
}

impl SubspaceData {
    pub fn dim(&self) -> usize {
        self.source.nrows()
    }

    /// Dimension of the null space, `q − r`.
    pub fn nullity(&self) -> usize {
        self.dim() - self.rank
    }

    pub fn sigma_max(&self) -> f64 {
        if self.rank == 0 {
            0.0
        } else {
            self.sigma_r[0]
        }
    }

    /// `U₁ diag(σ) V₁ᵀ`
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u1.clone();
        for (j, s) in self.sigma_r.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v1.transpose()
    }
}

fn check_finite(a: &DMatrix<f64>) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Rank-revealing SVD of a square matrix.
///
/// Singular values `σᵢ > rank_tol · σ_max` are kept; the zero matrix has
/// rank zero.
pub fn decompose(a: &DMatrix<f64>, rank_tol: f64) -> Result<SubspaceData> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            what: "square matrix columns",
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    if !(rank_tol > 0.0 && rank_tol.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "rank tolerance must be positive, got {rank_tol}"
        )));
    }
    check_finite(a)?;
    let q = a.nrows();
    if q == 0 {
        let empty = DMatrix::zeros(0, 0);
        return Ok(SubspaceData {
            u1: empty.clone(),
            u2: empty.clone(),
            v1: empty.clone(),
            v2: empty,
            sigma_r: DVector::zeros(0),
            rank: 0,
            source: a.clone(),
        });
    }

    let (u, sv, v) = full_svd(a)?;
    let sigma_max = sv[0];
    let cutoff = rank_tol * sigma_max;
    let rank = if sigma_max > 0.0 {
        sv.iter().take_while(|&&x| x > cutoff).count()
    } else {
        0
    };
    let order: Vec<usize> = (0..q).collect();

    let pick =
        |m: &DMatrix<f64>, idx: &[usize]| -> DMatrix<f64> { DMatrix::from_fn(q, idx.len(), |i, j| m[(i, idx[j])]) };
    let (kept, dropped) = order.split_at(rank);
    Ok(SubspaceData {
        u1: pick(&u, kept),
        u2: pick(&u, dropped),
        v1: pick(&v, kept),
        v2: pick(&v, dropped),
        sigma_r: DVector::from_iterator(rank, kept.iter().map(|&i| sv[i])),
        rank,
        source: a.clone(),
    })
}

/// `A⁺ = V₁ Σ_r⁻¹ U₁ᵀ`. The zero matrix maps to zero.
pub fn pseudoinverse(d: &SubspaceData) -> DMatrix<f64> {
    let mut vs = d.v1.clone();
    for (j, s) in d.sigma_r.iter().enumerate() {
        vs.column_mut(j).scale_mut(1.0 / s);
    }
    vs * d.u1.transpose()
}

/// Convenience wrapper: decompose and invert in one step.
pub fn pinv(a: &DMatrix<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    decompose(a, rank_tol).map(|d| pseudoinverse(&d))
}

pub fn projectors(d: &SubspaceData) -> Projectors {
    Projectors {
        range: &d.u1 * d.u1.transpose(),
        row_space: &d.v1 * d.v1.transpose(),
        left_null: &d.u2 * d.u2.transpose(),
        null: &d.v2 * d.v2.transpose(),
    }
}

/// Solve `A x = b` through the range/null-space split.
///
/// `b` is consistent when its component in `N(Aᵀ)` is at most
/// `rank_tol · ‖b‖`. The returned family is `A⁺ b + V₂ c`.
pub fn solve_constrained(a: &DMatrix<f64>, b: &DVector<f64>, rank_tol: f64) -> Result<ConstrainedSolution> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            what: "right-hand side",
            expected: a.nrows(),
            got: b.len(),
        });
    }
    let d = decompose(a, rank_tol)?;
    let leak = &d.u2 * (d.u2.transpose() * b);
    let inconsistency = leak.norm();
    Ok(ConstrainedSolution {
        consistent: inconsistency <= rank_tol * b.norm(),
        particular: pseudoinverse(&d) * b,
        null_basis: d.v2.clone(),
        inconsistency,
    })
}

/// Relative residuals of the four Penrose equations
/// `AXA = A`, `XAX = X`, `(AX)ᵀ = AX`, `(XA)ᵀ = XA`.
pub fn penrose_residuals(a: &DMatrix<f64>, x: &DMatrix<f64>) -> [f64; 4] {
    let rel = |m: DMatrix<f64>, scale: f64| {
        let n = m.norm();
        if scale > 0.0 {
            n / scale
        } else {
            n
        }
    };
    let ax = a * x;
    let xa = x * a;
    [
        rel(&ax * a - a, a.norm()),
        rel(&xa * x - x, x.norm()),
        rel(ax.transpose() - &ax, ax.norm()),
        rel(xa.transpose() - &xa, xa.norm()),
    ]
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Full SVD `A = U diag(s) Vᵀ` of a square matrix with `s` descending.
fn full_svd(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let q = a.nrows();
    let svd = to_faer(a)
        .svd()
        .map_err(|e| Error::Internal(format!("SVD failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let mut sv: Vec<f64> = (0..q).map(|k| s[k]).collect();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let um = DMatrix::from_fn(q, q, |i, j| u[(i, order[j])]);
    let vm = DMatrix::from_fn(q, q, |i, j| v[(i, order[j])]);
    sv = order.iter().map(|&k| sv[k]).collect();
    Ok((um, sv, vm))
}

/// Singular values of an arbitrary matrix in descending order.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s = to_faer(a)
        .singular_values()
        .unwrap_or_else(|_| vec![f64::NAN; a.nrows().min(a.ncols())]);
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Smallest singular value of an arbitrary (possibly rectangular) matrix.
pub fn smallest_singular_value(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0.0;
    }
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Numerical rank of an arbitrary matrix with a relative cutoff.
pub fn numerical_rank(a: &DMatrix<f64>, rank_tol: f64) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let s = singular_values(a);
    let smax = s[0];
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rank_tol * smax).count()
}
