//! Validated symplectic matrices and their block structure.
//!
//! A real `2q × 2q` matrix `W = [[E, F], [G, H]]` is symplectic when
//! `WᵀσW = σ` with `σ = [[0, I], [−I, 0]]`. Validation evaluates that
//! condition together with its two block forms and requires all three to
//! agree.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::subspace;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    w: DMatrix<f64>,
    q: usize,
}

/// The four `q × q` blocks of a `2q × 2q` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockView {
    pub e: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub g: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

impl BlockView {
    pub fn of(w: &DMatrix<f64>) -> BlockView {
        let q = w.nrows() / 2;
        BlockView {
            e: w.view((0, 0), (q, q)).into_owned(),
            f: w.view((0, q), (q, q)).into_owned(),
            g: w.view((q, 0), (q, q)).into_owned(),
            h: w.view((q, q), (q, q)).into_owned(),
        }
    }

    pub fn assemble(&self) -> DMatrix<f64> {
        let q = self.e.nrows();
        let mut w = DMatrix::zeros(2 * q, 2 * q);
        w.view_mut((0, 0), (q, q)).copy_from(&self.e);
        w.view_mut((0, q), (q, q)).copy_from(&self.f);
        w.view_mut((q, 0), (q, q)).copy_from(&self.g);
        w.view_mut((q, q), (q, q)).copy_from(&self.h);
        w
    }
}

/// Violation norms of the three equivalent symplectic conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    /// `‖WᵀσW − σ‖`
    pub ccr: f64,
    /// `EᵀG`, `FᵀH` symmetric and `EᵀH − GᵀF = I`.
    pub block_transpose: f64,
    /// `EFᵀ`, `GHᵀ` symmetric and `EHᵀ − FGᵀ = I`.
    pub block: f64,
    /// Threshold the norms are compared against.
    pub threshold: f64,
}

impl ConditionReport {
    pub fn max_violation(&self) -> f64 {
        self.ccr.max(self.block_transpose).max(self.block)
    }
}

/// Smallest singular values of the stacked block pairs whose null spaces
/// must intersect trivially for every symplectic matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullIntersectionMargins {
    /// `σ_min([Eᵀ; Fᵀ])`: `N(Eᵀ) ∩ N(Fᵀ) = {0}`
    pub et_ft: f64,
    /// `σ_min([E; F])`: `N(E) ∩ N(F) = {0}`
    pub e_f: f64,
    /// `σ_min([Hᵀ; Gᵀ])`: `N(Hᵀ) ∩ N(Gᵀ) = {0}`
    pub ht_gt: f64,
    /// `σ_min([H; G])`: `N(H) ∩ N(G) = {0}`
    pub h_g: f64,
}

impl NullIntersectionMargins {
    pub fn min(&self) -> f64 {
        self.et_ft.min(self.e_f).min(self.ht_gt).min(self.h_g)
    }
}

/// The standard symplectic form `σ = [[0, I], [−I, 0]]`.
pub fn sigma(q: usize) -> DMatrix<f64> {
    BlockView {
        e: DMatrix::zeros(q, q),
        f: DMatrix::identity(q, q),
        g: -DMatrix::identity(q, q),
        h: DMatrix::zeros(q, q),
    }
    .assemble()
}

fn asym(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).norm()
}

/// Evaluate all three symplectic conditions on an arbitrary even-sized matrix.
pub fn conditions(w: &DMatrix<f64>, tol: f64) -> Result<ConditionReport> {
    if !w.is_square() {
        return Err(Error::DimensionMismatch {
            what: "matrix columns",
            expected: w.nrows(),
            got: w.ncols(),
        });
    }
    if !w.nrows().is_multiple_of(2) || w.nrows() == 0 {
        return Err(Error::InvalidInput(format!(
            "symplectic matrix needs positive even dimension, got {}",
            w.nrows()
        )));
    }
    if !w.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let q = w.nrows() / 2;
    let s = sigma(q);
    let id = DMatrix::<f64>::identity(q, q);
    let b = BlockView::of(w);

    let ccr = (w.transpose() * &s * w - &s).norm();
    let block_transpose = asym(&(b.e.transpose() * &b.g))
        .max(asym(&(b.f.transpose() * &b.h)))
        .max((b.e.transpose() * &b.h - b.g.transpose() * &b.f - &id).norm());
    let block = asym(&(&b.e * b.f.transpose()))
        .max(asym(&(&b.g * b.h.transpose())))
        .max((&b.e * b.h.transpose() - &b.f * b.g.transpose() - &id).norm());

    let scale = w.norm_squared().max(1.0);
    Ok(ConditionReport {
        ccr,
        block_transpose,
        block,
        threshold: tol * scale,
    })
}

/// Validate a matrix as symplectic.
///
/// The three equivalent conditions are checked independently; a matrix is
/// accepted only when all pass and rejected only when all fail.
pub fn validate(w: &DMatrix<f64>, tol: f64) -> Result<SymplecticMatrix> {
    let r = conditions(w, tol)?;
    let pass = [r.ccr, r.block_transpose, r.block].map(|v| v <= r.threshold);
    match pass {
        [true, true, true] => Ok(SymplecticMatrix {
            w: w.clone(),
            q: w.nrows() / 2,
        }),
        [false, false, false] => Err(Error::NotSymplectic {
            violation: r.max_violation(),
            tolerance: r.threshold,
        }),
        _ => Err(Error::InconsistentConditions {
            ccr: r.ccr,
            cond2: r.block_transpose,
            cond3: r.block,
        }),
    }
}

impl SymplecticMatrix {
    pub fn new(w: DMatrix<f64>) -> Result<Self> {
        validate(&w, crate::DEFAULT_SYMPLECTIC_TOL)
    }

    pub fn identity(q: usize) -> Self {
        SymplecticMatrix {
            w: DMatrix::identity(2 * q, 2 * q),
            q,
        }
    }

    /// The standard form `σ` itself, which is symplectic.
    pub fn standard_form(q: usize) -> Self {
        SymplecticMatrix { w: sigma(q), q }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.w
    }

    pub fn blocks(&self) -> BlockView {
        BlockView::of(&self.w)
    }

    pub fn e(&self) -> DMatrix<f64> {
        self.w.view((0, 0), (self.q, self.q)).into_owned()
    }

    pub fn f(&self) -> DMatrix<f64> {
        self.w.view((0, self.q), (self.q, self.q)).into_owned()
    }

    pub fn g(&self) -> DMatrix<f64> {
        self.w.view((self.q, 0), (self.q, self.q)).into_owned()
    }

    pub fn h(&self) -> DMatrix<f64> {
        self.w.view((self.q, self.q), (self.q, self.q)).into_owned()
    }

    pub fn transpose(&self) -> SymplecticMatrix {
        SymplecticMatrix {
            w: self.w.transpose(),
            q: self.q,
        }
    }

    /// Matrix product, revalidated.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.q != other.q {
            return Err(Error::DimensionMismatch {
                what: "symplectic product",
                expected: self.q,
                got: other.q,
            });
        }
        validate(&(&self.w * &other.w), crate::DEFAULT_SYMPLECTIC_TOL)
    }

    pub fn conditions(&self) -> ConditionReport {
        conditions(&self.w, crate::DEFAULT_SYMPLECTIC_TOL).expect("validated at construction")
    }

    pub fn null_intersection_margins(&self) -> NullIntersectionMargins {
        let b = self.blocks();
        let stack = |x: &DMatrix<f64>, y: &DMatrix<f64>| {
            let q = x.nrows();
            let mut m = DMatrix::zeros(2 * q, q);
            m.view_mut((0, 0), (q, q)).copy_from(x);
            m.view_mut((q, 0), (q, q)).copy_from(y);
            subspace::smallest_singular_value(&m)
        };
        NullIntersectionMargins {
            et_ft: stack(&b.e.transpose(), &b.f.transpose()),
            e_f: stack(&b.e, &b.f),
            ht_gt: stack(&b.h.transpose(), &b.g.transpose()),
            h_g: stack(&b.h, &b.g),
        }
    }
}

/// `W⁻¹ = [[Hᵀ, −Fᵀ], [−Gᵀ, Eᵀ]]`
pub fn inverse(m: &SymplecticMatrix) -> SymplecticMatrix {
    let b = m.blocks();
    SymplecticMatrix {
        w: BlockView {
            e: b.h.transpose(),
            f: -b.f.transpose(),
            g: -b.g.transpose(),
            h: b.e.transpose(),
        }
        .assemble(),
        q: m.q,
    }
}

/// `W σ Wᵀ`, equal to `σ` when the commutation relations are preserved.
pub fn ccr_matrix(m: &SymplecticMatrix) -> DMatrix<f64> {
    &m.w * sigma(m.q) * m.w.transpose()
}

/// Elementary and composite symplectic matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `[[O, 0], [0, O]]`, `O` orthogonal.
    OrthogonalPair(DMatrix<f64>),
    /// `[[0, O], [−O, 0]]`, `O` orthogonal.
    RotationBlock(DMatrix<f64>),
    /// `[[I, S], [0, I]]`, `S` symmetric.
    Shear(DMatrix<f64>),
    /// `[[I, 0], [S, I]]`, `S` symmetric.
    LowerShear(DMatrix<f64>),
    /// `[[L, 0], [0, L⁻ᵀ]]`, `L` invertible.
    Scaling(DMatrix<f64>),
    /// `[[cos θ I, sin θ I], [−sin θ I, cos θ I]]`.
    PhaseRotation { q: usize, angle: f64 },
    /// Exchange the first `k` coordinates with their momenta, leave the rest.
    PartialExchange { q: usize, k: usize },
    /// Product of `n_factors` random shears, scalings and rotation blocks.
    Random { q: usize, seed: u64, n_factors: usize },
    /// Random matrix whose `F` block has rank exactly `rank`.
    RandomWithFRank { q: usize, rank: usize, seed: u64 },
}

const PARAM_TOL: f64 = 1e-10;

fn require_square(m: &DMatrix<f64>, what: &'static str) -> Result<usize> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::InvalidInput(format!(
            "{what} must be a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} has non-finite entries")));
    }
    Ok(m.nrows())
}

fn require_orthogonal(o: &DMatrix<f64>) -> Result<usize> {
    let q = require_square(o, "orthogonal factor")?;
    let err = (o.transpose() * o - DMatrix::identity(q, q)).norm();
    if err > PARAM_TOL * q as f64 {
        return Err(Error::InvalidInput(format!(
            "factor is not orthogonal (‖OᵀO − I‖ = {err:.3e})"
        )));
    }
    Ok(q)
}

fn require_symmetric(s: &DMatrix<f64>) -> Result<usize> {
    let q = require_square(s, "shear factor")?;
    let err = asym(s);
    if err > PARAM_TOL * s.norm().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "shear factor is not symmetric (‖S − Sᵀ‖ = {err:.3e})"
        )));
    }
    Ok(q)
}

fn blocks(e: DMatrix<f64>, f: DMatrix<f64>, g: DMatrix<f64>, h: DMatrix<f64>) -> DMatrix<f64> {
    BlockView { e, f, g, h }.assemble()
}

/// Haar-distributed orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(q: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(q, q, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = a.qr();
    let mut o = qr.q();
    let r = qr.r();
    for j in 0..q {
        if r[(j, j)] < 0.0 {
            o.column_mut(j).neg_mut();
        }
    }
    o
}

fn random_symmetric<R: Rng + ?Sized>(q: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(q, q, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
    (&a + a.transpose()) * 0.5
}

fn random_invertible<R: Rng + ?Sized>(q: usize, rng: &mut R) -> DMatrix<f64> {
    let o1 = random_orthogonal(q, rng);
    let o2 = random_orthogonal(q, rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(q, |_, _| {
        (0.35 * rng.sample::<f64, _>(StandardNormal)).exp()
    }));
    o1 * d * o2
}

fn random_factor<R: Rng + ?Sized>(q: usize, rng: &mut R) -> DMatrix<f64> {
    match rng.random_range(0..4u8) {
        0 => elementary(&Generator::Shear(random_symmetric(q, 0.6, rng))),
        1 => elementary(&Generator::LowerShear(random_symmetric(q, 0.6, rng))),
        2 => elementary(&Generator::Scaling(random_invertible(q, rng))),
        _ => elementary(&Generator::RotationBlock(random_orthogonal(q, rng))),
    }
}

// Assumes parameters were checked by `generate`.
fn elementary(kind: &Generator) -> DMatrix<f64> {
    let zeros = |q| DMatrix::zeros(q, q);
    let id = |q| DMatrix::identity(q, q);
    match kind {
        Generator::OrthogonalPair(o) => blocks(o.clone(), zeros(o.nrows()), zeros(o.nrows()), o.clone()),
        Generator::RotationBlock(o) => blocks(zeros(o.nrows()), o.clone(), -o.clone(), zeros(o.nrows())),
        Generator::Shear(s) => blocks(id(s.nrows()), s.clone(), zeros(s.nrows()), id(s.nrows())),
        Generator::LowerShear(s) => blocks(id(s.nrows()), zeros(s.nrows()), s.clone(), id(s.nrows())),
        Generator::Scaling(l) => {
            let q = l.nrows();
            let inv_t = l.clone().try_inverse().expect("checked invertible").transpose();
            blocks(l.clone(), zeros(q), zeros(q), inv_t)
        }
        Generator::PhaseRotation { q, angle } => {
            let (s, c) = angle.sin_cos();
            blocks(id(*q) * c, id(*q) * s, id(*q) * -s, id(*q) * c)
        }
        Generator::PartialExchange { q, k } => {
            let swap = DMatrix::from_fn(*q, *q, |i, j| if i == j && i < *k { 1.0 } else { 0.0 });
            let keep = DMatrix::from_fn(*q, *q, |i, j| if i == j && i >= *k { 1.0 } else { 0.0 });
            blocks(keep.clone(), swap.clone(), -swap, keep)
        }
        Generator::Random { q, seed, n_factors } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*n_factors).fold(id(2 * q), |acc, _| acc * random_factor(*q, &mut rng))
        }
        Generator::RandomWithFRank { q, rank, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let pair = |rng: &mut ChaCha8Rng| {
                let o = random_orthogonal(*q, rng);
                elementary(&Generator::OrthogonalPair(o))
            };
            let left = pair(&mut rng)
                * elementary(&Generator::Scaling(random_invertible(*q, &mut rng)))
                * elementary(&Generator::LowerShear(random_symmetric(*q, 0.6, &mut rng)));
            let right = elementary(&Generator::Scaling(random_invertible(*q, &mut rng)))
                * elementary(&Generator::LowerShear(random_symmetric(*q, 0.6, &mut rng)))
                * pair(&mut rng);
            left * elementary(&Generator::PartialExchange { q: *q, k: *rank }) * right
        }
    }
}

/// Build a symplectic matrix of the requested kind. The result is
/// validated before it is returned.
pub fn generate(kind: &Generator) -> Result<SymplecticMatrix> {
    match kind {
        Generator::OrthogonalPair(o) | Generator::RotationBlock(o) => {
            require_orthogonal(o)?;
        }
        Generator::Shear(s) | Generator::LowerShear(s) => {
            require_symmetric(s)?;
        }
        Generator::Scaling(l) => {
            require_square(l, "scaling factor")?;
            let sv = subspace::singular_values(l);
            // Negated so a NaN singular value is rejected too.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(sv[sv.len() - 1] > PARAM_TOL * sv[0]) {
                return Err(Error::InvalidInput("scaling factor is singular".into()));
            }
        }
        Generator::PhaseRotation { q, angle } => {
            if *q == 0 || !angle.is_finite() {
                return Err(Error::InvalidInput(
                    "phase rotation needs q > 0 and a finite angle".into(),
                ));
            }
        }
        Generator::PartialExchange { q, k } | Generator::RandomWithFRank { q, rank: k, .. } => {
            if *q == 0 || k > q {
                return Err(Error::InvalidInput(format!("rank {k} out of range for q = {q}")));
            }
        }
        Generator::Random { q, .. } => {
            if *q == 0 {
                return Err(Error::InvalidInput("q must be positive".into()));
            }
        }
    }
    validate(&elementary(kind), crate::DEFAULT_SYMPLECTIC_TOL)
}
