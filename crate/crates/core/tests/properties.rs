//! Property checks of the algebraic invariants on random inputs.

mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use sympeig::eigenstate::{residual_check, synthesize, Flavor};
use sympeig::overlap::{collapse, forces_eta_zero, same_flavor_overlap};
use sympeig::subspace::{decompose, numerical_rank, penrose_residuals, pinv, projectors};
use sympeig::symplectic::{self, generate, validate, Generator, SymplecticMatrix};

const TOL: f64 = 1e-10;

fn flavor() -> impl Strategy<Value = Flavor> {
    prop_oneof![Just(Flavor::Coordinate), Just(Flavor::Momentum)]
}

/// Random square matrices with ranks from zero to full, via explicit
/// low-rank products.
fn any_matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..6, 0usize..6, any::<u64>()).prop_map(|(n, r, seed)| {
        let mut g = rng(seed);
        random_rank_deficient(n, n, r.min(n), &mut g)
    })
}

fn any_symplectic() -> impl Strategy<Value = SymplecticMatrix> {
    prop_oneof![
        (1usize..4, any::<u64>(), 1usize..7).prop_map(|(q, seed, k)| random_symplectic(q, seed, k)),
        (1usize..4, any::<u64>()).prop_flat_map(|(q, seed)| (0..=q)
            .prop_map(move |rank| { generate(&Generator::RandomWithFRank { q, rank, seed }).unwrap() })),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn penrose_equations_hold(a in any_matrix()) {
        let x = pinv(&a, TOL).unwrap();
        for r in penrose_residuals(&a, &x) {
            prop_assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn projectors_are_orthogonal_projections(a in any_matrix()) {
        let d = decompose(&a, TOL).unwrap();
        let p = projectors(&d);
        for m in [&p.range, &p.row_space, &p.left_null, &p.null] {
            prop_assert!((m * m - m).norm() < 1e-12 * m.nrows() as f64);
            prop_assert!((m - m.transpose()).norm() < 1e-12);
        }
        let im = DMatrix::<f64>::identity(a.nrows(), a.nrows());
        let inn = DMatrix::<f64>::identity(a.ncols(), a.ncols());
        prop_assert!((&p.range + &p.left_null - im).norm() < 1e-12 * a.nrows() as f64);
        prop_assert!((&p.row_space + &p.null - inn).norm() < 1e-12 * a.ncols() as f64);
    }

    #[test]
    fn decomposition_reconstructs(a in any_matrix()) {
        let d = decompose(&a, TOL).unwrap();
        prop_assert!((d.reconstruct() - &a).norm() <= 1e-12 * a.norm().max(1e-300) + 1e-300);
    }

    #[test]
    fn rank_invariant_under_rotation(a in any_matrix(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let l = cayley_orthogonal(a.nrows(), &mut g);
        let r = cayley_orthogonal(a.ncols(), &mut g);
        prop_assert_eq!(numerical_rank(&(&l * &a * &r), 1e-8), numerical_rank(&a, 1e-8));
    }

    #[test]
    fn transpose_and_inverse_stay_symplectic(m in any_symplectic()) {
        prop_assert!(validate(&m.matrix().transpose(), TOL).is_ok());
        let inv = symplectic::inverse(&m);
        let id = DMatrix::<f64>::identity(2 * m.q(), 2 * m.q());
        prop_assert!(rel(&(m.matrix() * inv.matrix()), &id) < 1e-10);
    }

    #[test]
    fn products_stay_symplectic(a in any_symplectic(), seed in any::<u64>()) {
        let b = random_symplectic(a.q(), seed, 3);
        prop_assert!(a.compose(&b).is_ok());
    }

    #[test]
    fn null_intersections_trivial(m in any_symplectic()) {
        let margins = m.null_intersection_margins();
        prop_assert!(margins.min() > 1e-8 * m.matrix().norm());
    }

    #[test]
    fn states_solve_eigen_equation(m in any_symplectic(), f in flavor(), seed in any::<u64>()) {
        let omega = random_vector(m.q(), &mut rng(seed), 3.0);
        let s = synthesize(&m, f, &omega, TOL).unwrap();
        let res = residual_check(&s, &m).unwrap();
        prop_assert!(res.max() < 1e-9, "{res:?} rank {} norm {}", s.rank(), m.matrix().norm());
        prop_assert!((&s.quad_form - s.quad_form.transpose()).norm() < 1e-9 * s.quad_form.norm().max(1.0));
    }

    #[test]
    fn offset_is_min_norm_point_of_support(m in any_symplectic(), f in flavor(), seed in any::<u64>()) {
        // c solves Xc = U₂U₂ᵀω with no N(X) component, and its projection
        // onto N(Y) still satisfies the support condition U₂ᵀXα = U₂ᵀω.
        let omega = random_vector(m.q(), &mut rng(seed), 3.0);
        let s = synthesize(&m, f, &omega, TOL).unwrap();
        let (x, y) = match f {
            Flavor::Coordinate => (m.e(), m.f()),
            Flavor::Momentum => (m.g(), m.h()),
        };
        let scale = 1e-9 * (1.0 + omega.norm()) * (1.0 + x.norm());
        let dy = decompose(&y, TOL).unwrap();
        let target = &dy.u2 * (dy.u2.transpose() * &omega);
        let c = &s.support_offset;
        prop_assert!((&x * c - &target).norm() < scale);
        let dx = decompose(&x, TOL).unwrap();
        prop_assert!((dx.v2.transpose() * c).norm() < scale);
        let in_null = &dy.v2 * (dy.v2.transpose() * c);
        prop_assert!((dy.u2.transpose() * (&x * &in_null - &omega)).norm() < scale);
    }

    #[test]
    fn linear_in_eigenvalue(m in any_symplectic(), f in flavor(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let a = random_vector(m.q(), &mut g, 2.0);
        let b = random_vector(m.q(), &mut g, 2.0);
        let sa = synthesize(&m, f, &a, TOL).unwrap();
        let sb = synthesize(&m, f, &b, TOL).unwrap();
        let sab = synthesize(&m, f, &(&a + &b), TOL).unwrap();
        prop_assert!((&sab.support_offset - &sa.support_offset - &sb.support_offset).norm() < 1e-9);
        prop_assert!((&sab.linear_vec - &sa.linear_vec - &sb.linear_vec).norm() < 1e-9);
        prop_assert_eq!(&sab.quad_form, &sa.quad_form);
    }

    #[test]
    fn synthesis_is_deterministic(m in any_symplectic(), f in flavor(), seed in any::<u64>()) {
        let omega = random_vector(m.q(), &mut rng(seed), 3.0);
        let a = synthesize(&m, f, &omega, TOL).unwrap();
        let b = synthesize(&m, f, &omega, TOL).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn normalized_overlap_collapses_to_delta(m in any_symplectic(), f in flavor(), seed in any::<u64>()) {
        let mut g = rng(seed);
        let s1 = synthesize(&m, f, &random_vector(m.q(), &mut g, 3.0), TOL).unwrap();
        let s2 = synthesize(&m, f, &random_vector(m.q(), &mut g, 3.0), TOL).unwrap();
        let d = same_flavor_overlap(&s1, &s2).unwrap();
        prop_assert!(forces_eta_zero(&d, TOL));
        let k = collapse(&d, TOL).unwrap();
        prop_assert!((k - 1.0).norm() < 1e-9, "collapse {k}");
        prop_assert!(s1.norm_const.im == 0.0 && s1.norm_const.re > 0.0);
    }
}

/// With `F` invertible the parameters reduce to `S = F⁻¹E` and `t = F⁻¹ω`.
#[test]
fn invertible_block_reduces_to_inverse() {
    for seed in 0..20 {
        let q = 1 + (seed as usize % 3);
        let m = random_with_invertible_f(q, seed);
        let omega = random_vector(q, &mut rng(seed), 2.0);
        let s = synthesize(&m, Flavor::Coordinate, &omega, TOL).unwrap();
        let f = m.f();
        assert!(rel(&(&f * s.position_quad_form()), &m.e()) < 1e-10);
        let t = s.position_linear();
        assert!((&f * t - &omega).norm() < 1e-10 * (1.0 + omega.norm()));
        assert_eq!(s.support_offset, DVector::zeros(q));
    }
}
