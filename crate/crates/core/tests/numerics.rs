mod common;

use common::{c, gain, random_matrix, random_unit, sigma_max_sq_2col};
use lfmimo::numerics::{
    dominant_right_eigvec, hermitian, mat_inverse, CMatrix, EIG_MAX_ITER, EIG_TOL,
};
use lfmimo::rng::seeded;
use proptest::prelude::*;

#[test]
fn eigenvalue_matches_closed_form_on_random_2x2() {
    let mut rng = seeded(100);
    for _ in 0..500 {
        let a = random_matrix(&mut rng, 2, 2);
        let (v, lambda) = dominant_right_eigvec(&a, EIG_TOL, EIG_MAX_ITER).unwrap();
        let oracle = sigma_max_sq_2col(&a);
        assert!(
            (lambda - oracle).abs() <= 1e-9 * oracle.max(1.0),
            "{lambda} vs {oracle}"
        );
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let first = v[0];
        assert!(first.im.abs() < 1e-12 && first.re >= 0.0);
    }
}

#[test]
fn eigenvector_is_maximal_against_random_directions() {
    let mut rng = seeded(101);
    for (rows, cols) in [(1, 2), (2, 2), (3, 4), (4, 4)] {
        for _ in 0..20 {
            let a = random_matrix(&mut rng, rows, cols);
            let (v, _) = dominant_right_eigvec(&a, EIG_TOL, EIG_MAX_ITER).unwrap();
            let best = gain(&a, &v);
            for _ in 0..1000 {
                let w = random_unit(&mut rng, cols);
                assert!(best >= gain(&a, &w) - 1e-8);
            }
        }
    }
}

#[test]
fn random_well_conditioned_inverse() {
    let mut rng = seeded(102);
    for _ in 0..200 {
        let a = random_matrix(&mut rng, 4, 4);
        let Ok(inv) = mat_inverse(&a) else { continue };
        let i4 = CMatrix::identity(4);
        assert!((&a * &inv).max_abs_diff(&i4) <= 1e-10);
        assert!((&inv * &a).max_abs_diff(&i4) <= 1e-10);
    }
}

fn cmatrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), rows * cols).prop_map(move |v| {
        CMatrix::new(rows, cols, v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap()
    })
}

/// Matrices `U diag(s) V` with singular-value spread bounded by `kappa`,
/// built from unitary rotations so the condition number is known.
fn conditioned(kappa: f64) -> impl Strategy<Value = CMatrix> {
    (
        0.0..6.3f64,
        0.0..6.3f64,
        0.0..6.3f64,
        0.0..6.3f64,
        0.0..1.0f64,
        -3.0..3.0f64,
    )
        .prop_map(move |(t1, p1, t2, p2, s, scale_exp)| {
            let rot = |t: f64, p: f64| {
                CMatrix::new(
                    2,
                    2,
                    vec![
                        c(t.cos(), 0.0),
                        -num_complex::Complex64::from_polar(t.sin(), p),
                        num_complex::Complex64::from_polar(t.sin(), -p),
                        c(t.cos(), 0.0),
                    ],
                )
                .unwrap()
            };
            let scale = 10f64.powf(scale_exp);
            let d = CMatrix::diag(&[c(scale, 0.0), c(scale / kappa.powf(s), 0.0)]);
            &(&rot(t1, p1) * &d) * &rot(t2, p2)
        })
}

proptest! {
    #[test]
    fn hermitian_is_an_involution(a in cmatrix(3, 2)) {
        prop_assert_eq!(hermitian(&hermitian(&a)), a);
    }

    #[test]
    fn hermitian_preserves_frobenius_norm(a in cmatrix(2, 4)) {
        let before = a.frobenius_norm_sqr();
        let after = hermitian(&a).frobenius_norm_sqr();
        prop_assert!((before - after).abs() <= 4.0 * f64::EPSILON * before.max(1.0));
    }

    #[test]
    fn inverse_residual_for_condition_up_to_1e6(a in conditioned(1e6)) {
        let inv = mat_inverse(&a).unwrap();
        let i2 = CMatrix::identity(2);
        prop_assert!((&a * &inv).max_abs_diff(&i2) <= 1e-10);
        prop_assert!((&inv * &a).max_abs_diff(&i2) <= 1e-10);
    }
}
