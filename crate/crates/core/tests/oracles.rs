//! Closed-form values checked against the library, each computed here
//! without calling the code path under test.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use rhoharnack::harnack::{check_domination, domination_constant};
use rhoharnack::kernel::{eval_kernel_factored, eval_kernel_resolvent};
use rhoharnack::linalg::spectral_norm;
use rhoharnack::radii::{numerical_radius, numerical_radius_sweep, rho_radius};
use rhoharnack::spectral::{gamma_set, numerical_range_torus};
use rhoharnack::{Complex64, ComplexMatrix, Tolerances, TorusGrid};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn square_zero(a: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), a], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap()
}

#[test]
fn square_zero_radius_is_norm_over_rho() {
    // T^2 = 0 gives w_rho(T) = ||T|| / rho.
    for (a, rho) in [(c(2.0, 0.0), 2.0), (c(0.0, 3.0), 3.0), (c(1.0, 1.0), 1.25), (c(-0.7, 0.2), 5.0)] {
        let r = rho_radius(&square_zero(a), rho, TorusGrid::default(), &tol()).unwrap();
        assert_abs_diff_eq!(r.value, a.norm() / rho, epsilon = 2e-6);
    }
}

#[test]
fn normal_radius_is_spectral_radius() {
    let lambdas = [c(0.3, 0.4), c(-0.9, 0.0), c(0.1, -0.2)];
    let t = ComplexMatrix::diagonal(&lambdas).unwrap();
    let u = ComplexMatrix::from_fn(3, |i, j| {
        let w = Complex64::from_polar(1.0, 2.0 * PI * (i * j) as f64 / 3.0);
        w / 3f64.sqrt()
    })
    .unwrap();
    let normal = t.conjugated_by(&u).unwrap();
    for rho in [1.0, 1.7, 4.0] {
        let r = rho_radius(&normal, rho, TorusGrid::default(), &tol()).unwrap();
        assert_abs_diff_eq!(r.value, 0.9, epsilon = 2e-6);
    }
}

#[test]
fn off_diagonal_numerical_radius() {
    // W([[0, a], [b, 0]]) is an ellipse with semi-major axis (|a| + |b|) / 2.
    for (a, b) in [(2.0, 0.5), (1.0, 1.0), (0.3, -0.1), (0.0, 1.5)] {
        let t = ComplexMatrix::from_real_rows(&[&[0.0, a], &[b, 0.0]]).unwrap();
        let expected = (f64::abs(a) + f64::abs(b)) / 2.0;
        assert_abs_diff_eq!(numerical_radius(&t), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(numerical_radius_sweep(&t, 1024).unwrap(), expected, epsilon = 1e-5);
        let w2 = rho_radius(&t, 2.0, TorusGrid::default(), &tol()).unwrap().value;
        assert_abs_diff_eq!(w2, expected, epsilon = 2e-6);
        let w1 = rho_radius(&t, 1.0, TorusGrid::default(), &tol()).unwrap().value;
        assert_abs_diff_eq!(w1, f64::abs(a).max(f64::abs(b)), epsilon = 2e-6);
        assert_abs_diff_eq!(spectral_norm(&t), f64::abs(a).max(f64::abs(b)), epsilon = 1e-12);
    }
}

#[test]
fn scalar_kernel_closed_form() {
    // K_z(lambda) = 2 (1 - Re(conj(z) lambda)) / |1 - conj(z) lambda|^2 + rho - 2.
    for (lambda, z, rho) in [
        (c(0.5, 0.5), c(0.1, -0.7), 2.0),
        (c(-0.9, 0.0), c(0.3, 0.3), 1.0),
        (c(0.0, 1.0), c(0.0, 0.5), 3.5),
    ] {
        let t = ComplexMatrix::diagonal(&[lambda]).unwrap();
        let w = z.conj() * lambda;
        let expected = 2.0 * (1.0 - w.re) / (c(1.0, 0.0) - w).norm_sqr() + rho - 2.0;
        for s in [
            eval_kernel_resolvent(&t, rho, z, &tol()).unwrap(),
            eval_kernel_factored(&t, rho, z, &tol()).unwrap(),
        ] {
            assert_abs_diff_eq!(s.value.get(0, 0).re, expected, epsilon = 1e-13);
            assert_abs_diff_eq!(s.value.get(0, 0).im, 0.0, epsilon = 1e-13);
        }
    }
}

#[test]
fn square_zero_kernel_closed_form() {
    // K_z([[0, a], [0, 0]]) = [[rho, conj(z) a], [z conj(a), rho]].
    let a = c(1.5, -0.5);
    for (z, rho) in [(c(0.2, 0.3), 2.0), (c(-0.6, 0.1), 1.3)] {
        let s = eval_kernel_resolvent(&square_zero(a), rho, z, &tol()).unwrap();
        assert_abs_diff_eq!((s.value.get(0, 1) - z.conj() * a).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((s.value.get(1, 0) - z * a.conj()).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.min_eig, rho - z.norm() * a.norm(), epsilon = 1e-13);
    }
}

#[test]
fn zero_below_scalar_unitary_constant() {
    // K(0) = rho I, and on the circle K(lambda) = rho - 1 away from the pole,
    // so the smallest c with rho <= c^2 (rho - 1) is sqrt(rho / (rho - 1)).
    let lambda = Complex64::from_polar(1.0, 0.7);
    let t0 = ComplexMatrix::diagonal(&[lambda]).unwrap();
    let t1 = ComplexMatrix::zeros(1);
    for rho in [1.1f64, 2.0, 6.0] {
        let expected = (rho / (rho - 1.0)).sqrt();
        let r = domination_constant(&t1, &t0, rho, TorusGrid::default(), &tol(), false).unwrap();
        assert!(r.dominated);
        assert_abs_diff_eq!(r.c.unwrap(), expected, epsilon = 1e-6);
        let below = check_domination(&t1, &t0, rho, expected * (1.0 - 1e-4), TorusGrid::default(), &tol(), false).unwrap();
        assert!(!below.holds);
    }
}

#[test]
fn circular_range_touches_every_angle() {
    // A weighted shift has a circular numerical range; with weights sqrt 2 its radius is 1.
    let a = 2f64.sqrt();
    let t = ComplexMatrix::from_real_rows(&[&[0.0, a, 0.0], &[0.0, 0.0, a], &[0.0, 0.0, 0.0]]).unwrap();
    assert_eq!(numerical_range_torus(&t, 1024, 1e-7).unwrap().len(), 1024);
    assert!(gamma_set(&t, &tol()).unwrap().is_empty());
}
