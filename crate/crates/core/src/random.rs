//! Seeded generators for test matrices and polynomials. All randomness in
//! the crate flows through [`seeded`], so a seed fixes every output.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::Tolerances;
use crate::error::Result;
use crate::herglotz::AnalyticPolynomial;
use crate::kernel::TorusGrid;
use crate::linalg::{hermitian_part, CMat, ComplexMatrix, SubspaceBasis};
use crate::radii::rho_radius;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with independent standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| complex_normal(rng))
}

pub fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(gaussian_matrix(rng, n)).expect("gaussian matrices are finite")
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    hermitian_part(&gaussian_matrix(rng, n))
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> nalgebra::DVector<Complex64> {
    let v = nalgebra::DVector::from_fn(n, |_, _| complex_normal(rng));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Haar-like unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let q = SubspaceBasis::orthonormalize(gaussian_matrix(rng, n)).basis;
    ComplexMatrix::from_dmatrix(q).expect("unitary factor is finite")
}

/// Uniform point in the open disk of the given radius.
pub fn random_in_disk<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, rng.random::<f64>() * 2.0 * std::f64::consts::PI)
}

/// Random matrix rescaled so that `w_rho = target`.
pub fn random_rho_contraction<R: Rng>(
    rng: &mut R,
    n: usize,
    rho: f64,
    target: f64,
    grid: TorusGrid,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let t = random_matrix(rng, n);
    let w = rho_radius(&t, rho, grid, tol)?.value;
    Ok(t.scaled(Complex64::new(target / w, 0.0)))
}

/// Polynomial of the given degree with Gaussian coefficients.
pub fn random_polynomial<R: Rng>(rng: &mut R, degree: usize) -> AnalyticPolynomial {
    let coefficients = (0..=degree).map(|_| complex_normal(rng)).collect();
    AnalyticPolynomial::new(coefficients).expect("degree within cap")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_reproduce() {
        let a = random_matrix(&mut seeded(7), 3);
        let b = random_matrix(&mut seeded(7), 3);
        assert_eq!(a, b);
        assert_ne!(a, random_matrix(&mut seeded(8), 3));
    }

    #[test]
    fn unitary_is_unitary() {
        let u = random_unitary(&mut seeded(1), 5);
        let m = u.as_matrix();
        assert!((m.adjoint() * m - CMat::identity(5, 5)).norm() < 1e-12);
    }
}
