//! Polynomials with nonnegative real part on the closed disk, and the
//! polynomial form of Harnack domination:
//! `Re p(T1) <= c^2 Re p(T0) + (c^2 - 1)(rho - 1) Re p(0) I`.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{check_rho, HarnackError, Result};
use crate::linalg::{check_same_dim, hermitian_part, min_eigenvalue, CMat, ComplexMatrix};

pub const MAX_DEGREE: usize = 32;

/// `p(z) = c_0 + c_1 z + ... + c_d z^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticPolynomial {
    coefficients: Vec<Complex64>,
}

impl AnalyticPolynomial {
    /// Trailing zero coefficients are dropped; the zero polynomial keeps `c_0 = 0`.
    pub fn new(mut coefficients: Vec<Complex64>) -> Result<Self> {
        while coefficients.len() > 1 && coefficients.last() == Some(&Complex64::new(0.0, 0.0)) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(Complex64::new(0.0, 0.0));
        }
        if coefficients.len() > MAX_DEGREE + 1 {
            return Err(HarnackError::BadShape(format!(
                "polynomial degree {} exceeds the cap {MAX_DEGREE}",
                coefficients.len() - 1
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(HarnackError::NonFinite);
        }
        Ok(Self { coefficients })
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `p(T)` by Horner's rule.
    pub fn eval_matrix(&self, t: &CMat) -> CMat {
        let n = t.nrows();
        let id = CMat::identity(n, n);
        self.coefficients
            .iter()
            .rev()
            .fold(CMat::zeros(n, n), |acc, &c| acc * t + &id * c)
    }

    /// `(p(T) + p(T)*) / 2`.
    pub fn real_part_matrix(&self, t: &CMat) -> CMat {
        hermitian_part(&self.eval_matrix(t))
    }
}

/// The polynomial `p` with `Re p(e^{i theta}) = |q(e^{i theta})|^2`:
/// `p(z) = c_0 + 2 sum_{k >= 1} c_k z^k`, `c_k = sum_j conj(q_j) q_{j+k}`.
pub fn herglotz_completion(q: &AnalyticPolynomial) -> Result<AnalyticPolynomial> {
    if q.is_zero() {
        return Err(HarnackError::ZeroPolynomial);
    }
    let qs = q.coefficients();
    let d = qs.len() - 1;
    let coefficients = (0..=d)
        .map(|k| {
            let ck: Complex64 = (0..=d - k).map(|j| qs[j].conj() * qs[j + k]).sum();
            if k == 0 {
                Complex64::new(ck.re, 0.0)
            } else {
                ck * 2.0
            }
        })
        .collect();
    AnalyticPolynomial::new(coefficients)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub holds: bool,
    pub margin: f64,
}

/// Smallest eigenvalue of `c^2 Re p(T0) + (c^2 - 1)(rho - 1) Re(c_0) I - Re p(T1)`.
pub fn condition_i_check(
    t1: &ComplexMatrix,
    t0: &ComplexMatrix,
    rho: f64,
    c: f64,
    p: &AnalyticPolynomial,
    tol: &Tolerances,
) -> Result<ConditionCheck> {
    check_rho(rho)?;
    check_same_dim(t0.dim(), t1.dim())?;
    if !(c.is_finite() && c >= 1.0) {
        return Err(HarnackError::PreconditionFailed(format!("c must be at least 1, got {c}")));
    }
    let n = t0.dim();
    let c2 = c * c;
    let c0 = p.coefficients()[0].re;
    let shift = (c2 - 1.0) * (rho - 1.0) * c0;
    let m = p.real_part_matrix(t0.as_matrix()) * Complex64::new(c2, 0.0) + CMat::identity(n, n) * Complex64::new(shift, 0.0)
        - p.real_part_matrix(t1.as_matrix());
    let margin = min_eigenvalue(&hermitian_part(&m));
    Ok(ConditionCheck {
        holds: margin >= -tol.dom_tol,
        margin,
    })
}

/// The same inequality for `r T1`, `r T0` with `0 < r < 1`.
pub fn condition_ii_check(
    t1: &ComplexMatrix,
    t0: &ComplexMatrix,
    rho: f64,
    c: f64,
    p: &AnalyticPolynomial,
    r: f64,
    tol: &Tolerances,
) -> Result<ConditionCheck> {
    if !(r > 0.0 && r < 1.0) {
        return Err(HarnackError::PreconditionFailed(format!("r must lie in (0, 1), got {r}")));
    }
    let scale = Complex64::new(r, 0.0);
    condition_i_check(&t1.scaled(scale), &t0.scaled(scale), rho, c, p, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, cis};

    fn poly(c: &[(f64, f64)]) -> AnalyticPolynomial {
        AnalyticPolynomial::new(c.iter().map(|&(re, im)| c64(re, im)).collect()).unwrap()
    }

    #[test]
    fn completions_of_small_polynomials() {
        assert_eq!(herglotz_completion(&poly(&[(1.0, 0.0)])).unwrap(), poly(&[(1.0, 0.0)]));
        let p = herglotz_completion(&poly(&[(0.0, 0.0), (1.0, 0.0)])).unwrap();
        assert_eq!(p.coefficients()[0], c64(1.0, 0.0));
        assert!(p.coefficients()[1..].iter().all(|c| c.norm() == 0.0));
        assert_eq!(herglotz_completion(&poly(&[(1.0, 0.0), (1.0, 0.0)])).unwrap(), poly(&[(2.0, 0.0), (2.0, 0.0)]));
        assert!(matches!(
            herglotz_completion(&poly(&[(0.0, 0.0)])),
            Err(HarnackError::ZeroPolynomial)
        ));
    }

    #[test]
    fn real_part_on_circle_matches_modulus_squared() {
        let q = poly(&[(0.3, -0.2), (1.0, 0.5), (0.0, 0.0), (-0.7, 0.1)]);
        let p = herglotz_completion(&q).unwrap();
        assert_eq!(p.degree(), q.degree());
        for k in 0..8192 {
            let z = cis(2.0 * std::f64::consts::PI * k as f64 / 8192.0);
            assert!((p.eval(z).re - q.eval(z).norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn degree_cap() {
        assert!(AnalyticPolynomial::new(vec![c64(1.0, 0.0); MAX_DEGREE + 2]).is_err());
        assert!(AnalyticPolynomial::new(vec![c64(1.0, 0.0); MAX_DEGREE + 1]).is_ok());
    }

    #[test]
    fn scalar_condition_checks() {
        let tol = Tolerances::default();
        let zero = ComplexMatrix::zeros(2);
        let id = ComplexMatrix::identity(2);
        let one = poly(&[(1.0, 0.0)]);
        for c in [1.0, 1.5, 3.0] {
            assert!(condition_i_check(&id, &zero, 2.0, c, &one, &tol).unwrap().holds);
        }
        let p = poly(&[(2.0, 0.0), (2.0, 0.0)]);
        let r = condition_i_check(&zero, &id, 2.0, 2f64.sqrt(), &p, &tol).unwrap();
        assert!(r.holds);
        assert!((r.margin - (8.0 + 2.0 - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn matrix_horner() {
        let t = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let p = poly(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]);
        let v = p.eval_matrix(t.as_matrix());
        assert_eq!(v[(0, 0)], c64(1.0, 0.0));
        assert_eq!(v[(0, 1)], c64(2.0, 0.0));
        assert_eq!(v[(1, 0)], c64(0.0, 0.0));
    }
}
