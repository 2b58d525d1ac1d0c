//! Membership in `C_rho` and the operator radius `w_rho`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{check_rho, HarnackError, Result};
use crate::kernel::{argmax, CircleFactor, CircleOutcome, TorusGrid};
use crate::linalg::{cis, max_eigenvalue, op_norm, spectral_radius_of, CMat, ComplexMatrix};
use crate::par;
use crate::search::golden_max;
use crate::spectral::unimodular_decomposition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub verdict: Verdict,
    /// Smallest normalized eigenvalue of the circle family on the base grid
    /// (zero when nothing is left after removing the unitary part; `1 - r(T)`
    /// when the spectrum leaves the closed disk).
    pub margin: f64,
    pub theta: Option<f64>,
    pub reason: Option<String>,
    pub finest_points: usize,
}

impl Membership {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Yes
    }

    fn rejected(margin: f64, theta: Option<f64>, reason: String, finest_points: usize) -> Self {
        Self {
            verdict: Verdict::No,
            margin,
            theta,
            reason: Some(reason),
            finest_points,
        }
    }
}

/// Decides `T in C_rho`: spectrum in the closed disk, a diagonal unitary
/// part that reduces `T`, and a positive kernel on the circle for the rest.
pub fn is_rho_contraction(t: &ComplexMatrix, rho: f64, grid: TorusGrid, tol: &Tolerances) -> Result<Membership> {
    check_rho(rho)?;
    membership_of(t, rho, grid, tol)
}

pub(crate) fn membership_of(t: &ComplexMatrix, rho: f64, grid: TorusGrid, tol: &Tolerances) -> Result<Membership> {
    let tm = t.as_matrix();
    let r = spectral_radius_of(tm);
    if r > 1.0 + tol.radius_tol {
        return Ok(Membership::rejected(
            1.0 - r,
            None,
            format!("spectral radius {r} exceeds 1"),
            0,
        ));
    }
    let dec = match unimodular_decomposition(t, tol) {
        Ok(dec) => dec,
        Err(e @ (HarnackError::DefectiveUnimodularEigenvalue { .. } | HarnackError::NotReducing { .. })) => {
            return Ok(Membership::rejected(0.0, None, e.to_string(), 0));
        }
        Err(e) => return Err(e),
    };
    let Some(compression) = dec.compression else {
        return Ok(Membership {
            verdict: Verdict::Yes,
            margin: 0.0,
            theta: None,
            reason: None,
            finest_points: 0,
        });
    };
    if dec.compression_radius >= 1.0 - tol.unimodular_tol / 2.0 {
        return Ok(Membership::rejected(
            1.0 - dec.compression_radius,
            None,
            format!(
                "eigenvalue of modulus {} is neither unimodular nor strictly inside the disk",
                dec.compression_radius
            ),
            0,
        ));
    }
    let cert = CircleFactor::new(compression.as_matrix(), rho).certify(grid, tol.membership_tol, tol.max_grid_points);
    let (verdict, reason) = match cert.outcome {
        CircleOutcome::Certified => (Verdict::Yes, None),
        CircleOutcome::Violated { theta, margin } => (
            Verdict::No,
            Some(format!("kernel has negative eigenvalue {margin:.3e} (normalized) at theta = {theta}")),
        ),
        CircleOutcome::Inconclusive => (
            Verdict::Inconclusive,
            Some("positivity not certified at the finest grid".to_string()),
        ),
    };
    Ok(Membership {
        verdict,
        margin: cert.margin,
        theta: Some(cert.theta),
        reason,
        finest_points: cert.finest_points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiiReport {
    pub rho: f64,
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub grid_points: usize,
}

/// `w_rho(T) = inf { gamma > 0 : T / gamma in C_rho }` by bisection on `gamma`,
/// starting from `max(r(T), ||T|| / rho) <= w_rho(T) <= ||T||`.
pub fn rho_radius(t: &ComplexMatrix, rho: f64, grid: TorusGrid, tol: &Tolerances) -> Result<RadiiReport> {
    check_rho(rho)?;
    let tm = t.as_matrix();
    let report = |value, bracket, iterations| RadiiReport {
        rho,
        value,
        bracket,
        iterations,
        grid_points: grid.n_points(),
    };
    let hi0 = op_norm(tm);
    if hi0 == 0.0 {
        return Ok(report(0.0, (0.0, 0.0), 0));
    }
    let mut hi = hi0;
    let mut lo = spectral_radius_of(tm).max(hi / rho).min(hi);
    let mut iterations = 0;
    while hi - lo > tol.radius_tol {
        let mid = 0.5 * (lo + hi);
        let scaled = ComplexMatrix::from_dmatrix(tm * Complex64::new(1.0 / mid, 0.0))?;
        let member = membership_of(&scaled, rho, grid, tol)?;
        if member.verdict == Verdict::No {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(report(0.5 * (lo + hi), (lo, hi), iterations))
}

fn support(t: &CMat, theta: f64) -> f64 {
    let rotated = t * cis(-theta);
    max_eigenvalue(&((&rotated + rotated.adjoint()) * Complex64::new(0.5, 0.0)))
}

/// `max_k lambda_max(Re(e^{-i theta_k} T))` over a uniform angle grid.
pub fn numerical_radius_sweep(t: &ComplexMatrix, n_angles: usize) -> Result<f64> {
    if n_angles < 64 {
        return Err(HarnackError::PreconditionFailed(format!(
            "numerical radius sweep needs at least 64 angles, got {n_angles}"
        )));
    }
    let tm = t.as_matrix();
    let values = par::map_indices(n_angles, |k| support(tm, 2.0 * PI * k as f64 / n_angles as f64));
    Ok(argmax(&values).1.max(0.0))
}

/// Numerical radius from a 1024-angle sweep refined by golden-section search
/// around the best cells; accurate to about `1e-12` relative.
pub fn numerical_radius(t: &ComplexMatrix) -> f64 {
    numerical_radius_of(t.as_matrix())
}

pub(crate) fn numerical_radius_of(t: &CMat) -> f64 {
    const N: usize = 1024;
    let h = 2.0 * PI / N as f64;
    let values = par::map_indices(N, |k| support(t, h * k as f64));
    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut best = values[order[0]];
    for &k in order.iter().take(4) {
        let center = h * k as f64;
        let (_, v) = golden_max(|x| support(t, x), center - h, center + h, 60);
        best = best.max(v);
    }
    best.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn nil(a: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, a], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn membership_reference_cases() {
        let g = TorusGrid::default();
        let m = is_rho_contraction(&nil(2.0), 2.0, g, &tol()).unwrap();
        assert_eq!(m.verdict, Verdict::Yes);
        assert!(m.margin.abs() < 1e-12);
        assert_eq!(is_rho_contraction(&nil(2.0), 1.0, g, &tol()).unwrap().verdict, Verdict::No);
        for rho in [1.25, 3.0, 7.0] {
            assert_eq!(is_rho_contraction(&nil(rho), rho, g, &tol()).unwrap().verdict, Verdict::Yes);
            assert_eq!(
                is_rho_contraction(&nil(rho * 1.001), rho, g, &tol()).unwrap().verdict,
                Verdict::No
            );
        }
        assert!(matches!(
            is_rho_contraction(&nil(1.0), 0.5, g, &tol()),
            Err(HarnackError::UnsupportedRho(_))
        ));
    }

    #[test]
    fn unitary_and_non_reducing_inputs() {
        let g = TorusGrid::default();
        let u = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(0.0, 1.0)]).unwrap();
        assert_eq!(is_rho_contraction(&u, 1.0, g, &tol()).unwrap().verdict, Verdict::Yes);
        let t = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.5]]).unwrap();
        assert_eq!(is_rho_contraction(&t, 3.0, g, &tol()).unwrap().verdict, Verdict::No);
    }

    #[test]
    fn radii_reference_values() {
        let g = TorusGrid::default();
        assert_eq!(rho_radius(&ComplexMatrix::zeros(3), 2.0, g, &tol()).unwrap().value, 0.0);
        let r = rho_radius(&nil(2.0), 2.0, g, &tol()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6, "{r:?}");
        assert!(r.bracket.1 - r.bracket.0 <= 2e-6);
        let r = rho_radius(&nil(1.0), 1.0, g, &tol()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn numerical_radius_reference_values() {
        assert!((numerical_radius_sweep(&nil(1.0), 1024).unwrap() - 0.5).abs() < 1e-6);
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, -3.0]]).unwrap();
        let r = crate::linalg::spectral_radius(&h);
        assert!((numerical_radius_sweep(&h, 64).unwrap() - r).abs() < 1e-12);
        let a = 2f64.sqrt();
        let n3 = ComplexMatrix::from_real_rows(&[&[0.0, a, 0.0], &[0.0, 0.0, a], &[0.0, 0.0, 0.0]]).unwrap();
        assert!((numerical_radius_sweep(&n3, 1024).unwrap() - 1.0).abs() < 1e-6);
        assert!(numerical_radius_sweep(&n3, 32).is_err());
        let skew = ComplexMatrix::from_real_rows(&[&[0.0, 0.7], &[0.2, 0.0]]).unwrap();
        assert!((numerical_radius(&skew) - 0.45).abs() < 1e-12);
    }
}
