//! The operator kernel `K_z^rho(T)`, its margins on circles, and the
//! certificates that turn a finite circle sweep into a statement about the
//! whole circle.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{check_rho, HarnackError, Result};
use crate::linalg::{
    cis, hermitian_eig_unchecked, hermitian_eigenvalues, min_eigenvalue, op_norm, psd_with_shift, CMat,
    ComplexMatrix, SubspaceBasis,
};
use crate::par;

/// Uniform grid `theta_k = 2 pi k / n` on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TorusGrid {
    n_points: usize,
}

impl TorusGrid {
    pub const DEFAULT_POINTS: usize = 2048;

    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 8 {
            return Err(HarnackError::InvalidConfig(format!(
                "a torus grid needs at least 8 points, got {n_points}"
            )));
        }
        Ok(Self { n_points })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_points as f64
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.angle(k)).collect()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n_points as f64
    }

    pub fn doubled(&self) -> Self {
        Self {
            n_points: self.n_points * 2,
        }
    }
}

impl Default for TorusGrid {
    fn default() -> Self {
        Self {
            n_points: Self::DEFAULT_POINTS,
        }
    }
}

/// Increasing radii in `(0, 1)` used to approach the boundary circle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialSchedule {
    radii: Vec<f64>,
}

impl RadialSchedule {
    /// `r_j = 1 - 2^-j` for `j = 1..=levels`.
    pub fn dyadic(levels: usize) -> Self {
        Self {
            radii: (1..=levels).map(|j| 1.0 - 0.5f64.powi(j as i32)).collect(),
        }
    }

    pub fn new(radii: Vec<f64>) -> Result<Self> {
        let in_range = radii.iter().all(|&r| r > 0.0 && r < 1.0);
        let increasing = radii.windows(2).all(|w| w[0] < w[1]);
        if !in_range || !increasing {
            return Err(HarnackError::InvalidConfig(
                "radii must be strictly increasing and lie in (0, 1)".into(),
            ));
        }
        Ok(Self { radii })
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

impl Default for RadialSchedule {
    fn default() -> Self {
        Self::dyadic(20)
    }
}

/// The Hermitian value of the kernel at one point, with its eigen-data.
#[derive(Clone, Debug)]
pub struct KernelSample {
    pub z: Complex64,
    pub rho: f64,
    pub value: ComplexMatrix,
    /// Eigenvalues of `value`, descending.
    pub eigenvalues: Vec<f64>,
    pub min_eig: f64,
    pub null_basis: SubspaceBasis,
}

impl KernelSample {
    fn from_value(value: CMat, z: Complex64, rho: f64, tol: &Tolerances) -> Result<Self> {
        let eig = hermitian_eig_unchecked(&value);
        let norm = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let null_basis = eig.null_basis(tol.rank_tol * norm.max(1.0));
        Ok(Self {
            z,
            rho,
            min_eig: eig.min_eigenvalue(),
            eigenvalues: eig.eigenvalues,
            value: ComplexMatrix::from_dmatrix(value)?,
            null_basis,
        })
    }

    pub fn kernel_dim(&self) -> usize {
        self.null_basis.dim()
    }
}

/// `(I - conj(z) T)^-1`, rejecting numerically singular resolvents.
pub(crate) fn resolvent(t: &CMat, z: Complex64, tol: &Tolerances) -> Result<CMat> {
    let n = t.nrows();
    let a = CMat::identity(n, n) - t * z.conj();
    let singular = || HarnackError::SingularResolvent { re: z.re, im: z.im };
    let a_norm = a.norm();
    let inv = a.try_inverse().ok_or_else(singular)?;
    let inv_norm = inv.norm();
    let root_n = (n as f64).sqrt();
    if !inv_norm.is_finite() || inv_norm > root_n / tol.resolvent_tol || a_norm * inv_norm > 1e12 * root_n {
        return Err(singular());
    }
    Ok(inv)
}

/// Kernel value from the resolvent form.
pub(crate) fn kernel_matrix(t: &CMat, rho: f64, z: Complex64, tol: &Tolerances) -> Result<CMat> {
    let n = t.nrows();
    let x = resolvent(t, z, tol)?;
    let mut k = &x + x.adjoint();
    for i in 0..n {
        k[(i, i)] += Complex64::new(rho - 2.0, 0.0);
    }
    Ok(k)
}

/// `rho I + 2(1 - rho) Re(conj(z) T) + (rho - 2)|z|^2 T*T`.
pub(crate) fn middle_factor(t: &CMat, rho: f64, z: Complex64) -> CMat {
    let n = t.nrows();
    let zt = t * (z.conj() * (1.0 - rho));
    let mut m = &zt + zt.adjoint() + t.adjoint() * t * Complex64::new((rho - 2.0) * z.norm_sqr(), 0.0);
    for i in 0..n {
        m[(i, i)] += Complex64::new(rho, 0.0);
    }
    symmetrize(m)
}

/// Kernel value from the factored form `A^-* M A^-1`, `A = I - conj(z) T`.
pub(crate) fn kernel_matrix_factored(t: &CMat, rho: f64, z: Complex64, tol: &Tolerances) -> Result<CMat> {
    let x = resolvent(t, z, tol)?;
    Ok(symmetrize(x.adjoint() * middle_factor(t, rho, z) * x))
}

pub(crate) fn symmetrize(m: CMat) -> CMat {
    (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn eval_kernel_resolvent(t: &ComplexMatrix, rho: f64, z: Complex64, tol: &Tolerances) -> Result<KernelSample> {
    check_rho(rho)?;
    let k = kernel_matrix(t.as_matrix(), rho, z, tol)?;
    KernelSample::from_value(k, z, rho, tol)
}

/// Same value as [`eval_kernel_resolvent`], computed through the factored
/// form; used as an independent cross-check.
pub fn eval_kernel_factored(t: &ComplexMatrix, rho: f64, z: Complex64, tol: &Tolerances) -> Result<KernelSample> {
    check_rho(rho)?;
    let k = kernel_matrix_factored(t.as_matrix(), rho, z, tol)?;
    KernelSample::from_value(k, z, rho, tol)
}

/// Basis of `ker K_z^rho(T)`.
pub fn kernel_null_basis(t: &ComplexMatrix, rho: f64, z: Complex64, tol: &Tolerances) -> Result<SubspaceBasis> {
    Ok(eval_kernel_resolvent(t, rho, z, tol)?.null_basis)
}

/// Smallest kernel eigenvalue over a circle grid and the first index attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CircleMargin {
    pub min_eig: f64,
    pub index: usize,
    pub theta: f64,
}

/// Deterministic `(value, index)` argmin; NaN never wins.
pub(crate) fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if v < best.1 {
            best = (k, v);
        }
    }
    best
}

pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, &v) in values.iter().enumerate() {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

fn circle_min_eigs(t: &CMat, rho: f64, r: f64, grid: TorusGrid, tol: &Tolerances) -> Result<Vec<f64>> {
    let values = par::map_indices(grid.n_points(), |k| {
        kernel_matrix(t, rho, cis(grid.angle(k)) * r, tol).map(|m| min_eigenvalue(&m))
    });
    values.into_iter().collect()
}

pub fn kernel_margin_on_circle(
    t: &ComplexMatrix,
    rho: f64,
    r: f64,
    grid: TorusGrid,
    tol: &Tolerances,
) -> Result<CircleMargin> {
    check_rho(rho)?;
    check_radius(r)?;
    let values = circle_min_eigs(t.as_matrix(), rho, r, grid, tol)?;
    let (index, min_eig) = argmin(&values);
    Ok(CircleMargin {
        min_eig,
        index,
        theta: grid.angle(index),
    })
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0 && r <= 1.0) {
        return Err(HarnackError::PreconditionFailed(format!(
            "circle radius must lie in (0, 1], got {r}"
        )));
    }
    Ok(())
}

/// One row of the per-angle margin dump.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarginRow {
    pub theta: f64,
    pub min_eig: f64,
    pub kernel_dim: usize,
}

pub fn margin_profile(
    t: &ComplexMatrix,
    rho: f64,
    r: f64,
    grid: TorusGrid,
    tol: &Tolerances,
) -> Result<Vec<MarginRow>> {
    check_rho(rho)?;
    check_radius(r)?;
    let tm = t.as_matrix();
    let rows = par::map_indices(grid.n_points(), |k| {
        let theta = grid.angle(k);
        let m = kernel_matrix(tm, rho, cis(theta) * r, tol)?;
        let eig = hermitian_eigenvalues(&m);
        let scale = eig.iter().fold(1.0f64, |s, l| s.max(l.abs()));
        Ok(MarginRow {
            theta,
            min_eig: eig.last().copied().unwrap_or(0.0),
            kernel_dim: eig.iter().filter(|l| l.abs() <= tol.rank_tol * scale).count(),
        })
    });
    rows.into_iter().collect()
}

/// Writes `theta,min_eig,kernel_dim` rows with LF line endings.
pub fn write_margin_csv<W: Write>(rows: &[MarginRow], mut writer: W) -> Result<()> {
    writeln!(writer, "theta,min_eig,kernel_dim")?;
    for row in rows {
        writeln!(writer, "{:?},{:?},{}", row.theta, row.min_eig, row.kernel_dim)?;
    }
    Ok(())
}

/// Norm bound for the kernel sandwiched between `I - conj(lambda) T` and its
/// adjoint, together with the actual norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SandwichBound {
    pub bound: f64,
    pub actual: f64,
}

/// For `w_rho(T) <= 1`, `|z| < 1` and `|lambda| <= 1`:
/// `||(I - conj(lambda) T) K_z (I - lambda T*)|| <= rho (1 + 2|1-rho| + |rho-2| rho) (1 + rho |z-lambda| / (1-|z|))^2`.
pub fn sandwich_bound(
    t: &ComplexMatrix,
    rho: f64,
    z: Complex64,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<SandwichBound> {
    check_rho(rho)?;
    if z.norm() >= 1.0 || lambda.norm() > 1.0 {
        return Err(HarnackError::PreconditionFailed(
            "requires |z| < 1 and |lambda| <= 1".into(),
        ));
    }
    let tm = t.as_matrix();
    let n = tm.nrows();
    let factor = 1.0 + rho * (z - lambda).norm() / (1.0 - z.norm());
    let bound = rho * (1.0 + 2.0 * (1.0 - rho).abs() + (rho - 2.0).abs() * rho) * factor * factor;
    let k = kernel_matrix(tm, rho, z, tol)?;
    let left = CMat::identity(n, n) - tm * lambda.conj();
    let actual = op_norm(&(&left * k * left.adjoint()));
    Ok(SandwichBound { bound, actual })
}

/// Sampled circle margin minus a Lipschitz allowance for the gaps between samples.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzMargin {
    pub sampled_min: f64,
    pub theta: f64,
    pub lipschitz: f64,
    pub spacing: f64,
    pub certified: f64,
}

pub(crate) const LIPSCHITZ_SAFETY: f64 = 1.25;

/// `min_k lambda_min(K(theta_k)) - L h / 2` with
/// `L = 2 r ||T|| max_k ||(I - r e^{-i theta_k} T)^-1||^2 * 1.25`.
/// A positive value certifies positivity on the whole circle of radius `r`.
pub fn lipschitz_certified_margin(
    t: &ComplexMatrix,
    rho: f64,
    grid: TorusGrid,
    r: f64,
    tol: &Tolerances,
) -> Result<LipschitzMargin> {
    check_rho(rho)?;
    check_radius(r)?;
    let tm = t.as_matrix();
    let samples = par::map_indices(grid.n_points(), |k| -> Result<(f64, f64)> {
        let z = cis(grid.angle(k)) * r;
        let x = resolvent(tm, z, tol)?;
        let mut kv = &x + x.adjoint();
        for i in 0..tm.nrows() {
            kv[(i, i)] += Complex64::new(rho - 2.0, 0.0);
        }
        Ok((min_eigenvalue(&kv), op_norm(&x)))
    });
    let samples: Vec<(f64, f64)> = samples.into_iter().collect::<Result<_>>()?;
    let mins: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let (index, sampled_min) = argmin(&mins);
    let max_res = samples.iter().fold(0.0f64, |m, s| m.max(s.1));
    let lipschitz = 2.0 * r * op_norm(tm) * max_res * max_res * LIPSCHITZ_SAFETY;
    let spacing = grid.spacing();
    Ok(LipschitzMargin {
        sampled_min,
        theta: grid.angle(index),
        lipschitz,
        spacing,
        certified: sampled_min - lipschitz * spacing / 2.0,
    })
}

/// Smallest kernel eigenvalue along the ray `r e^{i theta}` for each radius.
pub fn radial_margins(
    t: &ComplexMatrix,
    rho: f64,
    theta: f64,
    schedule: &RadialSchedule,
    tol: &Tolerances,
) -> Result<Vec<(f64, f64)>> {
    check_rho(rho)?;
    schedule
        .radii()
        .iter()
        .map(|&r| Ok((r, min_eigenvalue(&kernel_matrix(t.as_matrix(), rho, cis(theta) * r, tol)?))))
        .collect()
}

/// The middle factor restricted to the unit circle,
/// `M(theta) = P + e^{-i theta} Q + e^{i theta} Q*` with
/// `P = rho I + (rho - 2) T*T` and `Q = (1 - rho) T`.
///
/// For `r(T) < 1` the kernel is congruent to `M` on the circle, so positivity
/// of the kernel there is positivity of a degree-one trigonometric family.
pub(crate) struct CircleFactor {
    base: CMat,
    osc: CMat,
    scale: f64,
}

/// Outcome of a whole-circle positivity certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum CircleOutcome {
    Certified,
    Violated { theta: f64, margin: f64 },
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct CircleCertificate {
    /// Smallest normalized eigenvalue of `M` over the base grid.
    pub margin: f64,
    pub theta: f64,
    pub outcome: CircleOutcome,
    pub finest_points: usize,
}

impl CircleFactor {
    pub(crate) fn new(t: &CMat, rho: f64) -> Self {
        let n = t.nrows();
        let mut base = t.adjoint() * t * Complex64::new(rho - 2.0, 0.0);
        for i in 0..n {
            base[(i, i)] += Complex64::new(rho, 0.0);
        }
        let base = symmetrize(base);
        let osc = t * Complex64::new(1.0 - rho, 0.0);
        let scale = (op_norm(&base) + 2.0 * op_norm(&osc)).max(f64::MIN_POSITIVE);
        Self { base, osc, scale }
    }

    /// `P + s (e^{-i theta} Q + e^{i theta} Q*)`.
    fn at(&self, theta: f64, stretch: f64) -> CMat {
        let q = &self.osc * (cis(-theta) * stretch);
        &self.base + &q + q.adjoint()
    }

    fn normalized_min(&self, theta: f64) -> f64 {
        min_eigenvalue(&self.at(theta, 1.0)) / self.scale
    }

    /// Certifies `M(theta) >= -tol * scale` on the whole circle.
    ///
    /// On an arc of half-width `h/2` around `m`, `M` is an affine image of the
    /// arc, which lies in the triangle spanned by its two endpoints and the
    /// tangent apex at distance `sec(h/2)`. `lambda_min` is concave, so the
    /// three vertices bound the whole arc. Failing cells are bisected.
    pub(crate) fn certify(&self, grid: TorusGrid, tol: f64, max_points: usize) -> CircleCertificate {
        let n0 = grid.n_points();
        let margins = par::map_indices(n0, |k| self.normalized_min(grid.angle(k)));
        let (index, margin) = argmin(&margins);
        let theta = grid.angle(index);
        if margin < -tol {
            return CircleCertificate {
                margin,
                theta,
                outcome: CircleOutcome::Violated { theta, margin },
                finest_points: n0,
            };
        }
        let mut max_depth = 0u32;
        while (n0 << (max_depth + 1)) <= max_points {
            max_depth += 1;
        }
        let shift = tol * self.scale;
        let cells = par::map_indices(n0, |k| self.certify_cell(grid.angle(k), grid.spacing(), 0, max_depth, shift));
        let mut outcome = CircleOutcome::Certified;
        for cell in cells {
            match cell {
                CircleOutcome::Violated { .. } => {
                    outcome = cell;
                    break;
                }
                CircleOutcome::Inconclusive => outcome = CircleOutcome::Inconclusive,
                CircleOutcome::Certified => {}
            }
        }
        CircleCertificate {
            margin,
            theta,
            outcome,
            finest_points: n0 << max_depth,
        }
    }

    fn certify_cell(&self, start: f64, width: f64, depth: u32, max_depth: u32, shift: f64) -> CircleOutcome {
        let mid = start + width / 2.0;
        let apex = self.at(mid, 1.0 / (width / 2.0).cos());
        if psd_with_shift(&apex, shift) {
            return CircleOutcome::Certified;
        }
        if depth >= max_depth {
            return CircleOutcome::Inconclusive;
        }
        if !psd_with_shift(&self.at(mid, 1.0), shift) {
            return CircleOutcome::Violated {
                theta: mid,
                margin: self.normalized_min(mid),
            };
        }
        let half = width / 2.0;
        match self.certify_cell(start, half, depth + 1, max_depth, shift) {
            CircleOutcome::Certified => self.certify_cell(mid, half, depth + 1, max_depth, shift),
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn nil2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap()
    }

    #[test]
    fn zero_operator_kernel_is_rho_identity() {
        let tol = Tolerances::default();
        let t = ComplexMatrix::zeros(3);
        for z in [c64(0.0, 0.0), c64(0.3, -0.4), c64(0.0, 1.0)] {
            let s = eval_kernel_resolvent(&t, 1.7, z, &tol).unwrap();
            let f = eval_kernel_factored(&t, 1.7, z, &tol).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let expected = if i == j { 1.7 } else { 0.0 };
                    assert!((s.value.get(i, j) - c64(expected, 0.0)).norm() < 1e-15);
                    assert!((f.value.get(i, j) - c64(expected, 0.0)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn nilpotent_kernel_closed_form() {
        let tol = Tolerances::default();
        let z = c64(0.6, 0.2);
        let s = eval_kernel_resolvent(&nil2(), 2.0, z, &tol).unwrap();
        assert!((s.value.get(0, 1) - z.conj() * 2.0).norm() < 1e-14);
        assert!((s.value.get(1, 0) - z * 2.0).norm() < 1e-14);
        assert!((s.value.get(0, 0) - c64(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn contraction_factored_form_at_rho_one() {
        let tol = Tolerances::default();
        let t = ComplexMatrix::from_rows(&[
            vec![c64(0.2, 0.1), c64(0.3, 0.0)],
            vec![c64(-0.1, 0.2), c64(0.1, -0.3)],
        ])
        .unwrap();
        let z = c64(0.5, 0.5);
        let tm = t.as_matrix();
        let a = CMat::identity(2, 2) - tm * z.conj();
        let ainv = a.try_inverse().unwrap();
        let mid = CMat::identity(2, 2) - tm.adjoint() * tm * c64(z.norm_sqr(), 0.0);
        let expected = ainv.adjoint() * mid * ainv;
        let s = eval_kernel_resolvent(&t, 1.0, z, &tol).unwrap();
        assert!((s.value.as_matrix() - expected).norm() < 1e-12);
    }

    #[test]
    fn singular_resolvent_is_reported() {
        let tol = Tolerances::default();
        let err = eval_kernel_resolvent(&ComplexMatrix::identity(2), 2.0, c64(1.0, 0.0), &tol).unwrap_err();
        assert!(matches!(err, HarnackError::SingularResolvent { .. }));
    }

    #[test]
    fn circle_margins_of_reference_cases() {
        let tol = Tolerances::default();
        let grid = TorusGrid::default();
        let m = kernel_margin_on_circle(&nil2(), 2.0, 1.0, grid, &tol).unwrap();
        assert!(m.min_eig.abs() < 1e-12);
        let m = kernel_margin_on_circle(&ComplexMatrix::zeros(2), 1.0, 1.0, grid, &tol).unwrap();
        assert_eq!(m.min_eig, 1.0);
        assert_eq!(m.index, 0);
        let perturbed = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.3, 0.0]]).unwrap();
        let m = kernel_margin_on_circle(&perturbed, 2.0, 1.0, grid, &tol).unwrap();
        assert!(m.min_eig < -1e-3);
    }

    #[test]
    fn null_basis_of_nilpotent_is_one_minus_z() {
        let tol = Tolerances::default();
        let z = cis(0.7);
        let basis = kernel_null_basis(&nil2(), 2.0, z, &tol).unwrap();
        assert_eq!(basis.dim(), 1);
        let v = basis.basis.column(0);
        // v is proportional to (1, -z).
        assert!((v[1] + z * v[0]).norm() < 1e-10);
    }

    #[test]
    fn sandwich_bound_reference_values() {
        let tol = Tolerances::default();
        let t = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let b = sandwich_bound(&t, 2.0, c64(0.0, 0.0), c64(0.0, 0.0), &tol).unwrap();
        assert!((b.bound - 6.0).abs() < 1e-15);
        assert!((b.actual - 2.0).abs() < 1e-14);
        let z = c64(0.3, 0.1);
        let lambda = c64(-0.5, 0.2);
        let b = sandwich_bound(&t, 1.0, z, lambda, &tol).unwrap();
        let f = 1.0 + (z - lambda).norm() / (1.0 - z.norm());
        assert!((b.bound - 2.0 * f * f).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_margin_cases() {
        let tol = Tolerances::default();
        let m = lipschitz_certified_margin(&ComplexMatrix::zeros(2), 1.0, TorusGrid::new(16).unwrap(), 1.0, &tol)
            .unwrap();
        assert_eq!(m.lipschitz, 0.0);
        assert_eq!(m.certified, 1.0);
        let half = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let m = lipschitz_certified_margin(&half, 2.0, TorusGrid::new(4096).unwrap(), 1.0, &tol).unwrap();
        assert!(m.certified > 0.0);
        let m = lipschitz_certified_margin(&nil2(), 2.0, TorusGrid::default(), 1.0, &tol).unwrap();
        assert!(m.certified <= 0.0);
    }

    #[test]
    fn circle_factor_certifies_boundary_case() {
        let f = CircleFactor::new(nil2().as_matrix(), 2.0);
        let cert = f.certify(TorusGrid::default(), 1e-9, 1 << 17);
        assert_eq!(cert.outcome, CircleOutcome::Certified);
        assert!(cert.margin.abs() < 1e-12);
        let bad = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.01, 0.0]]).unwrap();
        let cert = CircleFactor::new(bad.as_matrix(), 2.0).certify(TorusGrid::default(), 1e-9, 1 << 17);
        assert!(matches!(cert.outcome, CircleOutcome::Violated { .. }));
    }

    #[test]
    fn margin_csv_layout() {
        let tol = Tolerances::default();
        let rows = margin_profile(&nil2(), 2.0, 1.0, TorusGrid::new(8).unwrap(), &tol).unwrap();
        let mut out = Vec::new();
        write_margin_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta,min_eig,kernel_dim");
        assert_eq!(lines.len(), 9);
        assert!(lines[1].ends_with(",1"));
    }

    #[test]
    fn schedules_and_grids_validate() {
        assert!(TorusGrid::new(4).is_err());
        assert_eq!(RadialSchedule::dyadic(3).radii(), &[0.5, 0.75, 0.875]);
        assert!(RadialSchedule::new(vec![0.5, 0.4]).is_err());
        assert!(RadialSchedule::new(vec![0.5, 1.0]).is_err());
    }
}
