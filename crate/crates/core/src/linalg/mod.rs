//! Dense complex linear algebra on top of `nalgebra`.
//!
//! Everything downstream works with [`CMat`] internally and exposes
//! [`ComplexMatrix`] (validated, square, finite) at API boundaries.

pub mod io;

use nalgebra::{Cholesky, DMatrix, Schur, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HarnackError, Result};

pub type CMat = DMatrix<Complex64>;

/// Largest accepted matrix dimension.
pub const MAX_DIM: usize = 512;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A validated dense square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: CMat,
}

impl ComplexMatrix {
    pub fn from_dmatrix(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(HarnackError::DimensionError(format!(
                "matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(HarnackError::DimensionError("matrix dimension must be at least 1".into()));
        }
        if m.nrows() > MAX_DIM {
            return Err(HarnackError::Capacity {
                dim: m.nrows(),
                max: MAX_DIM,
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(HarnackError::NonFinite);
        }
        Ok(Self { inner: m })
    }

    /// Builds a matrix from row-major rows; ragged input is a `DimensionError`.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(HarnackError::DimensionError(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Convenience constructor for real matrices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: CMat::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: CMat::zeros(dim, dim) }
    }

    pub fn diagonal(diag: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMat {
        &self.inner
    }

    pub fn into_matrix(self) -> CMat {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { inner: &self.inner * factor }
    }

    /// `U* T U`.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Result<Self> {
        check_same_dim(self.dim(), u.dim())?;
        Self::from_dmatrix(u.inner.adjoint() * &self.inner * &u.inner)
    }

    pub fn is_zero(&self) -> bool {
        self.inner.iter().all(|z| *z == ZERO)
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        io::MatrixDoc::from_matrix(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let doc = io::MatrixDoc::deserialize(deserializer)?;
        doc.into_matrix().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(HarnackError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// descending order.
#[derive(Clone, Debug)]
pub struct HermitianEigenSystem {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `eigenvalues`.
    pub eigenvectors: CMat,
}

impl HermitianEigenSystem {
    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().unwrap_or(&0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.first().unwrap_or(&0.0)
    }

    /// Columns whose eigenvalue is at most `threshold` in absolute value.
    pub fn null_basis(&self, threshold: f64) -> SubspaceBasis {
        let n = self.eigenvectors.nrows();
        let cols: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&k| self.eigenvalues[k].abs() <= threshold)
            .collect();
        SubspaceBasis::from_columns(n, &self.eigenvectors, &cols)
    }

    pub fn reconstruct(&self) -> CMat {
        let lambda = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        ));
        &self.eigenvectors * lambda * self.eigenvectors.adjoint()
    }
}

/// Orthonormal basis of a subspace, one vector per column. May have zero columns.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub basis: CMat,
}

impl SubspaceBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: CMat::zeros(ambient_dim, 0),
        }
    }

    pub fn from_columns(ambient_dim: usize, source: &CMat, cols: &[usize]) -> Self {
        let mut basis = CMat::zeros(ambient_dim, cols.len());
        for (dst, &src) in cols.iter().enumerate() {
            basis.set_column(dst, &source.column(src));
        }
        Self { ambient_dim, basis }
    }

    /// Orthonormalizes the columns of `m` (assumed linearly independent).
    pub fn orthonormalize(m: CMat) -> Self {
        let ambient_dim = m.nrows();
        if m.ncols() == 0 {
            return Self::empty(ambient_dim);
        }
        let k = m.ncols();
        let q = m.qr().q();
        let basis = q.columns(0, k).into_owned();
        Self { ambient_dim, basis }
    }

    /// Standard basis vectors `e_i` for the listed indices.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let mut basis = CMat::zeros(ambient_dim, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            basis[(i, c)] = ONE;
        }
        Self { ambient_dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn projector(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> SubspaceBasis {
        let n = self.ambient_dim;
        let p = CMat::identity(n, n) - self.projector();
        let eig = hermitian_eig_unchecked(&p);
        let cols: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
        SubspaceBasis::from_columns(n, &eig.eigenvectors, &cols)
    }

    /// Image of the subspace under `m`, re-orthonormalized.
    pub fn mapped(&self, m: &CMat) -> SubspaceBasis {
        Self::orthonormalize(m * &self.basis)
    }

    pub fn orthonormality_residual(&self) -> f64 {
        let k = self.dim();
        (self.basis.adjoint() * &self.basis - CMat::identity(k, k)).norm()
    }
}

/// Frobenius norm of `A - A*`.
pub fn hermitian_skew(a: &CMat) -> f64 {
    (a - a.adjoint()).norm()
}

/// `(A + A*) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Hermitian eigen-decomposition. The input must be Hermitian within
/// `1e-9 (1 + ||A||)`; its Hermitian part is decomposed.
pub fn hermitian_eig(a: &CMat) -> Result<HermitianEigenSystem> {
    check_square(a)?;
    let tol = 1e-9 * (1.0 + a.norm());
    let skew = hermitian_skew(a);
    if skew > tol {
        return Err(HarnackError::NonHermitianInput { skew, tol });
    }
    Ok(hermitian_eig_unchecked(&hermitian_part(a)))
}

pub(crate) fn hermitian_eig_unchecked(a: &CMat) -> HermitianEigenSystem {
    let n = a.nrows();
    if n == 0 {
        return HermitianEigenSystem {
            eigenvalues: Vec::new(),
            eigenvectors: CMat::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let mut col = eig.eigenvectors.column(src).into_owned();
        normalize_phase(col.as_mut_slice());
        vectors.set_column(dst, &col);
    }
    HermitianEigenSystem {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}

/// Rotates a vector so that its first non-negligible component is real positive.
fn normalize_phase(v: &mut [Complex64]) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(pivot) = v.iter().find(|z| z.norm() > 1e-8 * scale) {
        let phase = pivot.conj() / pivot.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

/// Eigenvalues only (descending) of the Hermitian part of `a`.
pub(crate) fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

pub(crate) fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).last().copied().unwrap_or(f64::INFINITY)
}

pub(crate) fn max_eigenvalue(a: &CMat) -> f64 {
    hermitian_eigenvalues(a).first().copied().unwrap_or(f64::NEG_INFINITY)
}

/// `true` when `A + shift I` admits a Cholesky factorization, which certifies
/// `lambda_min(A) > -shift` up to rounding.
pub(crate) fn psd_with_shift(a: &CMat, shift: f64) -> bool {
    let n = a.nrows();
    if n == 0 {
        return true;
    }
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] += Complex64::new(shift, 0.0);
    }
    Cholesky::new(m).is_some()
}

fn check_square(a: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(HarnackError::DimensionError(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Singular values in descending order.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Largest singular value; equals the operator radius for rho = 1.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    op_norm(a.as_matrix())
}

pub(crate) fn op_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues(a: &CMat) -> Vec<Complex64> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![a[(0, 0)]];
    }
    match Schur::try_new(a.clone(), f64::EPSILON, 10_000) {
        Some(schur) => {
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
        None => {
            let scale = a.norm().max(1.0);
            // Fall back on a scaled shift; Schur on `A + s I` rarely stalls twice.
            let shift = Complex64::new(0.5 * scale, 0.25 * scale);
            let shifted = a + CMat::identity(n, n) * shift;
            let schur = Schur::new(shifted);
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)] - shift).collect()
        }
    }
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(a: &ComplexMatrix) -> f64 {
    spectral_radius_of(a.as_matrix())
}

pub(crate) fn spectral_radius_of(a: &CMat) -> f64 {
    eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Orthonormal basis of `{x : ||A x|| <= threshold ||x||}` from the SVD.
pub(crate) fn null_space(a: &CMat, threshold: f64) -> SubspaceBasis {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sv = &svd.singular_values;
    let mut rows: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] <= threshold).collect();
    // Columns beyond the row count of a wide matrix are automatically null.
    rows.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let mut basis = CMat::zeros(n, rows.len());
    for (c, &r) in rows.iter().enumerate() {
        for i in 0..n {
            basis[(i, c)] = v_t[(r, i)].conj();
        }
    }
    let mut sb = SubspaceBasis {
        ambient_dim: n,
        basis,
    };
    for c in 0..sb.dim() {
        let mut col = sb.basis.column(c).into_owned();
        normalize_phase(col.as_mut_slice());
        sb.basis.set_column(c, &col);
    }
    sb
}

/// Principal angles (radians, ascending) between two subspaces. The number
/// of angles is `min(dim U, dim W)`.
pub fn principal_angles(u: &SubspaceBasis, w: &SubspaceBasis) -> Result<Vec<f64>> {
    check_same_dim(u.ambient_dim, w.ambient_dim)?;
    let (small, large) = if w.dim() <= u.dim() { (w, u) } else { (u, w) };
    let k = small.dim();
    if k == 0 {
        return Ok(Vec::new());
    }
    let cross = large.basis.adjoint() * &small.basis;
    let mut cosines = singular_values(&cross);
    cosines.truncate(k);
    let residual = &small.basis - &large.basis * &cross;
    let mut sines = singular_values(&residual);
    sines.resize(k, 0.0);
    sines.sort_by(|a, b| a.total_cmp(b));
    let angles = (0..k)
        .map(|i| {
            let c = cosines[i].clamp(0.0, 1.0);
            if c * c > 0.5 {
                sines[i].clamp(0.0, 1.0).asin()
            } else {
                c.acos()
            }
        })
        .collect();
    Ok(angles)
}

/// `true` when both subspaces have the same dimension and every principal
/// angle is at most `angle_tol`.
pub fn subspaces_equal(u: &SubspaceBasis, w: &SubspaceBasis, angle_tol: f64) -> Result<bool> {
    if u.dim() != w.dim() {
        return Ok(false);
    }
    Ok(max_angle(&principal_angles(u, w)?) <= angle_tol)
}

/// `true` when `inner` lies in `outer` up to `angle_tol`.
pub fn subspace_contained(inner: &SubspaceBasis, outer: &SubspaceBasis, angle_tol: f64) -> Result<bool> {
    if inner.dim() > outer.dim() {
        return Ok(false);
    }
    Ok(max_angle(&principal_angles(inner, outer)?) <= angle_tol)
}

pub(crate) fn max_angle(angles: &[f64]) -> f64 {
    angles.iter().copied().fold(0.0, f64::max)
}

pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = hermitian_eig(&CMat::identity(2, 2)).unwrap();
        assert_eq!(eig.eigenvalues.len(), 2);
        for l in &eig.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_one_kernel_eigenvalues() {
        // 2 [[1, conj(z)], [z, 1]] with |z| = 1 has eigenvalues 2(1 +- |z|).
        let z = cis(0.7);
        let a = CMat::from_row_slice(2, 2, &[c64(2.0, 0.0), z.conj() * 2.0, z * 2.0, c64(2.0, 0.0)]);
        let eig = hermitian_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] - 4.0).abs() < 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12);
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let a = real(&[&[3.0, 0.0], &[0.0, -1.0]]);
        let eig = hermitian_eig(a.as_matrix()).unwrap();
        assert_eq!(eig.eigenvalues, vec![3.0, -1.0]);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let a = real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(
            hermitian_eig(a.as_matrix()),
            Err(HarnackError::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn eigenvector_phase_is_canonical() {
        let a = CMat::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.0, 1.0), c64(0.0, -1.0), c64(1.0, 0.0)]);
        let eig = hermitian_eig(&a).unwrap();
        for c in 0..2 {
            let first = eig.eigenvectors[(0, c)];
            assert!(first.im.abs() < 1e-14 && first.re > 0.0);
        }
    }

    #[test]
    fn norms_and_radii() {
        let t0 = real(&[&[0.0, 2.0], &[0.0, 0.0]]);
        assert!((spectral_norm(&t0) - 2.0).abs() < 1e-14);
        assert!(spectral_radius(&t0) < 1e-12);
        assert!((spectral_norm(&ComplexMatrix::identity(4)) - 1.0).abs() < 1e-14);
        let a = std::f64::consts::SQRT_2;
        let n = real(&[&[0.0, a], &[0.0, 0.0]]);
        assert!((spectral_norm(&n) - a).abs() < 1e-14);
        let d = real(&[&[1.0, 0.0], &[0.0, 0.5]]);
        assert!((spectral_radius(&d) - 1.0).abs() < 1e-14);
        let j = ComplexMatrix::from_fn(5, |i, k| if k == i + 1 { ONE } else { ZERO }).unwrap();
        assert!(spectral_radius(&j) < 1e-2);
    }

    #[test]
    fn complex_eigenvalues_of_rotation() {
        let r = real(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let mut ev = eigenvalues(r.as_matrix());
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c64(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c64(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn principal_angle_examples() {
        let e2n = SubspaceBasis::coordinate(4, &[1, 2, 3]);
        let angles = principal_angles(&e2n, &e2n).unwrap();
        assert!(angles.iter().all(|a| a.abs() < 1e-12));

        let e1 = SubspaceBasis::coordinate(2, &[0]);
        let e2 = SubspaceBasis::coordinate(2, &[1]);
        let angles = principal_angles(&e1, &e2).unwrap();
        assert!((angles[0] - FRAC_PI_2).abs() < 1e-12);

        let diag = SubspaceBasis::orthonormalize(CMat::from_column_slice(2, 1, &[ONE, ONE]));
        let angles = principal_angles(&e1, &diag).unwrap();
        assert!((angles[0] - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn principal_angles_dimension_mismatch() {
        let a = SubspaceBasis::coordinate(2, &[0]);
        let b = SubspaceBasis::coordinate(3, &[0]);
        assert!(matches!(
            principal_angles(&a, &b),
            Err(HarnackError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn capacity_and_finiteness() {
        assert!(matches!(
            ComplexMatrix::from_dmatrix(CMat::zeros(MAX_DIM + 1, MAX_DIM + 1)),
            Err(HarnackError::Capacity { .. })
        ));
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(matches!(ComplexMatrix::from_dmatrix(m), Err(HarnackError::NonFinite)));
    }

    #[test]
    fn complement_is_orthogonal() {
        let e = SubspaceBasis::orthonormalize(CMat::from_column_slice(3, 1, &[ONE, c64(0.0, 1.0), ZERO]));
        let c = e.complement();
        assert_eq!(c.dim(), 2);
        assert!((e.basis.adjoint() * &c.basis).norm() < 1e-12);
        assert!(c.orthonormality_residual() < 1e-12);
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = CMat::from_row_slice(2, 2, &[ONE, ONE, ONE, ONE]);
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.dim(), 1);
        assert!((&a * &ns.basis).norm() < 1e-12);
    }
}
