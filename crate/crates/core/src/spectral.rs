//! Spectrum on the unit circle, the unimodular splitting `T = U (+) T~`,
//! numerical-range points on the circle and stability.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{HarnackError, Result};
use crate::kernel::{argmin, kernel_matrix, TorusGrid};
use crate::linalg::{
    cis, eigenvalues, hermitian_eig_unchecked, min_eigenvalue, null_space, op_norm, principal_angles,
    singular_values, CMat, ComplexMatrix, SubspaceBasis,
};
use crate::par;
use crate::radii::numerical_radius_of;
use crate::search::golden_min;

/// Unimodular eigenvalues with their multiplicities and eigenspaces, sorted
/// by argument in `[0, 2 pi)`.
#[derive(Clone, Debug)]
pub struct TorusSpectrum {
    pub gamma: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    pub eigenspaces: Vec<SubspaceBasis>,
}

impl TorusSpectrum {
    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }

    /// Index of the entry within `tol` of `lambda`.
    pub fn position(&self, lambda: Complex64, tol: f64) -> Option<usize> {
        self.gamma.iter().position(|g| (g - lambda).norm() <= tol)
    }
}

fn arg_0_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Groups eigenvalues within `cluster_tol` of each other (single linkage).
fn clusters(values: &[Complex64], cluster_tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for seed in 0..n {
        if label[seed].is_some() {
            continue;
        }
        let id = groups.len();
        label[seed] = Some(id);
        let mut members = vec![seed];
        let mut cursor = 0;
        while cursor < members.len() {
            let current = values[members[cursor]];
            for j in 0..n {
                if label[j].is_none() && (values[j] - current).norm() <= cluster_tol {
                    label[j] = Some(id);
                    members.push(j);
                }
            }
            cursor += 1;
        }
        members.sort_unstable();
        groups.push(members);
    }
    groups
}

pub fn gamma_set(t: &ComplexMatrix, tol: &Tolerances) -> Result<TorusSpectrum> {
    gamma_set_of(t.as_matrix(), tol)
}

pub(crate) fn gamma_set_of(t: &CMat, tol: &Tolerances) -> Result<TorusSpectrum> {
    let n = t.nrows();
    let values = eigenvalues(t);
    let eig_threshold = 1e-6 * (1.0 + op_norm(t));
    let mut found: Vec<(f64, Complex64, usize, SubspaceBasis)> = Vec::new();
    for group in clusters(&values, tol.cluster_tol) {
        let mean: Complex64 = group.iter().map(|&i| values[i]).sum::<Complex64>() / group.len() as f64;
        if (mean.norm() - 1.0).abs() > tol.unimodular_tol {
            continue;
        }
        let lambda = mean / mean.norm();
        let algebraic = group.len();
        let shifted = t - CMat::identity(n, n) * lambda;
        let sv = singular_values(&shifted);
        let geometric = sv.iter().filter(|&&s| s <= eig_threshold).count();
        if geometric < algebraic {
            return Err(HarnackError::DefectiveUnimodularEigenvalue {
                re: lambda.re,
                im: lambda.im,
                algebraic,
                geometric,
            });
        }
        let mut space = null_space(&shifted, eig_threshold);
        if space.dim() > algebraic {
            space = SubspaceBasis::from_columns(n, &space.basis, &(0..algebraic).collect::<Vec<_>>());
        }
        found.push((arg_0_2pi(lambda), lambda, algebraic, space));
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(TorusSpectrum {
        gamma: found.iter().map(|f| f.1).collect(),
        multiplicities: found.iter().map(|f| f.2).collect(),
        eigenspaces: found.into_iter().map(|f| f.3).collect(),
    })
}

/// `T = U (+) T~` with `U` diagonal unitary on the span `E` of the
/// unimodular eigenspaces and `T~` the compression to `E`-perp.
#[derive(Clone, Debug)]
pub struct UnimodularDecomposition {
    pub e: SubspaceBasis,
    pub complement: SubspaceBasis,
    /// `Q_E* T Q_E`, diagonal in the eigenbasis stored in `e`.
    pub u_block: Option<ComplexMatrix>,
    /// `Q_perp* T Q_perp`.
    pub compression: Option<ComplexMatrix>,
    /// `||Q_E* T Q_perp|| + ||Q_perp* T Q_E||`.
    pub residual: f64,
    pub compression_radius: f64,
    pub gamma: TorusSpectrum,
}

impl UnimodularDecomposition {
    /// `Q_E U Q_E* + Q_perp T~ Q_perp*`.
    pub fn reassemble(&self) -> CMat {
        let n = self.e.ambient_dim;
        let mut out = CMat::zeros(n, n);
        if let Some(u) = &self.u_block {
            out += &self.e.basis * u.as_matrix() * self.e.basis.adjoint();
        }
        if let Some(c) = &self.compression {
            out += &self.complement.basis * c.as_matrix() * self.complement.basis.adjoint();
        }
        out
    }
}

pub(crate) fn reducing_residual(t: &CMat, e: &SubspaceBasis, perp: &SubspaceBasis) -> f64 {
    if e.dim() == 0 || perp.dim() == 0 {
        return 0.0;
    }
    let upper = e.basis.adjoint() * t * &perp.basis;
    let lower = perp.basis.adjoint() * t * &e.basis;
    op_norm(&upper) + op_norm(&lower)
}

pub(crate) fn reducing_tol(t: &CMat) -> f64 {
    1e-8 * (1.0 + op_norm(t))
}

pub fn unimodular_decomposition(t: &ComplexMatrix, tol: &Tolerances) -> Result<UnimodularDecomposition> {
    let tm = t.as_matrix();
    let n = tm.nrows();
    let gamma = gamma_set_of(tm, tol)?;
    let limit = reducing_tol(tm);
    for i in 0..gamma.eigenspaces.len() {
        for j in (i + 1)..gamma.eigenspaces.len() {
            let angles = principal_angles(&gamma.eigenspaces[i], &gamma.eigenspaces[j])?;
            let smallest = angles.iter().copied().fold(PI / 2.0, f64::min);
            if smallest < PI / 2.0 - 1e-6 {
                return Err(HarnackError::NotReducing {
                    residual: smallest.cos(),
                    tol: limit,
                });
            }
        }
    }
    let total: usize = gamma.eigenspaces.iter().map(|s| s.dim()).sum();
    let mut stacked = CMat::zeros(n, total);
    let mut col = 0;
    for space in &gamma.eigenspaces {
        for c in 0..space.dim() {
            stacked.set_column(col, &space.basis.column(c));
            col += 1;
        }
    }
    let e = if total == 0 {
        SubspaceBasis::empty(n)
    } else {
        SubspaceBasis::orthonormalize(stacked)
    };
    let complement = e.complement();
    let residual = reducing_residual(tm, &e, &complement);
    if residual > limit {
        return Err(HarnackError::NotReducing { residual, tol: limit });
    }
    let u_block = if e.dim() > 0 {
        Some(ComplexMatrix::from_dmatrix(e.basis.adjoint() * tm * &e.basis)?)
    } else {
        None
    };
    let (compression, compression_radius) = if complement.dim() > 0 {
        let c = complement.basis.adjoint() * tm * &complement.basis;
        let r = crate::linalg::spectral_radius_of(&c);
        (Some(ComplexMatrix::from_dmatrix(c)?), r)
    } else {
        (None, 0.0)
    };
    Ok(UnimodularDecomposition {
        e,
        complement,
        u_block,
        compression,
        residual,
        compression_radius,
        gamma,
    })
}

/// A witness point `<T x, x>` of the numerical range on (or near) the circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RangePoint {
    pub theta: f64,
    pub re: f64,
    pub im: f64,
    pub on_torus: bool,
}

/// Support-function sweep of the numerical range: one witness point per angle.
pub fn numerical_range_sweep(t: &ComplexMatrix, n_angles: usize, boundary_tol: f64) -> Vec<RangePoint> {
    let tm = t.as_matrix();
    par::map_indices(n_angles, |k| {
        let theta = 2.0 * PI * k as f64 / n_angles as f64;
        let rotated = tm * cis(-theta);
        let h = (&rotated + rotated.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = hermitian_eig_unchecked(&h);
        let x = eig.eigenvectors.column(0);
        let w = (x.adjoint() * tm * x)[(0, 0)];
        RangePoint {
            theta,
            re: w.re,
            im: w.im,
            on_torus: (w.norm() - 1.0).abs() <= boundary_tol,
        }
    })
}

/// Points of the numerical range on the unit circle, clustered by argument
/// at resolution `pi / n_angles` (half the sweep spacing).
pub fn numerical_range_torus(t: &ComplexMatrix, n_angles: usize, boundary_tol: f64) -> Result<Vec<Complex64>> {
    if n_angles < 256 {
        return Err(HarnackError::PreconditionFailed(format!(
            "numerical range sweep needs at least 256 angles, got {n_angles}"
        )));
    }
    let mut hits: Vec<(f64, Complex64)> = numerical_range_sweep(t, n_angles, boundary_tol)
        .into_iter()
        .filter(|p| p.on_torus)
        .map(|p| {
            let z = Complex64::new(p.re, p.im);
            (arg_0_2pi(z), z)
        })
        .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let resolution = PI / n_angles as f64;
    let mut out: Vec<(f64, Complex64)> = Vec::new();
    for (arg, z) in hits {
        match out.last() {
            Some(&(prev, _)) if arg - prev <= resolution => {}
            _ => out.push((arg, z)),
        }
    }
    // The first and last cluster can meet across the branch cut.
    if out.len() > 1 {
        let first = out[0].0;
        let last = out[out.len() - 1].0;
        if first + 2.0 * PI - last <= resolution {
            out.pop();
        }
    }
    Ok(out.into_iter().map(|(_, z)| z).collect())
}

pub fn write_range_csv<W: Write>(points: &[RangePoint], mut writer: W) -> Result<()> {
    writeln!(writer, "theta,re,im,on_torus")?;
    for p in points {
        writeln!(writer, "{:?},{:?},{:?},{}", p.theta, p.re, p.im, p.on_torus)?;
    }
    Ok(())
}

/// A boundary point where the rho = 2 kernel is (numerically) singular.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegeneratePoint {
    pub z0: [f64; 2],
    pub theta: f64,
    pub min_eig: f64,
}

/// For `w(T) = 1` and no unimodular spectrum, finds `z0` on the circle with
/// `K_{z0}^2(T)` singular.
pub fn degenerate_boundary_point(t: &ComplexMatrix, grid: TorusGrid, tol: &Tolerances) -> Result<DegeneratePoint> {
    let tm = t.as_matrix();
    let w = numerical_radius_of(tm);
    if (w - 1.0).abs() > 1e-4 {
        return Err(HarnackError::PreconditionFailed(format!(
            "numerical radius must be 1 within 1e-4, got {w}"
        )));
    }
    if !gamma_set_of(tm, tol)?.is_empty() {
        return Err(HarnackError::PreconditionFailed(
            "operator has unimodular eigenvalues".into(),
        ));
    }
    let eval = |theta: f64| kernel_matrix(tm, 2.0, cis(theta), tol).map(|k| min_eigenvalue(&k));
    let values: Vec<f64> = par::map_indices(grid.n_points(), |k| eval(grid.angle(k)))
        .into_iter()
        .collect::<Result<_>>()?;
    let (index, coarse) = argmin(&values);
    let h = grid.spacing();
    let center = grid.angle(index);
    let (mut theta, mut min_eig) = golden_min(
        |x| eval(x).unwrap_or(f64::INFINITY),
        center - h,
        center + h,
        60,
    );
    if coarse <= min_eig {
        theta = center;
        min_eig = coarse;
    }
    let z = cis(theta);
    Ok(DegeneratePoint {
        z0: [z.re, z.im],
        theta,
        min_eig,
    })
}

/// Power stability, which for matrices is `r(T) < 1`.
pub fn stability_check(t: &ComplexMatrix) -> bool {
    crate::linalg::spectral_radius(t) < 1.0 - 1e-10
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn jordan(n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |i, j| if j == i + 1 { c64(1.0, 0.0) } else { c64(0.0, 0.0) }).unwrap()
    }

    #[test]
    fn gamma_of_identity_and_jordan() {
        let g = gamma_set(&ComplexMatrix::identity(3), &tol()).unwrap();
        assert_eq!(g.gamma.len(), 1);
        assert_eq!(g.multiplicities, vec![3]);
        assert!((g.gamma[0] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(gamma_set(&jordan(4), &tol()).unwrap().is_empty());
    }

    #[test]
    fn gamma_of_mixed_diagonal() {
        let d = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(0.5, 0.0), cis(PI / 3.0)]).unwrap();
        let g = gamma_set(&d, &tol()).unwrap();
        assert_eq!(g.gamma.len(), 2);
        assert!((g.gamma[0] - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((g.gamma[1] - cis(PI / 3.0)).norm() < 1e-12);
        for (lambda, space) in g.gamma.iter().zip(&g.eigenspaces) {
            let v = space.basis.column(0);
            assert!((d.as_matrix() * v - v * *lambda).norm() < 1e-8);
        }
    }

    #[test]
    fn defective_unimodular_eigenvalue() {
        let t = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let err = gamma_set(&t, &tol()).unwrap_err();
        assert!(matches!(
            err,
            HarnackError::DefectiveUnimodularEigenvalue {
                algebraic: 2,
                geometric: 1,
                ..
            }
        ));
    }

    #[test]
    fn decompositions() {
        let d = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(0.3, 0.0)]).unwrap();
        let dec = unimodular_decomposition(&d, &tol()).unwrap();
        assert_eq!(dec.e.dim(), 1);
        assert!((dec.u_block.as_ref().unwrap().get(0, 0) - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((dec.compression.as_ref().unwrap().get(0, 0) - c64(0.3, 0.0)).norm() < 1e-12);
        assert!((dec.reassemble() - d.as_matrix()).norm() < 1e-12);

        let u = ComplexMatrix::identity(2).scaled(cis(PI / 4.0));
        let dec = unimodular_decomposition(&u, &tol()).unwrap();
        assert_eq!(dec.e.dim(), 2);
        assert!(dec.compression.is_none());

        let t = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 0.5]]).unwrap();
        let err = unimodular_decomposition(&t, &tol()).unwrap_err();
        assert!(matches!(err, HarnackError::NotReducing { .. }));
    }

    #[test]
    fn numerical_range_on_torus() {
        let id = numerical_range_torus(&ComplexMatrix::identity(2), 512, 1e-7).unwrap();
        assert_eq!(id.len(), 1);
        assert!((id[0] - c64(1.0, 0.0)).norm() < 1e-12);
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(numerical_range_torus(&nil, 512, 1e-7).unwrap().len(), 512);
        let small = ComplexMatrix::diagonal(&[c64(0.2, 0.0), c64(0.3, 0.0)]).unwrap();
        assert!(numerical_range_torus(&small, 512, 1e-7).unwrap().is_empty());
        assert!(numerical_range_torus(&small, 128, 1e-7).is_err());
    }

    #[test]
    fn degenerate_points() {
        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let p = degenerate_boundary_point(&nil, TorusGrid::default(), &tol()).unwrap();
        assert!(p.min_eig.abs() < 1e-10);
        let half = ComplexMatrix::diagonal(&[c64(0.5, 0.0), c64(0.5, 0.0)]).unwrap();
        assert!(matches!(
            degenerate_boundary_point(&half, TorusGrid::default(), &tol()),
            Err(HarnackError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn stability() {
        assert!(stability_check(&jordan(3)));
        assert!(!stability_check(&ComplexMatrix::identity(2)));
        assert!(stability_check(&ComplexMatrix::diagonal(&[c64(0.99, 0.0), c64(-0.5, 0.0)]).unwrap()));
    }
}
