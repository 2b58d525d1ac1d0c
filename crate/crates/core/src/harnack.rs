//! Harnack domination and equivalence.
//!
//! Every decision is taken on the unit circle. Unimodular eigenvalues are
//! split off first; on the remaining block the kernel is continuous up to the
//! circle, and on the unitary block it equals `(rho - 1) I` almost everywhere.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{check_rho, HarnackError, Result};
use crate::kernel::{argmax, argmin, kernel_matrix, resolvent, TorusGrid, LIPSCHITZ_SAFETY};
use crate::linalg::{
    check_same_dim, cis, hermitian_eig_unchecked, max_angle, min_eigenvalue, op_norm, principal_angles,
    subspace_contained, subspaces_equal, CMat, ComplexMatrix, SubspaceBasis,
};
use crate::par;
use crate::radii::{membership_of, Verdict};
use crate::search::{golden_max, golden_min};
use crate::spectral::{gamma_set_of, reducing_residual, reducing_tol, unimodular_decomposition};

/// Boundary values of the kernel of a rho-contraction:
/// `(rho - 1) P_E + Q K_theta(T~) Q*`, with `E` the unimodular eigenspaces and
/// `T~` the compression to `E`-perp (spanned by the columns of `Q`).
pub(crate) struct BoundaryFamily {
    rho: f64,
    unitary_part: CMat,
    basis: CMat,
    compression: CMat,
}

impl BoundaryFamily {
    pub(crate) fn new(t: &CMat, rho: f64, tol: &Tolerances) -> Result<Self> {
        let n = t.nrows();
        if n == 0 {
            return Ok(Self {
                rho,
                unitary_part: CMat::zeros(0, 0),
                basis: CMat::zeros(0, 0),
                compression: CMat::zeros(0, 0),
            });
        }
        let dec = unimodular_decomposition(&ComplexMatrix::from_dmatrix(t.clone())?, tol)?;
        let compression = match dec.compression {
            Some(c) => c.into_matrix(),
            None => CMat::zeros(0, 0),
        };
        Ok(Self {
            rho,
            unitary_part: dec.e.projector() * Complex64::new(rho - 1.0, 0.0),
            basis: dec.complement.basis,
            compression,
        })
    }

    fn dim(&self) -> usize {
        self.unitary_part.nrows()
    }

    pub(crate) fn at(&self, theta: f64, tol: &Tolerances) -> Result<CMat> {
        if self.compression.nrows() == 0 {
            return Ok(self.unitary_part.clone());
        }
        let k = kernel_matrix(&self.compression, self.rho, cis(theta), tol)?;
        Ok(&self.unitary_part + &self.basis * k * self.basis.adjoint())
    }

    /// Bound on `||d/dtheta K||`: `2 ||T~|| max_k ||R(theta_k)||^2`, padded.
    fn lipschitz(&self, grid: TorusGrid, tol: &Tolerances) -> Result<f64> {
        if self.compression.nrows() == 0 {
            return Ok(0.0);
        }
        let norms = par::map_indices(grid.n_points(), |k| {
            resolvent(&self.compression, cis(grid.angle(k)), tol).map(|r| op_norm(&r))
        });
        let mut worst = 0.0f64;
        for v in norms {
            worst = worst.max(v?);
        }
        Ok(2.0 * op_norm(&self.compression) * worst * worst * LIPSCHITZ_SAFETY)
    }
}

/// Spectral reason why domination cannot hold, found before any grid work.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Obstruction {
    /// A unimodular eigenvalue of the dominated operator is missing from the dominating one.
    GammaObstruction { lambda: [f64; 2] },
    /// A unimodular eigenspace of the dominated operator is not contained in
    /// the corresponding eigenspace of the dominating one.
    EigenspaceObstruction { lambda: [f64; 2], max_angle: Option<f64> },
}

impl Obstruction {
    pub fn code(&self) -> &'static str {
        match self {
            Obstruction::GammaObstruction { .. } => "GammaObstruction",
            Obstruction::EigenspaceObstruction { .. } => "EigenspaceObstruction",
        }
    }
}

/// A point and direction where `c^2 K(T0) - K(T1)` is negative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Counterexample {
    pub z: [f64; 2],
    pub theta: f64,
    pub direction: Vec<[f64; 2]>,
    /// `<(c^2 K(T0) - K(T1)) x, x>` at `c`.
    pub value: f64,
    pub c: f64,
    pub cause: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Certification {
    Certified,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationReport {
    pub dominated: bool,
    pub c: Option<f64>,
    /// `(theta, largest generalized eigenvalue)`; `None` where the kernel of
    /// `K(T0)` is not contained in that of `K(T1)`.
    pub per_sample_max_ratio: Vec<(f64, Option<f64>)>,
    pub counterexample: Option<Counterexample>,
    pub obstruction: Option<Obstruction>,
    pub grid_points: usize,
    pub mode: &'static str,
    pub certification: Option<Certification>,
    pub certified_margin: Option<f64>,
    pub dom_tol: f64,
    pub c_cap: f64,
}

impl DominationReport {
    fn trivial(grid: TorusGrid, tol: &Tolerances, mode: &'static str) -> Self {
        Self {
            dominated: true,
            c: Some(1.0),
            per_sample_max_ratio: Vec::new(),
            counterexample: None,
            obstruction: None,
            grid_points: grid.n_points(),
            mode,
            certification: None,
            certified_margin: None,
            dom_tol: tol.dom_tol,
            c_cap: tol.c_cap,
        }
    }
}

fn class_check(t: &ComplexMatrix, operand: &str, rho: f64, grid: TorusGrid, tol: &Tolerances) -> Result<Verdict> {
    let m = membership_of(t, rho, grid, tol)?;
    if m.verdict == Verdict::No {
        return Err(HarnackError::ClassViolation {
            operand: operand.to_string(),
            rho,
            reason: m.reason.unwrap_or_default(),
        });
    }
    Ok(m.verdict)
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Operators restricted to the orthocomplement of the unimodular eigenspaces
/// of the dominated operator, which reduce both.
struct ReducedPair {
    basis: CMat,
    fam1: BoundaryFamily,
    fam0: BoundaryFamily,
}

fn reduce_pair(
    t1: &CMat,
    t0: &CMat,
    rho: f64,
    tol: &Tolerances,
) -> Result<std::result::Result<ReducedPair, Obstruction>> {
    let g1 = gamma_set_of(t1, tol)?;
    let g0 = gamma_set_of(t0, tol)?;
    for (lambda, space) in g1.gamma.iter().zip(&g1.eigenspaces) {
        let Some(j) = g0.position(*lambda, tol.cluster_tol) else {
            return Ok(Err(Obstruction::GammaObstruction { lambda: pair(*lambda) }));
        };
        if !subspace_contained(space, &g0.eigenspaces[j], tol.angle_tol)? {
            let angle = if space.dim() <= g0.eigenspaces[j].dim() {
                Some(max_angle(&principal_angles(space, &g0.eigenspaces[j])?))
            } else {
                None
            };
            return Ok(Err(Obstruction::EigenspaceObstruction {
                lambda: pair(*lambda),
                max_angle: angle,
            }));
        }
    }
    let dec = unimodular_decomposition(&ComplexMatrix::from_dmatrix(t1.clone())?, tol)?;
    let residual = reducing_residual(t0, &dec.e, &dec.complement);
    let limit = reducing_tol(t0);
    if residual > limit {
        return Err(HarnackError::NotReducing { residual, tol: limit });
    }
    let q = dec.complement.basis;
    let t1c = q.adjoint() * t1 * &q;
    let t0c = q.adjoint() * t0 * &q;
    Ok(Ok(ReducedPair {
        fam1: BoundaryFamily::new(&t1c, rho, tol)?,
        fam0: BoundaryFamily::new(&t0c, rho, tol)?,
        basis: q,
    }))
}

/// Generalized eigen-data of the pencil `(num, den)` at one sample.
struct Pencil {
    /// `None` when `ker den` is not contained in `ker num`.
    max_ratio: Option<f64>,
    min_ratio: f64,
    /// Offending direction and `<num x, x>` when `max_ratio` is `None`.
    leak: Option<(nalgebra::DVector<Complex64>, f64)>,
    /// Direction attaining `max_ratio`.
    top: Option<nalgebra::DVector<Complex64>>,
}

fn pencil(num: &CMat, den: &CMat, tol: &Tolerances) -> Pencil {
    let m = den.nrows();
    if m == 0 {
        return Pencil {
            max_ratio: Some(0.0),
            min_ratio: f64::INFINITY,
            leak: None,
            top: None,
        };
    }
    let eig = hermitian_eig_unchecked(den);
    let scale = eig.eigenvalues.iter().fold(1.0f64, |s, l| s.max(l.abs()));
    let threshold = tol.rank_tol * scale;
    let range: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > threshold).collect();
    let null: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] <= threshold).collect();
    if !null.is_empty() {
        let nb = SubspaceBasis::from_columns(m, &eig.eigenvectors, &null).basis;
        let inner = hermitian_eig_unchecked(&(nb.adjoint() * num * &nb));
        let leak = inner.max_eigenvalue();
        let num_scale = hermitian_eig_unchecked(num)
            .eigenvalues
            .iter()
            .fold(1.0f64, |s, l| s.max(l.abs()));
        if leak > tol.rank_tol * num_scale {
            let x = &nb * inner.eigenvectors.column(0);
            return Pencil {
                max_ratio: None,
                min_ratio: 0.0,
                leak: Some((x, leak)),
                top: None,
            };
        }
    }
    if range.is_empty() {
        return Pencil {
            max_ratio: Some(0.0),
            min_ratio: f64::INFINITY,
            leak: None,
            top: None,
        };
    }
    let mut w = SubspaceBasis::from_columns(m, &eig.eigenvectors, &range).basis;
    for (c, &k) in range.iter().enumerate() {
        let s = 1.0 / eig.eigenvalues[k].sqrt();
        w.column_mut(c).scale_mut(s);
    }
    let g = w.adjoint() * num * &w;
    let ge = hermitian_eig_unchecked(&((&g + g.adjoint()) * Complex64::new(0.5, 0.0)));
    let top = &w * ge.eigenvectors.column(0);
    Pencil {
        max_ratio: Some(ge.max_eigenvalue()),
        min_ratio: ge.min_eigenvalue(),
        leak: None,
        top: Some(top),
    }
}

fn embed(basis: &CMat, x: &nalgebra::DVector<Complex64>) -> Vec<[f64; 2]> {
    let v = basis * x;
    let norm = v.norm();
    v.iter().map(|z| pair(*z / norm)).collect()
}

fn quad(a: &CMat, x: &nalgebra::DVector<Complex64>) -> f64 {
    (x.adjoint() * a * x)[(0, 0)].re
}

/// Smallest `c >= 1` with `K(T1) <= c^2 K(T0)` at every grid sample, refined
/// around the worst sample.
pub fn domination_constant(
    t1: &ComplexMatrix,
    t0: &ComplexMatrix,
    rho: f64,
    grid: TorusGrid,
    tol: &Tolerances,
    certify: bool,
) -> Result<DominationReport> {
    check_rho(rho)?;
    check_same_dim(t0.dim(), t1.dim())?;
    class_check(t1, "T1", rho, grid, tol)?;
    class_check(t0, "T0", rho, grid, tol)?;
    let mode = if certify { "certified" } else { "sampled" };
    let reduced = match reduce_pair(t1.as_matrix(), t0.as_matrix(), rho, tol)? {
        Ok(r) => r,
        Err(obstruction) => {
            return Ok(DominationReport {
                dominated: false,
                c: None,
                obstruction: Some(obstruction),
                ..DominationReport::trivial(grid, tol, mode)
            })
        }
    };
    if reduced.fam1.dim() == 0 {
        return Ok(DominationReport::trivial(grid, tol, mode));
    }
    let eval = |theta: f64| -> Result<(CMat, CMat)> { Ok((reduced.fam1.at(theta, tol)?, reduced.fam0.at(theta, tol)?)) };
    let samples: Vec<Pencil> = par::map_indices(grid.n_points(), |k| {
        eval(grid.angle(k)).map(|(k1, k0)| pencil(&k1, &k0, tol))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let per_sample: Vec<(f64, Option<f64>)> =
        samples.iter().enumerate().map(|(k, p)| (grid.angle(k), p.max_ratio)).collect();
    let mut report = DominationReport {
        per_sample_max_ratio: per_sample,
        ..DominationReport::trivial(grid, tol, mode)
    };

    if let Some(k) = samples.iter().position(|p| p.max_ratio.is_none()) {
        let theta = grid.angle(k);
        let (x, leak) = samples[k].leak.clone().expect("leak recorded with missing ratio");
        let (k1, k0) = eval(theta)?;
        let c = tol.c_cap;
        report.dominated = false;
        report.c = None;
        report.counterexample = Some(Counterexample {
            z: pair(cis(theta)),
            theta,
            direction: embed(&reduced.basis, &x),
            value: c * c * quad(&k0, &x) - quad(&k1, &x),
            c,
            cause: format!("kernel of K(T0) leaks into K(T1) with <K(T1)x,x> = {leak:.3e}"),
        });
        return Ok(report);
    }

    let ratios: Vec<f64> = samples.iter().map(|p| p.max_ratio.unwrap_or(f64::INFINITY)).collect();
    let (k_top, top) = argmax(&ratios);
    let h = grid.spacing();
    let center = grid.angle(k_top);
    let ratio_at = |theta: f64| {
        eval(theta)
            .map(|(k1, k0)| pencil(&k1, &k0, tol).max_ratio.unwrap_or(f64::INFINITY))
            .unwrap_or(f64::INFINITY)
    };
    let (theta_top, refined) = golden_max(ratio_at, center - h, center + h, 60);
    let (theta_top, c2) = if refined > top { (theta_top, refined) } else { (center, top) };
    let c = c2.max(1.0).sqrt();

    if !c.is_finite() || c > tol.c_cap {
        let (k1, k0) = eval(theta_top)?;
        let p = pencil(&k1, &k0, tol);
        let cap = tol.c_cap;
        report.dominated = false;
        report.c = None;
        if let Some(x) = p.top.or(p.leak.map(|l| l.0)) {
            report.counterexample = Some(Counterexample {
                z: pair(cis(theta_top)),
                theta: theta_top,
                direction: embed(&reduced.basis, &x),
                value: cap * cap * quad(&k0, &x) - quad(&k1, &x),
                c: cap,
                cause: "generalized eigenvalue exceeds c_cap^2".into(),
            });
        }
        return Ok(report);
    }
    report.c = Some(c);

    if certify {
        let (status, margin) = certify_margin(&reduced, c, grid, tol)?;
        report.certification = Some(status);
        report.certified_margin = Some(margin);
        report.dominated = status == Certification::Certified;
    }
    Ok(report)
}

/// Lipschitz-padded lower bound for `lambda_min(c^2 K0 - K1)` on the circle,
/// doubling the grid until it clears `-dom_tol` or the grid cap is reached.
fn certify_margin(reduced: &ReducedPair, c: f64, grid: TorusGrid, tol: &Tolerances) -> Result<(Certification, f64)> {
    let c2 = c * c;
    let mut g = grid;
    loop {
        let margins = sampled_margins(reduced, c2, g, tol)?;
        let (_, sampled) = argmin(&margins);
        let lipschitz = c2 * reduced.fam0.lipschitz(g, tol)? + reduced.fam1.lipschitz(g, tol)?;
        let certified = sampled - lipschitz * g.spacing() / 2.0;
        if certified >= -tol.dom_tol {
            return Ok((Certification::Certified, certified));
        }
        if g.n_points() * 2 > tol.max_grid_points || sampled < -tol.dom_tol {
            return Ok((Certification::Inconclusive, certified));
        }
        g = g.doubled();
    }
}

fn sampled_margins(reduced: &ReducedPair, c2: f64, grid: TorusGrid, tol: &Tolerances) -> Result<Vec<f64>> {
    par::map_indices(grid.n_points(), |k| {
        let theta = grid.angle(k);
        let k1 = reduced.fam1.at(theta, tol)?;
        let k0 = reduced.fam0.at(theta, tol)?;
        Ok(min_eigenvalue(&(k0 * Complex64::new(c2, 0.0) - k1)))
    })
    .into_iter()
    .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominationCheck {
    pub holds: bool,
    pub worst_margin: Option<f64>,
    pub worst_theta: Option<f64>,
    pub obstruction: Option<Obstruction>,
    pub certification: Option<Certification>,
    pub certified_margin: Option<f64>,
    pub grid_points: usize,
}

/// Tests `K(T1) <= c^2 K(T0)` on the grid at a fixed `c`.
pub fn check_domination(
    t1: &ComplexMatrix,
    t0: &ComplexMatrix,
    rho: f64,
    c: f64,
    grid: TorusGrid,
    tol: &Tolerances,
    certify: bool,
) -> Result<DominationCheck> {
    check_rho(rho)?;
    check_same_dim(t0.dim(), t1.dim())?;
    if !(c.is_finite() && c >= 1.0) {
        return Err(HarnackError::PreconditionFailed(format!("c must be at least 1, got {c}")));
    }
    class_check(t1, "T1", rho, grid, tol)?;
    class_check(t0, "T0", rho, grid, tol)?;
    let mut out = DominationCheck {
        holds: true,
        worst_margin: None,
        worst_theta: None,
        obstruction: None,
        certification: None,
        certified_margin: None,
        grid_points: grid.n_points(),
    };
    let reduced = match reduce_pair(t1.as_matrix(), t0.as_matrix(), rho, tol)? {
        Ok(r) => r,
        Err(obstruction) => {
            out.holds = false;
            out.obstruction = Some(obstruction);
            return Ok(out);
        }
    };
    if reduced.fam1.dim() == 0 {
        return Ok(out);
    }
    let margins = sampled_margins(&reduced, c * c, grid, tol)?;
    let (k, worst) = argmin(&margins);
    out.worst_margin = Some(worst);
    out.worst_theta = Some(grid.angle(k));
    out.holds = worst >= -tol.dom_tol;
    if certify && out.holds {
        let (status, margin) = certify_margin(&reduced, c, grid, tol)?;
        out.certification = Some(status);
        out.certified_margin = Some(margin);
        out.holds = status == Certification::Certified;
    }
    Ok(out)
}

/// Why two operators were found not to be Harnack equivalent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FailureReason {
    GammaMismatch,
    EigenspaceMismatch,
    UnitaryBlockMismatch,
    KernelDimMismatch,
    KernelAngleMismatch,
    ConfirmationFailed,
    DefectKernelMismatch,
    RestrictionMismatch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelComparison {
    pub theta: f64,
    pub dim_t: usize,
    pub dim_s: usize,
    pub max_angle: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    /// Optimal pencil constants: `alpha K(T) <= K(S) <= beta K(T)` on the samples.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(rename = "m_T")]
    pub m_t: Option<f64>,
    #[serde(rename = "M_T")]
    pub big_m_t: Option<f64>,
    #[serde(rename = "m_S")]
    pub m_s: Option<f64>,
    #[serde(rename = "M_S")]
    pub big_m_s: Option<f64>,
    /// `m(S) / M(T)` and `M(S) / m(T)`, the cruder constants built from
    /// extreme eigenvalues off the common kernel.
    pub alpha_mm: Option<f64>,
    pub beta_mm: Option<f64>,
    /// Constant used for the two-sided confirmation.
    pub c: Option<f64>,
    pub kernel_comparison: Vec<KernelComparison>,
    pub failure_reason: Option<FailureReason>,
    pub failure_detail: Option<String>,
    /// Dimension of the common unimodular eigenspace split off first.
    pub unimodular_dim: usize,
    pub class_inconclusive: bool,
    pub grid_points: usize,
}

impl EquivalenceReport {
    fn new(grid_points: usize) -> Self {
        Self {
            equivalent: true,
            alpha: None,
            beta: None,
            m_t: None,
            big_m_t: None,
            m_s: None,
            big_m_s: None,
            alpha_mm: None,
            beta_mm: None,
            c: None,
            kernel_comparison: Vec::new(),
            failure_reason: None,
            failure_detail: None,
            unimodular_dim: 0,
            class_inconclusive: false,
            grid_points,
        }
    }

    fn fail(mut self, reason: FailureReason, detail: String) -> Self {
        self.equivalent = false;
        self.failure_reason = Some(reason);
        self.failure_detail = Some(detail);
        self
    }
}

/// Common unimodular splitting of two operators.
struct SharedReduction {
    e_dim: usize,
    tc: CMat,
    sc: CMat,
}

fn match_unimodular(
    t: &CMat,
    s: &CMat,
    tol: &Tolerances,
) -> Result<std::result::Result<SharedReduction, (FailureReason, String)>> {
    let gt = gamma_set_of(t, tol)?;
    let gs = gamma_set_of(s, tol)?;
    if gt.gamma.len() != gs.gamma.len() {
        return Ok(Err((
            FailureReason::GammaMismatch,
            format!("{} vs {} unimodular eigenvalues", gt.gamma.len(), gs.gamma.len()),
        )));
    }
    for (lambda, space) in gt.gamma.iter().zip(&gt.eigenspaces) {
        let Some(j) = gs.position(*lambda, tol.cluster_tol) else {
            return Ok(Err((
                FailureReason::GammaMismatch,
                format!("eigenvalue {lambda} of T is not an eigenvalue of S"),
            )));
        };
        if !subspaces_equal(space, &gs.eigenspaces[j], tol.angle_tol)? {
            return Ok(Err((
                FailureReason::EigenspaceMismatch,
                format!("eigenspaces for {lambda} differ"),
            )));
        }
    }
    let dec = unimodular_decomposition(&ComplexMatrix::from_dmatrix(t.clone())?, tol)?;
    let residual = reducing_residual(s, &dec.e, &dec.complement);
    if residual > reducing_tol(s) {
        return Ok(Err((
            FailureReason::UnitaryBlockMismatch,
            format!("unimodular eigenspaces of T do not reduce S (residual {residual:.3e})"),
        )));
    }
    if dec.e.dim() > 0 {
        let qe = &dec.e.basis;
        let diff = op_norm(&(qe.adjoint() * (t - s) * qe));
        if diff > 1e-8 * (1.0 + op_norm(t)) {
            return Ok(Err((
                FailureReason::UnitaryBlockMismatch,
                format!("unitary blocks differ by {diff:.3e}"),
            )));
        }
    }
    let q = &dec.complement.basis;
    Ok(Ok(SharedReduction {
        e_dim: dec.e.dim(),
        tc: q.adjoint() * t * q,
        sc: q.adjoint() * s * q,
    }))
}

/// Kernel data of one compression at one angle.
struct KernelData {
    k: CMat,
    null: SubspaceBasis,
    /// Smallest eigenvalue off the kernel.
    gap: f64,
    top: f64,
}

fn kernel_data(t: &CMat, rho: f64, theta: f64, tol: &Tolerances) -> Result<KernelData> {
    let k = kernel_matrix(t, rho, cis(theta), tol)?;
    let eig = hermitian_eig_unchecked(&k);
    let scale = eig.eigenvalues.iter().fold(1.0f64, |s, l| s.max(l.abs()));
    let null = eig.null_basis(tol.rank_tol * scale);
    let m = eig.eigenvalues.len();
    let gap = if null.dim() < m {
        eig.eigenvalues[m - 1 - null.dim()]
    } else {
        f64::INFINITY
    };
    Ok(KernelData {
        top: eig.max_eigenvalue(),
        gap,
        null,
        k,
    })
}

/// `(k+1)`-th smallest kernel eigenvalue, a continuous function of `theta`.
fn ordered_eigenvalue(t: &CMat, rho: f64, theta: f64, k: usize, tol: &Tolerances) -> f64 {
    match kernel_matrix(t, rho, cis(theta), tol) {
        Ok(m) => {
            let e = crate::linalg::hermitian_eigenvalues(&m);
            e.get(e.len().wrapping_sub(1 + k)).copied().unwrap_or(f64::INFINITY)
        }
        Err(_) => f64::NEG_INFINITY,
    }
}

fn compare_kernels(theta: f64, a: &KernelData, b: &KernelData) -> Result<KernelComparison> {
    let max_angle = if a.null.dim() == b.null.dim() {
        Some(max_angle(&principal_angles(&a.null, &b.null)?))
    } else {
        None
    };
    Ok(KernelComparison {
        theta,
        dim_t: a.null.dim(),
        dim_s: b.null.dim(),
        max_angle,
    })
}

fn classify(cmp: &KernelComparison, tol: &Tolerances) -> Option<(FailureReason, String)> {
    if cmp.dim_t != cmp.dim_s {
        return Some((
            FailureReason::KernelDimMismatch,
            format!(
                "kernel dimensions {} vs {} at theta = {}",
                cmp.dim_t, cmp.dim_s, cmp.theta
            ),
        ));
    }
    match cmp.max_angle {
        Some(a) if a > tol.angle_tol => Some((
            FailureReason::KernelAngleMismatch,
            format!("kernels differ by angle {a:.3e} at theta = {}", cmp.theta),
        )),
        _ => None,
    }
}

/// Local minima of a periodic sequence, lowest first, at most `count`.
fn lowest_local_minima(values: &[f64], count: usize) -> Vec<usize> {
    let n = values.len();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&k| {
            let prev = values[(k + n - 1) % n];
            let next = values[(k + 1) % n];
            values[k].is_finite() && values[k] <= prev && values[k] <= next
        })
        .collect();
    minima.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    minima.truncate(count);
    minima
}

/// Harnack equivalence of `T` and `S` in `C_rho`: matching unimodular parts,
/// then equal kernels on the circle for the compressions, confirmed by a
/// two-sided domination check.
pub fn equivalence(
    t: &ComplexMatrix,
    s: &ComplexMatrix,
    rho: f64,
    grid: TorusGrid,
    tol: &Tolerances,
) -> Result<EquivalenceReport> {
    check_rho(rho)?;
    check_same_dim(t.dim(), s.dim())?;
    let vt = class_check(t, "T", rho, grid, tol)?;
    let vs = class_check(s, "S", rho, grid, tol)?;
    let mut report = EquivalenceReport::new(grid.n_points());
    report.class_inconclusive = vt == Verdict::Inconclusive || vs == Verdict::Inconclusive;
    let shared = match match_unimodular(t.as_matrix(), s.as_matrix(), tol)? {
        Ok(shared) => shared,
        Err((reason, detail)) => return Ok(report.fail(reason, detail)),
    };
    report.unimodular_dim = shared.e_dim;
    if shared.tc.nrows() == 0 {
        report.alpha = Some(1.0);
        report.beta = Some(1.0);
        report.c = Some(1.0);
        return Ok(report);
    }
    let (tc, sc) = (&shared.tc, &shared.sc);

    let data: Vec<(KernelData, KernelData)> = par::map_indices(grid.n_points(), |k| {
        let theta = grid.angle(k);
        Ok((kernel_data(tc, rho, theta, tol)?, kernel_data(sc, rho, theta, tol)?))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let mut thetas: Vec<f64> = grid.angles();
    let mut samples = data;
    for (k, (a, b)) in samples.iter().enumerate() {
        let cmp = compare_kernels(grid.angle(k), a, b)?;
        report.kernel_comparison.push(cmp);
    }
    if let Some((reason, detail)) = report.kernel_comparison.iter().find_map(|c| classify(c, tol)) {
        return Ok(report.fail(reason, detail));
    }

    // Kernel jumps between grid points: minimize the first eigenvalue above
    // the kernel near its lowest local minima and compare where it vanishes.
    let h = grid.spacing();
    let mut extra: Vec<f64> = Vec::new();
    for which in 0..2 {
        let op = if which == 0 { tc } else { sc };
        let gaps: Vec<f64> = samples.iter().map(|(a, b)| if which == 0 { a.gap } else { b.gap }).collect();
        for k in lowest_local_minima(&gaps, 8) {
            let dim = if which == 0 { samples[k].0.null.dim() } else { samples[k].1.null.dim() };
            let center = grid.angle(k);
            let (theta, value) = golden_min(|x| ordered_eigenvalue(op, rho, x, dim, tol), center - h, center + h, 80);
            let scale = if which == 0 { samples[k].0.top } else { samples[k].1.top };
            if value <= tol.rank_tol * scale.max(1.0) && !extra.iter().any(|e| (e - theta).abs() < 1e-12) {
                extra.push(theta);
            }
        }
    }
    for theta in extra {
        let a = kernel_data(tc, rho, theta, tol)?;
        let b = kernel_data(sc, rho, theta, tol)?;
        let cmp = compare_kernels(theta, &a, &b)?;
        report.kernel_comparison.push(cmp);
        if let Some((reason, detail)) = classify(&cmp, tol) {
            return Ok(report.fail(reason, detail));
        }
        thetas.push(theta);
        samples.push((a, b));
    }

    let finite_min = |v: &mut dyn Iterator<Item = f64>| v.filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
    let m_t = finite_min(&mut samples.iter().map(|s| s.0.gap));
    let m_s = finite_min(&mut samples.iter().map(|s| s.1.gap));
    let big_m_t = samples.iter().map(|s| s.0.top).fold(0.0, f64::max);
    let big_m_s = samples.iter().map(|s| s.1.top).fold(0.0, f64::max);
    let positive = |x: f64| (x.is_finite() && x > 0.0).then_some(x);
    report.m_t = positive(m_t);
    report.m_s = positive(m_s);
    report.big_m_t = positive(big_m_t);
    report.big_m_s = positive(big_m_s);
    if let (Some(ms), Some(mt), Some(bmt), Some(bms)) = (report.m_s, report.m_t, report.big_m_t, report.big_m_s) {
        report.alpha_mm = Some(ms / bmt);
        report.beta_mm = Some(bms / mt);
    }

    // Optimal pencil constants, refined around the extreme samples.
    let pencils: Vec<Pencil> = par::map_indices(samples.len(), |k| pencil(&samples[k].1.k, &samples[k].0.k, tol));
    if let Some(k) = pencils.iter().position(|p| p.max_ratio.is_none()) {
        return Ok(report.fail(
            FailureReason::ConfirmationFailed,
            format!("kernel of K(T) not contained in kernel of K(S) at theta = {}", thetas[k]),
        ));
    }
    let max_ratios: Vec<f64> = pencils.iter().map(|p| p.max_ratio.unwrap_or(0.0)).collect();
    let min_ratios: Vec<f64> = pencils.iter().map(|p| p.min_ratio).collect();
    let ratio_at = |theta: f64| -> (f64, f64) {
        match (kernel_matrix(tc, rho, cis(theta), tol), kernel_matrix(sc, rho, cis(theta), tol)) {
            (Ok(kt), Ok(ks)) => {
                let p = pencil(&ks, &kt, tol);
                (p.max_ratio.unwrap_or(f64::INFINITY), p.min_ratio)
            }
            _ => (f64::INFINITY, 0.0),
        }
    };
    let (kmax, mut beta) = argmax(&max_ratios);
    let (kmin, mut alpha) = argmin(&min_ratios);
    if kmax < grid.n_points() {
        let c0 = grid.angle(kmax);
        beta = beta.max(golden_max(|x| ratio_at(x).0, c0 - h, c0 + h, 60).1);
    }
    if kmin < grid.n_points() {
        let c0 = grid.angle(kmin);
        alpha = alpha.min(golden_min(|x| ratio_at(x).1, c0 - h, c0 + h, 60).1);
    }
    let alpha = alpha.min(1.0);
    let beta = beta.max(1.0);
    report.alpha = Some(alpha);
    report.beta = Some(beta);
    if alpha.is_nan() || alpha <= 0.0 {
        return Ok(report.fail(
            FailureReason::ConfirmationFailed,
            "K(S) degenerates against K(T) off the common kernel".into(),
        ));
    }
    let c = beta.sqrt().max(1.0 / alpha.sqrt()) * (1.0 + 1e-6);
    report.c = Some(c);
    if !c.is_finite() || c > tol.c_cap {
        return Ok(report.fail(
            FailureReason::ConfirmationFailed,
            format!("equivalence constant {c:.3e} exceeds c_cap"),
        ));
    }
    let c2 = Complex64::new(c * c, 0.0);
    for (k, (a, b)) in samples.iter().enumerate() {
        let forward = min_eigenvalue(&(&a.k * c2 - &b.k));
        let backward = min_eigenvalue(&(&b.k * c2 - &a.k));
        if forward < -tol.dom_tol || backward < -tol.dom_tol {
            return Ok(report.fail(
                FailureReason::ConfirmationFailed,
                format!(
                    "two-sided check fails at theta = {} (margins {forward:.3e}, {backward:.3e})",
                    thetas[k]
                ),
            ));
        }
    }
    Ok(report)
}

/// Harnack equivalence of two contractions (`rho = 1`): equal defect kernels
/// `ker(I - T*T)` and equal restrictions to them, after removing a common
/// unitary part.
pub fn equivalence_c1(t: &ComplexMatrix, s: &ComplexMatrix, tol: &Tolerances) -> Result<EquivalenceReport> {
    check_same_dim(t.dim(), s.dim())?;
    for (m, name) in [(t, "T"), (s, "S")] {
        let norm = op_norm(m.as_matrix());
        if norm > 1.0 + 1e-9 {
            return Err(HarnackError::ClassViolation {
                operand: name.into(),
                rho: 1.0,
                reason: format!("operator norm {norm} exceeds 1"),
            });
        }
    }
    let mut report = EquivalenceReport::new(0);
    let shared = match match_unimodular(t.as_matrix(), s.as_matrix(), tol)? {
        Ok(shared) => shared,
        Err((reason, detail)) => return Ok(report.fail(reason, detail)),
    };
    report.unimodular_dim = shared.e_dim;
    let m = shared.tc.nrows();
    if m == 0 {
        return Ok(report);
    }
    let defect = |x: &CMat| {
        let d = CMat::identity(m, m) - x.adjoint() * x;
        let eig = hermitian_eig_unchecked(&crate::kernel::symmetrize(d));
        let scale = eig.eigenvalues.iter().fold(1.0f64, |s, l| s.max(l.abs()));
        eig.null_basis(tol.rank_tol * scale)
    };
    let et = defect(&shared.tc);
    let es = defect(&shared.sc);
    if et.dim() != es.dim() {
        return Ok(report.fail(
            FailureReason::DefectKernelMismatch,
            format!("defect kernel dimensions {} vs {}", et.dim(), es.dim()),
        ));
    }
    let angle = max_angle(&principal_angles(&et, &es)?);
    if angle > tol.angle_tol {
        return Ok(report.fail(
            FailureReason::DefectKernelMismatch,
            format!("defect kernels differ by angle {angle:.3e}"),
        ));
    }
    if et.dim() > 0 {
        let diff = op_norm(&((&shared.tc - &shared.sc) * &et.basis));
        if diff > 1e-8 {
            return Ok(report.fail(
                FailureReason::RestrictionMismatch,
                format!("restrictions to the defect kernel differ by {diff:.3e}"),
            ));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitReport {
    pub holds: bool,
    /// `U` maps every boundary kernel of `T` into itself.
    pub invariance_holds: bool,
    pub invariance_failure_theta: Option<f64>,
    pub equivalence: EquivalenceReport,
}

/// Checks that `U` leaves the boundary kernels of `T` invariant and that
/// `U* T U` is Harnack equivalent to `T`.
pub fn conjugation_orbit_check(
    t: &ComplexMatrix,
    u: &ComplexMatrix,
    rho: f64,
    grid: TorusGrid,
    tol: &Tolerances,
) -> Result<OrbitReport> {
    check_rho(rho)?;
    check_same_dim(t.dim(), u.dim())?;
    let um = u.as_matrix();
    let n = um.nrows();
    let residual = (um.adjoint() * um - CMat::identity(n, n)).norm();
    if residual > 1e-9 {
        return Err(HarnackError::NotUnitary { residual });
    }
    class_check(t, "T", rho, grid, tol)?;
    let family = BoundaryFamily::new(t.as_matrix(), rho, tol)?;
    let checks: Vec<bool> = par::map_indices(grid.n_points(), |k| -> Result<bool> {
        let kv = family.at(grid.angle(k), tol)?;
        let eig = hermitian_eig_unchecked(&kv);
        let scale = eig.eigenvalues.iter().fold(1.0f64, |s, l| s.max(l.abs()));
        let null = eig.null_basis(tol.rank_tol * scale);
        if null.dim() == 0 {
            return Ok(true);
        }
        let image = SubspaceBasis {
            ambient_dim: n,
            basis: um * &null.basis,
        };
        subspace_contained(&image, &null, tol.angle_tol)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let failure = checks.iter().position(|ok| !ok);
    let conjugated = t.conjugated_by(u)?;
    let equivalence = equivalence(t, &conjugated, rho, grid, tol)?;
    Ok(OrbitReport {
        holds: failure.is_none() && equivalence.equivalent,
        invariance_holds: failure.is_none(),
        invariance_failure_theta: failure.map(|k| grid.angle(k)),
        equivalence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c64;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn grid() -> TorusGrid {
        TorusGrid::default()
    }

    #[test]
    fn zero_below_identity() {
        for rho in [1.25, 1.5, 2.0, 4.0] {
            let r = domination_constant(&ComplexMatrix::zeros(2), &ComplexMatrix::identity(2), rho, grid(), &tol(), false)
                .unwrap();
            assert!(r.dominated);
            let expected = (rho / (rho - 1.0)).sqrt();
            assert!((r.c.unwrap() - expected).abs() < 1e-9, "{rho}: {:?}", r.c);
        }
    }

    #[test]
    fn nilpotent_below_identity() {
        for rho in [1.5, 2.0, 3.0] {
            let t1 = real(&[&[0.0, rho], &[0.0, 0.0]]);
            let r = domination_constant(&t1, &ComplexMatrix::identity(2), rho, grid(), &tol(), false).unwrap();
            assert!(r.dominated);
            let bound = (2.0 * rho / (rho - 1.0)).sqrt();
            assert!(r.c.unwrap() <= bound + 1e-3);
            let check = check_domination(&t1, &ComplexMatrix::identity(2), rho, bound, grid(), &tol(), false).unwrap();
            assert!(check.holds);
        }
    }

    #[test]
    fn fixed_constant_checks() {
        let zero = ComplexMatrix::zeros(2);
        let id = ComplexMatrix::identity(2);
        let ok = check_domination(&zero, &id, 2.0, 2f64.sqrt(), grid(), &tol(), false).unwrap();
        assert!(ok.holds);
        assert!(ok.worst_margin.unwrap().abs() < 1e-12);
        assert!(!check_domination(&zero, &id, 2.0, 1.2, grid(), &tol(), false).unwrap().holds);
        let t = real(&[&[0.2, 0.5], &[0.0, -0.3]]);
        assert!(check_domination(&t, &t, 2.0, 1.0, grid(), &tol(), false).unwrap().holds);
        assert!(check_domination(&t, &t, 2.0, 0.5, grid(), &tol(), false).is_err());
    }

    #[test]
    fn reflexive_constant_is_one() {
        let t = real(&[&[0.2, 0.5], &[0.1, -0.3]]);
        let r = domination_constant(&t, &t, 1.5, grid(), &tol(), false).unwrap();
        assert!(r.dominated);
        assert!((r.c.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_over_jordan_is_gamma_obstructed() {
        let j2 = real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = domination_constant(&ComplexMatrix::identity(2), &j2, 1.0, grid(), &tol(), false).unwrap();
        assert!(!r.dominated);
        assert_eq!(r.obstruction.as_ref().unwrap().code(), "GammaObstruction");
    }

    #[test]
    fn class_violation_is_an_error() {
        let big = real(&[&[0.0, 3.0], &[0.0, 0.0]]);
        let err = domination_constant(&big, &ComplexMatrix::identity(2), 1.0, grid(), &tol(), false).unwrap_err();
        assert!(matches!(err, HarnackError::ClassViolation { .. }));
    }

    #[test]
    fn kernel_leak_gives_counterexample() {
        // K(T0) is singular on the circle while K(0) = rho I is not.
        let t0 = real(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let r = domination_constant(&ComplexMatrix::zeros(2), &t0, 2.0, grid(), &tol(), false).unwrap();
        assert!(!r.dominated);
        let cx = r.counterexample.unwrap();
        assert!(cx.value < 0.0);
    }

    #[test]
    fn certified_mode() {
        let zero = ComplexMatrix::zeros(2);
        let id = ComplexMatrix::identity(2);
        let r = domination_constant(&zero, &id, 2.0, grid(), &tol(), true).unwrap();
        assert_eq!(r.certification, Some(Certification::Certified));
        assert!(r.dominated);
        let t = real(&[&[0.1, 0.2], &[0.0, 0.3]]);
        let c = check_domination(&t, &id, 2.0, 3.0, grid(), &tol(), true).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn self_equivalence() {
        let t = real(&[&[0.2, 0.5], &[0.1, -0.3]]);
        let r = equivalence(&t, &t, 2.0, grid(), &tol()).unwrap();
        assert!(r.equivalent);
        assert!((r.alpha.unwrap() - 1.0).abs() < 1e-9);
        assert!((r.beta.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nilpotent_has_trivial_part() {
        let t0 = real(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let minus = t0.scaled(c64(-1.0, 0.0));
        let r = equivalence(&t0, &minus, 2.0, grid(), &tol()).unwrap();
        assert!(!r.equivalent);
        assert_eq!(r.failure_reason, Some(FailureReason::KernelAngleMismatch));
        let perturbed = real(&[&[0.0, 2.0], &[0.2, 0.0]]);
        assert!(matches!(
            equivalence(&t0, &perturbed, 2.0, grid(), &tol()),
            Err(HarnackError::ClassViolation { .. })
        ));
    }

    #[test]
    fn unitary_parts_must_agree() {
        let a = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(0.2, 0.0)]).unwrap();
        let b = ComplexMatrix::diagonal(&[c64(-1.0, 0.0), c64(0.2, 0.0)]).unwrap();
        let r = equivalence(&a, &b, 2.0, grid(), &tol()).unwrap();
        assert_eq!(r.failure_reason, Some(FailureReason::GammaMismatch));
        let c = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(-0.3, 0.0)]).unwrap();
        let r = equivalence(&a, &c, 2.0, grid(), &tol()).unwrap();
        assert!(r.equivalent);
        assert_eq!(r.unimodular_dim, 1);
    }

    #[test]
    fn contraction_equivalence() {
        let j = real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        let mut m = j.as_matrix().clone();
        m[(2, 0)] = c64(0.3, 0.2);
        let m = ComplexMatrix::from_dmatrix(m).unwrap();
        assert!(equivalence_c1(&j, &m, &tol()).unwrap().equivalent);
        let swap = real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let j2 = real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = equivalence_c1(&j2, &swap, &tol()).unwrap();
        assert_eq!(r.failure_reason, Some(FailureReason::GammaMismatch));
    }

    #[test]
    fn orbit_checks() {
        let t0 = real(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let id = ComplexMatrix::identity(2);
        assert!(conjugation_orbit_check(&t0, &id, 2.0, grid(), &tol()).unwrap().holds);
        let flip = ComplexMatrix::diagonal(&[c64(1.0, 0.0), c64(-1.0, 0.0)]).unwrap();
        let r = conjugation_orbit_check(&t0, &flip, 2.0, grid(), &tol()).unwrap();
        assert!(!r.invariance_holds);
        assert!(!r.holds);
        let bad = real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            conjugation_orbit_check(&t0, &bad, 2.0, grid(), &tol()),
            Err(HarnackError::NotUnitary { .. })
        ));
    }
}
