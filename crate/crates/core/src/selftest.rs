//! Seeded invariant suites for every module. Each check draws its own
//! samples, records the extreme value of the tested quantity and passes when
//! that value respects the pinned bound. Output depends only on the seed.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{HarnackError, Result};
use crate::harnack::{check_domination, domination_constant, equivalence, DominationReport};
use crate::herglotz::{condition_i_check, condition_ii_check, herglotz_completion, AnalyticPolynomial};
use crate::kernel::{kernel_matrix, kernel_matrix_factored, sandwich_bound, middle_factor, resolvent, TorusGrid};
use crate::linalg::{
    c64, cis, eigenvalues, hermitian_eig, hermitian_skew, min_eigenvalue, null_space, op_norm, principal_angles,
    spectral_norm, spectral_radius, subspace_contained, subspaces_equal, CMat, ComplexMatrix, SubspaceBasis,
};
use crate::radii::{is_rho_contraction, numerical_radius_sweep, rho_radius, Verdict};
use crate::random::{
    gaussian_matrix, random_hermitian, random_in_disk, random_matrix, random_polynomial, random_rho_contraction,
    random_unit_vector, random_unitary, seeded, SeededRng,
};
use crate::repro::{jordan, orbit_member, N3};
use crate::spectral::{gamma_set, numerical_range_torus, stability_check, unimodular_decomposition};

pub const SUITES: [&str; 6] = ["linalg", "kernel", "radii", "spectral", "harnack", "herglotz"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    /// Extreme value of the checked quantity over all samples.
    pub worst: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub module: String,
    pub passed: bool,
    pub checks: Vec<InvariantCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub grid_points: usize,
    pub passed: bool,
    pub suites: Vec<SuiteOutcome>,
}

struct Suite {
    module: &'static str,
    checks: Vec<InvariantCheck>,
}

impl Suite {
    fn new(module: &'static str) -> Self {
        Self {
            module,
            checks: Vec::new(),
        }
    }

    /// Passes when `worst <= bound`.
    fn at_most(&mut self, name: &str, samples: usize, worst: f64, bound: f64) {
        self.push(name, samples, worst, bound, worst <= bound);
    }

    /// Passes when `worst >= bound`.
    fn at_least(&mut self, name: &str, samples: usize, worst: f64, bound: f64) {
        self.push(name, samples, worst, bound, worst >= bound);
    }

    fn push(&mut self, name: &str, samples: usize, worst: f64, bound: f64, passed: bool) {
        self.checks.push(InvariantCheck {
            name: name.into(),
            passed: passed && samples > 0,
            samples,
            worst,
            bound,
        });
    }

    fn finish(self) -> SuiteOutcome {
        SuiteOutcome {
            module: self.module.into(),
            passed: self.checks.iter().all(|c| c.passed),
            checks: self.checks,
        }
    }
}

fn suite_rng(seed: u64, module: &str) -> SeededRng {
    let salt = SUITES.iter().position(|m| *m == module).unwrap_or(SUITES.len()) as u64;
    seeded(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
}

fn dim(rng: &mut SeededRng, lo: usize, hi: usize) -> usize {
    rng.random_range(lo..=hi)
}

/// `V (diag(units) (+) rest) V*` with a random unitary `V`.
fn with_unitary_part(rng: &mut SeededRng, units: &[Complex64], rest: &CMat) -> ComplexMatrix {
    let k = units.len();
    let n = k + rest.nrows();
    let mut block = CMat::zeros(n, n);
    for (i, &u) in units.iter().enumerate() {
        block[(i, i)] = u;
    }
    block.view_mut((k, k), (rest.nrows(), rest.nrows())).copy_from(rest);
    let v = random_unitary(rng, n);
    ComplexMatrix::from_dmatrix(v.as_matrix() * block * v.as_matrix().adjoint()).expect("finite")
}

fn random_phase(rng: &mut SeededRng) -> Complex64 {
    cis(rng.random::<f64>() * 2.0 * PI)
}

/// Matrix with operator norm `target`.
fn with_norm(rng: &mut SeededRng, n: usize, target: f64) -> CMat {
    let g = gaussian_matrix(rng, n);
    let s = op_norm(&g);
    g * c64(target / s, 0.0)
}

fn linalg_suite(seed: u64) -> Result<SuiteOutcome> {
    let mut rng = suite_rng(seed, "linalg");
    let mut suite = Suite::new("linalg");

    let mut worst = 0.0f64;
    for k in 0..20 {
        let a = random_hermitian(&mut rng, 2 + k % 7);
        let eig = hermitian_eig(&a)?;
        worst = worst.max(op_norm(&(eig.reconstruct() - &a)) / (1.0 + op_norm(&a)));
    }
    suite.at_most("eigen reconstruction residual / (1 + ||A||)", 20, worst, 1e-10);

    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let n = dim(&mut rng, 2, 8);
        let t = random_matrix(&mut rng, n);
        worst = worst.min(spectral_norm(&t) - spectral_radius(&t));
    }
    suite.at_least("spectral norm minus spectral radius", 20, worst, -1e-12);

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = dim(&mut rng, 2, 8);
        let k1 = dim(&mut rng, 1, n);
        let k2 = dim(&mut rng, 1, n);
        let u = SubspaceBasis::orthonormalize(gaussian_matrix(&mut rng, n).columns(0, k1).into_owned());
        let w = SubspaceBasis::orthonormalize(gaussian_matrix(&mut rng, n).columns(0, k2).into_owned());
        let a = principal_angles(&u, &w)?;
        let b = principal_angles(&w, &u)?;
        let gap = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        worst = worst.max(if a.len() == b.len() { gap } else { f64::INFINITY });
    }
    suite.at_most("principal angle asymmetry", 20, worst, 1e-12);
    Ok(suite.finish())
}

fn kernel_suite(seed: u64, grid: TorusGrid, tol: &Tolerances) -> Result<SuiteOutcome> {
    let mut rng = suite_rng(seed, "kernel");
    let mut suite = Suite::new("kernel");

    let (mut skew, mut path, mut origin, mut shift) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let n = dim(&mut rng, 2, 6);
        let t = with_norm(&mut rng, n, 0.95);
        let rho = 1.0 + 3.0 * rng.random::<f64>();
        let z = random_in_disk(&mut rng, 1.0);
        let k = kernel_matrix(&t, rho, z, tol)?;
        let scale = 1.0 + op_norm(&k);
        let x = resolvent(&t, z, tol)?;
        let raw = x.adjoint() * middle_factor(&t, rho, z) * &x;
        skew = skew.max(hermitian_skew(&k).max(hermitian_skew(&raw)) / scale);
        path = path.max(op_norm(&(kernel_matrix_factored(&t, rho, z, tol)? - &k)) / scale);
        let k0 = kernel_matrix(&t, rho, c64(0.0, 0.0), tol)?;
        origin = origin.max(op_norm(&(k0 - CMat::identity(n, n) * c64(rho, 0.0))));
        let step = 2.0 * rng.random::<f64>();
        let k2 = kernel_matrix(&t, rho + step, z, tol)?;
        shift = shift.max(op_norm(&(k2 - &k - CMat::identity(n, n) * c64(step, 0.0))) / scale);
    }
    suite.at_most("Hermitian skew of resolvent and factored kernels", 200, skew, 1e-9);
    suite.at_most("resolvent vs factored kernel", 200, path, 1e-9);
    suite.at_most("K at the origin minus rho I", 200, origin, 1e-12);
    suite.at_most("rho-shift identity residual", 200, shift, 1e-9);

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = dim(&mut rng, 2, 5);
        let t = with_norm(&mut rng, n, 0.9);
        let rho = 1.0 + 3.0 * rng.random::<f64>();
        let s = 0.05 + 0.4 * rng.random::<f64>();
        let z0 = random_in_disk(&mut rng, 0.95 - s);
        let x = random_unit_vector(&mut rng, n);
        let quad = |z: Complex64| -> Result<f64> {
            let k = kernel_matrix(&t, rho, z, tol)?;
            Ok((x.adjoint() * k * &x)[(0, 0)].re)
        };
        let mut mean = 0.0;
        for j in 0..1024 {
            mean += quad(z0 + cis(2.0 * PI * j as f64 / 1024.0) * s)?;
        }
        worst = worst.max((mean / 1024.0 - quad(z0)?).abs());
    }
    suite.at_most("harmonic mean-value defect", 20, worst, 1e-6);

    let mut worst = f64::INFINITY;
    let mut members = 0;
    for _ in 0..4 {
        let n = dim(&mut rng, 2, 4);
        let rho = 1.0 + 2.0 * rng.random::<f64>();
        let target = 0.999 - 0.05 * rng.random::<f64>();
        let t = random_rho_contraction(&mut rng, n, rho, target, grid, tol)?;
        if is_rho_contraction(&t, rho, grid, tol)?.verdict != Verdict::Yes {
            continue;
        }
        members += 1;
        for _ in 0..100 {
            let z = random_in_disk(&mut rng, 1.0);
            worst = worst.min(min_eigenvalue(&kernel_matrix(t.as_matrix(), rho, z, tol)?));
        }
    }
    suite.at_least("interior kernel minimum after a certified circle", members * 100, worst, -1e-8);

    let mut worst = f64::NEG_INFINITY;
    let t = random_rho_contraction(&mut rng, 3, 2.0, 0.999, grid, tol)?;
    for _ in 0..100 {
        let z = random_in_disk(&mut rng, 0.99);
        let lambda = random_in_disk(&mut rng, 1.0);
        let b = sandwich_bound(&t, 2.0, z, lambda, tol)?;
        worst = worst.max(b.actual - b.bound);
    }
    suite.at_most("sandwich norm minus its bound", 100, worst, 0.0);
    Ok(suite.finish())
}

fn radii_suite(seed: u64, grid: TorusGrid, tol: &Tolerances) -> Result<SuiteOutcome> {
    let mut rng = suite_rng(seed, "radii");
    let mut suite = Suite::new("radii");

    let (mut w1, mut w2, mut flips) = (0.0f64, 0.0f64, true);
    for _ in 0..8 {
        let n = dim(&mut rng, 2, 6);
        let t = random_matrix(&mut rng, n);
        for (rho, oracle) in [(1.0, spectral_norm(&t)), (2.0, numerical_radius_sweep(&t, 8192)?)] {
            let w = rho_radius(&t, rho, grid, tol)?.value;
            let gap = (w - oracle).abs();
            if rho == 1.0 {
                w1 = w1.max(gap);
            } else {
                w2 = w2.max(gap);
            }
            let verdict = |s: f64| -> Result<Verdict> {
                Ok(is_rho_contraction(&t.scaled(c64(1.0 / (w * s), 0.0)), rho, grid, tol)?.verdict)
            };
            flips &= verdict(1.0 + 1e-5)? == Verdict::Yes && verdict(1.0 - 1e-5)? == Verdict::No;
        }
    }
    suite.at_most("w_1 vs spectral norm", 8, w1, 1e-5);
    suite.at_most("w_2 vs swept numerical radius", 8, w2, 1e-5);
    suite.push(
        "membership flips at the computed radius",
        16,
        if flips { 0.0 } else { 1.0 },
        0.0,
        flips,
    );

    let rhos = [1.0, 1.5, 2.0, 3.0, 5.0];
    let (mut mono, mut lower) = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..4 {
        let n = dim(&mut rng, 2, 5);
        let t = random_matrix(&mut rng, n);
        let r = spectral_radius(&t);
        let mut prev = f64::INFINITY;
        for rho in rhos {
            let w = rho_radius(&t, rho, grid, tol)?.value;
            mono = mono.max(w - prev);
            lower = lower.min(w - r);
            prev = w;
        }
    }
    suite.at_most("w_rho increase along increasing rho", 4 * rhos.len(), mono, 1e-6);
    suite.at_least("w_rho minus spectral radius", 4 * rhos.len(), lower, -1e-6);

    let mut worst = f64::NEG_INFINITY;
    let mut members = 0;
    for _ in 0..6 {
        let n = dim(&mut rng, 2, 5);
        let rho = 1.0 + 3.0 * rng.random::<f64>();
        let t = random_rho_contraction(&mut rng, n, rho, 0.9999, grid, tol)?;
        if is_rho_contraction(&t, rho, grid, tol)?.verdict != Verdict::Yes {
            continue;
        }
        members += 1;
        let mut power = t.as_matrix().clone();
        for _ in 0..32 {
            worst = worst.max(op_norm(&power) / rho - 1.0);
            power = &power * t.as_matrix();
        }
    }
    suite.at_most("||T^n|| / rho - 1 for members", members * 32, worst, 1e-6);
    Ok(suite.finish())
}

fn spectral_suite(seed: u64, grid: TorusGrid, tol: &Tolerances) -> Result<SuiteOutcome> {
    let mut rng = suite_rng(seed, "spectral");
    let mut suite = Suite::new("spectral");

    let (mut orth, mut recon, mut members) = (f64::INFINITY, 0.0f64, 0);
    for _ in 0..8 {
        let l1 = random_phase(&mut rng);
        let l2 = random_phase(&mut rng);
        let m = dim(&mut rng, 1, 3);
        let rest = with_norm(&mut rng, m, 0.8);
        let t = with_unitary_part(&mut rng, &[l1, l1, l2], &rest);
        let rho = 1.0 + 2.0 * rng.random::<f64>();
        if is_rho_contraction(&t, rho, grid, tol)?.verdict != Verdict::Yes {
            continue;
        }
        members += 1;
        let dec = unimodular_decomposition(&t, tol)?;
        let spaces = &dec.gamma.eigenspaces;
        for i in 0..spaces.len() {
            for j in (i + 1)..spaces.len() {
                for a in principal_angles(&spaces[i], &spaces[j])? {
                    orth = orth.min(a);
                }
            }
        }
        recon = recon.max(op_norm(&(dec.reassemble() - t.as_matrix())) / (1.0 + op_norm(t.as_matrix())));
    }
    suite.at_least("smallest angle between unimodular eigenspaces", members, orth, PI / 2.0 - 1e-6);
    suite.at_most("reassembly residual / (1 + ||T||)", members, recon, 1e-8);

    let n_angles = 4096;
    let resolution = 2.0 * PI / n_angles as f64;
    let mut worst = 0.0f64;
    let mut samples = 0;
    for k in 0..6 {
        let t = if k == 5 {
            jordan(4)
        } else {
            let units: Vec<Complex64> = (0..dim(&mut rng, 1, 3)).map(|_| random_phase(&mut rng)).collect();
            let rest = with_norm(&mut rng, 2, 0.9);
            with_unitary_part(&mut rng, &units, &rest)
        };
        if is_rho_contraction(&t, 1.0, grid, tol)?.verdict != Verdict::Yes {
            continue;
        }
        samples += 1;
        let on_torus = numerical_range_torus(&t, n_angles, tol.boundary_tol)?;
        worst = worst.max(hausdorff(&on_torus, &gamma_set(&t, tol)?.gamma));
    }
    suite.at_most("circle part of W(T) vs unimodular spectrum for contractions", samples, worst, resolution);
    Ok(suite.finish())
}

/// Hausdorff distance between finite point sets; infinite when exactly one is empty.
fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Unimodular eigenvalues and eigenspaces from the general eigen-solver and
/// an SVD null space, independent of the clustering in the spectral module.
fn unimodular_kernels(t: &CMat, tol: &Tolerances) -> Vec<(Complex64, SubspaceBasis)> {
    let n = t.nrows();
    let mut out: Vec<(Complex64, SubspaceBasis)> = Vec::new();
    for lambda in eigenvalues(t) {
        if (lambda.norm() - 1.0).abs() > 1e3 * tol.unimodular_tol {
            continue;
        }
        if out.iter().any(|(mu, _)| (mu - lambda).norm() < 1e-6) {
            continue;
        }
        let shifted = t - CMat::identity(n, n) * lambda;
        out.push((lambda, null_space(&shifted, 1e-6 * (1.0 + op_norm(t)))));
    }
    out
}

/// Pairs sharing a unitary part, with `T1` sometimes dropping or adding an
/// eigenvalue, so that both dominated and obstructed cases occur.
fn domination_pairs(rng: &mut SeededRng, count: usize) -> Vec<(ComplexMatrix, ComplexMatrix)> {
    (0..count)
        .map(|k| {
            let l1 = random_phase(rng);
            let l2 = random_phase(rng);
            let a = with_norm(rng, 2, 0.7);
            let b = with_norm(rng, 2, 0.5);
            let v = random_unitary(rng, 4);
            let build = |units: [Complex64; 2], rest: &CMat| {
                let mut m = CMat::zeros(4, 4);
                m[(0, 0)] = units[0];
                m[(1, 1)] = units[1];
                m.view_mut((2, 2), (2, 2)).copy_from(rest);
                ComplexMatrix::from_dmatrix(v.as_matrix() * m * v.as_matrix().adjoint()).expect("finite")
            };
            let t0 = build([l1, l2], &a);
            let t1 = match k % 3 {
                0 => build([l1, l2], &b),
                1 => build([l1, c64(0.3, 0.0)], &b),
                _ => build([l1, -l2], &b),
            };
            (t1, t0)
        })
        .collect()
}

fn harnack_suite(seed: u64, grid: TorusGrid, tol: &Tolerances) -> Result<SuiteOutcome> {
    let mut rng = suite_rng(seed, "harnack");
    let mut suite = Suite::new("harnack");

    let strict = |rng: &mut SeededRng, n: usize, rho: f64, target: f64| {
        random_rho_contraction(rng, n, rho, target, grid, tol)
    };
    let constant = |r: &DominationReport| r.c.filter(|_| r.dominated);

    let mut worst = 0.0f64;
    for _ in 0..4 {
        let n = dim(&mut rng, 2, 4);
        let rho = 1.0 + 2.0 * rng.random::<f64>();
        let t = strict(&mut rng, n, rho, 0.9)?;
        let c = constant(&domination_constant(&t, &t, rho, grid, tol, false)?).unwrap_or(f64::INFINITY);
        worst = worst.max((c - 1.0).abs());
    }
    suite.at_most("|c(T, T) - 1|", 4, worst, 1e-9);

    let (mut submult, mut chains) = (f64::NEG_INFINITY, 0);
    let (mut mono, mut mono_samples) = (true, 0);
    for _ in 0..3 {
        let n = dim(&mut rng, 2, 3);
        let rho = 1.0 + rng.random::<f64>();
        let t2 = strict(&mut rng, n, rho, 0.6)?;
        let t1 = strict(&mut rng, n, rho, 0.8)?;
        let t0 = strict(&mut rng, n, rho, 0.9)?;
        let c = |a: &ComplexMatrix, b: &ComplexMatrix| -> Result<Option<f64>> {
            Ok(constant(&domination_constant(a, b, rho, grid, tol, false)?))
        };
        if let (Some(c20), Some(c21), Some(c10)) = (c(&t2, &t0)?, c(&t2, &t1)?, c(&t1, &t0)?) {
            chains += 1;
            submult = submult.max(c20 / (c21 * c10) - 1.0);
            for rho2 in [rho + 0.5, rho + 2.0] {
                mono_samples += 1;
                mono &= check_domination(&t1, &t0, rho2, c10, grid, tol, false)?.holds;
            }
        }
    }
    suite.at_most("c(T2,T0) / (c(T2,T1) c(T1,T0)) - 1", chains, submult, 1e-6);
    suite.push(
        "domination persists for larger rho at the same constant",
        mono_samples,
        if mono { 0.0 } else { 1.0 },
        0.0,
        mono,
    );

    let (mut inclusion, mut dominated, mut stable_ok) = (true, 0, true);
    for (t1, t0) in domination_pairs(&mut rng, 6) {
        let rho = 1.0 + rng.random::<f64>();
        let report = domination_constant(&t1, &t0, rho, grid, tol, false)?;
        if !report.dominated {
            continue;
        }
        dominated += 1;
        let k1 = unimodular_kernels(t1.as_matrix(), tol);
        let k0 = unimodular_kernels(t0.as_matrix(), tol);
        for (lambda, space) in &k1 {
            match k0.iter().find(|(mu, _)| (mu - lambda).norm() < 1e-6) {
                Some((_, outer)) => inclusion &= subspace_contained(space, outer, 1e-6)?,
                None => inclusion = false,
            }
        }
        stable_ok &= !stability_check(&t0) || stability_check(&t1);
    }
    for _ in 0..3 {
        let n = dim(&mut rng, 2, 3);
        let rho = 1.0 + rng.random::<f64>();
        let t1 = strict(&mut rng, n, rho, 0.7)?;
        let t0 = strict(&mut rng, n, rho, 0.95)?;
        if domination_constant(&t1, &t0, rho, grid, tol, false)?.dominated {
            dominated += 1;
            stable_ok &= !stability_check(&t0) || stability_check(&t1);
        }
    }
    suite.push(
        "domination implies unimodular spectrum and eigenspace inclusion",
        dominated,
        if inclusion { 0.0 } else { 1.0 },
        0.0,
        inclusion,
    );
    suite.push(
        "domination transfers stability",
        dominated,
        if stable_ok { 0.0 } else { 1.0 },
        0.0,
        stable_ok,
    );

    let n3 = crate::linalg::io::from_json_str(N3)?;
    let mut pairs: Vec<(ComplexMatrix, ComplexMatrix, f64)> = Vec::new();
    for _ in 0..2 {
        let theta = rng.random::<f64>() * 2.0 * PI;
        pairs.push((n3.clone(), orbit_member(n3.get(0, 1), theta), 2.0));
    }
    for _ in 0..2 {
        let units = [random_phase(&mut rng)];
        let v = random_unitary(&mut rng, 3);
        let rho = 1.0 + rng.random::<f64>();
        let build = |rest: &CMat| {
            let mut m = CMat::zeros(3, 3);
            m[(0, 0)] = units[0];
            m.view_mut((1, 1), (2, 2)).copy_from(rest);
            ComplexMatrix::from_dmatrix(v.as_matrix() * m * v.as_matrix().adjoint()).expect("finite")
        };
        let a = with_norm(&mut rng, 2, 0.6);
        let b = with_norm(&mut rng, 2, 0.4);
        pairs.push((build(&a), build(&b), rho));
    }
    let (mut kernels_ok, mut range_gap, mut equivalent) = (true, 0.0f64, 0);
    for (t, s, rho) in &pairs {
        if !equivalence(t, s, *rho, grid, tol)?.equivalent {
            continue;
        }
        equivalent += 1;
        for _ in 0..64 {
            let z = random_in_disk(&mut rng, 1.0);
            let kt = null_space(&kernel_matrix(t.as_matrix(), *rho, z, tol)?, tol.rank_tol * 10.0);
            let ks = null_space(&kernel_matrix(s.as_matrix(), *rho, z, tol)?, tol.rank_tol * 10.0);
            kernels_ok &= subspaces_equal(&kt, &ks, tol.angle_tol)?;
        }
        if *rho <= 2.0 {
            let wt = numerical_range_torus(t, 4096, tol.boundary_tol)?;
            let ws = numerical_range_torus(s, 4096, tol.boundary_tol)?;
            range_gap = range_gap.max(hausdorff(&wt, &ws));
        }
    }
    suite.push(
        "equivalence implies equal interior kernels",
        equivalent,
        if kernels_ok && equivalent == pairs.len() { 0.0 } else { 1.0 },
        0.0,
        kernels_ok && equivalent == pairs.len(),
    );
    suite.at_most("circle parts of the numerical ranges of equivalent pairs", equivalent, range_gap, 4.0 * PI / 4096.0);

    let mut maximal = true;
    for _ in 0..20 {
        let n = dim(&mut rng, 2, 4);
        let rho = 1.0 + 2.0 * rng.random::<f64>();
        let t = strict(&mut rng, n, rho, 0.9)?;
        let r = domination_constant(&ComplexMatrix::identity(n), &t, rho, grid, tol, false)?;
        maximal &= !r.dominated;
    }
    suite.push("the identity dominates nothing else", 20, if maximal { 0.0 } else { 1.0 }, 0.0, maximal);

    let mut normal_ok = true;
    for k in 0..4 {
        let rho = 1.0 + rng.random::<f64>();
        let units = [random_phase(&mut rng), random_phase(&mut rng)];
        let strict_eigs = [random_in_disk(&mut rng, 0.5), random_in_disk(&mut rng, 0.5)];
        let v = random_unitary(&mut rng, 4);
        let build = |rest: &CMat| {
            let mut m = CMat::zeros(4, 4);
            m[(0, 0)] = units[0];
            m[(1, 1)] = units[1];
            m.view_mut((2, 2), (2, 2)).copy_from(rest);
            ComplexMatrix::from_dmatrix(v.as_matrix() * m * v.as_matrix().adjoint()).expect("finite")
        };
        let t = build(&CMat::from_diagonal(&nalgebra::DVector::from_vec(strict_eigs.to_vec())));
        let (rest, expected) = if k % 2 == 0 {
            (with_norm(&mut rng, 2, 0.5), true)
        } else {
            let mut boundary = CMat::zeros(2, 2);
            boundary[(0, 1)] = c64(rho, 0.0);
            (boundary, false)
        };
        let s = build(&rest);
        let report = equivalence(&t, &s, rho, grid, tol)?;
        normal_ok &= report.equivalent == expected;
        if report.equivalent {
            let dec = unimodular_decomposition(&s, tol)?;
            let restricted = op_norm(&((s.as_matrix() - t.as_matrix()) * dec.e.projector()));
            let inner = dec.compression.as_ref().map_or(0.0, |c| rho_radius(c, rho, grid, tol).map_or(1.0, |r| r.value));
            normal_ok &= restricted < 1e-8 && inner < 1.0;
        }
    }
    suite.push(
        "equivalents of a normal matrix agree on its unimodular part",
        4,
        if normal_ok { 0.0 } else { 1.0 },
        0.0,
        normal_ok,
    );
    Ok(suite.finish())
}

fn herglotz_suite(seed: u64, grid: TorusGrid, tol: &Tolerances) -> Result<SuiteOutcome> {
    let mut rng = suite_rng(seed, "herglotz");
    let mut suite = Suite::new("herglotz");
    let polys: Vec<AnalyticPolynomial> = (0..20)
        .map(|_| {
            let d = dim(&mut rng, 0, 6);
            herglotz_completion(&random_polynomial(&mut rng, d))
        })
        .collect::<Result<_>>()?;

    let (mut worst_i, mut worst_ii, mut pairs) = (f64::INFINITY, f64::INFINITY, 0);
    for (t1, t0) in domination_pairs(&mut rng, 3) {
        let rho = 1.0 + rng.random::<f64>();
        let report = domination_constant(&t1, &t0, rho, grid, tol, false)?;
        let Some(c) = report.c.filter(|_| report.dominated) else {
            continue;
        };
        let c = c * 1.01;
        if !check_domination(&t1, &t0, rho, c, grid, tol, false)?.holds {
            continue;
        }
        pairs += 1;
        for p in &polys {
            let scale = 1.0 + p.coefficients().iter().map(|a| a.norm()).sum::<f64>();
            worst_i = worst_i.min(condition_i_check(&t1, &t0, rho, c, p, tol)?.margin / scale);
            for r in [0.5, 0.9, 0.99] {
                worst_ii = worst_ii.min(condition_ii_check(&t1, &t0, rho, c, p, r, tol)?.margin / scale);
            }
        }
    }
    suite.at_least("polynomial condition at the kernel constant", pairs * polys.len(), worst_i, -1e-9);
    suite.at_least("polynomial condition on r T1, r T0", pairs * polys.len() * 3, worst_ii, -1e-9);

    let mut worst = f64::INFINITY;
    for p in &polys {
        let boundary = (0..8192)
            .map(|k| p.eval(cis(2.0 * PI * k as f64 / 8192.0)).re)
            .fold(f64::INFINITY, f64::min);
        let interior = (0..512)
            .map(|_| p.eval(random_in_disk(&mut rng, 1.0)).re)
            .fold(f64::INFINITY, f64::min);
        worst = worst.min(interior - boundary);
    }
    suite.at_least("interior minimum of Re p minus boundary minimum", polys.len(), worst, -1e-8);
    Ok(suite.finish())
}

/// Runs one suite by module name.
pub fn run_suite(module: &str, seed: u64, grid: TorusGrid, tol: &Tolerances) -> Result<SuiteOutcome> {
    match module {
        "linalg" => linalg_suite(seed),
        "kernel" => kernel_suite(seed, grid, tol),
        "radii" => radii_suite(seed, grid, tol),
        "spectral" => spectral_suite(seed, grid, tol),
        "harnack" => harnack_suite(seed, grid, tol),
        "herglotz" => herglotz_suite(seed, grid, tol),
        other => Err(HarnackError::InvalidConfig(format!(
            "unknown suite `{other}`; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

/// Runs every suite in a fixed order.
pub fn run_selftest(seed: u64, grid: TorusGrid, tol: &Tolerances) -> Result<SelftestReport> {
    let suites = SUITES
        .iter()
        .map(|m| run_suite(m, seed, grid, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelftestReport {
        seed,
        grid_points: grid.n_points(),
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hausdorff_edge_cases() {
        assert_eq!(hausdorff(&[], &[]), 0.0);
        assert!(hausdorff(&[c64(1.0, 0.0)], &[]).is_infinite());
        assert!((hausdorff(&[c64(1.0, 0.0)], &[c64(0.0, 1.0), c64(1.0, 0.0)]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", 1, TorusGrid::default(), &Tolerances::default()).is_err());
    }

    #[test]
    fn linalg_suite_passes() {
        let s = run_suite("linalg", 1, TorusGrid::default(), &Tolerances::default()).unwrap();
        assert!(s.passed, "{s:?}");
    }
}
