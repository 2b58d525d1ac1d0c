//! Named reproductions of the worked examples: explicit matrices whose
//! Harnack parts, radii or domination constants are known in closed form.
//! Each one runs positive and negative probes and records every check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Tolerances;
use crate::error::{HarnackError, Result};
use crate::harnack::{check_domination, domination_constant, equivalence, equivalence_c1, EquivalenceReport};
use crate::kernel::{kernel_matrix, TorusGrid};
use crate::linalg::{cis, io, op_norm, CMat, ComplexMatrix};
use crate::radii::{is_rho_contraction, numerical_radius, numerical_radius_sweep, rho_radius, Verdict};
use crate::spectral::gamma_set;

pub const T0_2X2: &str = include_str!("../fixtures/t0_2x2.json");
pub const N3: &str = include_str!("../fixtures/n3.json");
pub const N3_THETA: &str = include_str!("../fixtures/n3_theta.json");
pub const IDENTITY2: &str = include_str!("../fixtures/identity2.json");
pub const J2: &str = include_str!("../fixtures/j2.json");

pub const NAMES: [&str; 5] = ["2x2-trivial", "nilpotent2", "3x3-orbit", "jordan", "remark-constants"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub label: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproductionOutcome {
    pub name: String,
    pub statement: String,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
}

impl ReproductionOutcome {
    fn new(name: &str, statement: &str) -> Self {
        Self {
            name: name.into(),
            statement: statement.into(),
            passed: true,
            checks: Vec::new(),
        }
    }

    fn record(&mut self, label: impl Into<String>, passed: bool, detail: Value) {
        self.passed &= passed;
        self.checks.push(CheckRecord {
            label: label.into(),
            passed,
            detail,
        });
    }
}

fn fixture(text: &str) -> ComplexMatrix {
    io::from_json_str(text).expect("embedded fixtures are valid")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Outcome of an equivalence probe that may also be refused by the class check.
fn probe_equivalence(
    t: &ComplexMatrix,
    s: &ComplexMatrix,
    rho: f64,
    grid: TorusGrid,
    tol: &Tolerances,
) -> Result<(bool, Value)> {
    match equivalence(t, s, rho, grid, tol) {
        Ok(r) => Ok((r.equivalent, summarize(&r))),
        Err(e @ HarnackError::ClassViolation { .. }) => Ok((false, json!({ "error": e.code(), "message": e.to_string() }))),
        Err(e) => Err(e),
    }
}

fn summarize(r: &EquivalenceReport) -> Value {
    json!({
        "equivalent": r.equivalent,
        "failure_reason": r.failure_reason,
        "failure_detail": r.failure_detail,
        "alpha": r.alpha,
        "beta": r.beta,
        "class_inconclusive": r.class_inconclusive,
    })
}

/// `[[0, 2], [0, 0]]` in `C_2`: its Harnack part is a single point.
pub fn repro_2x2_trivial(grid: TorusGrid, tol: &Tolerances) -> Result<ReproductionOutcome> {
    let mut out = ReproductionOutcome::new(
        "2x2-trivial",
        "the Harnack part of [[0,2],[0,0]] in C_2 is reduced to the matrix itself",
    );
    let t0 = fixture(T0_2X2);
    let w2 = rho_radius(&t0, 2.0, grid, tol)?.value;
    out.record("w_2(T0) = 1", (w2 - 1.0).abs() <= 1e-5, json!({ "w2": w2 }));

    let mut worst = f64::INFINITY;
    let mut count = 0;
    for i in 0..16 {
        let modulus = 0.05 + 0.95 * i as f64 / 15.0;
        for j in 0..8 {
            let b = Complex64::from_polar(modulus, 2.0 * PI * j as f64 / 8.0);
            let t = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(2.0, 0.0)], vec![b, c(0.0, 0.0)]])?;
            worst = worst.min(numerical_radius_sweep(&t, 1024)? - 1.0);
            count += 1;
        }
    }
    out.record(
        "every perturbation [[0,2],[b,0]] leaves the unit numerical radius ball",
        worst > 1e-6,
        json!({ "probes": count, "min_excess": worst }),
    );

    let half = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(2.0, 0.0)], vec![c(0.5, 0.0), c(0.0, 0.0)]])?;
    let w_half = numerical_radius(&half);
    let member = is_rho_contraction(&half, 2.0, grid, tol)?;
    out.record(
        "b = 0.5 gives w = 1.25 and leaves C_2",
        (w_half - 1.25).abs() < 1e-9 && member.verdict == Verdict::No,
        json!({ "w": w_half, "verdict": member.verdict }),
    );

    let mut residual = 0.0f64;
    for k in 0..16 {
        let z = cis(2.0 * PI * k as f64 / 16.0);
        let kz = kernel_matrix(t0.as_matrix(), 2.0, z, tol)?;
        let v = nalgebra::DVector::from_vec(vec![c(1.0, 0.0), -z]);
        residual = residual.max((kz * v).norm());
    }
    out.record(
        "v(z) = (1, -z) annihilates the kernel on the circle",
        residual < 1e-12,
        json!({ "max_residual": residual }),
    );

    let (eq, detail) = probe_equivalence(&t0, &t0, 2.0, grid, tol)?;
    out.record("T0 is equivalent to itself", eq, detail);
    Ok(out)
}

/// `[[0, 0, a], [0, B, 0], [0, 0, 0]]` in block form, `B` of size `n - 2`.
pub fn nilpotent_block(a: Complex64, b: &CMat) -> Result<ComplexMatrix> {
    let m = b.nrows();
    if b.ncols() != m {
        return Err(HarnackError::BadShape("B must be square".into()));
    }
    let n = m + 2;
    let mut t = CMat::zeros(n, n);
    t[(0, n - 1)] = a;
    t.view_mut((1, 1), (m, m)).copy_from(b);
    ComplexMatrix::from_dmatrix(t)
}

/// Harnack part of the rank-one nilpotent with corner `a`, `|a| = 2`, in
/// `C_2(C^n)`: all block matrices with a middle block `B` of numerical radius < 1.
pub fn repro_nilpotent_order2(
    n: usize,
    a: Complex64,
    blocks: &[ComplexMatrix],
    grid: TorusGrid,
    tol: &Tolerances,
) -> Result<ReproductionOutcome> {
    if n < 3 {
        return Err(HarnackError::BadShape(format!("n must be at least 3, got {n}")));
    }
    if (a.norm() - 2.0).abs() > 1e-12 {
        return Err(HarnackError::PreconditionFailed(format!("|a| must be 2, got {}", a.norm())));
    }
    let mut out = ReproductionOutcome::new(
        "nilpotent2",
        "the Harnack part of the corner nilpotent with |a| = 2 in C_2 consists of the block matrices with w(B) < 1",
    );
    let zero = CMat::zeros(n - 2, n - 2);
    let nmat = nilpotent_block(a, &zero)?;
    let mut probes: Vec<ComplexMatrix> = blocks.to_vec();
    let mut boundary = CMat::zeros(n - 2, n - 2);
    boundary[(0, 0)] = c(1.0, 0.0);
    probes.push(ComplexMatrix::from_dmatrix(boundary)?);
    for b in &probes {
        if b.dim() != n - 2 {
            return Err(HarnackError::BadShape(format!(
                "B must be {}x{}, got {}x{}",
                n - 2,
                n - 2,
                b.dim(),
                b.dim()
            )));
        }
        let w = numerical_radius_sweep(b, 4096)?;
        let expected = w < 1.0 - 1e-6;
        let t = nilpotent_block(a, b.as_matrix())?;
        let (eq, detail) = probe_equivalence(&nmat, &t, 2.0, grid, tol)?;
        out.record(
            format!("w(B) = {w:.6}: equivalent iff w(B) < 1"),
            eq == expected,
            json!({ "w_B": w, "expected": expected, "report": detail }),
        );
    }
    Ok(out)
}

/// The 3x3 nilpotent with superdiagonal `a`, `|a| = sqrt 2`, conjugated by
/// `U_theta = diag(e^{i theta}, 1, e^{i theta})`.
pub fn orbit_member(a: Complex64, theta: f64) -> ComplexMatrix {
    shifted_nilpotent(a * cis(-theta), c(0.0, 0.0), a * cis(theta))
}

/// `[[0, u, 0], [0, v, w], [0, 0, 0]]`.
pub fn shifted_nilpotent(u: Complex64, v: Complex64, w: Complex64) -> ComplexMatrix {
    let z = c(0.0, 0.0);
    ComplexMatrix::from_rows(&[vec![z, u, z], vec![z, v, w], vec![z, z, z]]).expect("3x3 finite")
}

pub fn orbit_unitary(theta: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[cis(theta), c(1.0, 0.0), cis(theta)]).expect("finite")
}

/// Harnack part of the 3x3 nilpotent with `|a| = sqrt 2`: exactly the orbit
/// `U_theta* N U_theta`.
pub fn repro_3x3_orbit(thetas: &[f64], grid: TorusGrid, tol: &Tolerances) -> Result<ReproductionOutcome> {
    let mut out = ReproductionOutcome::new(
        "3x3-orbit",
        "the Harnack part of the 3x3 nilpotent with superdiagonal sqrt 2 in C_2 is the diagonal unitary orbit",
    );
    let n3 = fixture(N3);
    let a = n3.get(0, 1);
    for &theta in thetas {
        let t = orbit_member(a, theta);
        let via_unitary = n3.conjugated_by(&orbit_unitary(theta))?;
        let drift = op_norm(&(t.as_matrix() - via_unitary.as_matrix()));
        let (eq, detail) = probe_equivalence(&n3, &t, 2.0, grid, tol)?;
        out.record(
            format!("theta = {theta:.4}: orbit member is equivalent"),
            eq && drift < 1e-12,
            json!({ "theta": theta, "matches_conjugation": drift, "report": detail }),
        );
    }
    for probe in non_orbit_probes(a) {
        let (eq, detail) = probe_equivalence(&n3, &probe.1, 2.0, grid, tol)?;
        let structured = detail.get("failure_reason").is_some_and(|r| !r.is_null()) || detail.get("error").is_some();
        out.record(
            format!("{}: rejected", probe.0),
            !eq && structured,
            json!({ "report": detail }),
        );
    }
    Ok(out)
}

/// Eight matrices outside the orbit: mismatched phases (`u w != a^2`) and
/// nonzero central entries.
pub fn non_orbit_probes(a: Complex64) -> Vec<(String, ComplexMatrix)> {
    let mut probes = Vec::new();
    for (theta, phi) in [(0.0, PI / 2.0), (0.3, 1.2), (PI / 3.0, -PI / 3.0), (1.0, PI)] {
        probes.push((
            format!("u = a e^(-i {theta:.3}), w = a e^(i {phi:.3})"),
            shifted_nilpotent(a * cis(-theta), c(0.0, 0.0), a * cis(phi)),
        ));
    }
    for v in [c(0.1, 0.0), c(0.0, 0.3)] {
        probes.push((format!("v = {v}"), shifted_nilpotent(a, v, a)));
    }
    for v in [c(0.1, 0.0), c(-0.2, 0.2)] {
        let raw = shifted_nilpotent(a, v, a);
        let w = numerical_radius(&raw);
        probes.push((
            format!("v = {v}, rescaled to w = 1"),
            raw.scaled(c(1.0 / w, 0.0)),
        ));
    }
    probes
}

pub fn jordan(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |i, j| if j == i + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) }).expect("finite")
}

/// `J_n` with `z` in the bottom-left corner.
pub fn jordan_corner(n: usize, z: Complex64) -> ComplexMatrix {
    let mut m = jordan(n).into_matrix();
    m[(n - 1, 0)] += z;
    ComplexMatrix::from_dmatrix(m).expect("finite")
}

/// Contractions off the corner pattern: one extra entry away from `(n, 1)`,
/// rescaled into the unit ball when needed.
pub fn off_corner_probes(n: usize) -> Vec<ComplexMatrix> {
    let spots: [(usize, usize, Complex64); 4] = [
        (0, 0, c(0.3, 0.0)),
        (n - 1, n - 1, c(0.0, 0.4)),
        if n > 2 { (n - 1, n - 2, c(0.25, 0.25)) } else { (1, 1, c(-0.25, 0.25)) },
        (0, n - 1, c(-0.2, 0.1)),
    ];
    spots
        .iter()
        .map(|&(i, j, v)| {
            let mut m = jordan(n).into_matrix();
            m[(i, j)] += v;
            let norm = op_norm(&m);
            if norm > 1.0 {
                m /= c(norm, 0.0);
            }
            ComplexMatrix::from_dmatrix(m).expect("finite")
        })
        .collect()
}

/// Harnack part of `J_n` among contractions: the corner perturbations with
/// `|z| < 1`.
pub fn repro_jordan_part(n: usize, z_samples: &[Complex64], tol: &Tolerances) -> Result<ReproductionOutcome> {
    if n < 2 {
        return Err(HarnackError::BadShape(format!("n must be at least 2, got {n}")));
    }
    let mut out = ReproductionOutcome::new(
        "jordan",
        "the Harnack part of the Jordan block among contractions is the set of corner perturbations with |z| < 1",
    );
    let j = jordan(n);
    for &z in z_samples {
        let m = jordan_corner(n, z);
        let expected = z.norm() < 1.0;
        let outcome = equivalence_c1(&j, &m, tol);
        let (eq, detail) = match outcome {
            Ok(r) => (r.equivalent, summarize(&r)),
            Err(e @ HarnackError::ClassViolation { .. }) => (false, json!({ "error": e.code() })),
            Err(e) => return Err(e),
        };
        out.record(
            format!("n = {n}, |z| = {:.3}", z.norm()),
            eq == expected,
            json!({ "z": [z.re, z.im], "expected": expected, "report": detail }),
        );
    }
    for (k, probe) in off_corner_probes(n).iter().enumerate() {
        let r = equivalence_c1(&j, probe, tol)?;
        out.record(
            format!("n = {n}, off-corner probe {k} rejected"),
            !r.equivalent && r.failure_reason.is_some(),
            summarize(&r),
        );
    }
    Ok(out)
}

/// Default corner samples: `z = 0`, interior points up to `|z| = 0.95`, and
/// one point on the circle.
pub fn default_jordan_samples() -> Vec<Complex64> {
    let mut zs = vec![c(0.0, 0.0), Complex64::from_polar(0.5, PI / 7.0)];
    for k in 0..10 {
        let r = 0.1 + 0.85 * k as f64 / 9.0;
        zs.push(Complex64::from_polar(r, 0.7 + 2.0 * PI * k as f64 / 10.0));
    }
    zs.push(cis(0.0));
    zs
}

/// `0 < I` with constant `sqrt(rho / (rho - 1))` and `[[0, rho], [0, 0]] < I`
/// with constant `sqrt(2 rho / (rho - 1))`.
pub fn repro_remark_constants(rhos: &[f64], grid: TorusGrid, tol: &Tolerances) -> Result<ReproductionOutcome> {
    if let Some(&bad) = rhos.iter().find(|&&r| !(r > 1.0 && r.is_finite())) {
        return Err(HarnackError::UnsupportedRho(bad));
    }
    let mut out = ReproductionOutcome::new(
        "remark-constants",
        "explicit domination constants below the identity, with a strict inclusion of unimodular spectra",
    );
    let id = fixture(IDENTITY2);
    let zero = ComplexMatrix::zeros(2);
    for &rho in rhos {
        let expected = (rho / (rho - 1.0)).sqrt();
        let check = check_domination(&zero, &id, rho, expected, grid, tol, false)?;
        out.record(
            format!("rho = {rho}: 0 < I holds at c = sqrt(rho/(rho-1))"),
            check.holds,
            json!({ "c": expected, "margin": check.worst_margin }),
        );
        let report = domination_constant(&zero, &id, rho, grid, tol, false)?;
        let found = report.c.unwrap_or(f64::INFINITY);
        out.record(
            format!("rho = {rho}: minimal constant for 0 < I"),
            report.dominated && (found - expected).abs() <= 1e-3,
            json!({ "c": found, "expected": expected }),
        );
        let t1 = ComplexMatrix::from_real_rows(&[&[0.0, rho], &[0.0, 0.0]])?;
        let bound = (2.0 * rho / (rho - 1.0)).sqrt();
        let check = check_domination(&t1, &id, rho, bound, grid, tol, false)?;
        out.record(
            format!("rho = {rho}: [[0,rho],[0,0]] < I holds at c = sqrt(2 rho/(rho-1))"),
            check.holds,
            json!({ "c": bound, "margin": check.worst_margin }),
        );
    }
    let g1 = gamma_set(&zero, tol)?;
    let g0 = gamma_set(&id, tol)?;
    out.record(
        "unimodular point spectrum of the dominated operator is strictly smaller",
        g1.gamma.is_empty() && g0.gamma.len() == 1,
        json!({ "dominated": g1.gamma.len(), "dominating": g0.gamma.len() }),
    );
    Ok(out)
}

pub const DEFAULT_RHOS: [f64; 4] = [1.25, 1.5, 2.0, 4.0];

pub fn default_orbit_angles() -> Vec<f64> {
    (0..16).map(|k| 2.0 * PI * k as f64 / 16.0).collect()
}

pub fn default_blocks(n: usize) -> Vec<ComplexMatrix> {
    let m = n - 2;
    let diag = |vals: &[f64]| {
        ComplexMatrix::diagonal(&vals.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>()).expect("finite")
    };
    let mut blocks = vec![ComplexMatrix::zeros(m)];
    let mut vals = vec![0.3, -0.2, 0.1];
    vals.truncate(m);
    vals.resize(m, 0.0);
    blocks.push(diag(&vals));
    blocks
}

/// Runs one named reproduction with its default parameters.
pub fn run_named(name: &str, grid: TorusGrid, tol: &Tolerances) -> Result<Vec<ReproductionOutcome>> {
    let one = |name: &str| -> Result<Vec<ReproductionOutcome>> {
        Ok(match name {
            "2x2-trivial" => vec![repro_2x2_trivial(grid, tol)?],
            "nilpotent2" => [3usize, 4]
                .iter()
                .map(|&n| repro_nilpotent_order2(n, c(2.0, 0.0), &default_blocks(n), grid, tol))
                .collect::<Result<_>>()?,
            "3x3-orbit" => vec![repro_3x3_orbit(&default_orbit_angles(), grid, tol)?],
            "jordan" => [2usize, 4]
                .iter()
                .map(|&n| repro_jordan_part(n, &default_jordan_samples(), tol))
                .collect::<Result<_>>()?,
            "remark-constants" => vec![repro_remark_constants(&DEFAULT_RHOS, grid, tol)?],
            other => {
                return Err(HarnackError::InvalidConfig(format!(
                    "unknown reproduction `{other}`; expected one of {} or all",
                    NAMES.join(", ")
                )))
            }
        })
    };
    if name == "all" {
        let mut all = Vec::new();
        for n in NAMES {
            all.extend(one(n)?);
        }
        Ok(all)
    } else {
        one(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn fixtures_parse() {
        assert_eq!(fixture(T0_2X2).get(0, 1), c(2.0, 0.0));
        assert!((fixture(N3).get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
        let rotated = fixture(N3_THETA);
        let expected = orbit_member(c(2f64.sqrt(), 0.0), PI / 3.0);
        assert!(op_norm(&(rotated.as_matrix() - expected.as_matrix())) < 1e-15);
    }

    #[test]
    fn block_shapes() {
        let t = nilpotent_block(c(2.0, 0.0), &CMat::identity(2, 2)).unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(t.get(0, 3), c(2.0, 0.0));
        assert_eq!(t.get(2, 2), c(1.0, 0.0));
        let bad = repro_nilpotent_order2(4, c(2.0, 0.0), &[ComplexMatrix::zeros(3)], TorusGrid::default(), &tol());
        assert!(matches!(bad, Err(HarnackError::BadShape(_))));
    }

    #[test]
    fn remark_rejects_rho_one() {
        assert!(matches!(
            repro_remark_constants(&[1.0], TorusGrid::default(), &tol()),
            Err(HarnackError::UnsupportedRho(_))
        ));
    }

    #[test]
    fn reproductions_pass() {
        let outcomes = run_named("all", TorusGrid::default(), &tol()).unwrap();
        for o in &outcomes {
            for check in &o.checks {
                assert!(check.passed, "{}: {} {}", o.name, check.label, check.detail);
            }
        }
        assert_eq!(outcomes.len(), 7);
    }
}
