//! Acceptance gate: one PASS/FAIL line per criterion. Every tolerance and
//! runtime limit is pinned here.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rhoharnack::harnack::{check_domination, domination_constant, equivalence};
use rhoharnack::kernel::{eval_kernel_factored, eval_kernel_resolvent};
use rhoharnack::linalg::{spectral_norm, CMat};
use rhoharnack::radii::{is_rho_contraction, numerical_radius, numerical_radius_sweep, rho_radius, Verdict as Member};
use rhoharnack::random::{complex_normal, random_in_disk, random_matrix, seeded};
use rhoharnack::repro::{
    default_jordan_samples, default_orbit_angles, nilpotent_block, repro_2x2_trivial, repro_3x3_orbit,
    repro_jordan_part, ReproductionOutcome,
};
use rhoharnack::selftest::run_selftest;
use rhoharnack::{Complex64, ComplexMatrix, Tolerances, TorusGrid};

struct Verdict {
    passed: bool,
    detail: String,
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn grid() -> TorusGrid {
    TorusGrid::default()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn kernel_formula() -> Verdict {
    let t0 = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
    let mut rng = seeded(101);
    let mut worst = 0.0f64;
    for _ in 0..64 {
        let z = random_in_disk(&mut rng, 1.0);
        let expected = [[c(2.0, 0.0), z.conj() * 2.0], [z * 2.0, c(2.0, 0.0)]];
        for s in [
            eval_kernel_resolvent(&t0, 2.0, z, &tol()).unwrap(),
            eval_kernel_factored(&t0, 2.0, z, &tol()).unwrap(),
        ] {
            let k = &s.value;
            for (i, row) in expected.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    worst = worst.max((k.get(i, j) - e).norm());
                }
            }
            let det = k.get(0, 0) * k.get(1, 1) - k.get(0, 1) * k.get(1, 0);
            worst = worst.max((det - c(4.0 * (1.0 - z.norm_sqr()), 0.0)).norm());
        }
    }
    Verdict {
        passed: worst <= 1e-10,
        detail: format!("64 points, both kernel forms, max error {worst:.2e} (tol 1e-10)"),
    }
}

fn remark_constants() -> Verdict {
    let id = ComplexMatrix::identity(2);
    let zero = ComplexMatrix::zeros(2);
    let mut worst = 0.0f64;
    let mut holds = true;
    for rho in [1.25f64, 1.5, 2.0, 4.0] {
        let report = domination_constant(&zero, &id, rho, grid(), &tol(), false).unwrap();
        let found = report.c.filter(|_| report.dominated).unwrap_or(f64::INFINITY);
        worst = worst.max((found - (rho / (rho - 1.0)).sqrt()).abs());
        let t1 = ComplexMatrix::from_real_rows(&[&[0.0, rho], &[0.0, 0.0]]).unwrap();
        let bound = (2.0 * rho / (rho - 1.0)).sqrt();
        holds &= check_domination(&t1, &id, rho, bound, grid(), &tol(), false).unwrap().holds;
    }
    Verdict {
        passed: worst <= 1e-3 && holds,
        detail: format!(
            "0 < I constant error {worst:.2e} (tol 1e-3); [[0,rho],[0,0]] < I at sqrt(2 rho/(rho-1)): {holds}"
        ),
    }
}

fn check_detail<'a>(o: &'a ReproductionOutcome, prefix: &str) -> Option<&'a serde_json::Value> {
    o.checks.iter().find(|c| c.label.starts_with(prefix)).map(|c| &c.detail)
}

fn two_by_two() -> Verdict {
    let o = repro_2x2_trivial(grid(), &tol()).unwrap();
    let w2 = check_detail(&o, "w_2(T0)").and_then(|d| d["w2"].as_f64()).unwrap_or(f64::NAN);
    let probes = check_detail(&o, "every perturbation").and_then(|d| d["probes"].as_u64()).unwrap_or(0);
    let excess = check_detail(&o, "every perturbation")
        .and_then(|d| d["min_excess"].as_f64())
        .unwrap_or(f64::NAN);
    Verdict {
        passed: o.passed && (w2 - 1.0).abs() <= 1e-5 && probes == 128 && excess > 1e-6,
        detail: format!("w_2(T0) = {w2:.7}, {probes} probes, smallest excess over 1 {excess:.3e} (need > 1e-6)"),
    }
}

/// Random `m x m` block with numerical radius `target`.
fn block_with_radius(rng: &mut rhoharnack::random::SeededRng, m: usize, target: f64) -> CMat {
    let b = CMat::from_fn(m, m, |_, _| complex_normal(rng));
    let w = numerical_radius(&ComplexMatrix::from_dmatrix(b.clone()).unwrap());
    b * c(target / w, 0.0)
}

fn nilpotent_family() -> Verdict {
    let mut rng = seeded(202);
    let mut mismatches = Vec::new();
    let mut errors = Vec::new();
    let mut total = 0;
    for n in [3usize, 4, 5] {
        let a = Complex64::from_polar(2.0, rng.random::<f64>() * 2.0 * PI);
        let nmat = nilpotent_block(a, &CMat::zeros(n - 2, n - 2)).unwrap();
        let mut cases: Vec<(f64, bool)> = Vec::new();
        for _ in 0..10 {
            cases.push((0.05 + 0.8 * rng.random::<f64>(), true));
        }
        for _ in 0..5 {
            cases.push((1.0, false));
        }
        for _ in 0..5 {
            cases.push((0.9 + 0.099 * rng.random::<f64>(), true));
        }
        for (target, expected) in cases {
            let b = block_with_radius(&mut rng, n - 2, target);
            let t = nilpotent_block(a, &b).unwrap();
            let got = match equivalence(&nmat, &t, 2.0, grid(), &tol()) {
                Ok(r) => r.equivalent,
                Err(e) => {
                    errors.push(format!("n={n} w(B)={target:.4}: {}", e.code()));
                    false
                }
            };
            total += 1;
            if got != expected {
                mismatches.push(format!("n={n} w(B)={target:.4}"));
            }
        }
    }
    Verdict {
        passed: mismatches.is_empty() && errors.is_empty() && total == 60,
        detail: format!("{total} blocks, {} mismatches {mismatches:?}, errors {errors:?}", mismatches.len()),
    }
}

fn orbit() -> Verdict {
    let o = repro_3x3_orbit(&default_orbit_angles(), grid(), &tol()).unwrap();
    let members = o.checks.iter().filter(|c| c.label.starts_with("theta")).collect::<Vec<_>>();
    let probes = o.checks.iter().filter(|c| c.label.ends_with(": rejected")).collect::<Vec<_>>();
    let ok_members = members.iter().filter(|c| c.passed).count();
    let ok_probes = probes.iter().filter(|c| c.passed).count();
    Verdict {
        passed: o.passed && members.len() == 16 && probes.len() == 8 && ok_members == 16 && ok_probes == 8,
        detail: format!("{ok_members}/16 orbit angles equivalent, {ok_probes}/8 non-orbit probes rejected with a cause"),
    }
}

fn jordan() -> Verdict {
    let samples = default_jordan_samples();
    let interior = samples.iter().filter(|z| z.norm() < 1.0).count();
    let mut failed = Vec::new();
    for n in [2usize, 3, 4, 6] {
        let o = repro_jordan_part(n, &samples, &tol()).unwrap();
        let off = o.checks.iter().filter(|c| c.label.contains("off-corner")).count();
        if !o.passed || off != 4 {
            failed.push(n);
        }
    }
    Verdict {
        passed: failed.is_empty() && interior == 12 && samples.len() == 13,
        detail: format!("{interior} interior corners accepted, |z| = 1 and 4 off-corner probes rejected; failing n: {failed:?}"),
    }
}

fn cross_oracle_radii() -> Verdict {
    let mut rng = seeded(303);
    let (mut w1, mut w2, mut flips) = (0.0f64, 0.0f64, 0);
    // The radius must also sit where membership flips, so a collapsed
    // bracket cannot pass on its own.
    let flips_at = |t: &ComplexMatrix, rho: f64, w: f64| {
        let member = |s: f64| is_rho_contraction(&t.scaled(c(1.0 / (w * s), 0.0)), rho, grid(), &tol()).unwrap().verdict;
        member(1.0 + 1e-5) == Member::Yes && member(1.0 - 1e-5) == Member::No
    };
    for k in 0..50 {
        let t = random_matrix(&mut rng, 2 + k % 7);
        let r1 = rho_radius(&t, 1.0, grid(), &tol()).unwrap().value;
        let r2 = rho_radius(&t, 2.0, grid(), &tol()).unwrap().value;
        w1 = w1.max((r1 - spectral_norm(&t)).abs());
        w2 = w2.max((r2 - numerical_radius_sweep(&t, 8192).unwrap()).abs());
        flips += usize::from(flips_at(&t, 1.0, r1) && flips_at(&t, 2.0, r2));
    }
    Verdict {
        passed: w1 <= 1e-5 && w2 <= 1e-5 && flips == 50,
        detail: format!(
            "50 matrices, max |w_1 - ||T||| = {w1:.2e}, max |w_2 - w| = {w2:.2e} (tol 1e-5), membership flips at the radius for {flips}/50"
        ),
    }
}

fn invariant_suites() -> Verdict {
    let mut failing = Vec::new();
    for seed in 1..=5u64 {
        let report = run_selftest(seed, grid(), &tol()).unwrap();
        for suite in &report.suites {
            for check in suite.checks.iter().filter(|c| !c.passed) {
                failing.push(format!("seed {seed} {}: {}", suite.module, check.name));
            }
        }
    }
    Verdict {
        passed: failing.is_empty(),
        detail: format!("seeds 1..5, failing checks {failing:?}"),
    }
}

fn determinism() -> Verdict {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_rhoharnack"))
            .args(["--seed", "3", "--threads", threads, "selftest"])
            .env_remove("RHOHARNACK_SEED")
            .env_remove("RHOHARNACK_GRID")
            .output()
            .expect("binary runs")
    };
    let one = run("1");
    let eight = run("8");
    let same = one.stdout == eight.stdout;
    Verdict {
        passed: same && one.status.success() && eight.status.success() && !one.stdout.is_empty(),
        detail: format!(
            "selftest --seed 3: {} bytes with 1 thread, {} bytes with 8, identical: {same}",
            one.stdout.len(),
            eight.stdout.len()
        ),
    }
}

type Criterion = (&'static str, Duration, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("kernel formula fidelity", Duration::from_secs(1), kernel_formula),
        ("explicit domination constants", Duration::from_secs(10), remark_constants),
        ("2x2 Harnack part is trivial", Duration::from_secs(10), two_by_two),
        ("corner nilpotent family", Duration::from_secs(120), nilpotent_family),
        ("3x3 diagonal unitary orbit", Duration::from_secs(60), orbit),
        ("Jordan block Harnack part", Duration::from_secs(30), jordan),
        ("cross-oracle radii", Duration::from_secs(120), cross_oracle_radii),
        ("invariant suites, seeds 1..5", Duration::from_secs(300), invariant_suites),
        ("thread-count determinism", Duration::from_secs(300), determinism),
    ];
    let mut all = true;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let passed = v.passed && elapsed <= *limit;
        all &= passed;
        println!(
            "criterion {}: {} {name}: {}; {:.2} s (limit {} s)",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if !all {
        std::process::exit(1);
    }
}
