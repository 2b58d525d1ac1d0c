//! Command-line front end. Every subcommand prints one JSON object on
//! stdout; failures also go to stderr as `{"error": {"code", "message"}}`.
//!
//! Exit codes: 0 verdict holds, 1 verdict fails, 2 module error or class
//! violation, 64 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::Tolerances;
use crate::error::{HarnackError, Result};
use crate::harnack::{check_domination, domination_constant, equivalence, equivalence_c1};
use crate::kernel::{
    eval_kernel_factored, eval_kernel_resolvent, kernel_margin_on_circle, margin_profile, write_margin_csv, TorusGrid,
};
use crate::linalg::{io, ComplexMatrix};
use crate::radii::{is_rho_contraction, numerical_radius, rho_radius, Verdict};
use crate::spectral::{gamma_set, numerical_range_sweep, numerical_range_torus, write_range_csv};
use crate::{repro, selftest, Complex64};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "rhoharnack", version, about = "Harnack domination and operator radii for rho-contractions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Circle grid size, a power of two in [64, 131072].
    #[arg(long, global = true, env = "RHOHARNACK_GRID", default_value_t = 2048, value_parser = parse_grid)]
    pub grid: usize,
    #[arg(long, global = true, env = "RHOHARNACK_RADIUS_TOL", value_parser = parse_positive)]
    pub radius_tol: Option<f64>,
    #[arg(long, global = true, env = "RHOHARNACK_DOM_TOL", value_parser = parse_positive)]
    pub dom_tol: Option<f64>,
    #[arg(long, global = true, env = "RHOHARNACK_RANK_TOL", value_parser = parse_positive)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true, env = "RHOHARNACK_UNIMODULAR_TOL", value_parser = parse_positive)]
    pub unimodular_tol: Option<f64>,
    /// Certify domination on the whole circle instead of the grid only.
    #[arg(long, global = true, env = "RHOHARNACK_CERTIFY")]
    pub certify: bool,
    #[arg(long, global = true, env = "RHOHARNACK_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, env = "RHOHARNACK_THREADS", value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
}

impl GlobalArgs {
    pub fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(v) = self.radius_tol {
            tol.radius_tol = v;
        }
        if let Some(v) = self.dom_tol {
            tol.dom_tol = v;
        }
        if let Some(v) = self.rank_tol {
            tol.rank_tol = v;
        }
        if let Some(v) = self.unimodular_tol {
            tol.unimodular_tol = v;
        }
        tol
    }

    pub fn torus_grid(&self) -> TorusGrid {
        TorusGrid::new(self.grid).expect("grid validated by the parser")
    }
}

fn parse_grid(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n.is_power_of_two() && (1 << 6..=1 << 17).contains(&n) {
        Ok(n)
    } else {
        Err(format!("grid must be a power of two between 64 and 131072, got {n}"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("expected a positive finite number, got {s}"))
    }
}

fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected `re,im`, got {s}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Complex64::new(re, im))
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Operator radius w_rho by bisection.
    Radius {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        input: PathBuf,
        /// Bisection width; overrides --radius-tol.
        #[arg(long, value_parser = parse_positive)]
        tol: Option<f64>,
    },
    /// Membership in C_rho.
    Member {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        input: PathBuf,
    },
    /// Kernel value at one point, or its smallest eigenvalue around a circle.
    Kernel {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        input: PathBuf,
        /// Evaluation point `re,im` inside the disk.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z: Option<Complex64>,
        /// Circle radius for the sweep.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Use the factored form instead of the resolvent form.
        #[arg(long)]
        factored: bool,
        /// Per-angle dump with columns `theta,min_eig,kernel_dim`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Unimodular eigenvalues with multiplicities.
    Gamma {
        #[arg(long)]
        input: PathBuf,
    },
    /// Numerical range boundary and its points on the unit circle.
    Nrange {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 4096)]
        angles: usize,
        /// Per-angle dump with columns `theta,re,im,on_torus`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Harnack domination of T1 by T0.
    Dominate {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        t0: PathBuf,
        /// Test a fixed constant instead of searching for the smallest one.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Harnack equivalence of T and S.
    Equiv {
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        t: PathBuf,
        #[arg(long)]
        s: PathBuf,
        /// Use the defect-space criterion for contractions (rho = 1).
        #[arg(long)]
        defect: bool,
    },
    /// Named reproductions of the worked examples.
    Reproduce {
        #[arg(long, default_value = "all")]
        name: String,
    },
    /// Seeded invariant suites of every module.
    Selftest {
        /// Run a single suite.
        #[arg(long)]
        suite: Option<String>,
    },
}

/// Result of a subcommand: JSON body and exit code.
pub struct Outcome {
    pub body: Value,
    pub code: i32,
}

fn verdict(body: Value, holds: bool) -> Outcome {
    Outcome {
        body,
        code: if holds { EXIT_OK } else { EXIT_FAIL },
    }
}

fn load(path: &Path) -> Result<ComplexMatrix> {
    io::read_path(path)
}

fn with_ref(mut body: Value, paper_ref: &str) -> Value {
    if let Value::Object(map) = &mut body {
        map.insert("paper_ref".into(), json!(paper_ref));
    }
    body
}

const REF_RADIUS: &str = "w_rho as the least gamma with T/gamma in C_rho, via kernel positivity";
const REF_MEMBER: &str = "C_rho membership via positivity of the rho-kernel on the closed disk";
const REF_KERNEL: &str = "rho-kernel K_z = (I - conj(z)T)^-1 + (I - zT*)^-1 + (rho - 2)I";
const REF_GAMMA: &str = "unimodular point spectrum and the diagonal unitary part of a rho-contraction";
const REF_NRANGE: &str = "closure of W(T) on the unit circle equals the unimodular spectrum for contractions";
const REF_DOMINATE: &str = "Harnack domination as the kernel inequality K(T1) <= c^2 K(T0)";
const REF_EQUIV: &str = "Harnack equivalence: equal unitary parts and equal boundary kernels of the compressions";
const REF_EQUIV_DEFECT: &str = "Harnack equivalence of contractions: equal defect kernels and equal restrictions";
const REF_REPRODUCE: &str = "worked examples: explicit Harnack parts and domination constants";
const REF_SELFTEST: &str = "invariant suites of all modules";

pub fn run(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let mut tol = g.tolerances();
    tol.validate()?;
    let grid = g.torus_grid();
    Ok(match &cli.command {
        Command::Radius { rho, input, tol: width } => {
            if let Some(w) = width {
                tol.radius_tol = *w;
            }
            let t = load(input)?;
            let r = rho_radius(&t, *rho, grid, &tol)?;
            verdict(with_ref(json!(r), REF_RADIUS), true)
        }
        Command::Member { rho, input } => {
            let t = load(input)?;
            let m = is_rho_contraction(&t, *rho, grid, &tol)?;
            let holds = m.verdict == Verdict::Yes;
            verdict(with_ref(json!(m), REF_MEMBER), holds)
        }
        Command::Kernel {
            rho,
            input,
            z,
            radius,
            factored,
            csv,
        } => {
            let t = load(input)?;
            match z {
                Some(z) => {
                    let s = if *factored {
                        eval_kernel_factored(&t, *rho, *z, &tol)?
                    } else {
                        eval_kernel_resolvent(&t, *rho, *z, &tol)?
                    };
                    let body = json!({
                        "z": [z.re, z.im],
                        "rho": rho,
                        "form": if *factored { "factored" } else { "resolvent" },
                        "value": io::to_json_value(&s.value),
                        "eigenvalues": s.eigenvalues,
                        "min_eig": s.min_eig,
                        "kernel_dim": s.kernel_dim(),
                    });
                    verdict(with_ref(body, REF_KERNEL), s.min_eig >= -tol.membership_tol)
                }
                None => {
                    let m = kernel_margin_on_circle(&t, *rho, *radius, grid, &tol)?;
                    if let Some(path) = csv {
                        let rows = margin_profile(&t, *rho, *radius, grid, &tol)?;
                        write_margin_csv(&rows, std::fs::File::create(path)?)?;
                    }
                    let body = json!({
                        "rho": rho,
                        "radius": radius,
                        "grid_points": grid.n_points(),
                        "min_eig": m.min_eig,
                        "index": m.index,
                        "theta": m.theta,
                    });
                    verdict(with_ref(body, REF_KERNEL), m.min_eig >= -tol.membership_tol)
                }
            }
        }
        Command::Gamma { input } => {
            let t = load(input)?;
            let s = gamma_set(&t, &tol)?;
            let body = json!({
                "gamma": s.gamma.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "multiplicities": s.multiplicities,
                "eigenspace_dims": s.eigenspaces.iter().map(|e| e.dim()).collect::<Vec<_>>(),
            });
            verdict(with_ref(body, REF_GAMMA), true)
        }
        Command::Nrange { input, angles, csv } => {
            let t = load(input)?;
            let on_torus = numerical_range_torus(&t, *angles, tol.boundary_tol)?;
            if let Some(path) = csv {
                let points = numerical_range_sweep(&t, *angles, tol.boundary_tol);
                write_range_csv(&points, std::fs::File::create(path)?)?;
            }
            let body = json!({
                "angles": angles,
                "numerical_radius": numerical_radius(&t),
                "on_torus": on_torus.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            });
            verdict(with_ref(body, REF_NRANGE), true)
        }
        Command::Dominate { rho, t1, t0, c } => {
            let (a, b) = (load(t1)?, load(t0)?);
            match c {
                Some(c) => {
                    let r = check_domination(&a, &b, *rho, *c, grid, &tol, g.certify)?;
                    let holds = r.holds;
                    verdict(with_ref(json!(r), REF_DOMINATE), holds)
                }
                None => {
                    let r = domination_constant(&a, &b, *rho, grid, &tol, g.certify)?;
                    let holds = r.dominated;
                    verdict(with_ref(json!(r), REF_DOMINATE), holds)
                }
            }
        }
        Command::Equiv { rho, t, s, defect } => {
            let (a, b) = (load(t)?, load(s)?);
            if *defect {
                if rho.is_some_and(|r| r != 1.0) {
                    return Err(HarnackError::InvalidConfig("--defect applies to rho = 1 only".into()));
                }
                let r = equivalence_c1(&a, &b, &tol)?;
                let holds = r.equivalent;
                verdict(with_ref(json!(r), REF_EQUIV_DEFECT), holds)
            } else {
                let rho = rho.ok_or_else(|| HarnackError::InvalidConfig("--rho is required".into()))?;
                let r = equivalence(&a, &b, rho, grid, &tol)?;
                let holds = r.equivalent;
                verdict(with_ref(json!(r), REF_EQUIV), holds)
            }
        }
        Command::Reproduce { name } => {
            let outcomes = repro::run_named(name, grid, &tol)?;
            let passed = outcomes.iter().all(|o| o.passed);
            let body = json!({ "passed": passed, "outcomes": outcomes });
            verdict(with_ref(body, REF_REPRODUCE), passed)
        }
        Command::Selftest { suite } => {
            let body = match suite {
                Some(name) => {
                    let s = selftest::run_suite(name, g.seed, grid, &tol)?;
                    json!({ "seed": g.seed, "grid_points": grid.n_points(), "passed": s.passed, "suites": [s] })
                }
                None => json!(selftest::run_selftest(g.seed, grid, &tol)?),
            };
            let passed = body["passed"].as_bool().unwrap_or(false);
            verdict(with_ref(body, REF_SELFTEST), passed)
        }
    })
}

pub fn error_json(code: &str, message: &str) -> Value {
    json!({ "error": { "code": code, "message": message } })
}

/// Parses `argv`, runs the command on the configured thread pool and writes
/// the JSON output. Returns the process exit code.
pub fn dispatch<I, T>(argv: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let message = e.render().to_string();
            let _ = writeln!(stderr, "{}", error_json("UsageError", message.trim()));
            return EXIT_USAGE;
        }
    };
    let result = run_with_threads(&cli);
    match result {
        Ok(out) => {
            let _ = writeln!(stdout, "{}", out.body);
            out.code
        }
        Err(e) => {
            let body = error_json(e.code(), &e.to_string());
            let _ = writeln!(stderr, "{body}");
            let _ = writeln!(stdout, "{}", with_ref(body, "structured error"));
            EXIT_ERROR
        }
    }
}

#[cfg(feature = "parallel")]
fn run_with_threads(cli: &Cli) -> Result<Outcome> {
    match cli.global.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n as usize)
                .build()
                .map_err(|e| HarnackError::InvalidConfig(e.to_string()))?;
            pool.install(|| run(cli))
        }
        None => run(cli),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads(cli: &Cli) -> Result<Outcome> {
    run(cli)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parser() {
        assert_eq!(parse_grid("64"), Ok(64));
        assert_eq!(parse_grid("131072"), Ok(131072));
        assert!(parse_grid("32").is_err());
        assert!(parse_grid("1000").is_err());
        assert!(parse_grid("262144").is_err());
    }

    #[test]
    fn complex_parser() {
        assert_eq!(parse_complex("0.5,-0.25"), Ok(Complex64::new(0.5, -0.25)));
        assert!(parse_complex("0.5").is_err());
    }

    #[test]
    fn usage_errors_exit_64() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(dispatch(["rhoharnack", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        let v: Value = serde_json::from_slice(&err).unwrap();
        assert_eq!(v["error"]["code"], "UsageError");
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(dispatch(["rhoharnack", "--grid", "100", "gamma", "--input", "x"], &mut out, &mut err), EXIT_USAGE);
    }
}
