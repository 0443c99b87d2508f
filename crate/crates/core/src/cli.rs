//! Command-line front end.
//!
//! Every command writes machine-readable data (JSON or CSV) to `--out`, or,
//! without it, to a default file name inside `$LP_BELLMAN_OUT_DIR` when that
//! variable is set, or to stdout. Exit codes: 0 success, 1 usage, 2 domain
//! or precondition failure (or a failed verification), 3 I/O.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bellman::{eval_b3_with, DEFAULT_SAMPLES};
use crate::boundary::{torsion_closed, torsion_numeric, Arc, BoundaryParam, TORSION_STEP};
use crate::envelope::{build_envelope, sample_boundary};
use crate::error::Error;
use crate::foliation::{foliation_chords, write_chords_csv};
use crate::lp_domain::{ConePoint, Exponent};
use crate::modulus::{eps_grid, modulus_curve};
use crate::oracle::{
    run_inequality_suite, verify_majorant, Inequality, InequalityReport, MajorantReport,
};

pub const OUT_DIR_ENV: &str = "LP_BELLMAN_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "lp-bellman",
    version,
    about = "Bellman function and modulus of convexity of L^p"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate B3 at a point of the cone.
    #[command(allow_negative_numbers = true)]
    Eval {
        #[arg(long)]
        p: f64,
        x1: f64,
        x2: f64,
        x3: f64,
        /// Boundary samples per arc for the numeric envelope.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Modulus of convexity on the grid eps_k = 2k/grid, by both methods.
    ModulusCurve {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hanner and Clarkson checks on random step functions.
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 1.2, 1.5, 2.0, 3.0, 4.0])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also compare B with its linear majorant on a grid x grid lattice.
        #[arg(long)]
        majorant_grid: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Chords of the foliation as CSV.
    Foliate {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper hull of the sampled boundary data as JSON.
    Surface {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form and numeric torsion at s = (k + 1/2)/n on each arc.
    Torsion {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Domain(String),
    Io(String),
    Unverified(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

struct Output<'a> {
    out: Option<PathBuf>,
    default_name: String,
    stdout: &'a mut dyn Write,
}

impl Output<'_> {
    fn write(self, data: &[u8], stderr: &mut dyn Write) -> Result<(), Failure> {
        let path = self.out.or_else(|| {
            std::env::var_os(OUT_DIR_ENV).map(|dir| PathBuf::from(dir).join(&self.default_name))
        });
        match path {
            Some(path) => {
                let io_err = |e: io::Error| Failure::Io(format!("{}: {e}", path.display()));
                let mut f = BufWriter::new(File::create(&path).map_err(io_err)?);
                f.write_all(data).map_err(io_err)?;
                f.flush().map_err(io_err)?;
                writeln!(stderr, "wrote {}", path.display())?;
            }
            None => self.stdout.write_all(data)?,
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct EvalOutput {
    p: f64,
    x: [f64; 3],
    value: f64,
    mode: String,
}

#[derive(Serialize)]
struct VerifyOutput {
    seed: u64,
    trials: u64,
    passed: bool,
    inequalities: Vec<InequalityReport>,
    majorant: Vec<MajorantReport>,
    notices: Vec<String>,
}

#[derive(Serialize)]
struct TorsionRow {
    arc: u8,
    s: f64,
    closed: f64,
    numeric: f64,
    sign_match: bool,
}

fn torsion_rows(e: &Exponent, n: usize) -> Result<Vec<TorsionRow>, Failure> {
    let mut rows = Vec::new();
    for arc in Arc::ALL {
        for k in 0..n {
            let s = (k as f64 + 0.5) / n as f64;
            if arc == Arc::Third && s == 0.5 {
                continue;
            }
            let b = BoundaryParam::on(arc, s);
            let mut h = TORSION_STEP.min(s / 4.0).min((1.0 - s) / 4.0);
            if arc == Arc::Third {
                h = h.min((s - 0.5).abs() / 4.0);
            }
            let closed = torsion_closed(&b, e)?;
            let numeric = torsion_numeric(&b, e, h)?;
            rows.push(TorsionRow {
                arc: arc.id(),
                s,
                closed: closed.value(),
                numeric: numeric.value(),
                sign_match: closed.sign() == numeric.sign(),
            });
        }
    }
    Ok(rows)
}

fn csv_bytes(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("reports serialise");
    s.push(b'\n');
    s
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Eval {
            p,
            x1,
            x2,
            x3,
            n,
            format,
            out,
        } => {
            let e = Exponent::bellman(p)?;
            let v = eval_b3_with(&ConePoint::new(x1, x2, x3), &e, n)?;
            let data = match format {
                Format::Json => json_bytes(&EvalOutput {
                    p,
                    x: [x1, x2, x3],
                    value: v.value,
                    mode: v.mode.to_string(),
                }),
                Format::Csv => csv_bytes(
                    &["value", "mode"],
                    [vec![fmt_f(v.value), v.mode.to_string()]],
                )?,
            };
            let ext = if format == Format::Json {
                "json"
            } else {
                "csv"
            };
            Output {
                out,
                default_name: format!("eval_p{p}.{ext}"),
                stdout,
            }
            .write(&data, stderr)
        }
        Command::ModulusCurve { p, grid, out } => {
            if grid < 2 {
                return Err(Failure::Domain(format!(
                    "grid must be at least 2, got {grid}"
                )));
            }
            let e = Exponent::bellman(p)?;
            let curve = modulus_curve(&e, &eps_grid(grid))?;
            let mut data = Vec::new();
            curve.write_csv(&mut data)?;
            Output {
                out,
                default_name: format!("modulus_curve_p{p}.csv"),
                stdout,
            }
            .write(&data, stderr)?;
            writeln!(stderr, "max discrepancy: {:.3e}", curve.max_discrepancy)?;
            Ok(())
        }
        Command::Verify {
            p,
            trials,
            seed,
            majorant_grid,
            out,
        } => {
            if trials == 0 {
                return Err(Failure::Domain("trials must be at least 1".into()));
            }
            let mut report = VerifyOutput {
                seed,
                trials,
                passed: true,
                inequalities: Vec::new(),
                majorant: Vec::new(),
                notices: Vec::new(),
            };
            for &pv in &p {
                let e = Exponent::new(pv)?;
                for ineq in [Inequality::Hanner, Inequality::Clarkson] {
                    let r = run_inequality_suite(ineq, &e, trials, seed);
                    if let Some(why) = &r.skipped {
                        report.notices.push(format!("p = {pv}: {why}; skipped"));
                    }
                    report.passed &= r.passed();
                    report.inequalities.push(r);
                }
                if let Some(grid) = majorant_grid {
                    if e.require_bellman().is_ok() {
                        let m = verify_majorant(&e, grid)?;
                        report.passed &= m.passed();
                        report.majorant.push(m);
                    }
                }
            }
            for n in &report.notices {
                writeln!(stderr, "notice: {n}")?;
            }
            Output {
                out,
                default_name: format!("verify_seed{seed}.json"),
                stdout,
            }
            .write(&json_bytes(&report), stderr)?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Unverified("a sign contract was violated".into()))
            }
        }
        Command::Foliate { p, count, out } => {
            let e = Exponent::bellman(p)?;
            let chords = foliation_chords(&e, count)?;
            let mut data = Vec::new();
            write_chords_csv(&chords, &e, &mut data)?;
            Output {
                out,
                default_name: format!("foliation_p{p}.csv"),
                stdout,
            }
            .write(&data, stderr)
        }
        Command::Surface { p, n, out } => {
            let e = Exponent::bellman(p)?;
            let surface = build_envelope(&sample_boundary(&e, n)?)?;
            let mut data = surface.to_json().into_bytes();
            data.push(b'\n');
            Output {
                out,
                default_name: format!("surface_p{p}_n{n}.json"),
                stdout,
            }
            .write(&data, stderr)
        }
        Command::Torsion { p, n, out } => {
            let e = Exponent::bellman(p)?;
            let rows = torsion_rows(&e, n)?;
            let data = csv_bytes(
                &["arc", "s", "closed", "numeric", "sign_match"],
                rows.iter().map(|r| {
                    vec![
                        r.arc.to_string(),
                        fmt_f(r.s),
                        fmt_f(r.closed),
                        fmt_f(r.numeric),
                        r.sign_match.to_string(),
                    ]
                }),
            )?;
            let mismatches = rows.iter().filter(|r| !r.sign_match).count();
            Output {
                out,
                default_name: format!("torsion_p{p}.csv"),
                stdout,
            }
            .write(&data, stderr)?;
            writeln!(stderr, "{} rows, {mismatches} sign mismatches", rows.len())?;
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(config.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Domain(m) => (EXIT_DOMAIN, m),
                Failure::Unverified(m) => (EXIT_DOMAIN, m),
                Failure::Io(m) => (EXIT_IO, m),
            };
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

pub fn run() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("lp-bellman").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn eval_examples() {
        let (code, out, _) = call(&["eval", "--p", "3", "1", "1", "8"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["value"].as_f64().unwrap().abs() < 1e-12);
        assert_eq!(v["mode"], "FOLIATION");

        let (code, out, _) = call(&["eval", "--p", "2", "1", "1", "1"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["value"].as_f64().unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(v["mode"], "EXACT_LINEAR");

        let (code, _, err) = call(&["eval", "--p", "3", "1", "1", "9"]);
        assert_eq!(code, 2);
        assert!(err.contains("triangle inequality"), "{err}");

        let (code, _, _) = call(&["eval", "--p", "3", "1", "-1", "8"]);
        assert_eq!(code, 2);
        let (code, out, _) = call(&["eval", "--p", "2", "1", "1", "1", "--format", "csv"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("value,mode\n"));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["eval", "--p", "3", "1", "1"]).0, 1);
        assert_eq!(call(&["eval", "--p", "x", "1", "1", "1"]).0, 1);
        assert_eq!(call(&["bogus"]).0, 1);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn modulus_curve_command() {
        let (code, out, err) = call(&["modulus-curve", "--p", "2", "--grid", "4"]);
        assert_eq!(code, 0);
        let rows: Vec<Vec<f64>> = out
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1][0], 1.0);
        assert!((rows[1][1] - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!(rows[1][3] < 1e-12);
        assert!(err.contains("max discrepancy"));
        assert_eq!(call(&["modulus-curve", "--p", "2", "--grid", "1"]).0, 2);
    }

    #[test]
    fn verify_is_deterministic_and_skips_clarkson_at_one() {
        let args = ["verify", "--p", "1,3", "--trials", "1", "--seed", "5"];
        let (code, a, err) = call(&args);
        assert_eq!(code, 0);
        assert!(err.contains("skipped"));
        let (_, b, _) = call(&args);
        assert_eq!(a, b);
    }

    #[test]
    fn foliate_surface_torsion() {
        let (code, out, _) = call(&["foliate", "--p", "1.5", "--count", "50"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 51);
        let (code, _, err) = call(&["foliate", "--p", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("linear regime"));

        let (code, out, _) = call(&["surface", "--p", "2", "--n", "64"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["facets"].as_array().unwrap().len(), 1);

        let (code, out, _) = call(&["torsion", "--p", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 151);
        assert!(out.lines().skip(1).all(|l| l.ends_with("true")));
    }

    #[test]
    fn writes_to_files_and_reports_io_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("curve.csv");
        let (code, out, _) = call(&["modulus-curve", "--p", "3", "--out", path.to_str().unwrap()]);
        assert_eq!(code, 0);
        assert!(out.is_empty());
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 33);
        let bad = dir.path().join("missing").join("x.csv");
        assert_eq!(
            call(&["modulus-curve", "--p", "3", "--out", bad.to_str().unwrap()]).0,
            3
        );
    }
}
