//! Command-line front end. `run` takes the argument list and output sinks so
//! the whole surface can be driven from tests.
//!
//! Exit codes: 0 success, 1 input error, 2 mathematical-soundness failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::approx::{search_sup, ClassConstraint, ClassKind};
use crate::equality::{analyze_cordes_equality, analyze_mcintosh_equality, extremal_vector};
use crate::error::Error;
use crate::fuzz::{campaign_csv, run_campaign_with_jobs, FuzzConfig};
use crate::inequalities::{
    evaluate_cordes, evaluate_fujii_furuta, evaluate_heinz_kato, evaluate_loewner_heinz, evaluate_mcintosh, CordesInstance, HeinzKatoInput,
    McIntoshInstance, Status,
};
use crate::linalg::Matrix;
use crate::refinement::{refined_cordes_with, refined_mcintosh_with, RefinedReport, StripSide, SOUNDNESS_TOL};
use crate::spectral::SymMatrix;
use crate::strip::{eval_grid, linspace, StripFunction};

/// Largest asymmetry tolerated when loading `A` or `B`.
pub const LOAD_ASYMMETRY_TOL: f64 = 1e-8;
pub const SEED_ENV: &str = "OPNORM_SEED";

#[derive(Debug, Parser)]
#[command(name = "opnorm", version, about = "Two-sided checks and certified refinements of interpolation inequalities for matrix norms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Ineq {
    Mcintosh,
    Cordes,
    Fujii,
    HeinzKato,
    LoewnerHeinz,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Mcintosh,
    Cordes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Class {
    #[value(name = "H")]
    H,
    #[value(name = "G")]
    G,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one inequality on matrices loaded from JSON files.
    Check {
        /// A X B (mcintosh, fujii) or A B (cordes, heinz-kato, loewner-heinz).
        #[arg(required = true, num_args = 2..=3)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "mcintosh")]
        ineq: Ineq,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        /// Cordes exponent; defaults to `--r`.
        #[arg(long)]
        s: Option<f64>,
        /// Matrix file for `T` (heinz-kato).
        #[arg(long = "T", alias = "t-matrix")]
        t: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Comma-separated vector (heinz-kato).
        #[arg(long)]
        x: Option<String>,
        /// Comma-separated vector (heinz-kato).
        #[arg(long)]
        y: Option<String>,
    },
    /// Spectral distance and certified improvement.
    Refine {
        #[arg(required = true, num_args = 2..=3)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "mcintosh")]
        mode: Family,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, value_enum)]
        side: Option<Side>,
    },
    /// Equality-case analysis of a vector (default: the extremal vector).
    Equality {
        #[arg(required = true, num_args = 2..=3)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "mcintosh")]
        mode: Family,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        /// JSON array with the vector `v`.
        #[arg(long)]
        v: Option<PathBuf>,
    },
    /// Strip-function grid as CSV plus a summary.
    Strip {
        #[arg(required = true, num_args = 2..=3)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "mcintosh")]
        mode: Family,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        /// `nx,nt`.
        #[arg(long, default_value = "21,801")]
        grid: String,
        #[arg(long, default_value_t = 40.0)]
        tmax: f64,
        #[arg(long)]
        v: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup-norm search over a structured exponential-sum class.
    Approx {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value = "H")]
        class: Class,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        r: f64,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// History CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded randomized campaign.
    Fuzz {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; 0 picks the default. Results do not depend on it.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Campaign CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the embedded acceptance suite.
    Selftest {
        /// Criterion ids to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

/// `{"n": 2, "data": [row-major n^2 numbers], "name": "optional"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub data: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<Matrix, Error> {
        if self.data.len() != self.n * self.n {
            return Err(Error::Precondition(format!("data has {} entries, expected n^2 = {}", self.data.len(), self.n * self.n)));
        }
        Matrix::from_row_major(self.n, self.n, self.data.clone())
    }

    pub fn from_matrix(m: &Matrix, name: Option<&str>) -> Self {
        Self { n: m.rows(), data: m.as_slice().to_vec(), name: name.map(str::to_string) }
    }
}

/// Outcome of a subcommand, before serialization.
struct Outcome {
    code: i32,
    seed: Option<u64>,
    parameters: Value,
    results: Value,
}

#[derive(Serialize)]
struct RunReport<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    inputs_sha256: String,
    seed: Option<u64>,
    parameters: Value,
    results: Value,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult<T> = Result<T, Failure>;

/// Input files read so far, hashed into the report.
#[derive(Default)]
struct Inputs(Vec<Vec<u8>>);

impl Inputs {
    fn read(&mut self, path: &Path) -> CmdResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        self.0.push(bytes.clone());
        Ok(bytes)
    }

    fn matrix(&mut self, path: &Path) -> CmdResult<Matrix> {
        let bytes = self.read(path)?;
        let file: MatrixFile = serde_json::from_slice(&bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
        file.to_matrix().map_err(|e| Failure(format!("{}: {e}", path.display())))
    }

    fn symmetric(&mut self, path: &Path) -> CmdResult<SymMatrix> {
        let m = self.matrix(path)?;
        SymMatrix::symmetrize(m, LOAD_ASYMMETRY_TOL).map_err(|e| Failure(format!("{}: {e}", path.display())))
    }

    fn vector(&mut self, path: &Path) -> CmdResult<Vec<f64>> {
        let bytes = self.read(path)?;
        serde_json::from_slice(&bytes).map_err(|e| Failure(format!("{}: {e}", path.display())))
    }

    fn digest(&self) -> String {
        let mut h = Sha256::new();
        for b in &self.0 {
            h.update((b.len() as u64).to_le_bytes());
            h.update(b);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn resolve_seed(flag: Option<u64>) -> CmdResult<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| Failure(format!("{SEED_ENV}={s:?} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn parse_list(s: &str) -> CmdResult<Vec<f64>> {
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| Failure(format!("not a number: {p:?}")))).collect()
}

fn mcintosh(inputs: &mut Inputs, files: &[PathBuf], r: f64) -> CmdResult<McIntoshInstance> {
    let [a, x, b] = files else {
        return Err(Failure(format!("expected three files A X B, got {}", files.len())));
    };
    let (a, x, b) = (inputs.symmetric(a)?, inputs.matrix(x)?, inputs.symmetric(b)?);
    Ok(McIntoshInstance::new(a, x, b, r)?)
}

fn pair(inputs: &mut Inputs, files: &[PathBuf]) -> CmdResult<(SymMatrix, SymMatrix)> {
    let [a, b] = files else {
        return Err(Failure(format!("expected two files A B, got {}", files.len())));
    };
    Ok((inputs.symmetric(a)?, inputs.symmetric(b)?))
}

fn status_code(status: Status) -> i32 {
    if status == Status::Violated {
        2
    } else {
        0
    }
}

fn cmd_check(inputs: &mut Inputs, cmd: &Command) -> CmdResult<Outcome> {
    let Command::Check { files, ineq, r, s, t, alpha, x, y } = cmd else { unreachable!() };
    let s = s.unwrap_or(*r);
    let (results, code) = match ineq {
        Ineq::Mcintosh => {
            let rep = evaluate_mcintosh(&mcintosh(inputs, files, *r)?)?;
            (serde_json::to_value(&rep)?, status_code(rep.status))
        }
        Ineq::Fujii => {
            let inst = mcintosh(inputs, files, 0.5)?;
            let rep = evaluate_fujii_furuta(&inst.a, &inst.x, &inst.b)?;
            (serde_json::to_value(&rep)?, status_code(rep.status))
        }
        Ineq::Cordes => {
            let (a, b) = pair(inputs, files)?;
            let rep = evaluate_cordes(&CordesInstance::new(a, b, s)?)?;
            (serde_json::to_value(&rep)?, status_code(rep.status))
        }
        Ineq::HeinzKato => {
            let (a, b) = pair(inputs, files)?;
            let t = t.as_ref().ok_or_else(|| Failure("heinz-kato needs --T".into()))?;
            let t = inputs.matrix(t)?;
            let x = parse_list(x.as_deref().ok_or_else(|| Failure("heinz-kato needs --x".into()))?)?;
            let y = parse_list(y.as_deref().ok_or_else(|| Failure("heinz-kato needs --y".into()))?)?;
            let rep = evaluate_heinz_kato(&HeinzKatoInput { t, a, b, alpha: *alpha, x, y })?;
            (serde_json::to_value(&rep)?, status_code(rep.status))
        }
        Ineq::LoewnerHeinz => {
            let (a, b) = pair(inputs, files)?;
            let rep = evaluate_loewner_heinz(&a, &b, *alpha)?;
            let code = if rep.holds == Some(false) { 2 } else { 0 };
            (serde_json::to_value(&rep)?, code)
        }
    };
    let parameters = json!({ "ineq": format!("{ineq:?}").to_lowercase(), "r": r, "s": s, "alpha": alpha });
    Ok(Outcome { code, seed: None, parameters, results })
}

fn side_of(side: Option<Side>) -> Option<StripSide> {
    side.map(|s| match s {
        Side::Left => StripSide::Left,
        Side::Right => StripSide::Right,
    })
}

fn refine_results(rep: &RefinedReport) -> Value {
    let ratio = rep.plain.ratio;
    let c_cert = rep.bound.as_ref().map(|b| b.c_cert);
    json!({
        "d": rep.gap.as_ref().map(|g| g.d),
        "gap": rep.gap,
        "ell": rep.bound.as_ref().map(|b| b.ell),
        "c_cert": c_cert,
        "ratio": ratio,
        "margin": ratio.zip(c_cert).map(|(q, c)| 1.0 - c - q),
        "bound": rep.bound,
        "plain": rep.plain,
        "note": rep.bound.is_none().then(|| format!("no certificate: {}", rep.note.clone().unwrap_or_default())),
    })
}

fn cmd_refine(inputs: &mut Inputs, cmd: &Command) -> CmdResult<Outcome> {
    let Command::Refine { files, mode, r, side } = cmd else { unreachable!() };
    let rep = match mode {
        Family::Mcintosh => refined_mcintosh_with(&mcintosh(inputs, files, *r)?, side_of(*side))?,
        Family::Cordes => {
            let (a, b) = pair(inputs, files)?;
            refined_cordes_with(&CordesInstance::new(a, b, *r)?, side_of(*side))?
        }
    };
    let code = if rep.sound == Some(false) || rep.plain.status == Status::Violated { 2 } else { 0 };
    let parameters = json!({ "mode": format!("{mode:?}").to_lowercase(), "r": r, "side": side.map(|s| format!("{s:?}").to_lowercase()), "soundness_tol": SOUNDNESS_TOL });
    Ok(Outcome { code, seed: None, parameters, results: refine_results(&rep) })
}

fn cmd_equality(inputs: &mut Inputs, cmd: &Command) -> CmdResult<Outcome> {
    let Command::Equality { files, mode, r, v } = cmd else { unreachable!() };
    let results = match mode {
        Family::Mcintosh => {
            let inst = mcintosh(inputs, files, *r)?.normalize()?;
            let v = match v {
                Some(p) => inputs.vector(p)?,
                None => extremal_vector(&inst, *r)?,
            };
            json!({ "v": v, "verdict": analyze_mcintosh_equality(&inst, &v, None)? })
        }
        Family::Cordes => {
            let (a, b) = pair(inputs, files)?;
            let inst = CordesInstance::new(a, b, *r)?.normalize()?;
            let v = match v {
                Some(p) => inputs.vector(p)?,
                None => extremal_vector(&inst, *r)?,
            };
            json!({ "v": v, "verdict": analyze_cordes_equality(&inst, &v, None)? })
        }
    };
    let parameters = json!({ "mode": format!("{mode:?}").to_lowercase(), "r": r });
    Ok(Outcome { code: 0, seed: None, parameters, results })
}

fn cmd_strip(inputs: &mut Inputs, cmd: &Command, out_files: &mut Vec<(PathBuf, String)>) -> CmdResult<Outcome> {
    let Command::Strip { files, mode, r, grid, tmax, v, out } = cmd else { unreachable!() };
    let dims: Vec<usize> = grid
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Failure(format!("--grid expects nx,nt, got {grid:?}"))))
        .collect::<CmdResult<_>>()?;
    let [nx, nt] = dims[..] else {
        return Err(Failure(format!("--grid expects nx,nt, got {grid:?}")));
    };
    if nx < 2 || nt < 1 || !(*tmax > 0.0) {
        return Err(Failure("--grid needs nx >= 2, nt >= 1 and --tmax > 0".into()));
    }
    let f = match mode {
        Family::Mcintosh => {
            let inst = mcintosh(inputs, files, *r)?.normalize()?;
            let v = match v {
                Some(p) => inputs.vector(p)?,
                None => extremal_vector(&inst, *r)?,
            };
            StripFunction::mcintosh(&inst, &v)?
        }
        Family::Cordes => {
            let (a, b) = pair(inputs, files)?;
            let inst = CordesInstance::new(a, b, *r)?.normalize()?;
            let v = match v {
                Some(p) => inputs.vector(p)?,
                None => extremal_vector(&inst, *r)?,
            };
            StripFunction::cordes(&inst, &v)?
        }
    };
    let xs = linspace(0.0, 1.0, nx);
    let ts = linspace(-tmax, *tmax, nt);
    let g = eval_grid(&f, &xs, &ts)?;
    let boundary_max = g.column_max[0].max(g.column_max[nx - 1]);
    let interior_max = g.column_max[1..nx - 1].iter().copied().fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
    if let Some(path) = out {
        out_files.push((path.clone(), g.to_csv()));
    }
    let at = f.value(num_complex::Complex64::new(f.evaluation_point(), 0.0));
    let results = json!({
        "v": f.v(),
        "boundary_max": boundary_max,
        "interior_max": interior_max,
        "bounded": g.max_modulus() <= 1.0 + 1e-8,
        "value_at_exponent": [at.re, at.im],
        "column_max": g.column_max,
    });
    let parameters = json!({ "mode": format!("{mode:?}").to_lowercase(), "r": r, "nx": nx, "nt": nt, "tmax": tmax });
    let code = if g.max_modulus() <= 1.0 + 1e-8 { 0 } else { 2 };
    Ok(Outcome { code, seed: None, parameters, results })
}

fn cmd_approx(cmd: &Command, out_files: &mut Vec<(PathBuf, String)>) -> CmdResult<Outcome> {
    let Command::Approx { n, class, delta, r, budget, seed, out } = cmd else { unreachable!() };
    let seed = resolve_seed(Some(*seed))?.unwrap_or(*seed);
    let kind = match class {
        Class::H => ClassKind::H,
        Class::G => ClassKind::G,
    };
    let rep = search_sup(*n, ClassConstraint::new(kind, *delta)?, *r, *budget, seed)?;
    if let Some(path) = out {
        let mut csv = String::from("restart,iteration,best_value\n");
        for h in &rep.history {
            csv.push_str(&format!("{},{},{}\n", h.restart, h.iteration, h.best_value));
        }
        out_files.push((path.clone(), csv));
    }
    let results = json!({
        "best_value": rep.best_value,
        "best_instance": rep.best_instance,
        "best_sup": rep.best_sup,
        "certificate_bound": rep.certificate_bound,
        "consistent": rep.consistent,
        "evaluations": rep.evaluations,
        "restarts": rep.restarts,
    });
    let parameters = json!({ "n": n, "class": format!("{class:?}"), "delta": delta, "r": r, "budget": budget });
    Ok(Outcome { code: if rep.consistent { 0 } else { 2 }, seed: Some(seed), parameters, results })
}

fn cmd_fuzz(inputs: &mut Inputs, cmd: &Command, out_files: &mut Vec<(PathBuf, String)>) -> CmdResult<Outcome> {
    let Command::Fuzz { config, seed, jobs, out } = cmd else { unreachable!() };
    let bytes = inputs.read(config)?;
    let mut cfg: FuzzConfig = serde_json::from_slice(&bytes).map_err(|e| Failure(format!("{}: {e}", config.display())))?;
    if let Some(s) = resolve_seed(*seed)? {
        cfg.seed = s;
    }
    let rep = run_campaign_with_jobs(&cfg, *jobs)?;
    if let Some(path) = out {
        out_files.push((path.clone(), campaign_csv(&rep)));
    }
    let mut results = serde_json::to_value(&rep)?;
    if let Value::Object(map) = &mut results {
        map.remove("records");
        map.remove("config");
        map.insert("trials".into(), json!(rep.records.len()));
    }
    let parameters = serde_json::to_value(&cfg)?;
    Ok(Outcome { code: if rep.clean() { 0 } else { 2 }, seed: Some(cfg.seed), parameters, results })
}

fn cmd_selftest(cmd: &Command, err: &mut dyn Write) -> CmdResult<Outcome> {
    let Command::Selftest { only } = cmd else { unreachable!() };
    let ids: Vec<usize> = if only.is_empty() { (1..=crate::selftest::COUNT).collect() } else { only.clone() };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > crate::selftest::COUNT) {
        return Err(Failure(format!("no criterion {bad}; ids run from 1 to {}", crate::selftest::COUNT)));
    }
    let mut outcomes = Vec::new();
    for id in ids {
        let o = crate::selftest::run(id);
        writeln!(err, "{}", o.line())?;
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let total_seconds: f64 = outcomes.iter().map(|o| o.seconds).sum();
    let code = if passed == outcomes.len() { 0 } else { 2 };
    let results = json!({ "passed": passed, "total": outcomes.len(), "seconds": total_seconds, "criteria": outcomes });
    Ok(Outcome { code, seed: None, parameters: json!({}), results })
}

/// Parses `args` (including the program name), runs the subcommand, writes
/// the JSON report to `out` and diagnostics to `err`, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if informational { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if informational { 0 } else { 1 };
        }
    };
    let mut inputs = Inputs::default();
    let mut out_files = Vec::new();
    let name = match &cli.command {
        Command::Check { .. } => "check",
        Command::Refine { .. } => "refine",
        Command::Equality { .. } => "equality",
        Command::Strip { .. } => "strip",
        Command::Approx { .. } => "approx",
        Command::Fuzz { .. } => "fuzz",
        Command::Selftest { .. } => "selftest",
    };
    let outcome = match &cli.command {
        c @ Command::Check { .. } => cmd_check(&mut inputs, c),
        c @ Command::Refine { .. } => cmd_refine(&mut inputs, c),
        c @ Command::Equality { .. } => cmd_equality(&mut inputs, c),
        c @ Command::Strip { .. } => cmd_strip(&mut inputs, c, &mut out_files),
        c @ Command::Approx { .. } => cmd_approx(c, &mut out_files),
        c @ Command::Fuzz { .. } => cmd_fuzz(&mut inputs, c, &mut out_files),
        c @ Command::Selftest { .. } => cmd_selftest(c, err),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "opnorm {name}: {msg}");
            return 1;
        }
    };
    for (path, contents) in &out_files {
        if let Err(e) = std::fs::write(path, contents) {
            let _ = writeln!(err, "opnorm {name}: {}: {e}", path.display());
            return 1;
        }
    }
    let report = RunReport {
        tool: "opnorm",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name,
        inputs_sha256: inputs.digest(),
        seed: outcome.seed,
        parameters: outcome.parameters,
        results: outcome.results,
    };
    match serde_json::to_string_pretty(&report) {
        Ok(s) => {
            let _ = writeln!(out, "{s}");
        }
        Err(e) => {
            let _ = writeln!(err, "opnorm {name}: {e}");
            return 1;
        }
    }
    if outcome.code == 2 {
        let _ = writeln!(err, "opnorm {name}: soundness failure (see report)");
    }
    outcome.code
}
