//! Command-line front end.
//!
//! [`run_command`] parses `argv`, runs one command and returns the text to
//! print together with the process exit code. Nothing is written to stdout
//! on an error path.

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

use crate::channel::family::{family_channel, TruncatedChannel};
use crate::channel::{index_of, Channel, Source, TraceConvention};
use crate::dilation::{
    check_dilation_properties, minimal_isometric_dilation, row_contraction_of, wold_decomposition,
    WoldInput,
};
use crate::error::{Error, Result};
use crate::invariants::{curvature, Certificate, DEFAULT_KMAX};
use crate::io::{parse_channel, Loaded};
use crate::numerics::{identity, Tolerance};
use crate::stinespring::{
    build_stinespring, compind_dimension, eqd_ratio, identity_representation, intertwiner_basis,
    left_dimension,
};
use crate::verify::verify_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_HORIZON: i32 = 3;
pub const EXIT_UNCONVERGED: i32 = 4;
pub const EXIT_VERIFY_FAILED: i32 = 5;

/// Environment variable read for the default comparison tolerance.
pub const TOL_ENV: &str = "CPCURV_TOL";

const DEFAULT_DEPTH: usize = 8;
/// Largest dilation space `dilate` will assemble.
const DILATION_BUDGET: usize = 4096;

#[derive(Debug, Parser)]
#[command(name = "cpcurv", version, about = "Index, curvature and dilations of CP maps")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Absolute tolerance for comparisons (overrides CPCURV_TOL).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Truncation depth for families and dilation towers.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Iteration horizon.
    #[arg(long, global = true)]
    kmax: Option<usize>,
    /// Size of the commutant `M_r`.
    #[arg(long, global = true)]
    r: Option<usize>,
    /// Trace convention, overriding the file.
    #[arg(long, global = true, value_parser = parse_trace)]
    trace: Option<TraceConvention>,
    /// Emit the JSON report.
    #[arg(long, global = true)]
    json: bool,
    /// Treat an unconverged limit as an error.
    #[arg(long, global = true)]
    strict: bool,
    /// Seed for random instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Index of a channel.
    Index { file: PathBuf },
    /// Curvature and normalized curvature.
    Curvature { file: PathBuf },
    /// Minimal isometric dilation and its five properties.
    Dilate { file: PathBuf },
    /// Wold decomposition of an isometric tuple.
    Wold { file: PathBuf },
    /// Stinespring space, correspondence and left dimension.
    Stinespring { file: PathBuf },
    /// Every property suite over a corpus directory.
    Verify { corpus: Option<PathBuf> },
}

fn parse_trace(s: &str) -> std::result::Result<TraceConvention, String> {
    s.parse()
}

/// The machine-readable report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub certificates: Value,
    pub tolerances: Tolerance,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    pub report: Option<Report>,
}

impl Outcome {
    fn error(code: i32, message: String) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr: message,
            report: None,
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::HorizonExceeded { .. } | Error::BudgetExceeded { .. } => EXIT_HORIZON,
        _ => EXIT_VALIDATION,
    }
}

/// Runs one command, reading the default tolerance from `CPCURV_TOL`.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_env(argv, std::env::var(TOL_ENV).ok())
}

/// Like [`run_command`] with the environment tolerance passed explicitly.
pub fn run_with_env<I, T>(argv: I, env_tol: Option<String>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome {
                        code: EXIT_OK,
                        stdout: text,
                        stderr: String::new(),
                        report: None,
                    }
                }
                _ => Outcome::error(EXIT_USAGE, text),
            };
        }
    };
    let tol = match tolerance(args.tol, env_tol.as_deref()) {
        Ok(t) => t,
        Err(msg) => return Outcome::error(EXIT_USAGE, format!("error: {msg}\n")),
    };
    match dispatch(&args, &tol) {
        Ok((report, text, code)) => {
            if code == EXIT_UNCONVERGED {
                return Outcome::error(code, format!("error: {text}\n"));
            }
            let stdout = if args.json {
                serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
            } else {
                text
            };
            Outcome {
                code,
                stdout,
                stderr: String::new(),
                report: Some(report),
            }
        }
        Err(e) => Outcome::error(exit_code(&e), format!("error: {e}\n")),
    }
}

fn tolerance(flag: Option<f64>, env: Option<&str>) -> std::result::Result<Tolerance, String> {
    let value = match (flag, env) {
        (Some(v), _) => Some(v),
        (None, Some(s)) => Some(
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("{TOL_ENV}={s:?} is not a number"))?,
        ),
        (None, None) => None,
    };
    match value {
        Some(v) => Tolerance::default().with_equality(v).map_err(|e| e.to_string()),
        None => Ok(Tolerance::default()),
    }
}

enum Input {
    Exact(Channel),
    Family(TruncatedChannel),
}

impl Input {
    fn source(&self) -> Source<'_> {
        match self {
            Input::Exact(c) => Source::Exact(c),
            Input::Family(t) => Source::Truncated(t),
        }
    }

    fn channel(&self) -> &Channel {
        self.source().channel()
    }
}

fn load(args: &Args, file: &Path, tol: &Tolerance) -> Result<(Input, Value)> {
    let (input, kind, depth) = match parse_channel(file, tol)? {
        Loaded::Channel(c) => (Input::Exact(c), "channel", None),
        Loaded::Family(f) => {
            let depth = args.depth.unwrap_or(DEFAULT_DEPTH);
            let tc = family_channel(&f, depth)?;
            (Input::Family(tc), f.kind(), Some(depth))
        }
    };
    let input = match (input, args.trace) {
        (Input::Exact(c), Some(t)) => Input::Exact(c.with_trace(t)),
        (Input::Family(mut tc), Some(t)) => {
            tc.channel = tc.channel.with_trace(t);
            Input::Family(tc)
        }
        (i, None) => i,
    };
    let c = input.channel();
    let mut digest = json!({
        "file": file.display().to_string(),
        "kind": kind,
        "n": c.n(),
        "d": index_of(c, tol),
        "trace": c.trace_convention().as_str(),
    });
    if let Some(depth) = depth {
        digest["depth"] = json!(depth);
    }
    Ok((input, digest))
}

fn fixed(x: f64) -> String {
    format!("{x:.9}")
}

type Dispatched = (Report, String, i32);

fn report(command: &str, inputs: Value, results: Value, certificates: Value, tol: &Tolerance) -> Report {
    Report {
        command: command.to_string(),
        inputs,
        results,
        certificates,
        tolerances: *tol,
    }
}

fn dispatch(args: &Args, tol: &Tolerance) -> Result<Dispatched> {
    match &args.command {
        Command::Index { file } => {
            let (input, digest) = load(args, file, tol)?;
            let d = index_of(input.channel(), tol);
            let r = report("index", digest, json!({ "d": d }), json!({}), tol);
            Ok((r, format!("d={d}\n"), EXIT_OK))
        }
        Command::Curvature { file } => {
            let (input, digest) = load(args, file, tol)?;
            let c = curvature(input.source(), tol, args.kmax)?;
            let text = format!("d={} K={} certificate={}\n", c.d, fixed(c.k), c.certificate);
            let code = strict_code(args, c.certificate);
            let certs = json!({ "curvature": c.certificate });
            let results = serde_json::to_value(&c).expect("report serializes");
            let text = if code == EXIT_UNCONVERGED {
                format!("curvature did not stabilize within the horizon (K <= {})", fixed(c.k))
            } else {
                text
            };
            Ok((report("curvature", digest, results, certs, tol), text, code))
        }
        Command::Dilate { file } => {
            let (input, digest) = load(args, file, tol)?;
            let src = input.source();
            let depth = args.depth.unwrap_or(DEFAULT_DEPTH);
            let rc = row_contraction_of(src, tol)?;
            let dim = rc.dilation_dim(depth);
            if dim > DILATION_BUDGET {
                return Err(Error::BudgetExceeded {
                    raw_dim: dim,
                    budget: DILATION_BUDGET,
                });
            }
            let dil = minimal_isometric_dilation(&rc, depth)?;
            let nmax = depth.saturating_sub(1);
            let chk = check_dilation_properties(&dil, src, nmax, tol)?;
            let index_alpha = index_of(&dil.alpha.channel, tol);
            let results = json!({
                "depth": depth,
                "n": dil.n,
                "d": dil.d,
                "defect_dim": dil.defect_dim,
                "K_dim": dil.k_dim,
                "short_circuit": dil.short_circuit,
                "index_alpha": index_alpha,
                "properties": chk,
                "passes": chk.passes(tol),
            });
            let text = format!(
                "K_dim={} d={} defect_dim={} index_alpha={} isometry_residual={} power_residual={} generated_dim={} passes={}\n",
                dil.k_dim,
                dil.d,
                dil.defect_dim,
                index_alpha,
                fixed(chk.isometry_residual),
                fixed(chk.power_residual),
                chk.generated_dim,
                chk.passes(tol)
            );
            Ok((report("dilate", digest, results, json!({}), tol), text, EXIT_OK))
        }
        Command::Wold { file } => {
            let (input, digest) = load(args, file, tol)?;
            let kmax = args.kmax.unwrap_or(DEFAULT_KMAX * 4);
            let w = wold_decomposition(WoldInput::Source(input.source()), kmax, tol)?;
            let cert = w.split_certificate.certificate;
            let results = json!({
                "induced_multiplicity": w.induced_multiplicity,
                "P_inf_rank": w.p_inf_rank,
                "pure": w.pure,
                "orthogonality": w.split_certificate.orthogonality,
                "completeness": w.split_certificate.completeness,
                "isometry": w.split_certificate.isometry,
            });
            let code = strict_code(args, cert);
            let text = if code == EXIT_UNCONVERGED {
                "the Wold projections did not stabilize within the horizon".to_string()
            } else {
                format!(
                    "induced_multiplicity={} P_inf_rank={} pure={} certificate={}\n",
                    w.induced_multiplicity, w.p_inf_rank, w.pure, cert
                )
            };
            let certs = json!({ "P_inf": cert });
            Ok((report("wold", digest, results, certs, tol), text, code))
        }
        Command::Stinespring { file } => {
            let (input, digest) = load(args, file, tol)?;
            let Input::Exact(c) = &input else {
                return Err(Error::InvalidFamily(
                    "stinespring needs a channel file, not a family".into(),
                ));
            };
            let r = args.r.unwrap_or(1);
            let sp = build_stinespring(c, r, tol)?;
            let cb = intertwiner_basis(&sp, tol)?;
            let left = left_dimension(&cb, r)?;
            let rep = identity_representation(&sp, &cb, tol)?;
            let ratio = eqd_ratio(&sp, &identity(c.n()), tol)?;
            let results = json!({
                "r": r,
                "d": sp.d,
                "quotient_dim": sp.quotient.quotient_dim,
                "intertwiner_count": cb.len(),
                "left_dimension": left,
                "corner_dimension": compind_dimension(c, tol),
                "dilation_residual": sp.dilation_residual(),
                "trace_ratio_at_identity": ratio,
                "canonical_tuple_len": rep.tuple_len,
                "reconstruction_residual": rep.reconstruction_residual,
                "identity_representation_ok": rep.ok,
            });
            let text = format!(
                "d={} quotient_dim={} left_dimension={} trace_ratio={} reconstruction_residual={}\n",
                sp.d,
                sp.quotient.quotient_dim,
                left,
                fixed(ratio),
                fixed(rep.reconstruction_residual)
            );
            Ok((report("stinespring", digest, results, json!({}), tol), text, EXIT_OK))
        }
        Command::Verify { corpus } => {
            let v = verify_suite(corpus.as_deref(), tol, args.seed)?;
            let mut text = String::new();
            for s in &v.suites {
                text += &format!("{s}\n");
                for f in &s.failures {
                    text += &format!("  FAIL {}: {}\n", f.instance, f.detail);
                    if let Some(replay) = &f.replay {
                        text += &format!("  replay: {replay}\n");
                    }
                }
            }
            let all = v.all_passed();
            text += if all { "all suites passed\n" } else { "some suites failed\n" };
            let inputs = json!({
                "corpus": corpus.as_ref().map(|p| p.display().to_string()),
                "files": v.corpus,
                "seed": v.seed,
            });
            let results = json!({ "suites": v.suites, "all_passed": all });
            let code = if all { EXIT_OK } else { EXIT_VERIFY_FAILED };
            Ok((report("verify", inputs, results, json!({}), tol), text, code))
        }
    }
}

fn strict_code(args: &Args, cert: Certificate) -> i32 {
    if args.strict && !cert.converged() {
        EXIT_UNCONVERGED
    } else {
        EXIT_OK
    }
}
