//! Command-line front end: `validate`, `embed`, `verify`, `ricci`, `soliton`
//! and `catalog`.
//!
//! Exit codes: 0 success or accepted, 1 rejected certificate or failed
//! conditions, 2 usage or IO error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use solvembed::catalog;
use solvembed::io::{
    algebra_to_json, embedding_to_json, parse_algebra, parse_embedding, representation_from_file,
};
use solvembed::{
    certify, einstein_check, embed, ricci, soliton_data, validate_algebra, validate_split, EmbedOptions, Error,
    MetricKind, MetricLieAlgebra, Scale, SolvableSplit, Tolerances,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Overrides the default tolerances; either one number or
/// `homomorphism=…,pullback=…,faithfulness=…`.
pub const TOL_ENV: &str = "SOLVEMBED_TOL";

#[derive(Debug, Parser)]
#[command(name = "solvembed", version, about = "Isometric lower-triangular embeddings of metric solvable Lie algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the structural conditions on the file's split
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Build and certify an embedding
    Embed {
        file: PathBuf,
        /// `auto` or a positive scale c
        #[arg(long, default_value = "auto")]
        scale: String,
        #[arg(long, default_value = "einstein")]
        metric: String,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Re-certify an embedding file against an algebra file
    Verify {
        embedding: PathBuf,
        file: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Ricci tensor in an orthonormal frame and the Einstein verdict
    Ricci {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Nilsoliton constant and derivation
    Soliton {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Built-in examples
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
enum CatalogAction {
    List,
    /// Print an entry in the interchange format
    Show {
        name: String,
        /// For nilpotent entries, print the algebra itself instead of its
        /// designated extension
        #[arg(long)]
        raw: bool,
    },
}

#[derive(Debug, Args)]
struct TolArgs {
    #[arg(long = "tol-homomorphism")]
    homomorphism: Option<f64>,
    #[arg(long = "tol-pullback")]
    pullback: Option<f64>,
    #[arg(long = "tol-faithfulness")]
    faithfulness: Option<f64>,
}

impl TolArgs {
    fn resolve(&self, env: Option<&str>) -> Result<Tolerances, Error> {
        let mut t = match env {
            Some(s) if !s.trim().is_empty() => s.parse::<Tolerances>()?,
            _ => Tolerances::default(),
        };
        if let Some(v) = self.homomorphism {
            t.homomorphism = v;
        }
        if let Some(v) = self.pullback {
            t.pullback = v;
        }
        if let Some(v) = self.faithfulness {
            t.faithfulness = v;
        }
        Ok(t)
    }
}

/// Parses `argv` (including the program name) and runs the command against
/// the process's stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let env = std::env::var(TOL_ENV).ok();
    match dispatch(cli.command, env.as_deref(), out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Input problems are usage errors; everything the mathematics rejects is 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Parse(_) | Error::Schema(_) | Error::UnknownExample(_) => EXIT_USAGE,
        _ => EXIT_REJECTED,
    }
}

fn need_split(path: &Path, split: Option<SolvableSplit>) -> Result<SolvableSplit, Error> {
    split.ok_or_else(|| Error::Schema(format!("{}: no `split` given", path.display())))
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:>12.6}", m[(r, c)] + 0.0)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

fn dispatch(cmd: Command, env: Option<&str>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    match cmd {
        Command::Validate { file, tol } => {
            let (alg, split) = parse_algebra(&file)?;
            let split = need_split(&file, split)?;
            let report = validate_split(&alg, &split, tol);
            for c in &report.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                writeln!(out, "{mark} {:<28} {}", c.name, c.detail).map_err(io_err)?;
            }
            if let Some(d) = &report.derivation {
                writeln!(out, "derivation on a: {d:?}").map_err(io_err)?;
            }
            Ok(if report.passed() { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Embed {
            file,
            scale,
            metric,
            output,
            tol,
        } => {
            let scale: Scale = scale.parse()?;
            let metric: MetricKind = metric.parse()?;
            let tolerances = tol.resolve(env)?;
            let (alg, split) = parse_algebra(&file)?;
            let split = need_split(&file, split)?;
            let opts = EmbedOptions {
                scale,
                metric,
                tolerances,
                ..EmbedOptions::default()
            };
            let e = embed(&alg, &split, &opts)?;
            let json = embedding_to_json(&e);
            match &output {
                Some(path) => std::fs::write(path, json + "\n").map_err(|x| Error::Io(format!("{}: {x}", path.display())))?,
                None => writeln!(out, "{json}").map_err(io_err)?,
            }
            let cert = &e.certificate;
            writeln!(
                err,
                "N = {} (bound {}), c = {:.12}, bracket {:.2e}, pullback {:.2e}, margin {:.3e}: {}",
                cert.n,
                e.dimension_bound,
                cert.achieved_c,
                cert.bracket_residual,
                cert.pullback_residual,
                cert.faithfulness_margin,
                if cert.accepted { "accepted" } else { "REJECTED" }
            )
            .map_err(io_err)?;
            for f in &cert.failures {
                writeln!(err, "  {f}").map_err(io_err)?;
            }
            Ok(if cert.accepted { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Verify { embedding, file, tol } => {
            let tolerances = tol.resolve(env)?;
            let emb = parse_embedding(&embedding)?;
            let (alg, _) = parse_algebra(&file)?;
            let rep = representation_from_file(&emb)?;
            let cert = certify(&alg, &rep, emb.metric, &tolerances);
            writeln!(out, "{}", serde_json::to_string_pretty(&cert).expect("certificate serializes")).map_err(io_err)?;
            if !cert.accepted {
                for f in &cert.failures {
                    writeln!(err, "rejected: {f}").map_err(io_err)?;
                }
            }
            Ok(if cert.accepted { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Ricci { file, tol } => {
            let (alg, _) = parse_algebra(&file)?;
            let data = ricci(&alg);
            let (einstein, lambda) = einstein_check(&alg, tol);
            write!(out, "{}", fmt_matrix(&data.ricci)).map_err(io_err)?;
            writeln!(out, "einstein: {einstein} (lambda = {lambda:.12})").map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Soliton { file, tol } => {
            let (alg, _) = parse_algebra(&file)?;
            let report = validate_algebra(&alg, tol)?;
            if !report.nilpotent {
                writeln!(err, "error: algebra is not nilpotent").map_err(io_err)?;
                return Ok(EXIT_REJECTED);
            }
            let data = soliton_data(&alg, tol)?;
            let s = data.soliton.expect("soliton_data fills the soliton");
            writeln!(out, "c = {:.12}", s.c).map_err(io_err)?;
            writeln!(out, "D (orthonormal frame):").map_err(io_err)?;
            write!(out, "{}", fmt_matrix(&s.derivation)).map_err(io_err)?;
            writeln!(out, "residual = {:.3e}", s.residual).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                for name in catalog::list() {
                    let ex = catalog::example(name)?;
                    writeln!(out, "{name:<22} {}", ex.description).map_err(io_err)?;
                }
                Ok(EXIT_OK)
            }
            CatalogAction::Show { name, raw } => {
                let ex = catalog::example(&name)?;
                let (alg, split): (MetricLieAlgebra, Option<SolvableSplit>) = if raw {
                    (ex.algebra.clone(), ex.split.clone())
                } else {
                    let (a, s) = ex.designated()?;
                    (a, Some(s))
                };
                writeln!(out, "{}", algebra_to_json(&alg, split.as_ref())).map_err(io_err)?;
                Ok(EXIT_OK)
            }
        },
    }
}
