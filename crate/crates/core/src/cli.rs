//! Command-line front end: `list`, `eval` and `verify`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{ArrayD, Dimension};
use serde::Serialize;
use serde_json::json;

use crate::catalog::{self, CatalogEntry};
use crate::connections::{nonmetricity_direct, torsion_from_coeffs, ConnectionKind};
use crate::curvature::{projective_from, ricci_from, riemann_from, theta_beta_at};
use crate::error::Error;
use crate::geometry::{load_spec_file, Chart, ManifoldSpec};
use crate::theorems::{self, CheckReport, RunOptions, Status};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "semisym",
    version,
    about = "Projective semi-symmetric connections: tensor evaluation and identity checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in manifolds.
    List {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the components of a tensor at one point.
    Eval {
        #[command(flatten)]
        source: SourceArgs,
        /// One of: gamma, gamma_tilde, torsion, nonmetricity, riemann,
        /// riemann_tilde, ricci, ricci_tilde, theta, beta, projective,
        /// projective_tilde.
        #[arg(long)]
        tensor: String,
        /// Coordinates, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run identity checks over seeded samples.
    Verify {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = theorems::DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = theorems::DEFAULT_SEED)]
        seed: u64,
        /// Tolerance override, e.g. `--tol eq17=1e-8`. Repeatable.
        #[arg(long = "tol", value_name = "CHECK=VALUE")]
        tol: Vec<String>,
        /// Comma-separated check ids; all checks when omitted.
        #[arg(long = "check", value_name = "IDS", value_delimiter = ',')]
        check: Vec<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SourceArgs {
    /// Built-in manifold name (see `list`).
    #[arg(long)]
    manifold: Option<String>,
    /// Manifold document on disk.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Shorthand for `--format json`.
    #[arg(long)]
    json: bool,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write output to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutputArgs {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }

    fn writer(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

/// An error paired with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(err: impl std::fmt::Display) -> Failure {
        Failure {
            code: EXIT_INPUT,
            message: err.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Failure {
        let code = match err {
            Error::UnknownTensor(_)
            | Error::UnknownCheck(_)
            | Error::OutOfBox { .. }
            | Error::NoSamples
            | Error::DimensionTooSmall(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(err: io::Error) -> Failure {
        Failure::input(err)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("semisym: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::List { output } => {
            let mut w = output.writer()?;
            cmd_list(&mut w, output.format())?;
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Eval {
            source,
            tensor,
            point,
            output,
        } => {
            let spec = load_source(source)?;
            let point = parse_point(point)?;
            let result = eval_tensor(&spec, tensor, &point)?;
            let mut w = output.writer()?;
            write_eval(&mut w, &spec, &result, output.format())?;
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            source,
            samples,
            seed,
            tol,
            check,
            output,
        } => {
            let spec = load_source(source)?;
            let opts = RunOptions {
                samples: *samples,
                seed: *seed,
                tolerances: parse_tolerances(tol)?,
                checks: if check.is_empty() {
                    None
                } else {
                    Some(check.iter().map(|s| s.trim().to_string()).collect())
                },
            };
            opts.validate()?;
            let chart = spec.compile();
            let reports = theorems::run(&chart, &opts)?;
            let mut w = output.writer()?;
            write_reports(&mut w, &chart, &opts, &reports, output.format())?;
            w.flush()?;
            Ok(if theorems::all_passed(&reports) {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
    }
}

fn load_source(source: &SourceArgs) -> Result<ManifoldSpec, Failure> {
    let spec = match (&source.manifold, &source.file) {
        (Some(name), _) => catalog::builtin(name).map_err(Failure::input)?.spec,
        (None, Some(path)) => load_spec_file(path).map_err(|e| Failure {
            code: EXIT_INPUT,
            message: format!("{}: {e}", path.display()),
        })?,
        (None, None) => return Err(Failure::usage("one of --manifold or --file is required")),
    };
    spec.validate_variables().map_err(Failure::input)?;
    Ok(spec)
}

fn parse_point(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("invalid coordinate '{}' in --point", s.trim())))
        })
        .collect()
}

fn parse_tolerances(items: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for item in items {
        let (id, value) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("--tol expects CHECK=VALUE, got '{item}'")))?;
        let v: f64 = value
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite() && *v >= 0.0)
            .ok_or_else(|| Failure::usage(format!("invalid tolerance '{value}' for {id}")))?;
        out.insert(id.trim().to_string(), v);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct ListEntry {
    name: String,
    dim: usize,
    coords: Vec<String>,
    parallel_xi_expected: bool,
    contact_structure: bool,
    provenance: String,
}

impl From<&CatalogEntry> for ListEntry {
    fn from(e: &CatalogEntry) -> Self {
        ListEntry {
            name: e.name.clone(),
            dim: e.spec.dim(),
            coords: e.spec.coords.clone(),
            parallel_xi_expected: e.spec.parallel_xi_expected,
            contact_structure: e.spec.has_contact_structure(),
            provenance: e.provenance.clone(),
        }
    }
}

pub fn cmd_list(w: &mut dyn Write, format: Format) -> io::Result<()> {
    let entries: Vec<ListEntry> = catalog::all().iter().map(ListEntry::from).collect();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &entries)?;
            writeln!(w)
        }
        Format::Human => {
            for e in &entries {
                let xi = if e.parallel_xi_expected {
                    "parallel ξ"
                } else {
                    "non-parallel ξ"
                };
                let extra = if e.contact_structure {
                    ", almost contact"
                } else {
                    ""
                };
                writeln!(w, "{} (n={}, {}{})", e.name, e.dim, xi, extra)?;
            }
            writeln!(w, "euclidean_<n> (n=<n> ≥ 2, parallel ξ; flat, coordinates x1..xn)")
        }
    }
}

pub const TENSORS: [&str; 12] = [
    "gamma",
    "gamma_tilde",
    "torsion",
    "nonmetricity",
    "riemann",
    "riemann_tilde",
    "ricci",
    "ricci_tilde",
    "theta",
    "beta",
    "projective",
    "projective_tilde",
];

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub tensor: String,
    pub point: Vec<f64>,
    pub labels: &'static [&'static str],
    pub data: ArrayD<f64>,
}

/// Evaluates one of [`TENSORS`] at a point inside the sampling box.
pub fn eval_tensor(spec: &ManifoldSpec, tensor: &str, point: &[f64]) -> Result<EvalResult, Failure> {
    if !TENSORS.contains(&tensor) {
        return Err(Failure::usage(format!(
            "unknown tensor '{tensor}' (expected one of: {})",
            TENSORS.join(", ")
        )));
    }
    if point.len() != spec.dim() {
        return Err(Failure::usage(format!(
            "--point has {} coordinates, {} has n = {}",
            point.len(),
            spec.name,
            spec.dim()
        )));
    }
    if !spec.contains(point) {
        return Err(Error::OutOfBox {
            point: point.to_vec(),
        }
        .into());
    }
    let chart: Chart = spec.compile();
    let pd = chart.point_data(point, 1)?;
    let g = &pd.metric.g;
    let curvature = |kind| riemann_from(pd.connection(kind), g);
    let projective = |kind| -> Result<ArrayD<f64>, Failure> {
        let cv = curvature(kind);
        Ok(projective_from(&cv.r, &ricci_from(&cv.r))?.into_dyn())
    };
    use ConnectionKind::*;
    const UP3: &[&str] = &["k", "i", "j"];
    const LOW3: &[&str] = &["i", "j", "k"];
    const R4: &[&str] = &["l", "i", "j", "k"];
    const S2: &[&str] = &["j", "k"];
    const T2: &[&str] = &["i", "j"];
    let (labels, data): (&'static [&'static str], ArrayD<f64>) = match tensor {
        "gamma" => (UP3, pd.lc.gamma.clone().into_dyn()),
        "gamma_tilde" => (UP3, pd.pt.gamma.clone().into_dyn()),
        "torsion" => (UP3, torsion_from_coeffs(&pd.pt).into_dyn()),
        "nonmetricity" => (LOW3, nonmetricity_direct(&pd).into_dyn()),
        "riemann" => (R4, curvature(LeviCivita).r.into_dyn()),
        "riemann_tilde" => (R4, curvature(ProjectiveSemiSymmetric).r.into_dyn()),
        "ricci" => (S2, ricci_from(&curvature(LeviCivita).r).into_dyn()),
        "ricci_tilde" => (S2, ricci_from(&curvature(ProjectiveSemiSymmetric).r).into_dyn()),
        "theta" => (T2, theta_beta_at(&pd).theta.into_dyn()),
        "beta" => (T2, theta_beta_at(&pd).beta.into_dyn()),
        "projective" => (R4, projective(LeviCivita)?),
        "projective_tilde" => (R4, projective(ProjectiveSemiSymmetric)?),
        _ => unreachable!(),
    };
    Ok(EvalResult {
        tensor: tensor.to_string(),
        point: point.to_vec(),
        labels,
        data,
    })
}

fn clean(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// `[l=2,i=1,j=2,k=1]` with 1-based indices.
pub fn component_label(labels: &[&str], index: &[usize]) -> String {
    let parts: Vec<String> = labels
        .iter()
        .zip(index)
        .map(|(l, i)| format!("{l}={}", i + 1))
        .collect();
    format!("[{}]", parts.join(","))
}

fn write_eval(
    w: &mut dyn Write,
    spec: &ManifoldSpec,
    result: &EvalResult,
    format: Format,
) -> io::Result<()> {
    match format {
        Format::Json => {
            let components: Vec<_> = result
                .data
                .indexed_iter()
                .map(|(idx, v)| {
                    json!({
                        "index": idx.slice().iter().map(|i| i + 1).collect::<Vec<_>>(),
                        "value": clean(*v),
                    })
                })
                .collect();
            let doc = json!({
                "manifold": spec.name,
                "tensor": result.tensor,
                "coords": spec.coords,
                "point": result.point,
                "indices": result.labels,
                "components": components,
            });
            serde_json::to_writer(&mut *w, &doc)?;
            writeln!(w)
        }
        Format::Human => {
            let point: Vec<String> = result.point.iter().map(|v| v.to_string()).collect();
            writeln!(
                w,
                "# {} on {} at ({}) = ({})",
                result.tensor,
                spec.name,
                spec.coords.join(", "),
                point.join(", ")
            )?;
            for (idx, v) in result.data.indexed_iter() {
                writeln!(w, "{} = {}", component_label(result.labels, idx.slice()), clean(*v))?;
            }
            Ok(())
        }
    }
}

fn write_reports(
    w: &mut dyn Write,
    chart: &Chart,
    opts: &RunOptions,
    reports: &[CheckReport],
    format: Format,
) -> io::Result<()> {
    match format {
        Format::Json => {
            for r in reports {
                serde_json::to_writer(&mut *w, r)?;
                writeln!(w)?;
            }
            Ok(())
        }
        Format::Human => {
            let spec = chart.spec();
            writeln!(
                w,
                "# {} (n={}), {} samples, seed {}",
                spec.name,
                spec.dim(),
                opts.samples,
                opts.seed
            )?;
            for r in reports {
                writeln!(w, "{}", r.human_line())?;
            }
            let count = |s| reports.iter().filter(|r| r.status == s).count();
            writeln!(
                w,
                "# {} passed, {} failed, {} skipped, {} not applicable",
                count(Status::Passed),
                count(Status::Failed),
                count(Status::Skipped),
                count(Status::NotApplicable)
            )
        }
    }
}
