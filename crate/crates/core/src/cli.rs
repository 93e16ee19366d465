//! Command-line front end. Exit codes: 0 success, 1 usage or validation
//! error, 2 a check reported a violation, 3 solver failure.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analytic::{disk_spectrum, square_spectrum};
use crate::error::{Error, Result};
use crate::fem_scalar::{scalar_spectrum, ScalarBc};
use crate::fem_vector::vector_spectrum;
use crate::geometry::{l_shape, regular_polygon, square, triangulate, Polygon, TriMesh};
use crate::report;
use crate::spectrum::Spectrum;
use crate::verify::{
    check_inequality, convergence_study, counting_check, merge_spectra, min_max_crosscheck,
    slack_for, test_space_certificate, InequalityReport, EVIDENCE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "dn-spectra",
    version,
    about = "Dirichlet and Neumann Laplacian spectra on planar polygons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// builtin:square | builtin:disk[:n] | builtin:lshape | builtin:hexagon, a polygon JSON file, or inline JSON
    #[arg(long)]
    domain: String,
    /// Relative residual target for eigenpairs
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Output file (standard output if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Omit the generation timestamp so identical runs give identical bytes
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BcArg {
    Dirichlet,
    Neumann,
    Vector,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ScalarBcArg {
    Dirichlet,
    Neumann,
}

impl From<ScalarBcArg> for ScalarBc {
    fn from(b: ScalarBcArg) -> Self {
        match b {
            ScalarBcArg::Dirichlet => ScalarBc::Dirichlet,
            ScalarBcArg::Neumann => ScalarBc::Neumann,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Triangulate a domain and export the mesh
    Mesh {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Discrete spectra on one mesh
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value_t = BcArg::Both)]
        bc: BcArg,
    },
    /// Closed-form spectra of the square or the disk
    Reference {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value_t = BcArg::Both)]
        bc: BcArg,
    },
    /// Check mu_{k+2} <= lambda_k on the two finest levels up to --levels
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        /// Relative verdict slack (default max(1e-6, h^2))
        #[arg(long)]
        slack: Option<f64>,
    },
    /// Compare the vector operator with the merged scalar spectra
    Crosscheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 12)]
        count: usize,
    },
    /// Test-space certificate built from Dirichlet eigenfunctions
    Certificate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Skip counting eigenvalues of the vector operator
        #[arg(long)]
        no_count: bool,
    },
    /// Observed order and extrapolated limit of one eigenvalue
    Converge {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ScalarBcArg::Dirichlet)]
        bc: ScalarBcArg,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Mesh { common, .. }
            | Command::Solve { common, .. }
            | Command::Reference { common, .. }
            | Command::Verify { common, .. }
            | Command::Crosscheck { common, .. }
            | Command::Certificate { common, .. }
            | Command::Converge { common, .. } => common,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    Square { side: f64 },
    Disk { radius: f64 },
}

/// A parsed `--domain` value.
#[derive(Clone, Debug)]
pub struct Domain {
    pub name: String,
    pub polygon: Polygon,
    pub reference: Option<Reference>,
}

pub fn parse_domain(spec: &str) -> Result<Domain> {
    if let Some(builtin) = spec.strip_prefix("builtin:") {
        let mut parts = builtin.splitn(2, ':');
        let kind = parts.next().unwrap_or("");
        let arg = parts.next();
        let (polygon, reference) = match (kind, arg) {
            ("square", None) => (square(PI)?, Some(Reference::Square { side: PI })),
            ("disk", n) => {
                let n = match n {
                    None => 256,
                    Some(s) => s.parse().map_err(|_| {
                        Error::InvalidArgument(format!("bad disk vertex count {s:?}"))
                    })?,
                };
                (
                    regular_polygon(n, 1.0)?,
                    Some(Reference::Disk { radius: 1.0 }),
                )
            }
            ("lshape", None) => (l_shape(), None),
            ("hexagon", None) => (regular_polygon(6, 1.0)?, None),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown builtin domain {spec:?}"
                )))
            }
        };
        return Ok(Domain {
            name: builtin.to_string(),
            polygon,
            reference,
        });
    }
    let polygon = if spec.trim_start().starts_with('{') {
        Polygon::from_json_str(spec)?
    } else {
        Polygon::from_json_file(spec)?
    };
    let name = if spec.trim_start().starts_with('{') {
        "inline".to_string()
    } else {
        spec.to_string()
    };
    Ok(Domain {
        name,
        polygon,
        reference: None,
    })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SolverFailure(_)
        | Error::NoConvergence { .. }
        | Error::MassNotPD { .. }
        | Error::BracketFailure { .. } => EXIT_SOLVER,
        _ => EXIT_USAGE,
    }
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with_output(argv, &mut lock)
}

/// As [`run`], writing results without `--out` to `out`.
pub fn run_with_output<I, T, W>(argv: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok((text, code)) => {
            let common = cli.command.common();
            let written = match &common.out {
                Some(path) => std::fs::write(path, text).map_err(Error::from),
                None => out.write_all(text.as_bytes()).map_err(Error::from),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn mesh_at(domain: &Domain, level: usize) -> Result<TriMesh> {
    triangulate(&domain.polygon, level)
}

fn tagged(s: Spectrum, domain: &Domain) -> Spectrum {
    s.with_domain(domain.name.clone())
}

fn reference_spectra(
    reference: Reference,
    count_n: usize,
    count_d: usize,
) -> Result<(Spectrum, Spectrum)> {
    Ok(match reference {
        Reference::Square { side } => (
            square_spectrum(ScalarBc::Neumann, count_n, side),
            square_spectrum(ScalarBc::Dirichlet, count_d, side),
        ),
        Reference::Disk { radius } => (
            disk_spectrum(ScalarBc::Neumann, count_n, radius)?,
            disk_spectrum(ScalarBc::Dirichlet, count_d, radius)?,
        ),
    })
}

fn json_only(format: Format, command: &str) -> Result<()> {
    if format != Format::Json {
        return Err(Error::InvalidArgument(format!(
            "{command} only writes json"
        )));
    }
    Ok(())
}

fn execute(command: &Command) -> Result<(String, i32)> {
    let common = command.common();
    let domain = parse_domain(&common.domain)?;
    let stamp = !common.no_timestamp;
    let tol = common.tol;
    let finish = |name: &str, payload: Value| -> Result<String> {
        report::to_pretty(&report::document(name, &domain.name, payload, stamp)?)
    };
    match command {
        Command::Mesh { levels, .. } => {
            json_only(common.format, "mesh")?;
            let mut text = mesh_at(&domain, *levels)?.to_json()?;
            text.push('\n');
            Ok((text, EXIT_OK))
        }
        Command::Solve {
            levels, count, bc, ..
        } => {
            json_only(common.format, "solve")?;
            let mesh = mesh_at(&domain, *levels)?;
            let mut spectra = Vec::new();
            let mut fields = Vec::new();
            if matches!(bc, BcArg::Dirichlet | BcArg::Both) {
                spectra.push(scalar_spectrum(&mesh, ScalarBc::Dirichlet, *count, tol)?.to_value());
            }
            if matches!(bc, BcArg::Neumann | BcArg::Both) {
                spectra.push(scalar_spectrum(&mesh, ScalarBc::Neumann, *count, tol)?.to_value());
            }
            if *bc == BcArg::Vector {
                let (s, f) = vector_spectrum(&mesh, *count, tol)?;
                spectra.push(s.to_value());
                fields = f.iter().map(|f| f.to_value()).collect();
            }
            let mut payload = json!({"level": levels, "mesh_h": mesh.h, "spectra": spectra});
            if !fields.is_empty() {
                payload["eigenfields"] = Value::Array(fields);
            }
            Ok((finish("solve", payload)?, EXIT_OK))
        }
        Command::Reference { count, bc, .. } => {
            json_only(common.format, "reference")?;
            let reference = domain.reference.ok_or_else(|| {
                Error::InvalidArgument(
                    "reference spectra exist for builtin:square and builtin:disk only".into(),
                )
            })?;
            let (n, d) = reference_spectra(reference, *count, *count)?;
            let spectra: Vec<Value> = match bc {
                BcArg::Dirichlet => vec![d.to_value()],
                BcArg::Neumann => vec![n.to_value()],
                BcArg::Both => vec![d.to_value(), n.to_value()],
                BcArg::Vector => {
                    let m = merge_spectra(&n, &d)?;
                    let mut s = m.to_spectrum();
                    s.values.truncate(*count);
                    s.residuals.truncate(*count);
                    vec![s.to_value()]
                }
            };
            Ok((finish("reference", json!({"spectra": spectra}))?, EXIT_OK))
        }
        Command::Verify {
            levels,
            kmax,
            slack,
            ..
        } => verify(&domain, common, *levels, *kmax, *slack),
        Command::Crosscheck { levels, count, .. } => {
            json_only(common.format, "crosscheck")?;
            let r = min_max_crosscheck(&domain.polygon, levels, *count, tol)?;
            Ok((finish("crosscheck", serde_json::to_value(&r)?)?, EXIT_OK))
        }
        Command::Certificate {
            levels,
            k,
            no_count,
            ..
        } => {
            json_only(common.format, "certificate")?;
            let mesh = mesh_at(&domain, *levels)?;
            let count = !no_count && mesh.reentrant_corners().is_empty();
            let r = test_space_certificate(&mesh, *k, tol, count)?;
            let code = if r.passed() { EXIT_OK } else { EXIT_VIOLATED };
            Ok((finish("certificate", serde_json::to_value(&r)?)?, code))
        }
        Command::Converge { levels, k, bc, .. } => {
            json_only(common.format, "converge")?;
            let r = convergence_study(&domain.polygon, (*bc).into(), *k, levels, tol)?;
            Ok((finish("converge", serde_json::to_value(&r)?)?, EXIT_OK))
        }
    }
}

fn verify(
    domain: &Domain,
    common: &Common,
    levels: usize,
    kmax: usize,
    slack: Option<f64>,
) -> Result<(String, i32)> {
    if kmax == 0 {
        return Err(Error::InvalidArgument("kmax must be at least 1".into()));
    }
    let tol = common.tol;
    let used: Vec<usize> = if levels >= 1 {
        vec![levels - 1, levels]
    } else {
        vec![levels]
    };
    let mut per_level: Vec<InequalityReport> = Vec::new();
    let mut finest = None;
    for &level in &used {
        let mesh = mesh_at(domain, level)?;
        // kmax + 3 Neumann values include the zero mode and mu_{kmax+3}
        let n = tagged(
            scalar_spectrum(&mesh, ScalarBc::Neumann, kmax + 3, tol)?,
            domain,
        );
        let d = tagged(
            scalar_spectrum(&mesh, ScalarBc::Dirichlet, kmax, tol)?,
            domain,
        );
        let s = slack.unwrap_or_else(|| slack_for(Some(mesh.h)));
        per_level.push(check_inequality(&n, &d, kmax, s)?);
        finest = Some((mesh.h, n, d, s));
    }
    let (h, n, d, s) = finest.expect("at least one level");
    let report = match per_level.as_slice() {
        [coarse, fine] => fine.stabilized(coarse),
        [only] => only.clone(),
        _ => unreachable!(),
    };
    let violated = per_level.iter().any(InequalityReport::any_violated);
    let merged = merge_spectra(&n, &d)?;
    let code = if violated { EXIT_VIOLATED } else { EXIT_OK };
    match common.format {
        Format::Csv => return Ok((report::inequality_csv(&report)?, code)),
        Format::Svg => return Ok((report::merged_svg(&merged, Some(&report)), code)),
        Format::Json => {}
    }
    let counting: Vec<Value> = (1..=kmax)
        .map(|k| counting_check(&merged, &d, k, s).map(|holds| json!({"k": k, "holds": holds})))
        .collect::<Result<_>>()?;
    let mut payload = json!({
        "evidence": EVIDENCE,
        "levels": used,
        "mesh_h": h,
        "neumann": n.to_value(),
        "dirichlet": d.to_value(),
        "inequality": report,
        "per_level": per_level,
        "counting": counting,
    });
    if let Some(reference) = domain.reference {
        let (rn, rd) = reference_spectra(reference, kmax + 3, kmax)?;
        let exact = check_inequality(&rn, &rd, kmax, slack_for(None))?;
        payload["reference"] = json!({
            "neumann": rn.to_value(),
            "dirichlet": rd.to_value(),
            "inequality": exact,
        });
    }
    let text = report::to_pretty(&report::document(
        "verify",
        &domain.name,
        payload,
        !common.no_timestamp,
    )?)?;
    Ok((text, code))
}
