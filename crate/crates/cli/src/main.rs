//! `sspd-cavity`: cavity design, curve sweeps and the optimum table from the
//! command line.
//!
//! Exit status is 0 on success, 1 on error (including failed table cells)
//! and 2 when the run succeeded but raised validity warnings.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sspd_cavity::config::StackConfig;
use sspd_cavity::design::{self, CurveSet, DesignSpec, MirrorChoice, MlcConvergence, SweepVariable, Table2};
use sspd_cavity::materials::{load_registry, MaterialRegistry};
use sspd_cavity::{CavityKind, Error};

#[derive(Parser)]
#[command(name = "sspd-cavity", version, about = "Optical cavity design for superconducting strip photon detectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form optimum with oracle refinement and impedance check.
    Design {
        #[command(flatten)]
        cavity: CavityArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Absorptance versus wire or dielectric thickness.
    Sweep {
        #[command(flatten)]
        cavity: CavityArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, default_value = "wire", value_parser = parse_variable)]
        variable: SweepVariable,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Input-impedance ratio and absorptance versus wire thickness.
    Impedance {
        #[command(flatten)]
        cavity: CavityArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute every optimum of the reference table.
    Table2 {
        #[arg(long)]
        materials: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Multi-layer absorptance and transmittance versus period count.
    MlcConvergence {
        #[command(flatten)]
        cavity: CavityArgs,
        #[arg(long, default_value_t = 14)]
        max_periods: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct CavityArgs {
    /// ssc, dsc or mlc (default ssc).
    #[arg(long, value_parser = parse_cavity)]
    cavity: Option<CavityKind>,
    /// Filling factor; sets the slit width from the line width.
    #[arg(long = "f", conflicts_with = "slit_nm")]
    fill: Option<f64>,
    #[arg(long)]
    wavelength_nm: Option<f64>,
    #[arg(long)]
    line_nm: Option<f64>,
    #[arg(long)]
    slit_nm: Option<f64>,
    /// TOML material table merged over the built-in constants.
    #[arg(long)]
    materials: Option<PathBuf>,
    /// TOML stack description used as the starting point.
    #[arg(long)]
    stack: Option<PathBuf>,
    /// pec, pec-surrogate or a material name.
    #[arg(long, value_parser = parse_mirror)]
    mirror: Option<MirrorChoice>,
    #[arg(long)]
    mirror_nm: Option<f64>,
    #[arg(long)]
    periods: Option<usize>,
    /// Dielectric between input and wire (dsc) or next to the wire (mlc).
    #[arg(long)]
    c1: Option<String>,
    /// Dielectric between wire and mirror (dsc) or second period layer (mlc).
    #[arg(long)]
    c2: Option<String>,
    /// Spacer of a single-side cavity, upper layer of a double-side cavity.
    #[arg(long)]
    dielectric: Option<String>,
    #[arg(long)]
    wire_material: Option<String>,
    #[arg(long)]
    input: Option<String>,
}

#[derive(Args)]
struct RangeArgs {
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    StructuredReport,
}

fn parse_cavity(s: &str) -> Result<CavityKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mirror(s: &str) -> Result<MirrorChoice, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_variable(s: &str) -> Result<SweepVariable, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

struct Failure {
    code: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: e.code(), message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure { code: "io", message: format!("{}: {e}", path.display()) }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn registry(materials: Option<&Path>) -> Result<MaterialRegistry<f64>, Failure> {
    match materials {
        Some(path) => Ok(load_registry(&read(path)?)?),
        None => Ok(MaterialRegistry::with_defaults()),
    }
}

impl CavityArgs {
    /// Spec and registry after layering stack file, defaults and flags.
    /// `default_mirror` applies only when neither flag nor stack file names one.
    fn resolve(&self, default_mirror: Option<MirrorChoice>) -> Result<(DesignSpec, MaterialRegistry<f64>), Failure> {
        let registry = registry(self.materials.as_deref())?;
        let (mut spec, file_mirror) = match &self.stack {
            Some(path) => {
                let cfg = StackConfig::parse(&read(path)?)?;
                let spec = cfg.to_design_spec()?;
                if self.cavity.is_some_and(|c| c != spec.cavity) {
                    return Err(Error::Config(format!(
                        "--cavity disagrees with `{}` in {}",
                        spec.cavity,
                        path.display()
                    ))
                    .into());
                }
                (spec, cfg.mirror.is_some())
            }
            None => (DesignSpec::new(self.cavity.unwrap_or(CavityKind::SingleSide)), false),
        };
        if let Some(v) = self.wavelength_nm {
            spec.wavelength_nm = v;
        }
        if let Some(v) = self.line_nm {
            spec.line_nm = v;
        }
        if let Some(v) = self.slit_nm {
            spec.slit_nm = v;
        }
        if let Some(v) = self.periods {
            spec.periods = v;
        }
        if let Some(v) = self.mirror_nm {
            spec.mirror_nm = v;
        }
        if let Some(v) = &self.wire_material {
            spec.wire_material = v.clone();
        }
        if let Some(v) = &self.input {
            spec.input = v.clone();
        }
        match spec.cavity {
            CavityKind::SingleSide => {
                if self.c2.is_some() {
                    return Err(Error::Config("--c2 has no meaning for ssc; use --dielectric".to_string()).into());
                }
                if let Some(v) = self.dielectric.as_ref().or(self.c1.as_ref()) {
                    spec.upper = v.clone();
                }
            }
            CavityKind::DoubleSide | CavityKind::MultiLayer => {
                if let Some(v) = &self.c1 {
                    spec.lower = v.clone();
                }
                if let Some(v) = self.c2.as_ref().or(self.dielectric.as_ref()) {
                    spec.upper = v.clone();
                }
            }
        }
        match (&self.mirror, file_mirror, default_mirror) {
            (Some(m), _, _) => spec.mirror = m.clone(),
            (None, false, Some(m)) => spec.mirror = m,
            _ => {}
        }
        if let Some(f) = self.fill {
            spec = spec.with_filling_factor(f)?;
        }
        Ok((spec, registry))
    }
}

fn emit(output: &OutputArgs, bytes: &[u8]) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, bytes).map_err(|e| io_failure(path, e)),
        None => io::stdout().write_all(bytes).map_err(|e| Failure { code: "io", message: e.to_string() }),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    result: &'a T,
}

fn structured<T: Serialize>(command: &str, result: &T) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(&Envelope { command, result })
        .map_err(|e| Failure { code: "serialize", message: e.to_string() })?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, Failure> {
    let fail = |e: csv::Error| Failure { code: "csv", message: e.to_string() };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| Failure { code: "csv", message: e.to_string() })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn curve_csv(curves: &CurveSet, with_analytic_ratio: bool) -> Result<Vec<u8>, Failure> {
    let mut header = vec!["x_nm", "A_analytic", "A_tmm", "eta_ratio"];
    if with_analytic_ratio {
        header.push("eta_ratio_analytic");
    }
    csv_bytes(
        &header,
        curves.rows.iter().map(|r| {
            let mut row =
                vec![r.x_nm.to_string(), r.a_analytic.to_string(), r.a_tmm.to_string(), r.eta_ratio.to_string()];
            if with_analytic_ratio {
                row.push(opt(r.eta_ratio_analytic));
            }
            row
        }),
    )
}

fn table_csv(table: &Table2) -> Result<Vec<u8>, Failure> {
    let header = [
        "cavity",
        "quantity",
        "slit_nm",
        "f",
        "published_nm",
        "analytic_nm",
        "analytic_rounded",
        "oracle_nm",
        "relative_deviation",
        "tolerance",
        "status",
    ];
    csv_bytes(
        &header,
        table.cells.iter().map(|c| {
            vec![
                c.cavity.clone(),
                format!("{:?}", c.quantity).to_lowercase(),
                c.slit_nm.to_string(),
                c.filling_factor.to_string(),
                c.published_nm.to_string(),
                c.analytic_nm.to_string(),
                c.analytic_display.clone(),
                c.oracle_nm.to_string(),
                c.relative_deviation.to_string(),
                c.tolerance.to_string(),
                if c.pass { "PASS" } else { "FAIL" }.to_string(),
            ]
        }),
    )
}

fn convergence_csv(conv: &MlcConvergence) -> Result<Vec<u8>, Failure> {
    csv_bytes(
        &["periods", "A", "T", "delta"],
        conv.rows
            .iter()
            .map(|r| vec![r.periods.to_string(), r.absorptance.to_string(), r.transmittance.to_string(), opt(r.delta)]),
    )
}

fn warn_all(warnings: &[String]) -> Outcome {
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if warnings.is_empty() {
        Outcome::Clean
    } else {
        Outcome::Warned
    }
}

enum Outcome {
    Clean,
    Warned,
}

fn sweep_range(
    range: &RangeArgs,
    spec: &DesignSpec,
    registry: &MaterialRegistry<f64>,
    variable: SweepVariable,
) -> Result<(f64, f64, f64), Failure> {
    let (lo, hi, step) = match variable {
        SweepVariable::Wire => (1.0, 30.0, 0.1),
        SweepVariable::Dielectric => {
            let qw = spec.resolve(registry)?.upper_quarter_wave().round();
            (qw - 60.0, qw + 60.0, 0.5)
        }
    };
    Ok((range.from.unwrap_or(lo), range.to.unwrap_or(hi), range.step.unwrap_or(step)))
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Design { cavity, output } => {
            let (spec, registry) = cavity.resolve(None)?;
            let report = design::run_design_flow(&spec, &registry)?;
            let bytes = match output.format {
                Format::Csv => csv_bytes(
                    &["quantity", "value", "unit"],
                    report.rows().into_iter().map(|(q, v, u)| vec![q.to_string(), v, u.to_string()]),
                )?,
                Format::StructuredReport => structured("design", &report)?,
            };
            emit(&output, &bytes)?;
            Ok(warn_all(&report.warnings))
        }
        Command::Sweep { cavity, range, variable, output } => {
            let default_mirror = match variable {
                SweepVariable::Wire => MirrorChoice::PecSurrogate,
                SweepVariable::Dielectric => MirrorChoice::Named("Ag".to_string()),
            };
            let (spec, registry) = cavity.resolve(Some(default_mirror))?;
            let (lo, hi, step) = sweep_range(&range, &spec, &registry, variable)?;
            let curves = design::sweep_curves(&spec, &registry, variable, lo, hi, step)?;
            let bytes = match output.format {
                Format::Csv => curve_csv(&curves, false)?,
                Format::StructuredReport => structured("sweep", &curves)?,
            };
            emit(&output, &bytes)?;
            Ok(warn_all(&curves.warnings))
        }
        Command::Impedance { cavity, range, output } => {
            let (spec, registry) = cavity.resolve(Some(MirrorChoice::PecSurrogate))?;
            let (lo, hi, step) = sweep_range(&range, &spec, &registry, SweepVariable::Wire)?;
            let curves = design::sweep_curves(&spec, &registry, SweepVariable::Wire, lo, hi, step)?;
            let bytes = match output.format {
                Format::Csv => curve_csv(&curves, true)?,
                Format::StructuredReport => structured("impedance", &curves)?,
            };
            emit(&output, &bytes)?;
            Ok(warn_all(&curves.warnings))
        }
        Command::Table2 { materials, output } => {
            let registry = registry(materials.as_deref())?;
            let table = design::reproduce_table2(&registry)?;
            let bytes = match output.format {
                Format::Csv => table_csv(&table)?,
                Format::StructuredReport => structured("table2", &table)?,
            };
            emit(&output, &bytes)?;
            let total = table.cells.len();
            match table.failures() {
                0 => {
                    eprintln!("table2: {total}/{total} cells pass");
                    Ok(Outcome::Clean)
                }
                n => {
                    Err(Failure { code: "tolerance", message: format!("{n} of {total} table cells outside tolerance") })
                }
            }
        }
        Command::MlcConvergence { cavity, max_periods, output } => {
            if cavity.cavity.is_some_and(|c| c != CavityKind::MultiLayer) {
                return Err(Error::Config("mlc-convergence applies to --cavity mlc only".to_string()).into());
            }
            let args = CavityArgs { cavity: Some(CavityKind::MultiLayer), ..cavity };
            let (spec, registry) = args.resolve(None)?;
            let conv = design::mlc_convergence(&spec, &registry, max_periods)?;
            let bytes = match output.format {
                Format::Csv => convergence_csv(&conv)?,
                Format::StructuredReport => structured("mlc-convergence", &conv)?,
            };
            emit(&output, &bytes)?;
            match conv.converged_at {
                Some(n) => eprintln!("converged at N = {n} (|A(N) - A(N+1)| < {})", design::CONVERGENCE_TOLERANCE),
                None => eprintln!("warning: not converged within {max_periods} periods"),
            }
            Ok(if conv.converged_at.is_some() { Outcome::Clean } else { Outcome::Warned })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        // clap's own exit code 2 would read as warning-only
        Err(e) => {
            let rendered = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&rendered).trim_start_matches("error: ");
            eprintln!("error: usage: {first}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Warned) => ExitCode::from(2),
        Err(f) => {
            eprintln!("error: {}: {}", f.code, f.message);
            ExitCode::from(1)
        }
    }
}
