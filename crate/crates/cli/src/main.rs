use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sync_core::harness::{
    self, fmt_num, linspace, parse_frequency, parse_sweep_config, run_figure, run_sweep_to_file, FigureJob,
    FigureParams, Table,
};
use sync_core::spectral::{self, components, regression_system, resolvent_spectrum};
use sync_core::{meanfield, Error, ModelParams, ScenarioKind};

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "sync", version, about = "Synchronization of coupled superradiant lasers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean-field steady state at one parameter point (JSON on stdout).
    Steady(PointArgs),
    /// Normalized emission spectrum at one parameter point (CSV).
    Spectrum {
        #[command(flatten)]
        point: PointArgs,
        /// Frequency window, units of Nγ from the carrier.
        #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
        omega_min: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        omega_max: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parameter sweep from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep rows already present in `--out` and only compute the rest.
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Data of one figure.
    Figure {
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long)]
        n: Option<u64>,
        /// Pump, units of Nγ.
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        xi: Option<f64>,
        /// Points per grid axis.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Mean field against the exact few-atom solution (JSON on stdout).
    Validate {
        #[arg(long)]
        n_small: usize,
        /// Restrict to some scenarios (repeatable); all by default.
        #[arg(long)]
        scenario: Vec<String>,
    },
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    scenario: String,
    /// Pump, units of Nγ.
    #[arg(long)]
    w: f64,
    /// Bare detuning, units of Nγ.
    #[arg(long, allow_hyphen_values = true)]
    delta: f64,
    /// Feedback strength of the symmetric classical channel (bi-classical
    /// only, required there).
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    /// Physical collective rate, e.g. `1e6`, `10 kHz`.
    #[arg(long, default_value = "1e6")]
    n_gamma: String,
}

/// Error with the exit code it maps to.
struct Failure(u8, anyhow::Error);

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let code = match e.downcast_ref::<Error>() {
            Some(Error::InvalidParams(_) | Error::Config { .. } | Error::Unknown { .. } | Error::ResumeMismatch(_)) => {
                EXIT_USAGE
            }
            _ => EXIT_SOLVER,
        };
        Failure(code, e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn usage(msg: impl std::fmt::Display) -> Failure {
    Failure(EXIT_USAGE, anyhow::anyhow!("{msg}"))
}

fn scenario(tag: &str) -> Result<ScenarioKind, Failure> {
    tag.parse().map_err(|e: Error| usage(e))
}

impl PointArgs {
    fn kind(&self) -> Result<ScenarioKind, Failure> {
        scenario(&self.scenario)
    }

    fn xi(&self) -> Result<f64, Failure> {
        match (self.kind()?, self.xi) {
            (ScenarioKind::BiClassical, Some(xi)) => Ok(xi),
            (ScenarioKind::BiClassical, None) => Err(usage("bi-classical needs --xi")),
            (_, None) => Ok(0.0),
            (k, Some(_)) => Err(usage(format!("--xi does not apply to {k}"))),
        }
    }

    fn n_gamma(&self) -> Result<f64, Failure> {
        parse_frequency(&self.n_gamma).map_err(usage)
    }

    /// Parameters in Hz.
    fn physical(&self) -> Result<ModelParams, Failure> {
        let s = self.n_gamma()?;
        Ok(ModelParams::with_feedback(self.kind()?, self.n, s, self.w * s, self.delta * s, self.xi()?)?)
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn print_out(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(anyhow::Error::from(e).context("writing stdout").into()),
        _ => Ok(()),
    }
}

fn emit(table: &Table, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => table.write(path).with_context(|| format!("writing {}", path.display()))?,
        None => print_out(&table.to_csv()?)?,
    }
    Ok(())
}

fn steady(args: &PointArgs) -> Result<(), Failure> {
    let kind = args.kind()?;
    let p = args.physical()?;
    let ss = meanfield::steady_state(kind, &p)?;
    let flux = spectral::photon_flux(kind, &ss, &p)?;
    let eig: Vec<[f64; 2]> = ss.jacobian_eigenvalues.iter().map(|e| [e.re, e.im]).collect();
    let out = json!({
        "scenario": kind.tag(),
        "n_atoms": args.n,
        "n_gamma_hz": p.collective_rate(),
        "w": args.w,
        "delta": args.delta,
        "xi": args.xi,
        "state": ss.state,
        "stable": ss.stable,
        "jacobian_eigenvalues_hz": eig,
        "residual": ss.residual_norm,
        "roots_found": ss.roots_found,
        "multiple_stable_roots": ss.multiple_stable_roots,
        "photon_flux_per_s": flux,
    });
    print_out(&(serde_json::to_string_pretty(&out).context("serializing")? + "\n"))?;
    Ok(())
}

fn spectrum(args: &PointArgs, omega_min: f64, omega_max: f64, points: usize, out: Option<&PathBuf>) -> Result<(), Failure> {
    if !(omega_max > omega_min) || points < 2 {
        return Err(usage("need omega_min < omega_max and at least two points"));
    }
    let kind = args.kind()?;
    // dimensionless: frequencies come out in units of Nγ
    let p = ModelParams::with_feedback(kind, args.n, 1.0, args.w, args.delta, args.xi()?)?;
    let ss = meanfield::steady_state(kind, &p)?;
    let rs = regression_system(kind, &ss, &p)?;
    let g0 = rs.zero_delay().re;
    if !(g0 > 1e-12 * p.n()) {
        return Err(Error::NoEmission { flux: g0 }.into());
    }
    let omega = linspace(omega_min, omega_max, points);
    let mut t = Table::new(["omega", "s_norm"]);
    t.meta("scenario", kind)
        .meta("n_atoms", args.n)
        .meta("w", fmt_num(args.w))
        .meta("delta", fmt_num(args.delta))
        .meta("xi", fmt_num(p.feedback_strength()))
        .meta("units", "omega in Nγ from the carrier; s_norm in 1/Nγ");
    let values = match components(&rs, p.collective_rate()) {
        Ok(comps) => {
            for (k, c) in comps.iter().enumerate() {
                t.meta(
                    &format!("component_{}", k + 1),
                    format!(
                        "center {} half_width {} weight {} {}",
                        fmt_num(c.center),
                        fmt_num(c.half_width),
                        fmt_num(c.weight.re),
                        fmt_num(c.weight.im)
                    ),
                );
            }
            t.meta("method", "lorentzian");
            spectral::spectrum(&comps, &omega).normalized
        }
        Err(Error::NearDefective { .. }) => {
            t.meta("method", "resolvent (near-defective regression matrix)");
            resolvent_spectrum(&rs, &omega)
        }
        Err(e) => return Err(e.into()),
    };
    for (o, v) in omega.iter().zip(values) {
        t.push_numbers(&[*o, v]);
    }
    emit(&t, out)
}

fn sweep(config: &Path, out: &Path, resume: bool, jobs: Option<usize>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config)
        .with_context(|| format!("reading {}", config.display()))
        .map_err(|e| Failure(EXIT_USAGE, e))?;
    let mut spec = parse_sweep_config(&text)?;
    if let Some(j) = jobs {
        spec.parallelism = j;
        spec.validate()?;
    }
    let outcome = run_sweep_to_file(&spec, out, resume)?;
    eprintln!(
        "{} rows ({} computed, {} failed) -> {}",
        outcome.table.rows.len(),
        outcome.computed,
        outcome.failed,
        out.display()
    );
    if outcome.all_failed() {
        return Err(Failure(EXIT_SOLVER, anyhow::anyhow!("every sweep point failed")));
    }
    Ok(())
}

fn validate(n_small: usize, tags: &[String]) -> Result<(), Failure> {
    let kinds = if tags.is_empty() {
        ScenarioKind::ALL.to_vec()
    } else {
        tags.iter().map(|t| scenario(t)).collect::<Result<_, _>>()?
    };
    let report = harness::validate(n_small, &kinds)?;
    let text = serde_json::to_string_pretty(&json!({
        "passed": report.passed(),
        "invariants_ok": report.invariants_ok(),
        "report": report,
    }))
    .context("serializing")?;
    print_out(&(text + "\n"))?;
    if !report.passed() {
        for k in &kinds {
            if let Some(d) = report.worst(*k).filter(|d| !d.pass) {
                eprintln!(
                    "{k}: {} deviates by {:.1}% at w = {}, δ = {}",
                    d.observable,
                    100.0 * d.relative,
                    d.w,
                    d.delta
                );
            }
        }
        return Err(Failure(EXIT_VALIDATION, anyhow::anyhow!("validation failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Steady(args) => steady(&args),
        Command::Spectrum {
            point,
            omega_min,
            omega_max,
            points,
            out,
        } => spectrum(&point, omega_min, omega_max, points, out.as_ref()),
        Command::Sweep {
            config,
            out,
            resume,
            jobs,
        } => sweep(&config, &out, resume, jobs),
        Command::Figure {
            id,
            out,
            scenario: sc,
            n,
            w,
            xi,
            points,
            jobs,
        } => {
            let job = FigureJob {
                id: id.parse().map_err(|e: Error| usage(e))?,
                params: FigureParams {
                    scenario: sc.as_deref().map(scenario).transpose()?,
                    n_atoms: n,
                    pump: w,
                    xi,
                    points,
                    parallelism: jobs,
                },
            };
            let table = run_figure(&job)?;
            emit(&table, Some(&out))
        }
        Command::Validate { n_small, scenario } => validate(n_small, &scenario),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
