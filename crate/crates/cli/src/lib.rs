//! Command-line front end. Exit codes: 0 success, 1 configuration error,
//! 2 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use vortex_core::dynamics::{integrate, IntegrateOptions, Record};
use vortex_core::harness::{self, ExitTimeRun};
use vortex_core::numfmt::{fmt_f64, to_json};
use vortex_core::stability::{self, VerdictParams};
use vortex_core::{Complex64, Domain, Error, ExperimentConfig, Strengths, VortexState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "vortex",
    version,
    about = "Two-point-vortex confinement experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the stationary origin of a map.
    Classify {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        strengths: StrengthArgs,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Integrate one pair and print the trajectory as JSON lines.
    Simulate {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        strengths: StrengthArgs,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z1: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z2: Complex64,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Stop when some vortex reaches this radius.
        #[arg(long)]
        exit_radius: Option<f64>,
        /// Keep every n-th accepted step.
        #[arg(long, default_value_t = 1)]
        every: usize,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exit-time records for a configuration file.
    ExitTime {
        #[arg(long)]
        config: PathBuf,
    },
    /// Exit-time runs over several epsilons with a log-log fit (CSV).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated epsilons.
        #[arg(long, value_delimiter = ',', required = true)]
        epsilons: Vec<f64>,
    },
    /// Table of angle-averaged coefficients C_{m,n} (CSV).
    Coeffs {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        strengths: StrengthArgs,
        #[arg(long, default_value_t = vortex_core::series::DEFAULT_DEGREE)]
        degree: u8,
    },
    /// Confinement verdict for one initial pair (JSON).
    Verdict {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        strengths: StrengthArgs,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z1: Complex64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z2: Complex64,
        /// Diophantine constant.
        #[arg(long, default_value_t = 1e-3)]
        c: f64,
        /// Diophantine exponent.
        #[arg(long, default_value_t = 2.0)]
        nu: f64,
        /// Largest resonance order checked.
        #[arg(long, default_value_t = 50)]
        kmax: u32,
        #[arg(long, default_value_t = vortex_core::series::DEFAULT_DEGREE)]
        degree: u8,
    },
    /// Opposite-strength pair on the disc with z2 = conj(z1).
    Degenerate {
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        z1: Complex64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Exit radius is |z1(0)|^beta.
        #[arg(long, default_value_t = 0.8)]
        beta: f64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct MapArgs {
    /// Map expression in z, or disc, strip, tan:A, hex:DELTA.
    #[arg(long)]
    map: String,
    /// Parameter binding NAME=VALUE; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Radius of a disc known to lie in the image; estimated when absent.
    #[arg(long)]
    inradius: Option<f64>,
}

impl MapArgs {
    fn domain(&self) -> vortex_core::Result<Domain> {
        let mut cfg = ExperimentConfig::new(&self.map, Strengths::new(1.0, 1.0), 0.0, 1, 0);
        cfg.params = self.params.iter().cloned().collect();
        cfg.inradius = self.inradius;
        cfg.domain()
    }
}

#[derive(Debug, Args)]
struct StrengthArgs {
    /// Strength of the first vortex.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    a1: f64,
    /// Strength of the second vortex.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    a2: f64,
}

impl StrengthArgs {
    fn get(&self) -> Strengths {
        Strengths::new(self.a1, self.a2)
    }
}

/// Complex argument as `RE,IM` or `RE`.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok(Complex64::new(p(re)?, p(im)?))
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got {s:?}"))?;
    let v = v.parse::<f64>().map_err(|e| format!("{v:?}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Parses `args` (program name first) and runs the command, writing to
/// stdout and stderr. Returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_cli_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_configuration() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERIC
            }
        }
    }
}

fn emit(text: &str, path: Option<&PathBuf>, out: &mut dyn Write) -> vortex_core::Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_config(path: &PathBuf) -> vortex_core::Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> vortex_core::Result<()> {
    match cmd {
        Command::Classify {
            map,
            strengths,
            json,
        } => {
            let domain = map.domain()?;
            let r = stability::classify(&domain, strengths.get())?;
            if json {
                writeln!(out, "{}", to_json(&r)?)?;
            } else {
                let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f64);
                writeln!(out, "class={}", r.class)?;
                writeln!(out, "margin={}", fmt_f64(r.margin))?;
                writeln!(out, "tol_band={}", fmt_f64(r.tol_band))?;
                writeln!(out, "c0={},{}", fmt_f64(r.c0.re), fmt_f64(r.c0.im))?;
                writeln!(out, "c1={}", fmt_f64(r.c1))?;
                writeln!(out, "omega_c={}", opt(r.omega_c))?;
                writeln!(out, "omega={}", opt(r.omega))?;
            }
        }
        Command::Simulate {
            map,
            strengths,
            z1,
            z2,
            horizon,
            tol,
            exit_radius,
            every,
            output,
        } => {
            let domain = map.domain()?;
            let mut opts = IntegrateOptions::new(horizon, tol);
            opts.events.exit_radius = exit_radius;
            opts.record = if every <= 1 {
                Record::All
            } else {
                Record::Every(every)
            };
            let state = VortexState::new(0.0, z1, z2, strengths.get());
            let tr = integrate(&domain, &state, &opts)?;
            emit(&tr.to_json_lines()?, output.as_ref(), out)?;
        }
        Command::ExitTime { config } => {
            let cfg = read_config(&config)?;
            let run = harness::exit_time(&cfg)?;
            emit(&run.to_json_lines()?, cfg.output.as_ref(), out)?;
        }
        Command::Sweep { config, epsilons } => {
            let cfg = read_config(&config)?;
            let result = harness::sweep(&cfg, &epsilons)?;
            if let Some(path) = &cfg.output {
                let lines: vortex_core::Result<Vec<String>> =
                    result.runs.iter().map(ExitTimeRun::to_json_lines).collect();
                fs::write(path, lines?.concat())?;
            }
            out.write_all(result.to_csv().as_bytes())?;
        }
        Command::Coeffs {
            map,
            strengths,
            degree,
        } => {
            let domain = map.domain()?;
            let e = stability::hamiltonian_expansion(&domain, strengths.get(), degree)?;
            let h = stability::action_coefficients(&e);
            out.write_all(stability::c_table_csv(&h).as_bytes())?;
        }
        Command::Verdict {
            map,
            strengths,
            z1,
            z2,
            c,
            nu,
            kmax,
            degree,
        } => {
            let domain = map.domain()?;
            let params = VerdictParams {
                c,
                nu,
                kmax,
                degree,
            };
            let v = stability::confinement_verdict(&domain, strengths.get(), z1, z2, params)?;
            writeln!(out, "{}", to_json(&v)?)?;
        }
        Command::Degenerate {
            z1,
            a,
            horizon,
            tol,
            beta,
            output,
        } => {
            let domain = vortex_core::Builtin::Disc.domain()?;
            let radius = z1.norm().powf(beta);
            let rep = harness::degenerate_run(&domain, a, z1, horizon, tol, Some(radius))?;
            emit(&rep.trajectory.to_json_lines()?, output.as_ref(), out)?;
            writeln!(out, "{}", to_json(&rep.summary())?)?;
        }
    }
    Ok(())
}
