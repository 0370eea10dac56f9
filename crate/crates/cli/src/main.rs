use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sweepkit_cli::{commands, load_scene, CliError, LoadedScene};

/// Swept-volume contact sets: tracing, θ fields, L.S.I. detection and envelope meshes.
#[derive(Debug, Parser)]
#[command(name = "sweepkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scene file (TOML).
    #[arg(long)]
    scene: PathBuf,
    /// Output path; defaults to the scene's `[output]` entry, then standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Contact curves at one time as CSV.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        step: Option<f64>,
    },
    /// θ, λ̈ and det D at every sampled funnel point as CSV.
    ThetaField {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// JSON L.S.I. report; exit 0 clean, 1 singular or self-intersecting.
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// OBJ tessellation of the envelope faces with a θ sidecar CSV.
    Mesh {
        #[command(flatten)]
        common: Common,
        /// Rows in t (default 32).
        #[arg(long)]
        nt: Option<usize>,
        /// Columns in p (default 32).
        #[arg(long)]
        np: Option<usize>,
    },
    /// Envelope point and first derivatives at `(p, t)`.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        time: f64,
        /// Envelope face when the contact set has several components.
        #[arg(long, default_value_t = 0)]
        face: usize,
    },
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SWEEPKIT_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Usage(format!("SWEEPKIT_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn destination(ls: &LoadedScene, cli_out: &Option<PathBuf>, configured: &Option<PathBuf>) -> Option<PathBuf> {
    cli_out.clone().or_else(|| configured.as_ref().map(|p| ls.resolve(p)))
}

fn with_output(path: Option<PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<u8, CliError>) -> Result<u8, CliError> {
    match path {
        Some(p) => {
            let file = File::create(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            let code = f(&mut w)?;
            w.flush()?;
            Ok(code)
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            let code = f(&mut w)?;
            w.flush()?;
            Ok(code)
        }
    }
}

fn load(common: &Common) -> Result<LoadedScene, CliError> {
    load_scene(Path::new(&common.scene))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    let start = Instant::now();
    let (name, code) = match &cli.command {
        Command::Trace { common, time, step } => {
            let ls = load(common)?;
            let out = destination(&ls, &common.out, &ls.config.output.trace);
            ("trace", with_output(out, |w| commands::trace(&ls, *time, *step, w))?)
        }
        Command::ThetaField { common, nt, step } => {
            let ls = load(common)?;
            let out = destination(&ls, &common.out, &ls.config.output.theta_field);
            (
                "theta-field",
                with_output(out, |w| commands::theta_field(&ls, *nt, *step, w))?,
            )
        }
        Command::Detect { common, nt, step } => {
            let ls = load(common)?;
            let out = destination(&ls, &common.out, &ls.config.output.report);
            ("detect", with_output(out, |w| commands::detect(&ls, *nt, *step, w))?)
        }
        Command::Mesh { common, nt, np } => {
            let ls = load(common)?;
            let out = destination(&ls, &common.out, &ls.config.output.mesh)
                .ok_or_else(|| CliError::Usage("mesh needs --out or output.mesh in the scene".into()))?;
            ("mesh", commands::mesh(&ls, *nt, *np, &out)?)
        }
        Command::Eval { common, p, time, face } => {
            let ls = load(common)?;
            (
                "eval",
                with_output(common.out.clone(), |w| commands::eval(&ls, *p, *time, *face, w))?,
            )
        }
    };
    eprintln!("sweepkit {name}: {:.3} s", start.elapsed().as_secs_f64());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sweepkit: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
