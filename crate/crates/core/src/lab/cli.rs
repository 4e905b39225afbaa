//! `bergman-lab` argument handling.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand};

use super::{run, ConfigError, ConfigFile, ExperimentConfig, Format, Kind, PolySpec};

#[derive(Parser, Debug)]
#[command(
    name = "bergman-lab",
    version,
    about = "Extremal problems on Bergman spaces: solver sweeps and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve over P_n for each degree.
    Solve(Flags),
    /// Sweep degrees and compare against the largest.
    Converge(Flags),
    /// Perturb the kernel by ε·h at a fixed degree.
    PerturbFunctional(Flags),
    /// Perturb the extremal element by ε·h and recover its functional.
    PerturbElement(Flags),
    /// Check integral means of the extremal against the Hardy-space bound.
    Ryabykh(Flags),
    /// Extremality residuals and functional recovery for each degree.
    Certify(Flags),
}

#[derive(clap::Args, Debug)]
struct Flags {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exponent, 1 < p < ∞.
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    /// Kernel coefficients `re:im,re:im,...` (bare reals allowed), or `random:D`.
    #[arg(long, allow_hyphen_values = true)]
    kernel: Option<String>,
    /// Comma-separated, strictly increasing degrees.
    #[arg(long, allow_hyphen_values = true)]
    degrees: Option<String>,
    /// Comma-separated, strictly decreasing perturbation sizes.
    #[arg(long, allow_hyphen_values = true)]
    epsilons: Option<String>,
    /// Perturbation direction, same syntax as --kernel; random from the seed if absent.
    #[arg(long, allow_hyphen_values = true)]
    perturbation: Option<String>,
    /// Radii for the bound check.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of solver starts per case.
    #[arg(long)]
    multistart: Option<usize>,
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Add a wall_time column (makes output nondeterministic).
    #[arg(long)]
    timing: bool,
}

fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, ConfigError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| ConfigError(format!("invalid {what} entry {t:?}")))
        })
        .collect()
}

impl Flags {
    fn into_config(self, kind: Kind) -> Result<ExperimentConfig, ConfigError> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
                ConfigFile::from_json(&text)?
            }
            None => ConfigFile::default(),
        };
        if base.kind.is_some_and(|k| k != kind) {
            return Err(ConfigError(format!(
                "config file is for {}, not {kind}",
                base.kind.expect("checked")
            )));
        }
        let flags = ConfigFile {
            kind: Some(kind),
            p: self.p,
            kernel: self.kernel.as_deref().map(str::parse::<PolySpec>).transpose()?,
            degrees: self.degrees.as_deref().map(|s| list(s, "degree")).transpose()?,
            epsilons: self.epsilons.as_deref().map(|s| list(s, "epsilon")).transpose()?,
            perturbation: self
                .perturbation
                .as_deref()
                .map(str::parse::<PolySpec>)
                .transpose()?,
            radii: self.radii.as_deref().map(|s| list(s, "radius")).transpose()?,
            seed: self.seed,
            multistart: self.multistart,
            output_path: self.out,
            format: self.format,
            timing: self.timing.then_some(true),
        };
        ExperimentConfig::from_file(base.overridden_by(flags))
    }
}

/// Runs the driver and returns the process exit code: 0 on success, 1 when
/// an assertion fails (or output cannot be written), 2 on a bad invocation.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (kind, flags) = match cli.command {
        Command::Solve(f) => (Kind::Solve, f),
        Command::Converge(f) => (Kind::Converge, f),
        Command::PerturbFunctional(f) => (Kind::PerturbFunctional, f),
        Command::PerturbElement(f) => (Kind::PerturbElement, f),
        Command::Ryabykh(f) => (Kind::Ryabykh, f),
        Command::Certify(f) => (Kind::Certify, f),
    };
    let cfg = match flags.into_config(kind) {
        Ok(cfg) => cfg,
        Err(e) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd
                .find_subcommand_mut(kind.name())
                .map(|c| c.render_usage())
                .unwrap_or_else(|| Cli::command().render_usage());
            eprintln!("error: {e}\n\n{usage}");
            return 2;
        }
    };

    let record = run(&cfg);
    let written = match &cfg.output_path {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            record.write(&cfg, cfg.format, &mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            record.write(&cfg, cfg.format, &mut lock)
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 1;
    }
    if !record.passed() {
        eprintln!("{}", record.failure_report());
        return 1;
    }
    0
}
