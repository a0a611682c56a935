use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ks_stab::expcli::{self, exit, parse_config, run_experiment, summarize, RunStatus};
use ks_stab::Error;

#[derive(Parser)]
#[command(name = "ks-stab", version, about = "Feedback stabilization experiments for the 1-D Kuramoto-Sivashinsky equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment and write its CSV files and manifest.
    Run(Box<RunArgs>),
    /// Tabulate projection norms over actuator counts and volume fractions.
    ProjTable {
        #[arg(long, default_value_t = 128)]
        max_m: usize,
        /// Comma-separated volume fractions.
        #[arg(long, default_value = "0.1,0.2,0.5")]
        r: String,
        #[arg(long)]
        output_dir: Option<String>,
    },
    /// Summarize run manifests and flag acceptance violations.
    Summarize {
        /// Exit with status 4 when any run failed or violates a check.
        #[arg(long)]
        strict: bool,
        manifests: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// fluid-free, fluid-controlled, flame-free, flame-controlled,
    /// convergence-fluid, convergence-flame, proj-table or spectrum-report.
    #[arg(long)]
    experiment: Option<String>,
    /// `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nu2: Option<String>,
    #[arg(long)]
    nu1: Option<String>,
    #[arg(long)]
    nu0: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Number of actuators.
    #[arg(long)]
    m: Option<String>,
    /// Actuator volume fraction in (0, 1).
    #[arg(long)]
    r: Option<String>,
    /// Galerkin modes.
    #[arg(long)]
    n: Option<String>,
    /// Final time.
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    x_step: Option<String>,
    #[arg(long)]
    sample_every: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    /// Refinement levels of a convergence study.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    max_m: Option<String>,
    #[arg(long)]
    r_values: Option<String>,
}

impl RunArgs {
    fn flags(&self) -> Vec<(String, String)> {
        let pairs = [
            ("experiment", &self.experiment),
            ("nu2", &self.nu2),
            ("nu1", &self.nu1),
            ("nu0", &self.nu0),
            ("lambda", &self.lambda),
            ("m", &self.m),
            ("r", &self.r),
            ("n", &self.n),
            ("t", &self.t),
            ("dt", &self.dt),
            ("x_step", &self.x_step),
            ("sample_every", &self.sample_every),
            ("output_dir", &self.output_dir),
            ("levels", &self.levels),
            ("max_m", &self.max_m),
            ("r_values", &self.r_values),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(expcli::exit_code(err) as u8)
}

fn run(config: Option<PathBuf>, flags: Vec<(String, String)>) -> ExitCode {
    let cfg = match parse_config(config.as_deref(), &flags) {
        Ok(cfg) => cfg,
        Err(Error::Io(e)) => {
            eprintln!("error: cannot read config: {e}");
            return ExitCode::from(exit::CONFIG as u8);
        }
        Err(e) => return fail(&e),
    };
    eprintln!("running {} into {}", cfg.experiment, cfg.output_dir.display());
    let manifest = match run_experiment(&cfg) {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    for (k, v) in &manifest.summary {
        if v.fract() == 0.0 && v.abs() < 1e15 {
            println!("{k} = {v}");
        } else {
            println!("{k} = {v:.6e}");
        }
    }
    println!(
        "wrote {} files and {} ({:.1} s)",
        manifest.outputs.len(),
        cfg.output_dir.join(expcli::MANIFEST_FILE).display(),
        manifest.wall_seconds()
    );
    match manifest.status {
        RunStatus::Ok => ExitCode::SUCCESS,
        RunStatus::Failed => {
            eprintln!("error: {}", manifest.error.as_deref().unwrap_or("run failed"));
            ExitCode::from(exit::BLOW_UP as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            let flags = args.flags();
            run(args.config, flags)
        }
        Command::ProjTable { max_m, r, output_dir } => {
            let mut flags = vec![
                ("experiment".to_string(), "proj-table".to_string()),
                ("max_m".to_string(), max_m.to_string()),
                ("r_values".to_string(), r),
            ];
            if let Some(dir) = output_dir {
                flags.push(("output_dir".to_string(), dir));
            }
            run(None, flags)
        }
        Command::Summarize { strict, manifests } => match summarize(&manifests) {
            Ok(summary) => {
                print!("{}", summary.render());
                if strict && summary.violations() > 0 {
                    ExitCode::from(exit::STRICT_VIOLATION as u8)
                } else {
                    ExitCode::SUCCESS
                }
            }
            Err(e) => fail(&e),
        },
    }
}
