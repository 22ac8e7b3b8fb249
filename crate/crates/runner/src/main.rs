use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uhlmann_lab::config::parse_grid;
use uhlmann_lab::{resolve, run, ExperimentKind, Overrides, RunError};

#[derive(Parser)]
#[command(name = "uhlmann-lab", version, about = "Dephasing-assisted Chern insulator preparation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSVs and report.json.
    Run(RunArgs),
    /// Print the resolved configuration as JSON.
    Config(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    experiment: Option<ExperimentKind>,
    /// JSON file merged over the experiment preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// NKX,NKY
    #[arg(long, value_parser = parse_grid)]
    grid: Option<[usize; 2]>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, env = "UHLMANN_LAB_THREADS")]
    threads: Option<usize>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            experiment: self.experiment,
            output_dir: self.out.clone(),
            grid: self.grid,
            dt: self.dt,
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, RunError> {
    match cli.command {
        Command::Config(args) => {
            let cfg = resolve(args.config.as_deref(), &args.overrides())?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => {
            let cfg = resolve(args.config.as_deref(), &args.overrides())?;
            if let Some(n) = args.threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| RunError::config(format!("thread pool: {e}")))?;
            }
            let report = run(&cfg)?;
            for r in &report.invariants {
                println!(
                    "{:<16} {:<15} value={:<4} residual={:<10} status={}",
                    r.at.label,
                    format!("{:?}", r.kind),
                    r.value.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
                    r.residual.map(|v| format!("{v:.2e}")).unwrap_or_else(|| "-".into()),
                    r.status.as_str()
                );
            }
            for t in &report.transitions {
                println!(
                    "transition {}: estimate {} in [{}, {}], min gap {:.3e}",
                    t.parameter, t.estimate, t.lower, t.upper, t.min_gap
                );
            }
            println!("wrote {} files to {}", report.files.len(), cfg.output_dir.display());
            Ok(if report.flagged() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
