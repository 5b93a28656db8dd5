use clap::{Parser, Subcommand};
use confprop_cli::{run_file, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "confprop", version, about = "Run conformable-derivative tasks from a config file")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute the task described by a TOML config (or an emitted JSON report)
    Run {
        config: PathBuf,
        /// output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// residual pass/fail threshold
        #[arg(long)]
        tol: Option<f64>,
        /// nodes per axis for sampled kernels
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let Cmd::Run { config, out, tol, grid, quiet } = cli.cmd;
    match run_file(&config, &out, &Overrides { tol, grid }) {
        Ok(s) => {
            if !quiet {
                println!("{} {}: {}", s.report.task, s.report.status, s.json.display());
                for (k, v) in &s.report.residuals {
                    println!("  {k} = {v:.3e}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
