use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsct_cli::{cmd_conformance, cmd_pst, cmd_run, RunOptions};

#[derive(Parser)]
#[command(name = "qsct", version, about = "Qudit spin-chain transfer with entanglement tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a transfer experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Also write a matplotlib script plotting the CSV output.
        #[arg(long)]
        plot_script: bool,
    },
    /// Locate the perfect-transfer time of a chain.
    Pst {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        tmax: Option<f64>,
    },
    /// Compare closed forms with numerics and write the report.
    Conformance {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    let code = match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            plot_script,
        } => cmd_run(&config, &out, &RunOptions { jobs, plot_script }, &mut stderr),
        Command::Pst { d, nodes, tmax } => cmd_pst(d, nodes, tmax, &mut stdout, &mut stderr),
        Command::Conformance { out } => cmd_conformance(&out, &mut stderr),
    };
    ExitCode::from(code as u8)
}
