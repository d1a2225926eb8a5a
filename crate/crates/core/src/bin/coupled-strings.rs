use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use coupled_strings::sweep::{run_certify, run_sweep, SweepConfig};
use coupled_strings::zariski::{exceptional_roots, CertificateId};
use coupled_strings::{Error, ModelKind, Result};

#[derive(Parser)]
#[command(version, about = "Lyapunov spectra and Zariski-density certificates for coupled strings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lyapunov + certificate sweep over an energy grid.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Certificate-only sweep with a root footer.
    Certify {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print one transfer matrix, row-major.
    Transfer {
        #[arg(long)]
        model: ModelKind,
        #[arg(long, allow_hyphen_values = true)]
        energy: f64,
        #[arg(long, value_delimiter = ',', num_args = 1..=2, required = true, allow_hyphen_values = true)]
        omega: Vec<f64>,
    },
    /// Zeros of a determinant certificate on an interval.
    Roots {
        #[arg(long)]
        model: ModelKind,
        #[arg(long)]
        cert: CertificateId,
        #[arg(long, value_delimiter = ',', num_args = 1..=2, required = true, allow_hyphen_values = true)]
        interval: Vec<f64>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

fn load(config: &Path, workers: Option<usize>) -> Result<SweepConfig> {
    let mut c = SweepConfig::load(config)?;
    if workers.is_some() {
        c.workers = workers;
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep { config, workers } => {
            let report = run_sweep(&load(&config, workers)?)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.summary);
        }
        Command::Certify { config, workers } => {
            let csv = run_certify(&load(&config, workers)?)?;
            print!("{csv}");
        }
        Command::Transfer { model, energy, omega } => {
            let spec = coupled_strings::ModelSpec::new(
                model,
                coupled_strings::ParamDistribution::point_mass([omega[0], omega[1]]),
            );
            let m = spec.transfer(energy, [omega[0], omega[1]])?;
            for i in 0..4 {
                let row: Vec<String> = (0..4).map(|j| format!("{:.16e}", m.as_mat()[(i, j)])).collect();
                println!("{}", row.join(" "));
            }
        }
        Command::Roots { model, cert, interval, tol } => {
            if cert.model() != model {
                return Err(Error::InvalidInput(format!(
                    "certificate {cert} belongs to the {} model",
                    cert.model().name()
                )));
            }
            let report = exceptional_roots(cert, (interval[0], interval[1]), tol)?;
            for r in &report.roots {
                println!("root {r:?}");
            }
            for r in &report.suspected_double {
                println!("double {r:?}");
            }
        }
    }
    Ok(())
}

fn pair_check(name: &str, v: &[f64]) {
    if v.len() != 2 {
        Cli::command()
            .error(clap::error::ErrorKind::WrongNumberOfValues, format!("--{name} takes two values, got {}", v.len()))
            .exit();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Transfer { omega, .. } => pair_check("omega", omega),
        Command::Roots { interval, .. } => pair_check("interval", interval),
        _ => {}
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
