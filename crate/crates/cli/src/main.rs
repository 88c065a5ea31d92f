use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinorbit::operators::GAMMA_N;
use spinorbit::validation::{criteria, Suite};
use spinorbit::Error;

mod convert;
mod job;
mod run;
mod selftest;

const EXIT_FAILED: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "spinorbit", version, about = "Spin-orbit neutron beam simulations")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a job file: pipeline, then analyses; writes outputs and manifest.json.
    Run { config: PathBuf },
    /// Convert physical parameters to rho_c and lattice constant.
    Convert(ConvertArgs),
    /// Run the acceptance criteria at a reduced grid.
    Selftest {
        /// Print criterion ids and titles without running them.
        #[arg(long)]
        list: bool,
        /// Use the full 512^2 grid.
        #[arg(long)]
        full: bool,
        /// Run only these criteria.
        #[arg(value_name = "ID")]
        only: Vec<usize>,
    },
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("what").multiple(true).required(true).args(["gradient", "field"]))]
struct ConvertArgs {
    /// Longitudinal velocity, m/s.
    #[arg(long)]
    v_z: f64,
    /// Gyromagnetic ratio, rad/(s T).
    #[arg(long, default_value_t = GAMMA_N)]
    gamma: f64,
    /// Quadrupole gradient, T/m.
    #[arg(long, requires = "length")]
    gradient: Option<f64>,
    /// Quadrupole length, m.
    #[arg(long, requires = "gradient")]
    length: Option<f64>,
    /// Prism field, T.
    #[arg(long, requires = "theta")]
    field: Option<f64>,
    /// Prism inclination, radians or e.g. "pi/4".
    #[arg(long, requires = "field", value_parser = spinorbit::angle::parse, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Transverse coherence length, m.
    #[arg(long)]
    sigma: Option<f64>,
    /// Print JSON.
    #[arg(long)]
    json: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Format(_) => EXIT_IO,
        Error::NonFinite(_) => EXIT_NUMERIC,
        _ => EXIT_SCHEMA,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_SCHEMA);
        }
    }
    match cli.command {
        Command::Run { config } => {
            let src = match std::fs::read_to_string(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    return ExitCode::from(EXIT_IO);
                }
            };
            match run::run_job(&src, &cli.out) {
                Ok(lines) => {
                    if !cli.quiet {
                        lines.iter().for_each(|l| println!("{l}"));
                        println!("wrote {}", cli.out.join("manifest.json").display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", config.display());
                    ExitCode::from(exit_code(&e))
                }
            }
        }
        Command::Convert(a) => {
            let inputs = convert::Inputs {
                v_z: a.v_z,
                gamma_n: a.gamma,
                gradient: a.gradient,
                length: a.length,
                field: a.field,
                theta: a.theta,
                sigma: a.sigma,
            };
            match convert::convert(&inputs) {
                Ok(c) if a.json => {
                    println!("{}", serde_json::to_string(&c).expect("plain numbers serialize"));
                    ExitCode::SUCCESS
                }
                Ok(c) => {
                    c.lines().iter().for_each(|l| println!("{l}"));
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_SCHEMA)
                }
            }
        }
        Command::Selftest { list, full, only } => {
            if list {
                selftest::list();
                return ExitCode::SUCCESS;
            }
            let n = criteria().len();
            if let Some(bad) = only.iter().find(|&&id| id == 0 || id > n) {
                eprintln!("error: no criterion {bad} (1..={n})");
                return ExitCode::from(EXIT_SCHEMA);
            }
            let suite = if full { Suite::full() } else { Suite::reduced() };
            let failed = selftest::run(&suite, &only, !cli.quiet);
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                let ids: Vec<String> = failed.iter().map(|i| i.to_string()).collect();
                eprintln!("failed criteria: {}", ids.join(", "));
                ExitCode::from(EXIT_FAILED)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&Error::NonFinite(3)), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
        assert_eq!(exit_code(&Error::Format("x".into())), EXIT_IO);
        assert_eq!(exit_code(&Error::Config { line: 1, message: "x".into() }), EXIT_SCHEMA);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
