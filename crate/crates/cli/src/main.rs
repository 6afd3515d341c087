mod commands;
mod problem;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "msgeo",
    version,
    about = "Multisymplectic linear algebra and first-order field theory calculus"
)]
struct Cli {
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify a named subspace of a linear problem
    Classify {
        file: PathBuf,
        #[arg(long)]
        subspace: String,
        /// Order of the orthogonal complement (defaults to k)
        #[arg(long)]
        l: Option<usize>,
    },
    /// Darboux basis adapted to a 1-isotropic subspace
    Darboux {
        file: PathBuf,
        #[arg(long)]
        subspace: String,
        /// Distinguished subspace (ambient lift) for horizontal types
        #[arg(long, requires = "r")]
        horizontal: Option<String>,
        #[arg(long, requires = "horizontal")]
        r: Option<usize>,
    },
    /// Euler-Lagrange equations
    El { file: PathBuf },
    /// De Donder residuals for the file's connection (generic if absent)
    DeDonder { file: PathBuf },
    /// Legendre maps and, when derivable, the hamiltonian
    Legendre { file: PathBuf },
    /// Hamilton equations
    Hamilton { file: PathBuf },
    /// Image of `[point]` under alpha
    Alpha { file: PathBuf },
    /// Image of `[point]` under beta
    Beta { file: PathBuf },
    /// Equations of the lagrangian submanifold on the jet side
    Nl { file: PathBuf },
    /// Equations of the hamiltonian submanifold
    Nh { file: PathBuf },
    /// Form identities and sampled round trips between both submanifolds
    VerifyTriple {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, env = "MSGEO_SEED", default_value_t = 0)]
        seed: u64,
        /// Evaluate samples on all cores
        #[arg(long)]
        parallel: bool,
    },
    /// Radial homotopy primitive of the `[form]` payload
    Homotopy { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(report) => {
            let out = if cli.json {
                serde_json::to_string_pretty(&report.json).expect("serializable") + "\n"
            } else {
                report.text
            };
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            if report.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
