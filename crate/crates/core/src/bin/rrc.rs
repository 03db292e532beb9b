use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rrc::mechanisms::parse_mechanisms;
use rrc::sim;

#[derive(Parser)]
#[command(name = "rrc", version, about = "Matching under resource-regional caps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate replica markets and a manifest from an experiment config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run mechanisms on every generated market and audit the outcomes.
    Run {
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated, e.g. `irc,imc,csd`.
        #[arg(long)]
        mechanisms: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        verbose_witnesses: bool,
    },
    /// Aggregate results into table.csv and table.txt.
    Table {
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the stability census of a fixture or market file.
    Oracle { target: String },
    /// List bundled fixtures, optionally writing their market files.
    Fixtures {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Generate { config, out, seed, jobs } => {
            let manifest = sim::cmd_generate(&config, &out, seed, jobs)?;
            println!(
                "wrote {} markets to {} (config {})",
                manifest.markets.len(),
                out.display(),
                &manifest.config_digest[..12]
            );
        }
        Command::Run {
            out,
            mechanisms,
            jobs,
            verbose_witnesses,
        } => {
            let mechanisms = mechanisms.as_deref().map(parse_mechanisms).transpose()?;
            let results = sim::cmd_run(&out, mechanisms.as_deref(), jobs, verbose_witnesses)?;
            println!("wrote {} results to {}", results.len(), out.join(sim::RESULTS_FILE).display());
        }
        Command::Table { out } => {
            let rows = sim::cmd_table(&out)?;
            print!("{}", sim::table_text(&rows));
        }
        Command::Oracle { target } => print!("{}", sim::cmd_oracle(&target)?),
        Command::Fixtures { out } => print!("{}", sim::cmd_fixtures(out.as_deref())?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
