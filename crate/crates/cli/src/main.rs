use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nsreg::app::{self, AppConfig, Command, Format};
use nsreg::Error;

#[derive(Parser)]
#[command(name = "nsreg", version, about = "Regularity certificates and mild-solution runs for 3D Navier-Stokes data")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML config document.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set solver.dt=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Directory receiving every document; stdout gets the primary one otherwise.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Fmt::Json, global = true)]
    format: Fmt,
}

#[derive(Subcommand, Clone)]
enum Cmd {
    /// Constants document with derived thresholds.
    Constants,
    /// Certificate for the configured field.
    Certify,
    /// Pseudo-spectral run, optionally with the dichotomy check.
    Simulate,
    /// Picard iteration on the guaranteed horizon.
    Picard,
    /// Numerical checks of the kernel and Riesz estimates.
    VerifyLemmas {
        /// riesz, heat, gradient, riesz_gradient or all.
        #[arg(long)]
        lemma: Option<String>,
    },
    /// Decay or blow-up bound curves.
    Envelope,
}

#[derive(ValueEnum, Clone, Copy)]
enum Fmt {
    Json,
    Csv,
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let text = match &cli.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut overrides = cli.overrides.clone();
    let cmd = match cli.command {
        Cmd::Constants => Command::Constants,
        Cmd::Certify => Command::Certify,
        Cmd::Simulate => Command::Simulate,
        Cmd::Picard => Command::Picard,
        Cmd::VerifyLemmas { ref lemma } => {
            if let Some(l) = lemma {
                overrides.push(format!("lemmas.lemma=\"{l}\""));
            }
            Command::VerifyLemmas
        }
        Cmd::Envelope => Command::Envelope,
    };
    let cfg: AppConfig = app::load_config(&text, &overrides)?;
    let format = match cli.format {
        Fmt::Json => Format::Json,
        Fmt::Csv => Format::Csv,
    };
    let outcome = app::run(cmd, &cfg, format)?;
    match &cli.out {
        Some(dir) => app::write_all(dir, &outcome.documents)?,
        None => {
            let doc = &outcome.documents[outcome.primary];
            std::io::stdout().lock().write_all(&doc.bytes)?;
        }
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            let report = serde_json::to_string(&e.report()).expect("serializable");
            eprintln!("{report}");
            ExitCode::from(1)
        }
    }
}
