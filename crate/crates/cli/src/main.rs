use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use torelli_cli::report::EXIT_INVALID;
use torelli_cli::{catalog, emit_report, run_scenario, run_scenario_timed, Format, Report, ScenarioConfig};
use torelli_core::torelli_bound;

#[derive(Parser)]
#[command(name = "torelli", version, about = "Surjectivity of multiplication maps on abelian varieties")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Json => Format::Json,
            OutputFormat::Table => Format::Table,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and print its report.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        /// Overrides the sampling seed of the scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Adds wall-clock timings (the report is then no longer reproducible byte for byte).
        #[arg(long)]
        timings: bool,
    },
    /// List the built-in scenarios as JSON, or run them all.
    Catalog {
        #[arg(long)]
        run: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: OutputFormat,
    },
    /// Print the section-count bound for (g, n).
    Bound {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
    },
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code.clamp(0, 255) as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify { scenario, format, seed, timings } => {
            let report = match std::fs::read_to_string(&scenario) {
                Err(e) => Report::config_error(format!("{}: {e}", scenario.display())),
                Ok(text) => match ScenarioConfig::from_json(&text) {
                    Err(e) => Report::config_error(e.to_string()),
                    Ok(mut config) => {
                        if let Some(s) = seed {
                            config.seed = s;
                        }
                        if timings {
                            run_scenario_timed(&config)
                        } else {
                            run_scenario(&config)
                        }
                    }
                },
            };
            print!("{}", emit_report(&report, format.into()));
            exit(report.exit_code)
        }
        Command::Catalog { run: false, .. } => {
            println!("{}", serde_json::to_string_pretty(&catalog()).expect("configs always serialize"));
            exit(0)
        }
        Command::Catalog { run: true, format } => {
            let mut worst = 0;
            for config in catalog() {
                let report = run_scenario_timed(&config);
                match format {
                    OutputFormat::Table => {
                        let v = report.verdict.as_ref().map_or("-".to_string(), |v| v.kind.clone());
                        let itt = report.itt.as_ref().map_or("-".to_string(), |i| format!("{:?}", i.verdict));
                        let checks = report.checks.iter().filter(|c| c.passed()).count();
                        println!(
                            "{:<28} {:<14} ITT {:<8} checks {}/{} exit {}",
                            report.name.as_deref().unwrap_or("-"),
                            v,
                            itt,
                            checks,
                            report.checks.len(),
                            report.exit_code
                        );
                    }
                    OutputFormat::Json => print!("{}", emit_report(&report, Format::Json)),
                }
                worst = worst.max(report.exit_code);
            }
            exit(worst)
        }
        Command::Bound { g, n } => {
            if g == 0 || n == 0 {
                eprintln!("g and n must be positive");
                return exit(EXIT_INVALID);
            }
            let b = torelli_bound(g, n);
            println!("g = {g}, n = {n}: h0(L) > {} ({:.6}) suffices; least sufficient h0(L) = {}", b.exact(), b.decimal(), b.least_sufficient);
            exit(0)
        }
    }
}
