use std::process::ExitCode;

use clap::Parser;
use mutual_auth::validation::ValidationMethod;
use mutual_auth_sim::{run_scenario, Pattern};

/// Runs phishing scenarios against the client and server engines and prints
/// one report line per run. Exits 1 if any expected outcome is violated.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Patterns to run (control, I, II, III, IV, V). Defaults to all.
    #[arg(short, long)]
    pattern: Vec<Pattern>,
    /// Validation methods to run (host, tls-cert). Defaults to both.
    #[arg(short, long)]
    validation: Vec<ValidationMethod>,
    /// Seeded runs per pattern and method.
    #[arg(short, long, default_value_t = 10)]
    runs: u64,
    /// First seed.
    #[arg(short, long, default_value_t = 0)]
    seed: u64,
    /// Also dump the transcript of failing runs.
    #[arg(long)]
    transcripts: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let patterns = if args.pattern.is_empty() { Pattern::ALL.to_vec() } else { args.pattern };
    let methods = if args.validation.is_empty() {
        vec![ValidationMethod::Host, ValidationMethod::TlsCert]
    } else {
        args.validation
    };
    let mut failures = 0u64;
    for &pattern in &patterns {
        for &method in &methods {
            for seed in args.seed..args.seed + args.runs {
                match run_scenario(pattern, method, seed) {
                    Ok(report) => {
                        println!("{report}");
                        if !report.holds() {
                            failures += 1;
                            for v in report.violations() {
                                println!("  violated: {v}");
                            }
                            if args.transcripts {
                                println!("{}", report.transcript);
                            }
                        }
                    }
                    Err(e) => {
                        failures += 1;
                        println!("pattern={} validation={method} seed={seed} error={e}", pattern.label());
                    }
                }
            }
        }
    }
    println!("failures={failures}");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
