use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use mutual_auth::clock::SystemClock;
use mutual_auth::server::UserDb;
use mutual_auth_cli::config::DemoConfig;
use mutual_auth_cli::serve::serve;

/// Demo HTTP server protecting paths with Mutual authentication.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Configuration file (TOML).
    #[arg(short, long)]
    config: PathBuf,
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let args = Args::parse();
    let config = match DemoConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(78);
        }
    };
    let users = match UserDb::load(&config.user_db) {
        Ok(u) => u,
        Err(e) => {
            eprintln!("error: {}: {e}", config.user_db.display());
            return ExitCode::from(78);
        }
    };
    let listener = match tokio::net::TcpListener::bind(config.listen).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: bind {}: {e}", config.listen);
            return ExitCode::from(71);
        }
    };
    tracing::info!(addr = %listener.local_addr().map(|a| a.to_string()).unwrap_or_default(), users = users.len(), "listening");
    match serve(listener, &config, users, Arc::new(SystemClock), rand::random()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(71)
        }
    }
}
