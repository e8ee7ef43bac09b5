use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args as ClapArgs, Parser, Subcommand};
use mutual_auth::group::DL_2048;
use mutual_auth_cli::passwd::{add, remove, verify, Entry};
use mutual_auth_cli::password::read_password;

/// Manages the server's verifier file.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Verifier file.
    #[arg(short, long)]
    file: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add a user, prompting for the password.
    Add {
        #[command(flatten)]
        who: Who,
        /// Replace an existing record.
        #[arg(long)]
        force: bool,
    },
    /// Remove a user.
    Remove {
        #[command(flatten)]
        who: Who,
    },
    /// Check a password against the stored verifier. Exits 1 on mismatch.
    Verify {
        #[command(flatten)]
        who: Who,
    },
}

#[derive(ClapArgs)]
struct Who {
    #[arg(long)]
    auth_domain: String,
    #[arg(long)]
    realm: String,
    #[arg(long)]
    user: String,
    #[arg(long, default_value = DL_2048)]
    algorithm: String,
}

impl Who {
    fn entry(&self) -> Entry {
        Entry {
            algorithm: self.algorithm.clone(),
            ..Entry::new(&self.auth_domain, &self.realm, &self.user)
        }
    }
}

fn password(who: &Who) -> Result<zeroize::Zeroizing<String>, String> {
    read_password(&format!("Password for {}: ", who.user)).map_err(|e| format!("reading password: {e}"))
}

fn run(args: Args) -> Result<ExitCode, String> {
    match args.command {
        Command::Add { who, force } => {
            let pw = password(&who)?;
            add(&args.file, &who.entry(), &pw, force).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Remove { who } => {
            remove(&args.file, &who.entry()).map_err(|e| e.to_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { who } => {
            let pw = password(&who)?;
            if verify(&args.file, &who.entry(), &pw).map_err(|e| e.to_string())? {
                println!("ok");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("mismatch");
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
