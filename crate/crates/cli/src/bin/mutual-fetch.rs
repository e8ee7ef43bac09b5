use std::net::{IpAddr, SocketAddr};
use std::process::ExitCode;

use clap::Parser;
use mutual_auth_cli::fetch::{fetch_all, system_clock, FetchOptions, HttpTransport, PromptingCredentials, EXIT_PROTOCOL, EXIT_USAGE};
use mutual_auth_cli::password::read_password;

/// Fetches URLs, authenticating mutually when a server asks.
///
/// The authentication result goes to stderr, the body to stdout. Exit
/// status: 0 trusted, 2 authentication failed, 3 server not authenticated,
/// 4 protocol or network error, 64 usage.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// URLs fetched in order; later ones reuse earlier sessions.
    #[arg(required = true)]
    urls: Vec<String>,
    /// Username to offer when challenged. Without it challenges are declined.
    #[arg(short, long)]
    user: Option<String>,
    /// SHA-256 of the server certificate (hex), for tls-cert validation.
    #[arg(long)]
    cert_digest: Option<String>,
    /// Use IP for HOST instead of resolving it, e.g.
    /// www.example.com=127.0.0.1. The port comes from the URL. Repeatable.
    #[arg(long, value_name = "HOST=IP")]
    resolve: Vec<String>,
    /// Print request and response headers to stderr.
    #[arg(short, long)]
    trace: bool,
    /// Print the body even when the server failed to authenticate.
    #[arg(long)]
    show_untrusted_body: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let digest = match args.cert_digest.as_deref().map(hex::decode).transpose() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: --cert-digest: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let mut resolve = Vec::new();
    for r in &args.resolve {
        match r.split_once('=').map(|(h, a)| (h, a.parse::<IpAddr>())) {
            Some((host, Ok(ip))) => resolve.push((host.to_owned(), SocketAddr::new(ip, 0))),
            _ => {
                eprintln!("error: --resolve `{r}`: expected HOST=IP");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
    }
    let mut transport = match HttpTransport::new(digest, args.trace, &resolve) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PROTOCOL as u8);
        }
    };
    let mut creds = PromptingCredentials::new(args.user, read_password);
    let opts = FetchOptions {
        show_untrusted_body: args.show_untrusted_body,
    };
    let code = fetch_all(
        &args.urls,
        &mut transport,
        &mut creds,
        &opts,
        system_clock(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
