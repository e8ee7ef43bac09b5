//! The demo client: fetches URLs, authenticating when challenged, and prints
//! an indicator line for each.

use std::io::{self, Write};
use std::net::SocketAddr;
use std::sync::Arc;

use mutual_auth::client::{AbortReason, CredentialSource, Credentials, NextAction, RequestContext, UserAgent};
use mutual_auth::clock::{Clock, SystemClock};
use mutual_auth::http::{HttpRequest, HttpResponse, Transport, TransportError};
use mutual_auth::realm::RealmDescriptor;
use reqwest::Url;

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUTH_FAILED: i32 = 2;
pub const EXIT_SERVER_UNAUTHENTICATED: i32 = 3;
pub const EXIT_PROTOCOL: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

/// Indicator line, exit status and whether the body may be shown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub line: String,
    pub exit_code: i32,
    pub show_body: bool,
}

pub fn verdict(action: &NextAction) -> Verdict {
    let v = |line: String, exit_code, show_body| Verdict {
        line,
        exit_code,
        show_body,
    };
    match action {
        NextAction::Done { username } => v(format!("AUTH: mutual OK as {username}"), EXIT_OK, true),
        NextAction::DoneUnauthenticated {
            auth_available: true, ..
        } => v("AUTH: none (authentication available)".into(), EXIT_OK, true),
        NextAction::DoneUnauthenticated { .. } => v("AUTH: none".into(), EXIT_OK, true),
        NextAction::Abort(AbortReason::ServerNotAuthenticated) => v(
            "AUTH: FAILED — server not authenticated".into(),
            EXIT_SERVER_UNAUTHENTICATED,
            false,
        ),
        NextAction::Abort(AbortReason::AuthenticationRejected | AbortReason::CredentialsRefused) => {
            v("AUTH: none (authentication failed)".into(), EXIT_AUTH_FAILED, true)
        }
        NextAction::Abort(other) => v(format!("AUTH: none ({other})"), EXIT_PROTOCOL, false),
        NextAction::Resend(_) => v("AUTH: none (incomplete exchange)".into(), EXIT_PROTOCOL, false),
    }
}

/// Blocking HTTP over reqwest, with redirects left to the caller.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    cert_digest: Option<Vec<u8>>,
    trace: bool,
}

impl HttpTransport {
    /// `resolve` pins host names to addresses, bypassing DNS. Ports in those
    /// addresses are ignored; the URL's port is used.
    pub fn new(cert_digest: Option<Vec<u8>>, trace: bool, resolve: &[(String, SocketAddr)]) -> reqwest::Result<Self> {
        let mut builder = reqwest::blocking::Client::builder().redirect(reqwest::redirect::Policy::none());
        for (host, addr) in resolve {
            builder = builder.resolve(host, *addr);
        }
        Ok(HttpTransport {
            client: builder.build()?,
            cert_digest,
            trace,
        })
    }
}

impl Transport for HttpTransport {
    fn round_trip(&mut self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let url = format!("{}://{}:{}{}", req.scheme, req.host, req.port, req.path);
        let method = reqwest::Method::from_bytes(req.method.as_bytes()).map_err(|e| TransportError::Io(e.to_string()))?;
        let mut builder = self.client.request(method, &url);
        for (n, v) in &req.headers {
            builder = builder.header(n, v);
        }
        if self.trace {
            eprintln!("> {} {url}", req.method);
            for (n, v) in &req.headers {
                eprintln!("> {n}: {v}");
            }
        }
        let resp = builder.send().map_err(|e| TransportError::Io(e.to_string()))?;
        let status = resp.status().as_u16();
        let headers: Vec<(String, String)> = resp
            .headers()
            .iter()
            .map(|(n, v)| (n.as_str().to_owned(), String::from_utf8_lossy(v.as_bytes()).into_owned()))
            .collect();
        let body = resp.bytes().map_err(|e| TransportError::Io(e.to_string()))?.to_vec();
        if self.trace {
            eprintln!("< {status}");
            for (n, v) in &headers {
                eprintln!("< {n}: {v}");
            }
        }
        Ok(HttpResponse { status, headers, body })
    }

    fn peer_cert_digest(&mut self, _host: &str, _port: u16) -> Option<Vec<u8>> {
        self.cert_digest.clone()
    }
}

/// Turns a URL into the context the client computes `v` from.
pub fn context_for(url: &str) -> Result<RequestContext, String> {
    let u = Url::parse(url).map_err(|e| format!("{url}: {e}"))?;
    let host = u.host_str().ok_or_else(|| format!("{url}: no host"))?;
    let port = u.port_or_known_default().ok_or_else(|| format!("{url}: no port"))?;
    let mut path = u.path().to_owned();
    if let Some(q) = u.query() {
        path.push('?');
        path.push_str(q);
    }
    Ok(RequestContext::new(u.scheme(), host, port, &path))
}

/// Supplies `user` and a password fetched once on first use.
pub struct PromptingCredentials<F> {
    user: Option<String>,
    password: Option<zeroize::Zeroizing<String>>,
    read: F,
}

impl<F: FnMut(&str) -> io::Result<zeroize::Zeroizing<String>>> PromptingCredentials<F> {
    pub fn new(user: Option<String>, read: F) -> Self {
        PromptingCredentials {
            user,
            password: None,
            read,
        }
    }
}

impl<F: FnMut(&str) -> io::Result<zeroize::Zeroizing<String>>> CredentialSource for PromptingCredentials<F> {
    fn credentials(&mut self, realm: &RealmDescriptor) -> Option<Credentials> {
        let user = self.user.clone()?;
        if self.password.is_none() {
            let prompt = format!("Password for {user} at \"{}\" ({}): ", realm.realm, realm.auth_domain);
            self.password = (self.read)(&prompt).ok();
        }
        let pw = self.password.as_ref()?;
        Some(Credentials::new(user, pw.as_str()))
    }
}

pub struct FetchOptions {
    pub show_untrusted_body: bool,
}

/// Fetches each URL in order with one user agent, so later URLs reuse
/// sessions established by earlier ones. Returns the highest exit status.
pub fn fetch_all(
    urls: &[String],
    transport: &mut dyn Transport,
    creds: &mut dyn CredentialSource,
    opts: &FetchOptions,
    clock: Arc<dyn Clock>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let mut agent = UserAgent::new(clock);
    let mut rng = rand::rng();
    let mut worst = EXIT_OK;
    for url in urls {
        let ctx = match context_for(url) {
            Ok(c) => c,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                worst = worst.max(EXIT_USAGE);
                continue;
            }
        };
        let result = match agent.fetch(transport, ctx, creds, &mut rng) {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(err, "AUTH: none (network error: {e})");
                worst = worst.max(EXIT_PROTOCOL);
                continue;
            }
        };
        let v = verdict(&result.action);
        let _ = writeln!(err, "{}", v.line);
        if let NextAction::DoneUnauthenticated {
            redirect: Some(target), ..
        } = &result.action
        {
            let _ = writeln!(err, "note: server suggests {target}");
        }
        if v.show_body || opts.show_untrusted_body {
            let _ = out.write_all(&result.response.body);
        } else {
            let _ = writeln!(err, "(response body withheld)");
        }
        worst = worst.max(v.exit_code);
    }
    worst
}

pub fn system_clock() -> Arc<dyn Clock> {
    Arc::new(SystemClock)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_wording() {
        let done = verdict(&NextAction::Done {
            username: "foobar".into(),
        });
        assert_eq!(done.line, "AUTH: mutual OK as foobar");
        assert_eq!(done.exit_code, 0);
        let failed = verdict(&NextAction::Abort(AbortReason::ServerNotAuthenticated));
        assert_eq!(failed.line, "AUTH: FAILED — server not authenticated");
        assert_eq!(failed.exit_code, 3);
        assert!(!failed.show_body);
        let rejected = verdict(&NextAction::Abort(AbortReason::AuthenticationRejected));
        assert_eq!(rejected.line, "AUTH: none (authentication failed)");
        assert_eq!(rejected.exit_code, 2);
        let none = verdict(&NextAction::DoneUnauthenticated {
            auth_available: false,
            redirect: None,
        });
        assert_eq!(none.line, "AUTH: none");
        assert_eq!(verdict(&NextAction::Abort(AbortReason::Protocol("x".into()))).exit_code, 4);
    }

    #[test]
    fn url_contexts() {
        let c = context_for("http://WWW.Example.com/a?b=1").unwrap();
        assert_eq!((c.scheme.as_str(), c.host.as_str(), c.port, c.path.as_str()), ("http", "www.example.com", 80, "/a?b=1"));
        assert_eq!(context_for("https://h.example:8443/").unwrap().port, 8443);
        assert!(context_for("not a url").is_err());
    }

    #[test]
    fn password_is_read_once() {
        let mut reads = 0;
        let mut c = PromptingCredentials::new(Some("foobar".into()), |_: &str| {
            reads += 1;
            Ok(zeroize::Zeroizing::new("pw".to_owned()))
        });
        let realm = RealmDescriptor::new("a.example".parse().unwrap(), "r", "toy-dl-23");
        assert!(c.credentials(&realm).is_some());
        assert!(c.credentials(&realm).is_some());
        drop(c);
        assert_eq!(reads, 1);
        let mut anon = PromptingCredentials::new(None, |_: &str| Ok(zeroize::Zeroizing::new("pw".to_owned())));
        assert!(anon.credentials(&realm).is_none());
    }
}
