#![allow(dead_code)]

use std::collections::HashMap;
use std::net::{Ipv4Addr, SocketAddr};
use std::sync::{Arc, Mutex};

use mutual_auth::clock::{Clock, SystemClock};
use mutual_auth::http::{HttpRequest, HttpResponse, Transport, TransportError};
use mutual_auth::server::UserDb;
use mutual_auth_cli::config::DemoConfig;
use mutual_auth_cli::fetch::HttpTransport;
use mutual_auth_cli::passwd::{add, Entry};
use tempfile::TempDir;

pub const USER: &str = "foobar";
pub const PASSWORD: &str = "correct horse battery";

pub const PROTECTED: &str = r#"
[[space]]
path = "/"
realm = "Protected Contents"
logout_timeout = 300

[[space]]
path = "/guest/"
realm = "Members"
mode = "optional"
unauthenticated_redirect = "/login.html"
"#;

pub struct DemoServer {
    pub port: u16,
    pub server_name: String,
    pub dir: TempDir,
}

impl DemoServer {
    pub fn url(&self, path: &str) -> String {
        format!("http://{}:{}{}", self.server_name, self.port, path)
    }

    /// A transport that reaches this server whatever `server_name` is.
    pub fn transport(&self) -> HttpTransport {
        let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, self.port));
        HttpTransport::new(None, false, &[(self.server_name.clone(), addr)]).unwrap()
    }

    pub fn user_db(&self) -> std::path::PathBuf {
        self.dir.path().join("users.db")
    }
}

/// Starts the demo server on an ephemeral port with `USER`/`PASSWORD`
/// registered in every realm of `spaces`.
pub fn start(server_name: &str, spaces: &str, clock: Arc<dyn Clock>) -> DemoServer {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("listen = \"127.0.0.1:0\"\nserver_name = \"{server_name}\"\nuser_db = \"users.db\"\n{spaces}");
    let config = DemoConfig::parse(&text, dir.path()).unwrap();
    for space in &config.spaces {
        let entry = Entry::new(space.realm.auth_domain.as_str(), &space.realm.realm, USER);
        add(&config.user_db, &entry, PASSWORD, true).unwrap();
    }
    let users = UserDb::load(&config.user_db).unwrap();
    let listener = std::net::TcpListener::bind(config.listen).unwrap();
    listener.set_nonblocking(true).unwrap();
    let port = listener.local_addr().unwrap().port();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread()
            .worker_threads(2)
            .enable_all()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            mutual_auth_cli::serve::serve(listener, &config, users, clock, [7; 32]).await
        })
        .unwrap();
    });
    DemoServer {
        port,
        server_name: server_name.to_owned(),
        dir,
    }
}

pub fn start_default() -> DemoServer {
    start("127.0.0.1", PROTECTED, Arc::new(SystemClock))
}

/// One request and its response as seen by the client.
#[derive(Debug, Clone)]
pub struct Exchange {
    pub request: HttpRequest,
    pub response: HttpResponse,
}

/// Wraps a transport and keeps every exchange.
pub struct Recording<T> {
    pub inner: T,
    pub log: Arc<Mutex<Vec<Exchange>>>,
}

impl<T> Recording<T> {
    pub fn new(inner: T) -> Self {
        Recording {
            inner,
            log: Arc::default(),
        }
    }

    pub fn take(&self) -> Vec<Exchange> {
        std::mem::take(&mut *self.log.lock().unwrap())
    }
}

impl<T: Transport> Transport for Recording<T> {
    fn round_trip(&mut self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let response = self.inner.round_trip(req)?;
        self.log.lock().unwrap().push(Exchange {
            request: req.clone(),
            response: response.clone(),
        });
        Ok(response)
    }

    fn peer_cert_digest(&mut self, host: &str, port: u16) -> Option<Vec<u8>> {
        self.inner.peer_cert_digest(host, port)
    }
}

/// Header name (lowercase) to values, for the authentication headers only.
pub fn auth_headers(resp: &HttpResponse) -> HashMap<String, Vec<String>> {
    let mut out: HashMap<String, Vec<String>> = HashMap::new();
    for (n, v) in &resp.headers {
        let n = n.to_ascii_lowercase();
        if matches!(
            n.as_str(),
            "www-authenticate" | "optional-www-authenticate" | "authentication-info" | "authentication-control"
        ) {
            out.entry(n).or_default().push(v.clone());
        }
    }
    out
}
