//! Minimal HTTP message types shared by the engines, the in-memory fabric
//! and real socket transports.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub method: String,
    pub scheme: String,
    /// Host the request is addressed to (the `Host` header).
    pub host: String,
    pub port: u16,
    pub path: String,
    pub headers: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HttpResponse {
    pub status: u16,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

fn find<'a>(headers: &'a [(String, String)], name: &str) -> impl Iterator<Item = &'a str> + 'a {
    let name = name.to_owned();
    headers
        .iter()
        .filter(move |(n, _)| n.eq_ignore_ascii_case(&name))
        .map(|(_, v)| v.as_str())
}

impl HttpRequest {
    pub fn get(scheme: &str, host: &str, port: u16, path: &str) -> Self {
        HttpRequest {
            method: "GET".into(),
            scheme: scheme.into(),
            host: host.into(),
            port,
            path: path.into(),
            headers: Vec::new(),
        }
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        find(&self.headers, name).next()
    }

    pub fn set_header(&mut self, name: &str, value: impl Into<String>) {
        self.headers.retain(|(n, _)| !n.eq_ignore_ascii_case(name));
        self.headers.push((name.to_owned(), value.into()));
    }
}

impl HttpResponse {
    pub fn new(status: u16) -> Self {
        HttpResponse {
            status,
            ..Default::default()
        }
    }

    pub fn with_header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.push((name.to_owned(), value.into()));
        self
    }

    pub fn with_body(mut self, body: impl Into<Vec<u8>>) -> Self {
        self.body = body.into();
        self
    }

    pub fn header(&self, name: &str) -> Option<&str> {
        find(&self.headers, name).next()
    }

    pub fn headers_named<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a str> + 'a {
        find(&self.headers, name)
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("no route to {0}")]
    Unreachable(String),
    #[error("{0}")]
    Io(String),
}

/// Sends one request and returns the response.
pub trait Transport {
    fn round_trip(&mut self, req: &HttpRequest) -> Result<HttpResponse, TransportError>;

    /// Digest of the certificate presented by `host:port`, for TLS
    /// connections.
    fn peer_cert_digest(&mut self, _host: &str, _port: u16) -> Option<Vec<u8>> {
        None
    }
}
