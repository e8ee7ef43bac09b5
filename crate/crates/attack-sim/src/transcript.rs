use std::fmt;

use mutual_auth::http::{HttpRequest, HttpResponse};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Request,
    Response,
}

/// One HTTP message as it crossed the fabric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub seq: usize,
    pub from: String,
    pub to: String,
    pub direction: Direction,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
    /// Rendered HTTP/1.1 octets: start line, headers, blank line, body.
    pub octets: Vec<u8>,
}

/// Every message exchanged during a run, in order. Append-only.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranscriptLog {
    messages: Vec<Message>,
}

fn render(start: &str, headers: &[(String, String)], body: &[u8]) -> Vec<u8> {
    let mut out = format!("{start}\r\n");
    for (n, v) in headers {
        out.push_str(&format!("{n}: {v}\r\n"));
    }
    out.push_str("\r\n");
    let mut out = out.into_bytes();
    out.extend_from_slice(body);
    out
}

impl TranscriptLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn record_request(&mut self, from: &str, to: &str, req: &HttpRequest) {
        let mut headers = vec![("Host".to_owned(), req.host.clone())];
        headers.extend(req.headers.iter().cloned());
        let octets = render(&format!("{} {} HTTP/1.1", req.method, req.path), &headers, &[]);
        self.push(from, to, Direction::Request, headers, Vec::new(), octets);
    }

    pub(crate) fn record_response(&mut self, from: &str, to: &str, resp: &HttpResponse) {
        let octets = render(&format!("HTTP/1.1 {}", resp.status), &resp.headers, &resp.body);
        self.push(from, to, Direction::Response, resp.headers.clone(), resp.body.clone(), octets);
    }

    fn push(
        &mut self,
        from: &str,
        to: &str,
        direction: Direction,
        headers: Vec<(String, String)>,
        body: Vec<u8>,
        octets: Vec<u8>,
    ) {
        self.messages.push(Message {
            seq: self.messages.len(),
            from: from.to_owned(),
            to: to.to_owned(),
            direction,
            headers,
            body,
            octets,
        });
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

impl fmt::Display for TranscriptLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.messages {
            writeln!(f, "--- #{} {} -> {}", m.seq, m.from, m.to)?;
            writeln!(f, "{}", String::from_utf8_lossy(&m.octets).trim_end())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanMatch {
    pub needle: usize,
    pub message: usize,
    pub offset: usize,
}

/// Exact-substring search for each needle in every message's octets.
/// Empty needles never match.
pub fn transcript_scan(log: &TranscriptLog, needles: &[&[u8]]) -> Vec<ScanMatch> {
    let mut out = Vec::new();
    for m in log.messages() {
        for (i, needle) in needles.iter().enumerate() {
            if needle.is_empty() || needle.len() > m.octets.len() {
                continue;
            }
            for (offset, window) in m.octets.windows(needle.len()).enumerate() {
                if window == *needle {
                    out.push(ScanMatch {
                        needle: i,
                        message: m.seq,
                        offset,
                    });
                }
            }
        }
    }
    out
}
