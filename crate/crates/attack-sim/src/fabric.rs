use std::collections::BTreeMap;

use mutual_auth::http::{HttpRequest, HttpResponse, Transport, TransportError};

use crate::transcript::TranscriptLog;
use crate::SimError;

/// A host on the fabric.
pub trait Endpoint {
    fn hostname(&self) -> &str;

    /// Digest of the certificate this host presents, if it speaks TLS.
    fn cert_digest(&self) -> Option<Vec<u8>> {
        None
    }

    /// Answers one request. `fabric` lets the endpoint make requests of its
    /// own, which are logged like any other traffic.
    fn handle(&mut self, req: &HttpRequest, fabric: &mut Fabric) -> HttpResponse;
}

/// In-memory network: routes requests by `Host` and logs every message.
#[derive(Default)]
pub struct Fabric {
    endpoints: BTreeMap<String, Box<dyn Endpoint>>,
    log: TranscriptLog,
}

impl Fabric {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, endpoint: Box<dyn Endpoint>) -> Result<(), SimError> {
        let host = endpoint.hostname().to_ascii_lowercase();
        if self.endpoints.contains_key(&host) {
            return Err(SimError::DuplicateHost(host));
        }
        self.endpoints.insert(host, endpoint);
        Ok(())
    }

    pub fn send(&mut self, from: &str, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let host = req.host.to_ascii_lowercase();
        // Taken out while it runs so it can call back into the fabric.
        let mut endpoint = self
            .endpoints
            .remove(&host)
            .ok_or_else(|| TransportError::Unreachable(host.clone()))?;
        self.log.record_request(from, &host, req);
        let resp = endpoint.handle(req, self);
        self.log.record_response(&host, from, &resp);
        self.endpoints.insert(host, endpoint);
        Ok(resp)
    }

    pub fn cert_digest(&self, host: &str) -> Option<Vec<u8>> {
        self.endpoints.get(&host.to_ascii_lowercase())?.cert_digest()
    }

    pub fn transcript(&self) -> &TranscriptLog {
        &self.log
    }

    pub fn into_transcript(self) -> TranscriptLog {
        self.log
    }

    /// A [`Transport`] sending as `name`.
    pub fn port<'a>(&'a mut self, name: &str) -> ClientPort<'a> {
        ClientPort {
            fabric: self,
            name: name.to_owned(),
        }
    }
}

pub struct ClientPort<'a> {
    fabric: &'a mut Fabric,
    name: String,
}

impl Transport for ClientPort<'_> {
    fn round_trip(&mut self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.fabric.send(&self.name, req)
    }

    fn peer_cert_digest(&mut self, host: &str, _port: u16) -> Option<Vec<u8>> {
        self.fabric.cert_digest(host)
    }
}
