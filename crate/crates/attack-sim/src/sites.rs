use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use mutual_auth::client::is_mutual_authorization;
use mutual_auth::http::{HttpRequest, HttpResponse};
use mutual_auth::pake::{compute_ob, compute_verifier, derive_pi, Kam3};
use mutual_auth::server::{AuthDecision, ProtectionSpace, ServerEngine, ServerRequest};
use mutual_auth::validation::compute_validation;
use mutual_auth::wire::{
    element_from_octets, parse_header, AuthInfo, Challenge, KexResponse, MutualHeader, Sid, AUTHENTICATION_CONTROL,
    AUTHENTICATION_INFO, AUTHORIZATION, WWW_AUTHENTICATE,
};
use num_bigint::BigUint;
use rand::RngCore;
use rand_chacha::ChaCha20Rng;

use crate::fabric::{Endpoint, Fabric};

pub const GENUINE_BODY: &[u8] = b"<h1>Account overview</h1>";

/// What the genuine server decided, for assertions after a run.
#[derive(Debug, Default)]
pub struct SiteStats {
    pub grants: Vec<String>,
    pub rejects: usize,
}

/// The real server, holding the real verifier.
pub struct GenuineSite {
    hostname: String,
    scheme: String,
    port: u16,
    cert: Option<Vec<u8>>,
    engine: ServerEngine,
    space: ProtectionSpace,
    rng: ChaCha20Rng,
    stats: Arc<Mutex<SiteStats>>,
}

impl GenuineSite {
    pub fn new(
        hostname: &str,
        scheme: &str,
        port: u16,
        cert: Option<Vec<u8>>,
        engine: ServerEngine,
        space: ProtectionSpace,
        rng: ChaCha20Rng,
    ) -> Self {
        GenuineSite {
            hostname: hostname.into(),
            scheme: scheme.into(),
            port,
            cert,
            engine,
            space,
            rng,
            stats: Arc::default(),
        }
    }

    pub fn stats(&self) -> Arc<Mutex<SiteStats>> {
        Arc::clone(&self.stats)
    }
}

impl Endpoint for GenuineSite {
    fn hostname(&self) -> &str {
        &self.hostname
    }

    fn cert_digest(&self) -> Option<Vec<u8>> {
        self.cert.clone()
    }

    fn handle(&mut self, req: &HttpRequest, _: &mut Fabric) -> HttpResponse {
        let sreq = ServerRequest {
            method: req.method.clone(),
            scheme: self.scheme.clone(),
            host: self.hostname.clone(),
            port: self.port,
            path: req.path.clone(),
            authorization: req.header(AUTHORIZATION).map(str::to_owned),
        };
        let decision = self.engine.handle(&sreq, &self.space, &mut self.rng);
        {
            let mut stats = self.stats.lock().unwrap();
            match &decision {
                AuthDecision::Grant { username, .. } => stats.grants.push(username.clone()),
                AuthDecision::Reject { .. } => stats.rejects += 1,
                _ => {}
            }
        }
        let dir = decision.directive();
        let mut resp = HttpResponse::new(dir.status);
        for (n, v) in dir.headers {
            resp = resp.with_header(n, v);
        }
        if dir.serve_content {
            resp.body = GENUINE_BODY.to_vec();
        }
        resp
    }
}

/// The five phishing archetypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// I: a look-alike page that never asks for a password through the
    /// protocol.
    NoPassword,
    /// II: challenges the user, then keeps whatever arrives.
    StealPassword,
    /// III: runs the exchange with a guessed verifier and claims success
    /// whatever `oa` says.
    BlindAccept,
    /// IV: answers the first request itself, then forwards the user's
    /// credentials to the genuine server.
    CredentialForward,
    /// V: relays every message to the genuine server, rewriting only `Host`.
    FullForward,
}

struct BlindSession {
    w_a: BigUint,
    w_b: BigUint,
    z: BigUint,
}

pub struct Phisher {
    hostname: String,
    scheme: String,
    port: u16,
    cert: Option<Vec<u8>>,
    strategy: Strategy,
    /// Challenge copied from the genuine site.
    lure: Challenge,
    target: String,
    guessed_password: String,
    rng: ChaCha20Rng,
    sessions: HashMap<Sid, BlindSession>,
}

impl Phisher {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        hostname: &str,
        scheme: &str,
        port: u16,
        cert: Option<Vec<u8>>,
        strategy: Strategy,
        lure: Challenge,
        target: &str,
        guessed_password: String,
        rng: ChaCha20Rng,
    ) -> Self {
        Phisher {
            hostname: hostname.into(),
            scheme: scheme.into(),
            port,
            cert,
            strategy,
            lure,
            target: target.into(),
            guessed_password,
            rng,
            sessions: HashMap::new(),
        }
    }

    fn challenge(&self, stale: bool) -> HttpResponse {
        let c = Challenge {
            stale,
            ..self.lure.clone()
        };
        HttpResponse::new(401)
            .with_header(WWW_AUTHENTICATE, MutualHeader::Challenge(c).to_string())
            .with_body("<form>Sign in</form>")
    }

    fn forward(&mut self, req: &HttpRequest, fabric: &mut Fabric, all_headers: bool) -> HttpResponse {
        let mut upstream = HttpRequest {
            method: req.method.clone(),
            scheme: req.scheme.clone(),
            host: self.target.clone(),
            port: req.port,
            path: req.path.clone(),
            headers: Vec::new(),
        };
        if all_headers {
            upstream.headers = req.headers.clone();
        } else if let Some(a) = req.header(AUTHORIZATION) {
            upstream.set_header(AUTHORIZATION, a);
        }
        let Ok(resp) = fabric.send(&self.hostname, &upstream) else {
            return HttpResponse::new(502);
        };
        if all_headers {
            return resp;
        }
        let mut out = HttpResponse::new(resp.status).with_body(resp.body.clone());
        for name in [WWW_AUTHENTICATE, AUTHENTICATION_INFO, AUTHENTICATION_CONTROL] {
            for v in resp.headers_named(name) {
                out = out.with_header(name, v);
            }
        }
        out
    }

    fn blind_accept(&mut self, authorization: &str) -> HttpResponse {
        let Ok(group) = mutual_auth::group::named_group(&self.lure.algorithm) else {
            return HttpResponse::new(500);
        };
        let kam = Kam3::new(group);
        match parse_header(AUTHORIZATION, authorization) {
            Ok(MutualHeader::KexRequest(kex)) => {
                let Ok(pi) = derive_pi(
                    &self.lure.algorithm,
                    self.lure.auth_domain.as_str(),
                    &self.lure.realm,
                    &kex.user,
                    &self.guessed_password,
                ) else {
                    return self.challenge(false);
                };
                let Ok(w_a) = element_from_octets(&kex.wa, group) else {
                    return self.challenge(false);
                };
                let Ok(resp) = kam.server_respond(&compute_verifier(&pi, group), &w_a, &mut self.rng) else {
                    return self.challenge(true);
                };
                let Ok(z) = kam.server_z(&w_a, &resp.s_b, &resp.w_b) else {
                    return self.challenge(true);
                };
                let sid = Sid(self.rng.next_u64());
                let header = MutualHeader::KexResponse(KexResponse {
                    sid,
                    wb: group.to_fixed_bytes(&resp.w_b),
                    nc_max: 256,
                    nc_window: 64,
                    time: 300,
                    path: "/".into(),
                });
                self.sessions.insert(sid, BlindSession { w_a, w_b: resp.w_b, z });
                HttpResponse::new(401).with_header(WWW_AUTHENTICATE, header.to_string())
            }
            Ok(MutualHeader::AuthRequest(auth)) => {
                let Some(s) = self.sessions.get(&auth.sid) else {
                    return self.challenge(true);
                };
                // oa is not checked; ob is computed for the host the user
                // believes it is talking to.
                let Ok(v) = compute_validation(
                    auth.validation,
                    &self.scheme,
                    &self.hostname,
                    self.port,
                    self.cert.as_deref(),
                ) else {
                    return HttpResponse::new(500);
                };
                let ob = compute_ob(group, &s.w_a, &s.w_b, &s.z, auth.nc, &v);
                let info = MutualHeader::AuthInfo(AuthInfo {
                    sid: auth.sid,
                    ob: ob.to_vec(),
                });
                HttpResponse::new(200)
                    .with_header(AUTHENTICATION_INFO, info.to_string())
                    .with_body("<h1>Welcome back</h1>")
            }
            _ => self.challenge(false),
        }
    }
}

impl Endpoint for Phisher {
    fn hostname(&self) -> &str {
        &self.hostname
    }

    fn cert_digest(&self) -> Option<Vec<u8>> {
        self.cert.clone()
    }

    fn handle(&mut self, req: &HttpRequest, fabric: &mut Fabric) -> HttpResponse {
        let authorization = req
            .header(AUTHORIZATION)
            .filter(|a| is_mutual_authorization(a))
            .map(str::to_owned);
        match (self.strategy, authorization) {
            (Strategy::NoPassword, _) => HttpResponse::new(200).with_body("<h1>Account overview</h1>"),
            (Strategy::FullForward, _) => self.forward(req, fabric, true),
            (_, None) => self.challenge(false),
            (Strategy::StealPassword, Some(_)) => HttpResponse::new(500).with_body("Temporary error, try later"),
            (Strategy::BlindAccept, Some(a)) => self.blind_accept(&a),
            (Strategy::CredentialForward, Some(_)) => self.forward(req, fabric, false),
        }
    }
}
