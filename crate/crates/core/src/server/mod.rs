//! Server-side protocol engine.
//!
//! [`ServerEngine::handle`] takes one request routed to a
//! [`ProtectionSpace`] and returns an [`AuthDecision`]; the host application
//! turns that into a status and headers with [`AuthDecision::directive`].

pub mod session;
pub mod userdb;

use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use hmac::{Hmac, Mac};
use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use sha2::Sha256;
use thiserror::Error;

use crate::clock::Clock;
use crate::error::{PakeError, WireError};
use crate::group::GroupParams;
use crate::pake::{compute_oa, compute_ob, confirmations_equal, random_scalar, Kam3};
use crate::realm::RealmDescriptor;
use crate::validation::{compute_validation, ValidationElement, ValidationMethod};
use crate::wire::{
    element_from_octets, parse_header, AuthControl, AuthInfo, AuthRequest, Challenge, KexRequest, KexResponse,
    MutualHeader, Sid, AUTHENTICATION_CONTROL, AUTHENTICATION_INFO, AUTHORIZATION, OPTIONAL_WWW_AUTHENTICATE,
    SCHEME, WWW_AUTHENTICATE,
};

pub use session::{gc_sessions, nonce_check_and_mark, NonceVerdict, NonceWindow, ServerSession, SessionStore};
pub use userdb::{lookup, UserDb, UserDbError, UserRecord};

use session::lock;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ServerError {
    #[error("path prefix must start with `/`: `{0}`")]
    BadPathPrefix(String),
    #[error("validation method `{0}` is not supported")]
    UnsupportedValidation(ValidationMethod),
    #[error("control policy has no directives")]
    EmptyControlPolicy,
    #[error("{0}")]
    Pake(#[from] PakeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuthMode {
    Required,
    Optional,
}

/// Authentication-Control settings for a protection space.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ControlPolicy {
    pub logout_timeout_s: Option<u64>,
    pub unauthenticated_redirect: Option<String>,
}

/// Builds the Authentication-Control header for `policy`.
pub fn emit_control(policy: &ControlPolicy) -> Result<AuthControl, ServerError> {
    if policy.logout_timeout_s.is_none() && policy.unauthenticated_redirect.is_none() {
        return Err(ServerError::EmptyControlPolicy);
    }
    Ok(AuthControl {
        logout_timeout: policy.logout_timeout_s,
        unauthenticated_redirect: policy.unauthenticated_redirect.clone(),
    })
}

/// A URL prefix protected under one realm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectionSpace {
    pub realm: RealmDescriptor,
    pub path_prefix: String,
    pub mode: AuthMode,
    pub validation: ValidationMethod,
    pub control: ControlPolicy,
}

impl ProtectionSpace {
    pub fn new(
        realm: RealmDescriptor,
        path_prefix: impl Into<String>,
        mode: AuthMode,
        validation: ValidationMethod,
    ) -> Result<Self, ServerError> {
        let path_prefix = path_prefix.into();
        if !path_prefix.starts_with('/') {
            return Err(ServerError::BadPathPrefix(path_prefix));
        }
        if validation == ValidationMethod::TlsKey {
            return Err(ServerError::UnsupportedValidation(validation));
        }
        realm.group()?;
        Ok(ProtectionSpace {
            realm,
            path_prefix,
            mode,
            validation,
            control: ControlPolicy::default(),
        })
    }

    pub fn with_control(mut self, control: ControlPolicy) -> Self {
        self.control = control;
        self
    }

    pub fn covers(&self, path: &str) -> bool {
        path.starts_with(&self.path_prefix)
    }

    fn group(&self) -> &'static GroupParams {
        self.realm.group().expect("checked in ProtectionSpace::new")
    }

    fn challenge(&self, stale: bool) -> Challenge {
        Challenge {
            algorithm: self.realm.algorithm_id.clone(),
            validation: self.validation,
            auth_domain: self.realm.auth_domain.clone(),
            realm: self.realm.realm.clone(),
            stale,
        }
    }

    fn authenticated_control(&self) -> Option<AuthControl> {
        self.control.logout_timeout_s.map(|t| AuthControl {
            logout_timeout: Some(t),
            unauthenticated_redirect: None,
        })
    }

    fn unauthenticated_control(&self) -> Option<AuthControl> {
        self.control.unauthenticated_redirect.as_ref().map(|url| AuthControl {
            logout_timeout: None,
            unauthenticated_redirect: Some(url.clone()),
        })
    }
}

/// What the engine needs to know about an incoming request.
///
/// `host` and `port` must be the server's own configured identity, not the
/// client-supplied `Host` header: they feed the validation element.
#[derive(Debug, Clone)]
pub struct ServerRequest {
    pub method: String,
    pub scheme: String,
    pub host: String,
    pub port: u16,
    pub path: String,
    pub authorization: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub session_lifetime_s: u64,
    pub nc_max: u32,
    pub nc_window: u32,
    pub session_capacity: usize,
    /// Digest of the served certificate, needed for `validation=tls-cert`.
    pub tls_cert_digest: Option<Vec<u8>>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            session_lifetime_s: 300,
            nc_max: 256,
            nc_window: 64,
            session_capacity: 10_000,
            tls_cert_digest: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    Malformed(WireError),
    WrongRealm,
    InvalidElement,
    DegenerateExchange,
    UnknownSession,
    SessionExpired,
    NonceReplay,
    NonceOutOfWindow,
    NonceExhausted,
    BadConfirmation,
    Misconfigured(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuthDecision {
    /// No credentials were offered. `optional` selects the 200 form.
    SendChallenge {
        challenge: MutualHeader,
        optional: bool,
        control: Option<AuthControl>,
    },
    SendKexResponse(MutualHeader),
    Grant {
        username: String,
        sid: Sid,
        auth_info: MutualHeader,
        control: Option<AuthControl>,
    },
    Reject {
        reason: RejectReason,
        stale: bool,
        challenge: MutualHeader,
    },
}

/// Status and headers the host application should emit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseDirective {
    pub status: u16,
    pub headers: Vec<(&'static str, String)>,
    /// Whether the protected content should be served with this response.
    pub serve_content: bool,
}

impl AuthDecision {
    pub fn is_grant(&self) -> bool {
        matches!(self, AuthDecision::Grant { .. })
    }

    pub fn directive(&self) -> ResponseDirective {
        let mut headers = Vec::new();
        let mut push = |h: &MutualHeader| headers.push((h.header_name(), h.to_string()));
        let (status, serve_content) = match self {
            AuthDecision::SendChallenge {
                challenge,
                optional,
                control,
            } => {
                push(challenge);
                if let Some(c) = control {
                    push(&MutualHeader::AuthControl(c.clone()));
                }
                if *optional {
                    (200, true)
                } else {
                    (401, false)
                }
            }
            AuthDecision::SendKexResponse(h) => {
                push(h);
                (401, false)
            }
            AuthDecision::Grant { auth_info, control, .. } => {
                push(auth_info);
                if let Some(c) = control {
                    push(&MutualHeader::AuthControl(c.clone()));
                }
                (200, true)
            }
            AuthDecision::Reject { reason, challenge, .. } => {
                push(challenge);
                match reason {
                    RejectReason::Malformed(_) => (400, false),
                    RejectReason::Misconfigured(_) => (500, false),
                    _ => (401, false),
                }
            }
        };
        ResponseDirective {
            status,
            headers,
            serve_content,
        }
    }
}

/// The server-side state machine plus its user database and session store.
pub struct ServerEngine {
    config: ServerConfig,
    users: RwLock<UserDb>,
    sessions: SessionStore,
    clock: Arc<dyn Clock>,
    decoy_key: [u8; 32],
}

impl ServerEngine {
    /// `decoy_key` keys the pseudorandom verifiers handed to unknown users;
    /// it must stay secret and should stay stable across restarts.
    pub fn new(config: ServerConfig, users: UserDb, clock: Arc<dyn Clock>, decoy_key: [u8; 32]) -> Self {
        ServerEngine {
            sessions: SessionStore::new(config.session_capacity),
            config,
            users: RwLock::new(users),
            clock,
            decoy_key,
        }
    }

    pub fn config(&self) -> &ServerConfig {
        &self.config
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.sessions
    }

    pub fn users(&self) -> RwLockReadGuard<'_, UserDb> {
        self.users.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn users_mut(&self) -> RwLockWriteGuard<'_, UserDb> {
        self.users.write().unwrap_or_else(|e| e.into_inner())
    }

    pub fn now(&self) -> u64 {
        self.clock.now()
    }

    /// Removes expired sessions.
    pub fn gc_sessions(&self) -> usize {
        self.sessions.gc(self.clock.now())
    }

    pub fn handle<R: RngCore + CryptoRng + ?Sized>(
        &self,
        req: &ServerRequest,
        space: &ProtectionSpace,
        rng: &mut R,
    ) -> AuthDecision {
        let Some(text) = req.authorization.as_deref().filter(|a| is_mutual(a)) else {
            return AuthDecision::SendChallenge {
                challenge: match space.mode {
                    AuthMode::Required => MutualHeader::Challenge(space.challenge(false)),
                    AuthMode::Optional => MutualHeader::OptionalChallenge(space.challenge(false)),
                },
                optional: space.mode == AuthMode::Optional,
                control: space.unauthenticated_control(),
            };
        };
        match parse_header(AUTHORIZATION, text) {
            Ok(MutualHeader::KexRequest(kex)) => self.key_exchange(&kex, space, rng),
            Ok(MutualHeader::AuthRequest(auth)) => self.authenticate(req, &auth, space),
            Ok(_) => reject(space, RejectReason::Malformed(WireError::UnknownHeader(AUTHORIZATION.into())), false),
            Err(e) => reject(space, RejectReason::Malformed(e), false),
        }
    }

    fn key_exchange<R: RngCore + CryptoRng + ?Sized>(
        &self,
        kex: &KexRequest,
        space: &ProtectionSpace,
        rng: &mut R,
    ) -> AuthDecision {
        if !addresses_space(&kex.algorithm, kex.validation, &kex.auth_domain, space) {
            return reject(space, RejectReason::WrongRealm, false);
        }
        let group = space.group();
        let Ok(w_a) = element_from_octets(&kex.wa, group) else {
            return reject(space, RejectReason::InvalidElement, false);
        };
        if !group.validate_element(&w_a, true) {
            return reject(space, RejectReason::InvalidElement, false);
        }

        let kam = Kam3::new(group);
        let s_b = random_scalar(group, rng).as_biguint().clone();
        let verifier = {
            let users = self.users();
            users
                .lookup(space.realm.auth_domain.as_str(), &space.realm.realm, &kex.user)
                .map(|r| r.verifier.clone())
        };
        // Unknown users get a keyed pseudorandom verifier and otherwise go
        // through the same steps; they fail later at the oa check.
        let response = match &verifier {
            Some(v) => kam.server_respond_with(v, &w_a, s_b),
            None => kam.server_respond_decoy(&self.decoy_exponent(&space.realm, &kex.user), &w_a, s_b),
        };
        let response = match response {
            Ok(r) => r,
            Err(PakeError::DegenerateExchange) => return reject(space, RejectReason::DegenerateExchange, true),
            Err(_) => return reject(space, RejectReason::InvalidElement, false),
        };
        let z = match kam.server_z(&w_a, &response.s_b, &response.w_b) {
            Ok(z) => z,
            Err(_) => return reject(space, RejectReason::DegenerateExchange, true),
        };

        let sid = loop {
            let sid = Sid(rng.next_u64());
            if !self.sessions.contains(sid) {
                break sid;
            }
        };
        let now = self.clock.now();
        self.sessions.insert(ServerSession {
            sid,
            username: kex.user.clone(),
            realm: space.realm.clone(),
            w_a,
            w_b: response.w_b.clone(),
            z,
            created_at: now,
            last_used: now,
            lifetime_s: self.config.session_lifetime_s,
            window: NonceWindow::new(self.config.nc_max, self.config.nc_window),
        });
        AuthDecision::SendKexResponse(MutualHeader::KexResponse(KexResponse {
            sid,
            wb: group.to_fixed_bytes(&response.w_b),
            nc_max: self.config.nc_max,
            nc_window: self.config.nc_window,
            time: self.config.session_lifetime_s,
            path: space.path_prefix.clone(),
        }))
    }

    fn authenticate(&self, req: &ServerRequest, auth: &AuthRequest, space: &ProtectionSpace) -> AuthDecision {
        if !addresses_space(&auth.algorithm, auth.validation, &auth.auth_domain, space) {
            return reject(space, RejectReason::WrongRealm, false);
        }
        let v = match self.validation(req, space) {
            Ok(v) => v,
            Err(reason) => return reject(space, reason, false),
        };
        let Some(handle) = self.sessions.get(auth.sid) else {
            return reject(space, RejectReason::UnknownSession, true);
        };
        let mut session = lock(&handle);
        if session.username != auth.user || !session.realm.same_realm(&space.realm) {
            return reject(space, RejectReason::UnknownSession, true);
        }
        let now = self.clock.now();
        if session.is_expired(now) {
            drop(session);
            self.sessions.remove(auth.sid);
            return reject(space, RejectReason::SessionExpired, true);
        }
        match session.window.check(auth.nc) {
            NonceVerdict::Accept => {}
            NonceVerdict::Replay => return reject(space, RejectReason::NonceReplay, false),
            NonceVerdict::OutOfWindow => return reject(space, RejectReason::NonceOutOfWindow, false),
            NonceVerdict::ExceedsMax => return reject(space, RejectReason::NonceExhausted, true),
        }
        let group = space.group();
        let expected = compute_oa(group, &session.w_a, &session.w_b, &session.z, auth.nc, &v);
        if !confirmations_equal(&expected, &auth.oa) {
            drop(session);
            self.sessions.remove(auth.sid);
            return reject(space, RejectReason::BadConfirmation, false);
        }
        let verdict = nonce_check_and_mark(&mut session, auth.nc);
        debug_assert_eq!(verdict, NonceVerdict::Accept);
        session.last_used = now;
        let ob = compute_ob(group, &session.w_a, &session.w_b, &session.z, auth.nc, &v);
        AuthDecision::Grant {
            username: session.username.clone(),
            sid: auth.sid,
            auth_info: MutualHeader::AuthInfo(AuthInfo {
                sid: auth.sid,
                ob: ob.to_vec(),
            }),
            control: space.authenticated_control(),
        }
    }

    fn validation(&self, req: &ServerRequest, space: &ProtectionSpace) -> Result<ValidationElement, RejectReason> {
        compute_validation(
            space.validation,
            &req.scheme,
            &req.host,
            req.port,
            self.config.tls_cert_digest.as_deref(),
        )
        .map_err(|e| RejectReason::Misconfigured(e.to_string()))
    }

    fn decoy_exponent(&self, realm: &RealmDescriptor, username: &str) -> BigUint {
        let mut mac = Hmac::<Sha256>::new_from_slice(&self.decoy_key).expect("any key length works");
        for part in [
            realm.algorithm_id.as_str(),
            realm.auth_domain.as_str(),
            realm.realm.as_str(),
            username,
        ] {
            mac.update(&(part.len() as u32).to_be_bytes());
            mac.update(part.as_bytes());
        }
        let d = BigUint::from_bytes_be(&mac.finalize().into_bytes());
        let r = realm.group().expect("realm of a protection space").r();
        let d = d % r;
        if d == BigUint::ZERO {
            BigUint::from(1u8)
        } else {
            d
        }
    }
}

fn is_mutual(authorization: &str) -> bool {
    authorization
        .get(..SCHEME.len())
        .is_some_and(|s| s.eq_ignore_ascii_case(SCHEME))
        && authorization[SCHEME.len()..].starts_with([' ', '\t'])
}

fn addresses_space(
    algorithm: &str,
    validation: ValidationMethod,
    auth_domain: &crate::wire::AuthDomainPattern,
    space: &ProtectionSpace,
) -> bool {
    algorithm == space.realm.algorithm_id && validation == space.validation && auth_domain.same_domain(&space.realm.auth_domain)
}

fn reject(space: &ProtectionSpace, reason: RejectReason, stale: bool) -> AuthDecision {
    AuthDecision::Reject {
        reason,
        stale,
        challenge: MutualHeader::Challenge(space.challenge(stale)),
    }
}

/// Header names the engine may emit.
pub const EMITTED_HEADERS: [&str; 4] = [
    WWW_AUTHENTICATE,
    OPTIONAL_WWW_AUTHENTICATE,
    AUTHENTICATION_INFO,
    AUTHENTICATION_CONTROL,
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ManualClock;
    use crate::group::{named_group, ModexpProbe, DL_2048, TOY_DL_23};
    use crate::pake::{compute_verifier, derive_pi, WeakSecret};
    use crate::wire::{serialize_header, AuthRequest};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const DOMAIN: &str = "www.example.com";
    const REALM: &str = "Protected Contents";

    struct Fixture {
        engine: ServerEngine,
        space: ProtectionSpace,
        clock: Arc<ManualClock>,
        rng: ChaCha20Rng,
    }

    fn realm(alg: &str) -> RealmDescriptor {
        RealmDescriptor::new(DOMAIN.parse().unwrap(), REALM, alg)
    }

    fn fixture(alg: &str, mode: AuthMode) -> Fixture {
        let mut db = UserDb::new();
        let pi = derive_pi(alg, DOMAIN, REALM, "foobar", "secret").unwrap();
        db.insert(
            UserRecord {
                username: "foobar".into(),
                realm: realm(alg),
                verifier: compute_verifier(&pi, named_group(alg).unwrap()),
            },
            false,
        )
        .unwrap();
        let clock = Arc::new(ManualClock::new(1_000));
        let engine = ServerEngine::new(ServerConfig::default(), db, clock.clone(), [7; 32]);
        let space = ProtectionSpace::new(realm(alg), "/", mode, ValidationMethod::Host)
            .unwrap()
            .with_control(ControlPolicy {
                logout_timeout_s: Some(300),
                unauthenticated_redirect: None,
            });
        Fixture {
            engine,
            space,
            clock,
            rng: ChaCha20Rng::seed_from_u64(1),
        }
    }

    fn request(authorization: Option<String>) -> ServerRequest {
        ServerRequest {
            method: "GET".into(),
            scheme: "http".into(),
            host: DOMAIN.into(),
            port: 80,
            path: "/".into(),
            authorization,
        }
    }

    struct Client {
        alg: String,
        pi: WeakSecret,
        user: String,
    }

    struct Kexed {
        sid: Sid,
        w_a: BigUint,
        w_b: BigUint,
        z: BigUint,
    }

    impl Client {
        fn new(alg: &str, user: &str, password: &str) -> Self {
            Client {
                alg: alg.into(),
                pi: derive_pi(alg, DOMAIN, REALM, user, password).unwrap(),
                user: user.into(),
            }
        }

        fn kex(&self, f: &mut Fixture) -> (AuthDecision, Option<Kexed>) {
            let group = named_group(&self.alg).unwrap();
            let kam = Kam3::new(group);
            let start = kam.client_start(&mut f.rng);
            let header = serialize_header(&MutualHeader::KexRequest(KexRequest {
                algorithm: self.alg.clone(),
                validation: ValidationMethod::Host,
                auth_domain: DOMAIN.parse().unwrap(),
                user: self.user.clone(),
                wa: group.to_fixed_bytes(&start.w_a),
            }))
            .unwrap();
            let d = f.engine.handle(&request(Some(header)), &f.space, &mut f.rng);
            let AuthDecision::SendKexResponse(MutualHeader::KexResponse(resp)) = &d else {
                return (d, None);
            };
            let w_b = element_from_octets(&resp.wb, group).unwrap();
            let z = kam.client_z(&start.s_a, &start.w_a, &w_b, &self.pi).ok();
            let k = z.map(|z| Kexed {
                sid: resp.sid,
                w_a: start.w_a.clone(),
                w_b,
                z,
            });
            (d, k)
        }

        fn auth(&self, f: &mut Fixture, k: &Kexed, nc: u32) -> AuthDecision {
            let group = named_group(&self.alg).unwrap();
            let v = compute_validation(ValidationMethod::Host, "http", DOMAIN, 80, None).unwrap();
            let oa = compute_oa(group, &k.w_a, &k.w_b, &k.z, nc, &v);
            let header = serialize_header(&MutualHeader::AuthRequest(AuthRequest {
                algorithm: self.alg.clone(),
                validation: ValidationMethod::Host,
                auth_domain: DOMAIN.parse().unwrap(),
                user: self.user.clone(),
                sid: k.sid,
                nc,
                oa: oa.to_vec(),
            }))
            .unwrap();
            f.engine.handle(&request(Some(header)), &f.space, &mut f.rng)
        }
    }

    fn stale_of(d: &AuthDecision) -> Option<(RejectReason, bool)> {
        match d {
            AuthDecision::Reject { reason, stale, .. } => Some((reason.clone(), *stale)),
            _ => None,
        }
    }

    #[test]
    fn challenge_then_kex_then_grant() {
        let mut f = fixture(DL_2048, AuthMode::Required);
        let d = f.engine.handle(&request(None), &f.space, &mut f.rng);
        let dir = d.directive();
        assert_eq!(dir.status, 401);
        assert_eq!(
            dir.headers[0].1,
            "Mutual version=-draft05, algorithm=iso11770-4-dl-2048, validation=host, \
             auth-domain=\"www.example.com\", realm=\"Protected Contents\", stale=0"
        );

        let client = Client::new(DL_2048, "foobar", "secret");
        let probe = ModexpProbe::start();
        let (d, k) = client.kex(&mut f);
        assert_eq!(d.directive().status, 401);
        let k = k.unwrap();
        // client: g^s_a and w_b^e; server: two dual-base exponentiations
        assert_eq!(probe.count(), 4);

        let d = client.auth(&mut f, &k, 0);
        let AuthDecision::Grant { username, auth_info, control, .. } = &d else {
            panic!("{d:?}")
        };
        assert_eq!(username, "foobar");
        assert_eq!(control.as_ref().unwrap().logout_timeout, Some(300));
        let MutualHeader::AuthInfo(info) = auth_info else { panic!() };
        let v = compute_validation(ValidationMethod::Host, "http", DOMAIN, 80, None).unwrap();
        let group = named_group(DL_2048).unwrap();
        assert_eq!(info.ob, compute_ob(group, &k.w_a, &k.w_b, &k.z, 0, &v).to_vec());
        let dir = d.directive();
        assert_eq!(dir.status, 200);
        assert!(dir.headers.iter().any(|(n, v)| *n == AUTHENTICATION_CONTROL && v == "logout-timeout=300"));
    }

    #[test]
    fn server_side_kex_costs_two_modexps_and_reuse_costs_none() {
        let mut f = fixture(DL_2048, AuthMode::Required);
        let client = Client::new(DL_2048, "foobar", "secret");
        let group = named_group(DL_2048).unwrap();
        let kam = Kam3::new(group);
        let start = kam.client_start(&mut f.rng);
        let header = serialize_header(&MutualHeader::KexRequest(KexRequest {
            algorithm: DL_2048.into(),
            validation: ValidationMethod::Host,
            auth_domain: DOMAIN.parse().unwrap(),
            user: "foobar".into(),
            wa: group.to_fixed_bytes(&start.w_a),
        }))
        .unwrap();
        let probe = ModexpProbe::start();
        let d = f.engine.handle(&request(Some(header)), &f.space, &mut f.rng);
        assert_eq!(probe.count(), 2);
        let AuthDecision::SendKexResponse(MutualHeader::KexResponse(resp)) = d else { panic!() };
        let w_b = element_from_octets(&resp.wb, group).unwrap();
        let z = kam.client_z(&start.s_a, &start.w_a, &w_b, &client.pi).unwrap();
        let k = Kexed {
            sid: resp.sid,
            w_a: start.w_a,
            w_b,
            z,
        };
        assert!(client.auth(&mut f, &k, 0).is_grant());
        let probe = ModexpProbe::start();
        assert!(client.auth(&mut f, &k, 1).is_grant());
        assert_eq!(probe.count(), 0);
    }

    #[test]
    fn replay_and_window() {
        let mut f = fixture(TOY_DL_23, AuthMode::Required);
        let client = Client::new(TOY_DL_23, "foobar", "secret");
        let k = loop {
            if let (_, Some(k)) = client.kex(&mut f) {
                break k;
            }
        };
        assert!(client.auth(&mut f, &k, 0).is_grant());
        assert_eq!(stale_of(&client.auth(&mut f, &k, 0)), Some((RejectReason::NonceReplay, false)));
        assert!(client.auth(&mut f, &k, 100).is_grant());
        assert_eq!(stale_of(&client.auth(&mut f, &k, 20)), Some((RejectReason::NonceOutOfWindow, false)));
        assert!(client.auth(&mut f, &k, 40).is_grant());
        assert_eq!(stale_of(&client.auth(&mut f, &k, 257)), Some((RejectReason::NonceExhausted, true)));
    }

    #[test]
    fn unknown_and_expired_sessions_are_stale() {
        let mut f = fixture(TOY_DL_23, AuthMode::Required);
        let client = Client::new(TOY_DL_23, "foobar", "secret");
        let k = loop {
            if let (_, Some(k)) = client.kex(&mut f) {
                break k;
            }
        };
        let bogus = Kexed { sid: Sid(k.sid.0 ^ 1), ..Kexed { ..k } };
        assert_eq!(stale_of(&client.auth(&mut f, &bogus, 0)), Some((RejectReason::UnknownSession, true)));
        let k = Kexed { sid: Sid(bogus.sid.0 ^ 1), ..bogus };
        f.clock.advance(300);
        assert!(client.auth(&mut f, &k, 0).is_grant());
        f.clock.advance(301);
        assert_eq!(stale_of(&client.auth(&mut f, &k, 1)), Some((RejectReason::SessionExpired, true)));
        assert!(f.engine.sessions().is_empty());
    }

    #[test]
    fn wrong_password_and_unknown_user_look_alike() {
        let mut f = fixture(DL_2048, AuthMode::Required);
        let mut shapes = Vec::new();
        for (user, pw) in [("foobar", "wrong"), ("nobody", "secret")] {
            let client = Client::new(DL_2048, user, pw);
            let (d, k) = client.kex(&mut f);
            let dir = d.directive();
            let params: Vec<String> = dir.headers[0]
                .1
                .split(", ")
                .map(|p| p.split('=').next().unwrap().to_owned())
                .collect();
            let len = dir.headers[0].1.len();
            let after = stale_of(&client.auth(&mut f, &k.unwrap(), 0));
            shapes.push((dir.status, params, len, after));
        }
        assert_eq!(shapes[0], shapes[1]);
        assert_eq!(shapes[0].3, Some((RejectReason::BadConfirmation, false)));
    }

    #[test]
    fn decoy_is_stable_per_user() {
        let f = fixture(DL_2048, AuthMode::Required);
        let r = realm(DL_2048);
        assert_eq!(f.engine.decoy_exponent(&r, "x"), f.engine.decoy_exponent(&r, "x"));
        assert_ne!(f.engine.decoy_exponent(&r, "x"), f.engine.decoy_exponent(&r, "y"));
    }

    #[test]
    fn bad_confirmation_is_rejected_and_session_dropped() {
        let mut f = fixture(TOY_DL_23, AuthMode::Required);
        let client = Client::new(TOY_DL_23, "foobar", "secret");
        let mut k = loop {
            if let (_, Some(k)) = client.kex(&mut f) {
                break k;
            }
        };
        k.z = named_group(TOY_DL_23).unwrap().g().clone() * &k.z % 23u8;
        assert_eq!(stale_of(&client.auth(&mut f, &k, 0)), Some((RejectReason::BadConfirmation, false)));
        assert!(!f.engine.sessions().contains(k.sid));
    }

    #[test]
    fn optional_mode_serves_200_with_optional_challenge() {
        let mut f = fixture(TOY_DL_23, AuthMode::Optional);
        for authz in [None, Some("Basic Zm9vOmJhcg==".to_owned())] {
            let dir = f.engine.handle(&request(authz), &f.space, &mut f.rng).directive();
            assert_eq!(dir.status, 200);
            assert!(dir.serve_content);
            assert_eq!(dir.headers[0].0, OPTIONAL_WWW_AUTHENTICATE);
        }
    }

    #[test]
    fn malformed_authorization() {
        let mut f = fixture(TOY_DL_23, AuthMode::Required);
        let d = f
            .engine
            .handle(&request(Some("Mutual version=-draft05, user=".into())), &f.space, &mut f.rng);
        assert_eq!(d.directive().status, 400);
        assert!(matches!(stale_of(&d), Some((RejectReason::Malformed(_), false))));
    }

    #[test]
    fn kex_for_other_realm_is_rejected() {
        let mut f = fixture(TOY_DL_23, AuthMode::Required);
        let header = serialize_header(&MutualHeader::KexRequest(KexRequest {
            algorithm: TOY_DL_23.into(),
            validation: ValidationMethod::Host,
            auth_domain: "evil.example.net".parse().unwrap(),
            user: "foobar".into(),
            wa: vec![2],
        }))
        .unwrap();
        let d = f.engine.handle(&request(Some(header)), &f.space, &mut f.rng);
        assert_eq!(stale_of(&d), Some((RejectReason::WrongRealm, false)));
    }

    #[test]
    fn invalid_wa_is_rejected() {
        let mut f = fixture(TOY_DL_23, AuthMode::Required);
        // 5 is a non-residue mod 23, outside the order-11 subgroup
        for wa in [vec![0], vec![1], vec![5], vec![22]] {
            let header = serialize_header(&MutualHeader::KexRequest(KexRequest {
                algorithm: TOY_DL_23.into(),
                validation: ValidationMethod::Host,
                auth_domain: DOMAIN.parse().unwrap(),
                user: "foobar".into(),
                wa,
            }))
            .unwrap();
            let d = f.engine.handle(&request(Some(header)), &f.space, &mut f.rng);
            assert_eq!(stale_of(&d), Some((RejectReason::InvalidElement, false)));
        }
    }

    #[test]
    fn control_policy() {
        assert_eq!(
            emit_control(&ControlPolicy {
                logout_timeout_s: Some(300),
                unauthenticated_redirect: None
            })
            .unwrap()
            .to_string_header(),
            "logout-timeout=300"
        );
        let c = emit_control(&ControlPolicy {
            logout_timeout_s: None,
            unauthenticated_redirect: Some("/login".into()),
        })
        .unwrap();
        assert_eq!(c.logout_timeout, None);
        assert_eq!(c.unauthenticated_redirect.as_deref(), Some("/login"));
        assert_eq!(emit_control(&ControlPolicy::default()), Err(ServerError::EmptyControlPolicy));
    }

    #[test]
    fn unauthenticated_redirect_only_on_challenge() {
        let mut f = fixture(TOY_DL_23, AuthMode::Required);
        f.space.control.unauthenticated_redirect = Some("/login".into());
        let dir = f.engine.handle(&request(None), &f.space, &mut f.rng).directive();
        assert!(dir
            .headers
            .iter()
            .any(|(n, v)| *n == AUTHENTICATION_CONTROL && v == "unauthenticated-redirect=\"/login\""));
    }

    #[test]
    fn path_prefix_must_be_absolute() {
        assert_eq!(
            ProtectionSpace::new(realm(TOY_DL_23), "private", AuthMode::Required, ValidationMethod::Host),
            Err(ServerError::BadPathPrefix("private".into()))
        );
    }

    trait HeaderText {
        fn to_string_header(&self) -> String;
    }

    impl HeaderText for AuthControl {
        fn to_string_header(&self) -> String {
            MutualHeader::AuthControl(self.clone()).to_string()
        }
    }
}
