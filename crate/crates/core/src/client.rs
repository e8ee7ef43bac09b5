//! Client-side protocol engine.
//!
//! A [`UserAgent`] holds one cached session per (auth-domain, realm). Each
//! logical request is driven by an [`Exchange`]: send the request with
//! [`Exchange::authorization`], feed the response to
//! [`UserAgent::on_response`], and repeat while it says
//! [`NextAction::Resend`]. [`UserAgent::fetch`] does that loop over a
//! [`Transport`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::{CryptoRng, RngCore};
use zeroize::Zeroizing;

use crate::clock::Clock;
use crate::error::{PakeError, ValidationError, WireError};
use crate::group::named_group;
use crate::http::{HttpRequest, HttpResponse, Transport, TransportError};
use crate::pake::{compute_oa, compute_ob, confirmations_equal, derive_pi, EphemeralScalar, Kam3, WeakSecret};
use crate::realm::RealmDescriptor;
use crate::validation::{compute_validation, ValidationElement, ValidationMethod};
use crate::wire::{
    element_from_octets, parse_header, serialize_header, AuthControl, AuthRequest, Challenge, KexRequest,
    KexResponse, MutualHeader, Sid, AUTHENTICATION_CONTROL, AUTHENTICATION_INFO, AUTHORIZATION,
    OPTIONAL_WWW_AUTHENTICATE, SCHEME, WWW_AUTHENTICATE,
};

/// The URL the user meant to reach. `v` is always computed from this, never
/// from where a response actually came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestContext {
    pub scheme: String,
    pub host: String,
    pub port: u16,
    pub path: String,
    /// Digest of the certificate seen on the current TLS connection.
    pub tls_cert_digest: Option<Vec<u8>>,
}

impl RequestContext {
    pub fn new(scheme: &str, host: &str, port: u16, path: &str) -> Self {
        RequestContext {
            scheme: scheme.to_ascii_lowercase(),
            host: host.to_ascii_lowercase(),
            port,
            path: path.into(),
            tls_cert_digest: None,
        }
    }

    pub fn with_cert_digest(mut self, digest: Vec<u8>) -> Self {
        self.tls_cert_digest = Some(digest);
        self
    }

    pub fn to_request(&self, method: &str) -> HttpRequest {
        let mut req = HttpRequest::get(&self.scheme, &self.host, self.port, &self.path);
        req.method = method.to_owned();
        req
    }
}

/// `v` as the client sees it.
pub fn client_validation(ctx: &RequestContext, method: ValidationMethod) -> Result<ValidationElement, ValidationError> {
    if method == ValidationMethod::TlsCert && ctx.scheme != "https" {
        return Err(ValidationError::MissingCertificateDigest);
    }
    compute_validation(method, &ctx.scheme, &ctx.host, ctx.port, ctx.tls_cert_digest.as_deref())
}

pub struct Credentials {
    pub username: String,
    pub password: Zeroizing<String>,
}

impl Credentials {
    pub fn new(username: impl Into<String>, password: impl Into<String>) -> Self {
        Credentials {
            username: username.into(),
            password: Zeroizing::new(password.into()),
        }
    }
}

impl fmt::Debug for Credentials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Credentials")
            .field("username", &self.username)
            .finish_non_exhaustive()
    }
}

/// Asked for a user name and password when a realm challenges; `None`
/// declines.
pub trait CredentialSource {
    fn credentials(&mut self, realm: &RealmDescriptor) -> Option<Credentials>;
}

impl<F: FnMut(&RealmDescriptor) -> Option<Credentials>> CredentialSource for F {
    fn credentials(&mut self, realm: &RealmDescriptor) -> Option<Credentials> {
        self(realm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionStatus {
    Pending,
    MutuallyAuthenticated,
    Failed,
    LoggedOut,
}

/// What an indicator should show for a URL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuthStatus {
    None,
    Pending,
    Authenticated(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AbortReason {
    /// `ob` was missing or wrong: the response must not be trusted.
    ServerNotAuthenticated,
    /// The server rejected the credentials.
    AuthenticationRejected,
    CredentialsRefused,
    Unsupported(String),
    Protocol(String),
    TooManyRetries,
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::ServerNotAuthenticated => f.write_str("server not authenticated"),
            AbortReason::AuthenticationRejected => f.write_str("authentication failed"),
            AbortReason::CredentialsRefused => f.write_str("no credentials supplied"),
            AbortReason::Unsupported(what) => write!(f, "unsupported: {what}"),
            AbortReason::Protocol(what) => write!(f, "protocol error: {what}"),
            AbortReason::TooManyRetries => f.write_str("too many authentication retries"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NextAction {
    /// Send the same request again with this `Authorization` value.
    Resend(String),
    Done {
        username: String,
    },
    DoneUnauthenticated {
        auth_available: bool,
        redirect: Option<String>,
    },
    Abort(AbortReason),
}

type SessionKey = (String, String);

fn session_key(auth_domain: &str, realm: &str) -> SessionKey {
    (auth_domain.to_ascii_lowercase(), realm.to_owned())
}

struct Keys {
    sid: Sid,
    w_a: BigUint,
    w_b: BigUint,
    z: BigUint,
}

struct Secrets {
    pi: WeakSecret,
    keys: Option<Keys>,
}

/// Cached state for one realm.
pub struct ClientSession {
    pub realm: RealmDescriptor,
    pub validation: ValidationMethod,
    pub username: String,
    pub status: SessionStatus,
    pub next_nc: u32,
    pub nc_max: u32,
    /// Path prefix under which requests authenticate preemptively.
    pub path: String,
    pub lifetime_s: u64,
    pub expires_at: Option<u64>,
    /// Last second the session survives; it is logged out after this.
    pub logout_at: Option<u64>,
    secrets: Option<Secrets>,
}

impl ClientSession {
    pub fn sid(&self) -> Option<Sid> {
        self.secrets.as_ref()?.keys.as_ref().map(|k| k.sid)
    }

    fn erase(&mut self, status: SessionStatus) {
        self.secrets = None;
        self.status = status;
        self.logout_at = None;
        self.expires_at = None;
    }

    fn usable(&self, now: u64) -> bool {
        self.status == SessionStatus::MutuallyAuthenticated
            && self.sid().is_some()
            && self.next_nc <= self.nc_max
            && self.expires_at.is_none_or(|t| now <= t)
    }
}

impl fmt::Debug for ClientSession {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClientSession")
            .field("realm", &self.realm)
            .field("username", &self.username)
            .field("status", &self.status)
            .field("sid", &self.sid())
            .field("next_nc", &self.next_nc)
            .finish_non_exhaustive()
    }
}

enum Phase {
    Idle,
    Kex {
        key: SessionKey,
        s_a: EphemeralScalar,
        w_a: BigUint,
    },
    Auth {
        key: SessionKey,
        nc: u32,
    },
}

const MAX_KEX_ATTEMPTS: u32 = 8;

/// State of one logical request across its round trips.
pub struct Exchange {
    ctx: RequestContext,
    authorization: Option<String>,
    phase: Phase,
    prompted: bool,
    stale_retried: bool,
    kex_attempts: u32,
}

impl Exchange {
    pub fn context(&self) -> &RequestContext {
        &self.ctx
    }

    pub fn authorization(&self) -> Option<&str> {
        self.authorization.as_deref()
    }

    /// The request to send for the current step.
    pub fn request(&self, method: &str) -> HttpRequest {
        let mut req = self.ctx.to_request(method);
        if let Some(a) = &self.authorization {
            req.set_header(AUTHORIZATION, a.clone());
        }
        req
    }
}

/// Headers of a response sorted by message kind. Non-`Mutual` challenges
/// are ignored.
#[derive(Default)]
struct Parsed {
    challenge: Option<Challenge>,
    kex_response: Option<KexResponse>,
    optional: Option<Challenge>,
    auth_info: Option<crate::wire::AuthInfo>,
    control: Option<AuthControl>,
}

fn parse_response(resp: &HttpResponse) -> Result<Parsed, WireError> {
    let mut out = Parsed::default();
    for name in [WWW_AUTHENTICATE, OPTIONAL_WWW_AUTHENTICATE, AUTHENTICATION_INFO, AUTHENTICATION_CONTROL] {
        for value in resp.headers_named(name) {
            match parse_header(name, value) {
                Ok(MutualHeader::Challenge(c)) => out.challenge = Some(c),
                Ok(MutualHeader::KexResponse(k)) => out.kex_response = Some(k),
                Ok(MutualHeader::OptionalChallenge(c)) => out.optional = Some(c),
                Ok(MutualHeader::AuthInfo(i)) => out.auth_info = Some(i),
                Ok(MutualHeader::AuthControl(c)) => out.control = Some(c),
                Ok(_) => {}
                Err(WireError::UnknownScheme(_)) if name != AUTHENTICATION_CONTROL => {}
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}

pub struct UserAgent {
    sessions: BTreeMap<SessionKey, ClientSession>,
    clock: Arc<dyn Clock>,
}

impl UserAgent {
    pub fn new(clock: Arc<dyn Clock>) -> Self {
        UserAgent {
            sessions: BTreeMap::new(),
            clock,
        }
    }

    pub fn session(&self, auth_domain: &str, realm: &str) -> Option<&ClientSession> {
        self.sessions.get(&session_key(auth_domain, realm))
    }

    pub fn sessions(&self) -> impl Iterator<Item = &ClientSession> {
        self.sessions.values()
    }

    /// Starts a request, attaching a preemptive `Authorization` when a live
    /// session covers `ctx`.
    pub fn start(&mut self, ctx: RequestContext) -> Exchange {
        let mut ex = Exchange {
            ctx,
            authorization: None,
            phase: Phase::Idle,
            prompted: false,
            stale_retried: false,
            kex_attempts: 0,
        };
        if let Some((key, nc, header)) = self.preempt(&ex.ctx) {
            ex.authorization = Some(header);
            ex.phase = Phase::Auth { key, nc };
        }
        ex
    }

    /// The `Authorization` value for a request to `ctx` under a cached
    /// session, consuming one nonce. Uses only hashing.
    pub fn preemptive_auth(&mut self, ctx: &RequestContext) -> Option<String> {
        self.preempt(ctx).map(|(_, _, h)| h)
    }

    fn preempt(&mut self, ctx: &RequestContext) -> Option<(SessionKey, u32, String)> {
        self.expire_logouts();
        let now = self.clock.now();
        let key = self
            .sessions
            .iter()
            .find(|(_, s)| {
                s.usable(now)
                    && s.realm.auth_domain.matches(&ctx.scheme, &ctx.host, ctx.port)
                    && ctx.path.starts_with(&s.path)
            })
            .map(|(k, _)| k.clone())?;
        let session = self.sessions.get_mut(&key)?;
        let v = client_validation(ctx, session.validation).ok()?;
        let nc = session.next_nc;
        let header = auth_request_header(session, nc, &v)?;
        session.next_nc += 1;
        Some((key, nc, header))
    }

    /// Drops the session for a realm. Unknown realms are ignored.
    pub fn logout(&mut self, auth_domain: &str, realm: &str) {
        if let Some(s) = self.sessions.get_mut(&session_key(auth_domain, realm)) {
            s.erase(SessionStatus::LoggedOut);
        }
    }

    pub fn logout_all(&mut self) {
        for s in self.sessions.values_mut() {
            s.erase(SessionStatus::LoggedOut);
        }
    }

    /// Applies `Authentication-Control` to the session for a realm. A
    /// `logout-timeout` (re)arms the logout timer. Returns the redirect
    /// directive, if any.
    pub fn apply_control(&mut self, control: &AuthControl, auth_domain: &str, realm: &str) -> Option<String> {
        let now = self.clock.now();
        if let (Some(t), Some(s)) = (control.logout_timeout, self.sessions.get_mut(&session_key(auth_domain, realm))) {
            if t == 0 {
                s.erase(SessionStatus::LoggedOut);
            } else if s.secrets.is_some() {
                s.logout_at = Some(now.saturating_add(t));
            }
        }
        self.expire_logouts();
        control.unauthenticated_redirect.clone()
    }

    fn expire_logouts(&mut self) {
        let now = self.clock.now();
        for s in self.sessions.values_mut() {
            if s.logout_at.is_some_and(|t| now > t) {
                s.erase(SessionStatus::LoggedOut);
            }
        }
    }

    /// Tri-state indicator for `ctx`.
    pub fn auth_status(&mut self, ctx: &RequestContext) -> AuthStatus {
        self.expire_logouts();
        let mut status = AuthStatus::None;
        for s in self.sessions.values() {
            if !s.realm.auth_domain.matches(&ctx.scheme, &ctx.host, ctx.port) {
                continue;
            }
            match s.status {
                SessionStatus::MutuallyAuthenticated => return AuthStatus::Authenticated(s.username.clone()),
                SessionStatus::Pending => status = AuthStatus::Pending,
                _ => {}
            }
        }
        status
    }

    pub fn on_response<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        ex: &mut Exchange,
        resp: &HttpResponse,
        creds: &mut dyn CredentialSource,
        rng: &mut R,
    ) -> NextAction {
        let parsed = match parse_response(resp) {
            Ok(p) => p,
            Err(e) => return self.abort(ex, AbortReason::Protocol(e.to_string())),
        };
        let mut redirect = None;
        if let Some(control) = &parsed.control {
            redirect = control.unauthenticated_redirect.clone();
            if let Phase::Auth { key, .. } = &ex.phase {
                let key = key.clone();
                self.apply_control(control, &key.0, &key.1);
            }
        }

        match std::mem::replace(&mut ex.phase, Phase::Idle) {
            Phase::Auth { key, nc } => self.after_auth(ex, resp, parsed, key, nc, creds, rng),
            Phase::Kex { key, s_a, w_a } => self.after_kex(ex, resp, parsed, key, s_a, w_a, creds, rng),
            Phase::Idle => {
                if resp.status == 401 {
                    if let Some(c) = parsed.challenge {
                        return self.begin_kex(ex, &c, creds, rng);
                    }
                }
                NextAction::DoneUnauthenticated {
                    auth_available: parsed.optional.is_some() || parsed.challenge.is_some(),
                    redirect,
                }
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn after_auth<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        ex: &mut Exchange,
        resp: &HttpResponse,
        parsed: Parsed,
        key: SessionKey,
        nc: u32,
        creds: &mut dyn CredentialSource,
        rng: &mut R,
    ) -> NextAction {
        if let Some(info) = &parsed.auth_info {
            let verified = self.sessions.get(&key).is_some_and(|s| {
                let Some(Keys { sid, w_a, w_b, z }) = s.secrets.as_ref().and_then(|x| x.keys.as_ref()) else {
                    return false;
                };
                let Ok(group) = s.realm.group() else { return false };
                let Ok(v) = client_validation(&ex.ctx, s.validation) else {
                    return false;
                };
                *sid == info.sid && confirmations_equal(&compute_ob(group, w_a, w_b, z, nc, &v), &info.ob)
            });
            if !verified {
                return self.fail_session(ex, &key);
            }
            let now = self.clock.now();
            let s = self.sessions.get_mut(&key).expect("verified above");
            s.status = SessionStatus::MutuallyAuthenticated;
            s.expires_at = Some(now.saturating_add(s.lifetime_s));
            return NextAction::Done {
                username: s.username.clone(),
            };
        }
        if resp.status != 401 {
            // Content came back for an authenticated request without a
            // server confirmation.
            return self.fail_session(ex, &key);
        }
        let Some(challenge) = parsed.challenge else {
            return self.fail_session(ex, &key);
        };
        if challenge.stale && !ex.stale_retried {
            ex.stale_retried = true;
            if let Some(s) = self.sessions.get_mut(&key) {
                if let Some(secrets) = s.secrets.as_mut() {
                    secrets.keys = None;
                }
                s.status = SessionStatus::Pending;
            }
            return self.begin_kex(ex, &challenge, creds, rng);
        }
        if challenge.stale {
            return self.abort(ex, AbortReason::TooManyRetries);
        }
        if let Some(s) = self.sessions.get_mut(&key) {
            s.erase(SessionStatus::Failed);
        }
        if ex.prompted {
            return self.abort(ex, AbortReason::AuthenticationRejected);
        }
        self.begin_kex(ex, &challenge, creds, rng)
    }

    #[allow(clippy::too_many_arguments)]
    fn after_kex<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        ex: &mut Exchange,
        resp: &HttpResponse,
        parsed: Parsed,
        key: SessionKey,
        s_a: EphemeralScalar,
        w_a: BigUint,
        creds: &mut dyn CredentialSource,
        rng: &mut R,
    ) -> NextAction {
        if (200..300).contains(&resp.status) {
            // content in answer to a key exchange can carry no proof
            return self.fail_session(ex, &key);
        }
        if resp.status != 401 {
            return NextAction::DoneUnauthenticated {
                auth_available: false,
                redirect: parsed.control.and_then(|c| c.unauthenticated_redirect),
            };
        }
        let Some(kex) = parsed.kex_response else {
            return match parsed.challenge {
                // stale here means the exchange itself degenerated; retry
                // with a fresh s_a, bounded by MAX_KEX_ATTEMPTS
                Some(c) if c.stale => self.begin_kex(ex, &c, creds, rng),
                Some(c) if !c.stale && !ex.prompted => {
                    if let Some(s) = self.sessions.get_mut(&key) {
                        s.erase(SessionStatus::Failed);
                    }
                    self.begin_kex(ex, &c, creds, rng)
                }
                Some(_) => {
                    if let Some(s) = self.sessions.get_mut(&key) {
                        s.erase(SessionStatus::Failed);
                    }
                    self.abort(ex, AbortReason::AuthenticationRejected)
                }
                None => self.abort(ex, AbortReason::Protocol("401 without a Mutual challenge".into())),
            };
        };
        let Some(session) = self.sessions.get_mut(&key) else {
            return self.abort(ex, AbortReason::Protocol("session vanished".into()));
        };
        let group = session.realm.group().expect("checked when the session was created");
        let Some(secrets) = session.secrets.as_mut() else {
            return self.abort(ex, AbortReason::Protocol("session vanished".into()));
        };
        let w_b = match element_from_octets(&kex.wb, group) {
            Ok(w) => w,
            Err(e) => return self.abort(ex, AbortReason::Protocol(e.to_string())),
        };
        let z = match Kam3::new(group).client_z(&s_a, &w_a, &w_b, &secrets.pi) {
            Ok(z) => z,
            Err(PakeError::DegenerateExchange) => {
                let challenge = challenge_for(session);
                return self.restart_kex(ex, key, &challenge, rng);
            }
            Err(e) => return self.abort(ex, AbortReason::Protocol(e.to_string())),
        };
        secrets.keys = Some(Keys {
            sid: kex.sid,
            w_a,
            w_b,
            z,
        });
        session.nc_max = kex.nc_max;
        session.lifetime_s = kex.time;
        session.path = kex.path.clone();
        session.expires_at = Some(self.clock.now().saturating_add(kex.time));
        let v = match client_validation(&ex.ctx, session.validation) {
            Ok(v) => v,
            Err(e) => return self.abort(ex, AbortReason::Unsupported(e.to_string())),
        };
        let nc = 0;
        let Some(header) = auth_request_header(session, nc, &v) else {
            return self.abort(ex, AbortReason::Protocol("cannot build request".into()));
        };
        session.next_nc = nc + 1;
        ex.phase = Phase::Auth { key, nc };
        ex.authorization = Some(header.clone());
        NextAction::Resend(header)
    }

    /// Answers a challenge: reuses the cached secret for the realm when
    /// there is one, otherwise asks `creds`.
    fn begin_kex<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        ex: &mut Exchange,
        challenge: &Challenge,
        creds: &mut dyn CredentialSource,
        rng: &mut R,
    ) -> NextAction {
        if named_group(&challenge.algorithm).is_err() {
            return self.abort(ex, AbortReason::Unsupported(format!("algorithm {}", challenge.algorithm)));
        }
        if let Err(e) = client_validation(&ex.ctx, challenge.validation) {
            return self.abort(ex, AbortReason::Unsupported(e.to_string()));
        }
        let realm = RealmDescriptor::new(
            challenge.auth_domain.clone(),
            challenge.realm.clone(),
            challenge.algorithm.clone(),
        );
        let key = session_key(challenge.auth_domain.as_str(), &challenge.realm);
        let cached = self
            .sessions
            .get(&key)
            .is_some_and(|s| s.secrets.is_some() && s.realm == realm && s.validation == challenge.validation);
        if !cached {
            if ex.prompted {
                return self.abort(ex, AbortReason::AuthenticationRejected);
            }
            ex.prompted = true;
            let Some(c) = creds.credentials(&realm) else {
                return self.abort(ex, AbortReason::CredentialsRefused);
            };
            let pi = match derive_pi(
                &challenge.algorithm,
                challenge.auth_domain.as_str(),
                &challenge.realm,
                &c.username,
                &c.password,
            ) {
                Ok(pi) => pi,
                Err(e) => return self.abort(ex, AbortReason::Unsupported(e.to_string())),
            };
            self.sessions.insert(
                key.clone(),
                ClientSession {
                    realm,
                    validation: challenge.validation,
                    username: c.username.clone(),
                    status: SessionStatus::Pending,
                    next_nc: 0,
                    nc_max: 0,
                    path: "/".into(),
                    lifetime_s: 0,
                    expires_at: None,
                    logout_at: None,
                    secrets: Some(Secrets { pi, keys: None }),
                },
            );
        }
        self.restart_kex(ex, key, challenge, rng)
    }

    fn restart_kex<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        ex: &mut Exchange,
        key: SessionKey,
        challenge: &Challenge,
        rng: &mut R,
    ) -> NextAction {
        ex.kex_attempts += 1;
        if ex.kex_attempts > MAX_KEX_ATTEMPTS {
            return self.abort(ex, AbortReason::TooManyRetries);
        }
        let session = self.sessions.get_mut(&key).expect("created by begin_kex");
        session.status = SessionStatus::Pending;
        if let Some(secrets) = session.secrets.as_mut() {
            secrets.keys = None;
        }
        let group = session.realm.group().expect("algorithm checked");
        let start = Kam3::new(group).client_start(rng);
        let header = serialize_header(&MutualHeader::KexRequest(KexRequest {
            algorithm: challenge.algorithm.clone(),
            validation: challenge.validation,
            auth_domain: challenge.auth_domain.clone(),
            user: session.username.clone(),
            wa: group.to_fixed_bytes(&start.w_a),
        }));
        let header = match header {
            Ok(h) => h,
            Err(e) => return self.abort(ex, AbortReason::Protocol(e.to_string())),
        };
        ex.phase = Phase::Kex {
            key,
            s_a: start.s_a,
            w_a: start.w_a,
        };
        ex.authorization = Some(header.clone());
        NextAction::Resend(header)
    }

    fn fail_session(&mut self, ex: &mut Exchange, key: &SessionKey) -> NextAction {
        if let Some(s) = self.sessions.get_mut(key) {
            s.erase(SessionStatus::Failed);
        }
        self.abort(ex, AbortReason::ServerNotAuthenticated)
    }

    fn abort(&mut self, ex: &mut Exchange, reason: AbortReason) -> NextAction {
        ex.phase = Phase::Idle;
        ex.authorization = None;
        NextAction::Abort(reason)
    }

    /// Runs a request to completion over `transport`.
    pub fn fetch<R: RngCore + CryptoRng + ?Sized>(
        &mut self,
        transport: &mut dyn Transport,
        mut ctx: RequestContext,
        creds: &mut dyn CredentialSource,
        rng: &mut R,
    ) -> Result<FetchResult, TransportError> {
        if ctx.scheme == "https" && ctx.tls_cert_digest.is_none() {
            ctx.tls_cert_digest = transport.peer_cert_digest(&ctx.host, ctx.port);
        }
        let mut ex = self.start(ctx);
        let mut round_trips = 0;
        loop {
            let resp = transport.round_trip(&ex.request("GET"))?;
            round_trips += 1;
            match self.on_response(&mut ex, &resp, creds, rng) {
                NextAction::Resend(_) if round_trips < 8 => continue,
                NextAction::Resend(_) => {
                    return Ok(FetchResult {
                        response: resp,
                        action: NextAction::Abort(AbortReason::TooManyRetries),
                        round_trips,
                    })
                }
                action => {
                    return Ok(FetchResult {
                        response: resp,
                        action,
                        round_trips,
                    })
                }
            }
        }
    }
}

/// Final response of [`UserAgent::fetch`] and how it was authenticated.
#[derive(Debug, Clone)]
pub struct FetchResult {
    pub response: HttpResponse,
    pub action: NextAction,
    pub round_trips: usize,
}

impl FetchResult {
    /// Whether the body may be shown: either mutual authentication was
    /// verified, or no authentication was involved at all.
    pub fn body_trusted(&self) -> bool {
        match &self.action {
            NextAction::Done { .. } | NextAction::DoneUnauthenticated { .. } => true,
            NextAction::Abort(AbortReason::ServerNotAuthenticated) => false,
            NextAction::Abort(_) | NextAction::Resend(_) => false,
        }
    }
}

fn challenge_for(s: &ClientSession) -> Challenge {
    Challenge {
        algorithm: s.realm.algorithm_id.clone(),
        validation: s.validation,
        auth_domain: s.realm.auth_domain.clone(),
        realm: s.realm.realm.clone(),
        stale: false,
    }
}

fn auth_request_header(s: &ClientSession, nc: u32, v: &ValidationElement) -> Option<String> {
    let keys = s.secrets.as_ref()?.keys.as_ref()?;
    let group = s.realm.group().ok()?;
    let oa = compute_oa(group, &keys.w_a, &keys.w_b, &keys.z, nc, v);
    serialize_header(&MutualHeader::AuthRequest(AuthRequest {
        algorithm: s.realm.algorithm_id.clone(),
        validation: s.validation,
        auth_domain: s.realm.auth_domain.clone(),
        user: s.username.clone(),
        sid: keys.sid,
        nc,
        oa: oa.to_vec(),
    }))
    .ok()
}

/// True when `authorization` is a `Mutual` credential.
pub fn is_mutual_authorization(authorization: &str) -> bool {
    authorization
        .split_whitespace()
        .next()
        .is_some_and(|s| s.eq_ignore_ascii_case(SCHEME))
}
