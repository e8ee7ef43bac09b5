use std::fmt;
use std::sync::Arc;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use mutual_auth::client::{AbortReason, Credentials, NextAction, RequestContext, UserAgent};
use mutual_auth::clock::ManualClock;
use mutual_auth::group::{named_group, DL_2048};
use mutual_auth::pake::{compute_verifier, derive_pi};
use mutual_auth::realm::RealmDescriptor;
use mutual_auth::server::{AuthMode, ProtectionSpace, ServerConfig, ServerEngine, UserDb, UserRecord};
use mutual_auth::validation::ValidationMethod;
use mutual_auth::wire::Challenge;
use rand::distr::{Alphanumeric, SampleString};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::fabric::Fabric;
use crate::sites::{GenuineSite, Phisher, Strategy};
use crate::transcript::{transcript_scan, TranscriptLog};
use crate::SimError;

pub const GENUINE_HOST: &str = "www.example.com";
pub const PHISHER_HOST: &str = "evil.example.net";
pub const REALM: &str = "Protected Contents";
pub const USERNAME: &str = "foobar";

/// Which adversary sits between the user and the genuine site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    /// No phisher: the user visits the genuine site directly.
    Control,
    Phisher(Strategy),
}

impl Pattern {
    pub const ALL: [Pattern; 6] = [
        Pattern::Control,
        Pattern::Phisher(Strategy::NoPassword),
        Pattern::Phisher(Strategy::StealPassword),
        Pattern::Phisher(Strategy::BlindAccept),
        Pattern::Phisher(Strategy::CredentialForward),
        Pattern::Phisher(Strategy::FullForward),
    ];

    pub fn label(self) -> &'static str {
        match self {
            Pattern::Control => "control",
            Pattern::Phisher(Strategy::NoPassword) => "I",
            Pattern::Phisher(Strategy::StealPassword) => "II",
            Pattern::Phisher(Strategy::BlindAccept) => "III",
            Pattern::Phisher(Strategy::CredentialForward) => "IV",
            Pattern::Phisher(Strategy::FullForward) => "V",
        }
    }
}

impl std::str::FromStr for Pattern {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pattern::ALL
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| SimError::UnknownPattern(s.to_owned()))
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub pattern: Pattern,
    pub validation: ValidationMethod,
    pub seed: u64,
    pub password_leaked: bool,
    pub client_reported_mutual_auth: bool,
    pub genuine_server_granted: bool,
    /// The protocol cannot help here; only the user noticing the missing
    /// indicator can.
    pub requires_user_rule: bool,
    pub username_in_transcript: bool,
    pub client_action: NextAction,
    pub transcript: TranscriptLog,
}

impl ScenarioReport {
    /// Expected-outcome assertions that did not hold.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.password_leaked {
            v.push("password or pi appeared in the transcript");
        }
        match self.pattern {
            Pattern::Control => {
                if !self.client_reported_mutual_auth {
                    v.push("control run did not reach mutual authentication");
                }
                if !self.genuine_server_granted {
                    v.push("control run was not granted by the genuine server");
                }
            }
            Pattern::Phisher(s) => {
                if self.client_reported_mutual_auth {
                    v.push("client reported mutual authentication with a phisher");
                }
                if matches!(s, Strategy::CredentialForward | Strategy::FullForward) && self.genuine_server_granted {
                    v.push("genuine server granted forwarded credentials");
                }
                if s == Strategy::NoPassword && !self.requires_user_rule {
                    v.push("pattern I not flagged as requiring the user rule");
                }
            }
        }
        v
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }
}

fn describe(action: &NextAction) -> String {
    match action {
        NextAction::Done { username } => format!("mutual-ok:{username}"),
        NextAction::DoneUnauthenticated { auth_available, .. } => format!("unauthenticated:available={auth_available}"),
        NextAction::Abort(AbortReason::ServerNotAuthenticated) => "abort:server-not-authenticated".into(),
        NextAction::Abort(AbortReason::AuthenticationRejected) => "abort:authentication-failed".into(),
        NextAction::Abort(r) => format!("abort:{}", r.to_string().replace(' ', "-")),
        NextAction::Resend(_) => "resend".into(),
    }
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pattern={} validation={} seed={} password_leaked={} client_mutual_auth={} genuine_granted={} \
             requires_user_rule={} client={} messages={} result={}",
            self.pattern.label(),
            self.validation,
            self.seed,
            self.password_leaked,
            self.client_reported_mutual_auth,
            self.genuine_server_granted,
            self.requires_user_rule,
            describe(&self.client_action),
            self.transcript.len(),
            if self.holds() { "ok" } else { "VIOLATED" },
        )
    }
}

fn digest(label: &str, rng: &mut ChaCha20Rng) -> Vec<u8> {
    let mut d = vec![0u8; 32];
    rng.fill_bytes(&mut d);
    d[..label.len().min(8)].copy_from_slice(&label.as_bytes()[..label.len().min(8)]);
    d
}

/// Runs one user visit under `pattern`. Deterministic in `seed`.
pub fn run_scenario(pattern: Pattern, validation: ValidationMethod, seed: u64) -> Result<ScenarioReport, SimError> {
    if validation == ValidationMethod::TlsKey {
        return Err(SimError::Unsupported(validation));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let password = Alphanumeric.sample_string(&mut rng, 16);
    let guessed = Alphanumeric.sample_string(&mut rng, 16);
    let tls = validation == ValidationMethod::TlsCert;
    let (scheme, port) = if tls { ("https", 443) } else { ("http", 80) };

    let realm = RealmDescriptor::new(GENUINE_HOST.parse().expect("valid host"), REALM, DL_2048);
    let group = named_group(DL_2048).expect("built-in group");
    let pi = derive_pi(DL_2048, GENUINE_HOST, REALM, USERNAME, &password).expect("non-empty password");
    let mut db = UserDb::new();
    db.insert(
        UserRecord {
            username: USERNAME.into(),
            realm: realm.clone(),
            verifier: compute_verifier(&pi, group),
        },
        false,
    )
    .expect("empty database");

    let genuine_cert = tls.then(|| digest("genuine", &mut rng));
    let phisher_cert = tls.then(|| digest("phisher", &mut rng));
    if tls && genuine_cert == phisher_cert {
        return Err(SimError::Misconfigured("certificate digests coincide".into()));
    }
    let clock = Arc::new(ManualClock::new(1_700_000_000));
    let mut decoy_key = [0u8; 32];
    rng.fill_bytes(&mut decoy_key);
    let config = ServerConfig {
        tls_cert_digest: genuine_cert.clone(),
        ..ServerConfig::default()
    };
    let engine = ServerEngine::new(config, db, clock.clone(), decoy_key);
    let space = ProtectionSpace::new(realm.clone(), "/", AuthMode::Required, validation)
        .map_err(|e| SimError::Misconfigured(e.to_string()))?;
    let lure = Challenge {
        algorithm: DL_2048.into(),
        validation,
        auth_domain: realm.auth_domain.clone(),
        realm: REALM.into(),
        stale: false,
    };

    let genuine = GenuineSite::new(
        GENUINE_HOST,
        scheme,
        port,
        genuine_cert,
        engine,
        space,
        ChaCha20Rng::seed_from_u64(rng.next_u64()),
    );
    let stats = genuine.stats();
    let mut fabric = Fabric::new();
    fabric.add(Box::new(genuine))?;
    let target = match pattern {
        Pattern::Control => GENUINE_HOST,
        Pattern::Phisher(strategy) => {
            fabric.add(Box::new(Phisher::new(
                PHISHER_HOST,
                scheme,
                port,
                phisher_cert,
                strategy,
                lure,
                GENUINE_HOST,
                guessed,
                ChaCha20Rng::seed_from_u64(rng.next_u64()),
            )))?;
            PHISHER_HOST
        }
    };

    // The user has been lured to `target` and types the real password into
    // whatever the protocol asks for.
    let mut agent = UserAgent::new(clock);
    let pw = password.clone();
    let mut creds = move |_: &RealmDescriptor| Some(Credentials::new(USERNAME, pw.clone()));
    let ctx = RequestContext::new(scheme, target, port, "/account");
    let mut client_rng = ChaCha20Rng::seed_from_u64(rng.next_u64());
    let result = agent.fetch(&mut fabric.port("client"), ctx, &mut creds, &mut client_rng)?;

    let transcript = fabric.into_transcript();
    let pi_bytes = pi.as_biguint().to_bytes_be();
    let mut pi_fixed = vec![0u8; 32usize.saturating_sub(pi_bytes.len())];
    pi_fixed.extend_from_slice(&pi_bytes);
    let needles: Vec<Vec<u8>> = vec![
        password.as_bytes().to_vec(),
        pi_bytes.clone(),
        pi_fixed.clone(),
        BASE64.encode(&pi_fixed).into_bytes(),
        BASE64.encode(group.to_fixed_bytes(pi.as_biguint())).into_bytes(),
        format!("{:x}", pi.as_biguint()).into_bytes(),
        format!("{:X}", pi.as_biguint()).into_bytes(),
    ];
    let needle_refs: Vec<&[u8]> = needles.iter().map(Vec::as_slice).collect();
    let password_leaked = !transcript_scan(&transcript, &needle_refs).is_empty();
    let username_in_transcript = !transcript_scan(&transcript, &[USERNAME.as_bytes()]).is_empty();
    let genuine_server_granted = !stats.lock().expect("not poisoned").grants.is_empty();

    Ok(ScenarioReport {
        pattern,
        validation,
        seed,
        password_leaked,
        client_reported_mutual_auth: matches!(result.action, NextAction::Done { .. }),
        genuine_server_granted,
        requires_user_rule: pattern == Pattern::Phisher(Strategy::NoPassword),
        username_in_transcript,
        client_action: result.action,
        transcript,
    })
}
