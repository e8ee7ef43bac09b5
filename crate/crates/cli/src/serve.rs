//! The demo HTTP server.

use std::path::{Component, Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, HeaderMap, Method, StatusCode, Uri};
use axum::response::Response;
use axum::Router;
use mutual_auth::clock::Clock;
use mutual_auth::server::{AuthDecision, ProtectionSpace, ServerEngine, ServerRequest, UserDb};
use mutual_auth::wire::AUTHORIZATION;
use tokio::net::TcpListener;

use crate::config::{space_for, DemoConfig};

pub struct AppState {
    pub engine: ServerEngine,
    pub spaces: Vec<ProtectionSpace>,
    pub scheme: String,
    pub server_name: String,
    pub port: u16,
    pub docroot: Option<PathBuf>,
}

impl AppState {
    pub fn from_config(
        config: &DemoConfig,
        users: UserDb,
        port: u16,
        clock: Arc<dyn Clock>,
        decoy_key: [u8; 32],
    ) -> Self {
        AppState {
            engine: ServerEngine::new(config.engine.clone(), users, clock, config.decoy_key.unwrap_or(decoy_key)),
            spaces: config.spaces.clone(),
            scheme: config.scheme.clone(),
            server_name: config.server_name.clone(),
            port: config.public_port.unwrap_or(port),
            docroot: config.docroot.clone(),
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new().fallback(handle).with_state(state)
}

fn decision_kind(d: &AuthDecision) -> &'static str {
    match d {
        AuthDecision::SendChallenge { optional: false, .. } => "challenge",
        AuthDecision::SendChallenge { optional: true, .. } => "optional-challenge",
        AuthDecision::SendKexResponse(_) => "kex-response",
        AuthDecision::Grant { .. } => "grant",
        AuthDecision::Reject { .. } => "reject",
    }
}

fn host_matches(headers: &HeaderMap, server_name: &str) -> bool {
    let Some(host) = headers.get(header::HOST).and_then(|h| h.to_str().ok()) else {
        return true;
    };
    let name = match host.rsplit_once(':') {
        Some((n, p)) if p.bytes().all(|b| b.is_ascii_digit()) => n,
        _ => host,
    };
    name.eq_ignore_ascii_case(server_name)
}

fn safe_join(root: &Path, url_path: &str) -> Option<PathBuf> {
    let rel = Path::new(url_path.trim_start_matches('/'));
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return None;
    }
    let mut p = root.join(rel);
    if p.is_dir() {
        p.push("index.html");
    }
    Some(p)
}

fn content(state: &AppState, path: &str, user: Option<&str>) -> (StatusCode, Vec<u8>) {
    if let Some(root) = &state.docroot {
        return match safe_join(root, path).and_then(|p| std::fs::read(p).ok()) {
            Some(bytes) => (StatusCode::OK, bytes),
            None => (StatusCode::NOT_FOUND, b"not found\n".to_vec()),
        };
    }
    let who = match user {
        Some(u) => format!("signed in as {u}"),
        None => "guest".to_owned(),
    };
    (StatusCode::OK, format!("<h1>{path}</h1>\n<p>{who}</p>\n").into_bytes())
}

async fn handle(State(state): State<Arc<AppState>>, method: Method, uri: Uri, headers: HeaderMap) -> Response {
    let path = uri.path().to_owned();
    if !host_matches(&headers, &state.server_name) {
        tracing::info!(decision = "misdirected", path = %path, status = 421);
        return plain(StatusCode::MISDIRECTED_REQUEST, "wrong host\n");
    }
    let Some(space) = space_for(&state.spaces, &path) else {
        let (status, body) = content(&state, &path, None);
        tracing::info!(decision = "unprotected", path = %path, status = status.as_u16());
        return build(status, Vec::new(), body);
    };
    let req = ServerRequest {
        method: method.to_string(),
        scheme: state.scheme.clone(),
        host: state.server_name.clone(),
        port: state.port,
        path: path.clone(),
        authorization: headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .map(str::to_owned),
    };
    let decision = state.engine.handle(&req, space, &mut rand::rng());
    let directive = decision.directive();
    let (sid, user) = match &decision {
        AuthDecision::Grant { sid, username, .. } => (Some(sid.to_string()), Some(username.as_str())),
        AuthDecision::SendKexResponse(mutual_auth::wire::MutualHeader::KexResponse(k)) => {
            (Some(k.sid.to_string()), None)
        }
        _ => (None, None),
    };
    let reason = match &decision {
        AuthDecision::Reject { reason, stale, .. } => format!("{reason:?} stale={}", u8::from(*stale)),
        _ => String::new(),
    };
    let (status, body) = if directive.serve_content {
        content(&state, &path, user)
    } else {
        (
            StatusCode::from_u16(directive.status).unwrap_or(StatusCode::UNAUTHORIZED),
            b"authentication required\n".to_vec(),
        )
    };
    let status = if directive.serve_content && status == StatusCode::OK {
        StatusCode::from_u16(directive.status).unwrap_or(StatusCode::OK)
    } else {
        status
    };
    tracing::info!(
        decision = decision_kind(&decision),
        sid = sid.as_deref().unwrap_or("-"),
        user = user.unwrap_or("-"),
        realm = %space.realm.realm,
        path = %path,
        status = status.as_u16(),
        reason = %reason,
    );
    build(status, directive.headers, body)
}

fn plain(status: StatusCode, body: &str) -> Response {
    build(status, Vec::new(), body.as_bytes().to_vec())
}

fn build(status: StatusCode, headers: Vec<(&'static str, String)>, body: Vec<u8>) -> Response {
    let mut b = Response::builder().status(status);
    for (n, v) in headers {
        b = b.header(n, v);
    }
    b.body(Body::from(body)).expect("valid header values")
}

/// Serves on `listener` until the process exits, sweeping expired sessions
/// every 30 seconds.
pub async fn serve(
    listener: TcpListener,
    config: &DemoConfig,
    users: UserDb,
    clock: Arc<dyn Clock>,
    decoy_key: [u8; 32],
) -> std::io::Result<()> {
    let port = listener.local_addr()?.port();
    let state = Arc::new(AppState::from_config(config, users, port, clock, decoy_key));
    let gc_state = Arc::clone(&state);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(30));
        loop {
            tick.tick().await;
            let evicted = gc_state.engine.gc_sessions();
            if evicted > 0 {
                tracing::debug!(evicted, "expired sessions removed");
            }
        }
    });
    axum::serve(listener, router(state)).await
}
