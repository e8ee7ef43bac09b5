//! Demo server configuration file (TOML). See `docs/configuration.md`.

use std::collections::HashSet;
use std::fmt;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use mutual_auth::group::DL_2048;
use mutual_auth::realm::RealmDescriptor;
use mutual_auth::server::{AuthMode, ControlPolicy, ProtectionSpace, ServerConfig};
use mutual_auth::validation::ValidationMethod;
use serde::Deserialize;

#[derive(Debug)]
pub struct ConfigError {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    listen: String,
    server_name: String,
    #[serde(default = "default_scheme")]
    scheme: String,
    public_port: Option<u16>,
    user_db: PathBuf,
    docroot: Option<PathBuf>,
    tls_cert_digest: Option<String>,
    decoy_key: Option<String>,
    #[serde(default = "default_lifetime")]
    session_lifetime: u64,
    #[serde(default = "default_nc_max")]
    nc_max: u32,
    #[serde(default = "default_nc_window")]
    nc_window: u32,
    #[serde(default = "default_capacity")]
    session_capacity: usize,
    #[serde(default, rename = "space")]
    spaces: Vec<RawSpace>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    path: String,
    auth_domain: Option<String>,
    realm: String,
    #[serde(default = "default_algorithm")]
    algorithm: String,
    #[serde(default = "default_mode")]
    mode: String,
    #[serde(default = "default_validation")]
    validation: String,
    logout_timeout: Option<u64>,
    unauthenticated_redirect: Option<String>,
}

fn default_scheme() -> String {
    "http".into()
}
fn default_lifetime() -> u64 {
    300
}
fn default_nc_max() -> u32 {
    256
}
fn default_nc_window() -> u32 {
    64
}
fn default_capacity() -> usize {
    10_000
}
fn default_algorithm() -> String {
    DL_2048.into()
}
fn default_mode() -> String {
    "required".into()
}
fn default_validation() -> String {
    "host".into()
}

/// A validated configuration with paths resolved.
#[derive(Debug, Clone)]
pub struct DemoConfig {
    pub listen: SocketAddr,
    pub server_name: String,
    pub scheme: String,
    /// Port clients address; defaults to the listening port.
    pub public_port: Option<u16>,
    pub user_db: PathBuf,
    pub docroot: Option<PathBuf>,
    pub decoy_key: Option<[u8; 32]>,
    pub engine: ServerConfig,
    /// Longest prefix first.
    pub spaces: Vec<ProtectionSpace>,
}

impl DemoConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|message| ConfigError {
            path: path.to_owned(),
            message,
        })
    }

    /// Parses configuration text; relative paths are taken from `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        let listen: SocketAddr = raw
            .listen
            .parse()
            .map_err(|e| format!("listen `{}`: {e}", raw.listen))?;
        let scheme = raw.scheme.to_ascii_lowercase();
        if scheme != "http" && scheme != "https" {
            return Err(format!("scheme must be http or https, not `{}`", raw.scheme));
        }
        let hex_bytes = |field: &str, s: &str| hex::decode(s.trim()).map_err(|e| format!("{field}: {e}"));
        let tls_cert_digest = raw
            .tls_cert_digest
            .as_deref()
            .map(|s| hex_bytes("tls_cert_digest", s))
            .transpose()?;
        let decoy_key = match raw.decoy_key.as_deref() {
            None => None,
            Some(s) => Some(
                <[u8; 32]>::try_from(hex_bytes("decoy_key", s)?)
                    .map_err(|_| "decoy_key: expected 32 bytes of hex".to_owned())?,
            ),
        };

        let mut seen = HashSet::new();
        let mut spaces = Vec::new();
        for (i, s) in raw.spaces.iter().enumerate() {
            let at = |msg: String| format!("space #{} (`{}`): {msg}", i + 1, s.path);
            if !seen.insert(s.path.clone()) {
                return Err(at("path is configured twice".into()));
            }
            let auth_domain = s
                .auth_domain
                .as_deref()
                .unwrap_or(&raw.server_name)
                .parse()
                .map_err(|e| at(format!("{e}")))?;
            let mode = match s.mode.to_ascii_lowercase().as_str() {
                "required" => AuthMode::Required,
                "optional" => AuthMode::Optional,
                other => return Err(at(format!("mode must be required or optional, not `{other}`"))),
            };
            let validation: ValidationMethod = s.validation.parse().map_err(|e| at(format!("{e}")))?;
            if validation == ValidationMethod::TlsCert && tls_cert_digest.is_none() {
                return Err(at("validation tls-cert needs tls_cert_digest".into()));
            }
            let realm = RealmDescriptor::new(auth_domain, s.realm.clone(), s.algorithm.clone());
            let space = ProtectionSpace::new(realm, s.path.clone(), mode, validation)
                .map_err(|e| at(e.to_string()))?
                .with_control(ControlPolicy {
                    logout_timeout_s: s.logout_timeout,
                    unauthenticated_redirect: s.unauthenticated_redirect.clone(),
                });
            spaces.push(space);
        }
        spaces.sort_by_key(|s| std::cmp::Reverse(s.path_prefix.len()));

        Ok(DemoConfig {
            listen,
            server_name: raw.server_name.to_ascii_lowercase(),
            scheme,
            public_port: raw.public_port,
            user_db: base.join(raw.user_db),
            docroot: raw.docroot.map(|d| base.join(d)),
            decoy_key,
            engine: ServerConfig {
                session_lifetime_s: raw.session_lifetime,
                nc_max: raw.nc_max,
                nc_window: raw.nc_window,
                session_capacity: raw.session_capacity,
                tls_cert_digest,
            },
            spaces,
        })
    }

    /// The protection space with the longest prefix covering `path`.
    pub fn space_for(&self, path: &str) -> Option<&ProtectionSpace> {
        space_for(&self.spaces, path)
    }
}

pub fn space_for<'a>(spaces: &'a [ProtectionSpace], path: &str) -> Option<&'a ProtectionSpace> {
    spaces
        .iter()
        .filter(|s| s.covers(path))
        .max_by_key(|s| s.path_prefix.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
listen = "127.0.0.1:8080"
server_name = "www.example.com"
user_db = "users.db"

[[space]]
path = "/"
realm = "Public"
mode = "optional"

[[space]]
path = "/private/"
realm = "Protected Contents"
logout_timeout = 300
"#;

    #[test]
    fn parses_and_orders_spaces() {
        let c = DemoConfig::parse(SAMPLE, Path::new("/etc/demo")).unwrap();
        assert_eq!(c.user_db, Path::new("/etc/demo/users.db"));
        assert_eq!(c.space_for("/private/x").unwrap().realm.realm, "Protected Contents");
        assert_eq!(c.space_for("/index.html").unwrap().realm.realm, "Public");
        assert_eq!(c.space_for("/private/x").unwrap().control.logout_timeout_s, Some(300));
        assert_eq!(c.engine.nc_window, 64);
    }

    #[test]
    fn errors_carry_location() {
        let err = DemoConfig::parse("listen = \"x\"\nserver_name = 3\n", Path::new(".")).unwrap_err();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn duplicate_paths_rejected() {
        let text = format!("{SAMPLE}\n[[space]]\npath = \"/\"\nrealm = \"Again\"\n");
        assert!(DemoConfig::parse(&text, Path::new(".")).unwrap_err().contains("twice"));
    }

    #[test]
    fn tls_cert_needs_digest() {
        let text = SAMPLE.replace("logout_timeout = 300", "validation = \"tls-cert\"");
        assert!(DemoConfig::parse(&text, Path::new(".")).unwrap_err().contains("tls_cert_digest"));
    }

    #[test]
    fn relative_path_prefix_rejected() {
        let text = SAMPLE.replace("path = \"/private/\"", "path = \"private\"");
        assert!(DemoConfig::parse(&text, Path::new(".")).is_err());
    }
}
