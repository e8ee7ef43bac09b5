//! Codec for the `Mutual` authentication headers.
//!
//! | header                       | message            |
//! |------------------------------|--------------------|
//! | `WWW-Authenticate`           | challenge, key-exchange response |
//! | `Optional-WWW-Authenticate`  | optional challenge |
//! | `Authorization`              | key-exchange request, authentication request |
//! | `Authentication-Info`        | server confirmation `ob` |
//! | `Authentication-Control`     | logout timer and redirect directives |
//!
//! Serialization is canonical: parameters appear in a fixed order per
//! message, string-typed and base64 values are quoted, tokens and integers
//! are bare. `docs/wire-format.md` has the grammar.

mod domain;
mod params;

use std::fmt;
use std::str::FromStr;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use num_bigint::BigUint;

use crate::error::WireError;
use crate::group::GroupParams;
use crate::pake::CONFIRMATION_LEN;
use crate::validation::ValidationMethod;

pub use domain::{match_auth_domain, AuthDomainForm, AuthDomainPattern};
use params::{is_token, parse_params, quote, Cursor, RawValue};

/// Authentication scheme name.
pub const SCHEME: &str = "Mutual";
/// The only protocol version spoken.
pub const VERSION: &str = "-draft05";

pub const WWW_AUTHENTICATE: &str = "WWW-Authenticate";
pub const OPTIONAL_WWW_AUTHENTICATE: &str = "Optional-WWW-Authenticate";
pub const AUTHORIZATION: &str = "Authorization";
pub const AUTHENTICATION_INFO: &str = "Authentication-Info";
pub const AUTHENTICATION_CONTROL: &str = "Authentication-Control";

/// 64-bit session identifier, written as 16 lowercase hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sid(pub u64);

impl fmt::Display for Sid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl FromStr for Sid {
    type Err = WireError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() != 16 || !s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(WireError::invalid("sid", "expected 16 lowercase hex digits"));
        }
        u64::from_str_radix(s, 16)
            .map(Sid)
            .map_err(|_| WireError::invalid("sid", "expected 16 lowercase hex digits"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeaderKind {
    Challenge,
    OptionalChallenge,
    KexRequest,
    KexResponse,
    AuthRequest,
    AuthInfo,
    AuthControl,
}

/// Initial `401` challenge (also used for rejections via `stale`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Challenge {
    pub algorithm: String,
    pub validation: ValidationMethod,
    pub auth_domain: AuthDomainPattern,
    pub realm: String,
    pub stale: bool,
}

/// First `Authorization`: user name and `wa`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KexRequest {
    pub algorithm: String,
    pub validation: ValidationMethod,
    pub auth_domain: AuthDomainPattern,
    pub user: String,
    pub wa: Vec<u8>,
}

/// Intermediate `401`: session id, `wb` and session limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KexResponse {
    pub sid: Sid,
    pub wb: Vec<u8>,
    pub nc_max: u32,
    pub nc_window: u32,
    /// Session lifetime in seconds.
    pub time: u64,
    /// Path prefix under which the session may be used preemptively.
    pub path: String,
}

/// `Authorization` carrying `oa` for session `sid` and counter `nc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthRequest {
    pub algorithm: String,
    pub validation: ValidationMethod,
    pub auth_domain: AuthDomainPattern,
    pub user: String,
    pub sid: Sid,
    pub nc: u32,
    pub oa: Vec<u8>,
}

/// `Authentication-Info` with the server's confirmation `ob`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthInfo {
    pub sid: Sid,
    pub ob: Vec<u8>,
}

/// `Authentication-Control` directives. At least one must be set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuthControl {
    pub logout_timeout: Option<u64>,
    pub unauthenticated_redirect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MutualHeader {
    Challenge(Challenge),
    OptionalChallenge(Challenge),
    KexRequest(KexRequest),
    KexResponse(KexResponse),
    AuthRequest(AuthRequest),
    AuthInfo(AuthInfo),
    AuthControl(AuthControl),
}

/// A typed parameter value in canonical form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamValue {
    Token(String),
    Quoted(String),
    Integer(u64),
    Base64(Vec<u8>),
}

impl MutualHeader {
    pub fn kind(&self) -> HeaderKind {
        match self {
            MutualHeader::Challenge(_) => HeaderKind::Challenge,
            MutualHeader::OptionalChallenge(_) => HeaderKind::OptionalChallenge,
            MutualHeader::KexRequest(_) => HeaderKind::KexRequest,
            MutualHeader::KexResponse(_) => HeaderKind::KexResponse,
            MutualHeader::AuthRequest(_) => HeaderKind::AuthRequest,
            MutualHeader::AuthInfo(_) => HeaderKind::AuthInfo,
            MutualHeader::AuthControl(_) => HeaderKind::AuthControl,
        }
    }

    /// The HTTP header field this message travels in.
    pub fn header_name(&self) -> &'static str {
        match self.kind() {
            HeaderKind::Challenge | HeaderKind::KexResponse => WWW_AUTHENTICATE,
            HeaderKind::OptionalChallenge => OPTIONAL_WWW_AUTHENTICATE,
            HeaderKind::KexRequest | HeaderKind::AuthRequest => AUTHORIZATION,
            HeaderKind::AuthInfo => AUTHENTICATION_INFO,
            HeaderKind::AuthControl => AUTHENTICATION_CONTROL,
        }
    }

    /// Parameters in canonical order, `version` included where it is sent.
    pub fn params(&self) -> Vec<(&'static str, ParamValue)> {
        use ParamValue::*;
        let version = ("version", Token(VERSION.to_owned()));
        let realm_head = |algorithm: &str, validation: ValidationMethod, domain: &AuthDomainPattern| {
            [
                ("algorithm", Token(algorithm.to_owned())),
                ("validation", Token(validation.as_str().to_owned())),
                ("auth-domain", Quoted(domain.as_str().to_owned())),
            ]
        };
        match self {
            MutualHeader::Challenge(c) | MutualHeader::OptionalChallenge(c) => {
                let mut p = vec![version];
                p.extend(realm_head(&c.algorithm, c.validation, &c.auth_domain));
                p.push(("realm", Quoted(c.realm.clone())));
                p.push(("stale", Integer(c.stale as u64)));
                p
            }
            MutualHeader::KexRequest(k) => {
                let mut p = vec![version];
                p.extend(realm_head(&k.algorithm, k.validation, &k.auth_domain));
                p.push(("user", Quoted(k.user.clone())));
                p.push(("wa", Base64(k.wa.clone())));
                p
            }
            MutualHeader::KexResponse(k) => vec![
                version,
                ("sid", Token(k.sid.to_string())),
                ("wb", Base64(k.wb.clone())),
                ("nc-max", Integer(k.nc_max.into())),
                ("nc-window", Integer(k.nc_window.into())),
                ("time", Integer(k.time)),
                ("path", Quoted(k.path.clone())),
            ],
            MutualHeader::AuthRequest(a) => {
                let mut p = vec![version];
                p.extend(realm_head(&a.algorithm, a.validation, &a.auth_domain));
                p.push(("user", Quoted(a.user.clone())));
                p.push(("sid", Token(a.sid.to_string())));
                p.push(("nc", Integer(a.nc.into())));
                p.push(("oa", Base64(a.oa.clone())));
                p
            }
            MutualHeader::AuthInfo(i) => vec![
                version,
                ("sid", Token(i.sid.to_string())),
                ("ob", Base64(i.ob.clone())),
            ],
            MutualHeader::AuthControl(c) => {
                let mut p = Vec::new();
                if let Some(t) = c.logout_timeout {
                    p.push(("logout-timeout", Integer(t)));
                }
                if let Some(url) = &c.unauthenticated_redirect {
                    p.push(("unauthenticated-redirect", Quoted(url.clone())));
                }
                p
            }
        }
    }
}

impl fmt::Display for MutualHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serialize_header(self) {
            Ok(s) => f.write_str(&s),
            Err(_) => Err(fmt::Error),
        }
    }
}

/// Renders a header value in canonical form.
///
/// `Authentication-Control` is written without the scheme prefix, as a bare
/// directive list; every other message starts with `Mutual `.
pub fn serialize_header(h: &MutualHeader) -> Result<String, WireError> {
    let params = h.params();
    if params.is_empty() {
        return Err(WireError::MissingParameter(vec!["directive".into()]));
    }
    let mut parts = Vec::with_capacity(params.len());
    for (name, value) in params {
        let rendered = match value {
            ParamValue::Token(t) => {
                if !is_token(&t) {
                    return Err(WireError::invalid(name, "not a token"));
                }
                t
            }
            ParamValue::Quoted(s) => {
                quote(&s).ok_or_else(|| WireError::invalid(name, "control character"))?
            }
            ParamValue::Integer(n) => n.to_string(),
            ParamValue::Base64(b) => format!("\"{}\"", BASE64.encode(b)),
        };
        parts.push(format!("{name}={rendered}"));
    }
    let list = parts.join(", ");
    Ok(match h.kind() {
        HeaderKind::AuthControl => list,
        _ => format!("{SCHEME} {list}"),
    })
}

/// Parses one header value. The message kind follows from the header name
/// and, where a header carries two messages, from the parameters present.
pub fn parse_header(header_name: &str, text: &str) -> Result<MutualHeader, WireError> {
    let name = header_name.trim();
    let known = [
        WWW_AUTHENTICATE,
        OPTIONAL_WWW_AUTHENTICATE,
        AUTHORIZATION,
        AUTHENTICATION_INFO,
        AUTHENTICATION_CONTROL,
    ];
    let Some(name) = known.iter().copied().find(|k| k.eq_ignore_ascii_case(name)) else {
        return Err(WireError::UnknownHeader(header_name.to_owned()));
    };

    let mut cur = Cursor::new(text);
    cur.skip_ows();
    if cur.at_end() {
        return Err(WireError::Empty);
    }
    let bare_directives = name == AUTHENTICATION_CONTROL && {
        let mut probe = Cursor::new(text);
        probe.skip_ows();
        probe.token().is_some() && probe.lookahead_is(b'=')
    };
    if !bare_directives {
        let scheme = cur.token().ok_or(WireError::MalformedSyntax(cur.pos()))?;
        if !scheme.eq_ignore_ascii_case(SCHEME) {
            return Err(WireError::UnknownScheme(scheme.to_owned()));
        }
        if cur.skip_ows() == 0 {
            return Err(if cur.at_end() {
                WireError::Empty
            } else {
                WireError::MalformedSyntax(cur.pos())
            });
        }
        if cur.at_end() {
            return Err(WireError::Empty);
        }
    }
    let raw = Params(parse_params(&mut cur)?);

    if !bare_directives {
        let version = raw.get("version").ok_or_else(|| WireError::MissingParameter(vec!["version".into()]))?;
        if version != VERSION {
            return Err(WireError::VersionMismatch(version.to_owned()));
        }
    }

    match name {
        WWW_AUTHENTICATE if raw.has("sid") || raw.has("wb") => raw.kex_response().map(MutualHeader::KexResponse),
        WWW_AUTHENTICATE => raw.challenge().map(MutualHeader::Challenge),
        OPTIONAL_WWW_AUTHENTICATE => raw.challenge().map(MutualHeader::OptionalChallenge),
        AUTHORIZATION if raw.has("sid") || raw.has("oa") || raw.has("nc") => {
            raw.auth_request().map(MutualHeader::AuthRequest)
        }
        AUTHORIZATION => raw.kex_request().map(MutualHeader::KexRequest),
        AUTHENTICATION_INFO => raw.auth_info().map(MutualHeader::AuthInfo),
        _ => raw.auth_control().map(MutualHeader::AuthControl),
    }
}

/// [`parse_header`] over raw octets.
pub fn parse_header_bytes(header_name: &str, bytes: &[u8]) -> Result<MutualHeader, WireError> {
    let text = std::str::from_utf8(bytes).map_err(|_| WireError::NotUtf8)?;
    parse_header(header_name, text)
}

struct Params(Vec<(String, RawValue)>);

impl Params {
    fn has(&self, name: &str) -> bool {
        self.0.iter().any(|(n, _)| n == name)
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    fn require_all(&self, names: &[&str]) -> Result<(), WireError> {
        let missing: Vec<String> = names
            .iter()
            .filter(|n| !self.has(n))
            .map(|n| n.to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(WireError::MissingParameter(missing))
        }
    }

    fn string(&self, name: &str) -> Result<String, WireError> {
        Ok(self.get(name).expect("checked by require_all").to_owned())
    }

    fn token(&self, name: &str) -> Result<String, WireError> {
        let v = self.get(name).expect("checked by require_all");
        if is_token(v) {
            Ok(v.to_owned())
        } else {
            Err(WireError::invalid(name, "expected a token"))
        }
    }

    fn integer(&self, name: &str) -> Result<u64, WireError> {
        let v = self.get(name).expect("checked by require_all");
        if v.is_empty() || v.len() > 19 || !v.bytes().all(|b| b.is_ascii_digit()) {
            return Err(WireError::invalid(name, "expected a decimal integer"));
        }
        v.parse().map_err(|_| WireError::invalid(name, "expected a decimal integer"))
    }

    fn integer_u32(&self, name: &str) -> Result<u32, WireError> {
        u32::try_from(self.integer(name)?).map_err(|_| WireError::invalid(name, "too large"))
    }

    fn base64(&self, name: &str) -> Result<Vec<u8>, WireError> {
        let v = self.get(name).expect("checked by require_all");
        let bytes = BASE64
            .decode(v)
            .map_err(|_| WireError::MalformedBase64(name.to_owned()))?;
        if bytes.is_empty() {
            return Err(WireError::MalformedBase64(name.to_owned()));
        }
        Ok(bytes)
    }

    fn confirmation(&self, name: &str) -> Result<Vec<u8>, WireError> {
        let bytes = self.base64(name)?;
        if bytes.len() != CONFIRMATION_LEN {
            return Err(WireError::WrongLength {
                expected: CONFIRMATION_LEN,
                got: bytes.len(),
            });
        }
        Ok(bytes)
    }

    fn realm_head(&self) -> Result<(String, ValidationMethod, AuthDomainPattern), WireError> {
        Ok((
            self.token("algorithm")?,
            self.get("validation").expect("checked by require_all").parse()?,
            self.get("auth-domain").expect("checked by require_all").parse()?,
        ))
    }

    fn challenge(&self) -> Result<Challenge, WireError> {
        self.require_all(&["algorithm", "validation", "auth-domain", "realm", "stale"])?;
        let (algorithm, validation, auth_domain) = self.realm_head()?;
        let stale = match self.integer("stale")? {
            0 => false,
            1 => true,
            _ => return Err(WireError::invalid("stale", "expected 0 or 1")),
        };
        Ok(Challenge {
            algorithm,
            validation,
            auth_domain,
            realm: self.string("realm")?,
            stale,
        })
    }

    fn kex_request(&self) -> Result<KexRequest, WireError> {
        self.require_all(&["algorithm", "validation", "auth-domain", "user", "wa"])?;
        let (algorithm, validation, auth_domain) = self.realm_head()?;
        Ok(KexRequest {
            algorithm,
            validation,
            auth_domain,
            user: self.string("user")?,
            wa: self.base64("wa")?,
        })
    }

    fn kex_response(&self) -> Result<KexResponse, WireError> {
        self.require_all(&["sid", "wb", "nc-max", "nc-window", "time", "path"])?;
        Ok(KexResponse {
            sid: self.string("sid")?.parse()?,
            wb: self.base64("wb")?,
            nc_max: self.integer_u32("nc-max")?,
            nc_window: self.integer_u32("nc-window")?,
            time: self.integer("time")?,
            path: self.string("path")?,
        })
    }

    fn auth_request(&self) -> Result<AuthRequest, WireError> {
        self.require_all(&["algorithm", "validation", "auth-domain", "user", "sid", "nc", "oa"])?;
        let (algorithm, validation, auth_domain) = self.realm_head()?;
        Ok(AuthRequest {
            algorithm,
            validation,
            auth_domain,
            user: self.string("user")?,
            sid: self.string("sid")?.parse()?,
            nc: self.integer_u32("nc")?,
            oa: self.confirmation("oa")?,
        })
    }

    fn auth_info(&self) -> Result<AuthInfo, WireError> {
        self.require_all(&["sid", "ob"])?;
        Ok(AuthInfo {
            sid: self.string("sid")?.parse()?,
            ob: self.confirmation("ob")?,
        })
    }

    fn auth_control(&self) -> Result<AuthControl, WireError> {
        let control = AuthControl {
            logout_timeout: self
                .has("logout-timeout")
                .then(|| self.integer("logout-timeout"))
                .transpose()?,
            unauthenticated_redirect: self
                .has("unauthenticated-redirect")
                .then(|| self.string("unauthenticated-redirect"))
                .transpose()?,
        };
        if control.logout_timeout.is_none() && control.unauthenticated_redirect.is_none() {
            return Err(WireError::MissingParameter(vec![
                "logout-timeout".into(),
                "unauthenticated-redirect".into(),
            ]));
        }
        Ok(control)
    }
}

/// Standard padded base64 of the fixed-width big-endian encoding of `x`.
pub fn encode_element(x: &BigUint, group: &GroupParams) -> Result<String, WireError> {
    if x >= group.q() {
        return Err(WireError::OutOfRange);
    }
    Ok(BASE64.encode(group.to_fixed_bytes(x)))
}

/// Inverse of [`encode_element`]. Does not check subgroup membership.
pub fn decode_element(s: &str, group: &GroupParams) -> Result<BigUint, WireError> {
    let bytes = BASE64
        .decode(s)
        .map_err(|_| WireError::MalformedBase64("element".into()))?;
    element_from_octets(&bytes, group)
}

/// Fixed-width big-endian octets to an integer below `q`.
pub fn element_from_octets(bytes: &[u8], group: &GroupParams) -> Result<BigUint, WireError> {
    if bytes.len() != group.element_len() {
        return Err(WireError::WrongLength {
            expected: group.element_len(),
            got: bytes.len(),
        });
    }
    let x = BigUint::from_bytes_be(bytes);
    if &x >= group.q() {
        return Err(WireError::OutOfRange);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{named_group, DL_2048, TOY_DL_23};

    const CHALLENGE: &str = r#"Mutual version=-draft05, algorithm=iso11770-4-dl-2048, validation=host, auth-domain="www.example.com", realm="Protected Contents", stale=0"#;

    fn domain(s: &str) -> AuthDomainPattern {
        s.parse().unwrap()
    }

    #[test]
    fn parses_challenge() {
        let h = parse_header("WWW-Authenticate", CHALLENGE).unwrap();
        assert_eq!(
            h,
            MutualHeader::Challenge(Challenge {
                algorithm: "iso11770-4-dl-2048".into(),
                validation: ValidationMethod::Host,
                auth_domain: domain("www.example.com"),
                realm: "Protected Contents".into(),
                stale: false,
            })
        );
        assert_eq!(serialize_header(&h).unwrap(), CHALLENGE);
    }

    #[test]
    fn parses_kex_response() {
        let text = r#"Mutual version=-draft05, sid=d9ea626480044abd, wb="AAEC", nc-max=256, nc-window=64, time=300, path="/""#;
        let MutualHeader::KexResponse(k) = parse_header("www-authenticate", text).unwrap() else {
            panic!("wrong kind");
        };
        assert_eq!(k.sid, Sid(0xd9ea626480044abd));
        assert_eq!(k.wb, vec![0, 1, 2]);
        assert_eq!((k.nc_max, k.nc_window, k.time), (256, 64, 300));
        assert_eq!(k.path, "/");
    }

    #[test]
    fn version_only_authorization_is_missing_parameters() {
        let err = parse_header("Authorization", "Mutual version=-draft05").unwrap_err();
        let WireError::MissingParameter(missing) = err else {
            panic!("expected missing-parameter, got {err:?}");
        };
        assert!(missing.contains(&"user".to_string()));
        assert!(missing.contains(&"wa".to_string()));
    }

    #[test]
    fn distinct_error_codes() {
        let cases = [
            ("WWW-Authenticate", "Basic realm=\"x\"", "unknown-scheme"),
            ("WWW-Authenticate", "", "empty"),
            ("WWW-Authenticate", "Mutual version=-draft04, realm=\"x\"", "version-mismatch"),
            ("WWW-Authenticate", "Mutual version=-draft05, version=-draft05", "duplicate-parameter"),
            ("WWW-Authenticate", "Mutual version=-draft05, realm=\"x", "malformed-quoting"),
            ("Authorization", "Mutual version=-draft05, algorithm=a, validation=host, auth-domain=h, user=u, wa=\"%%%\"", "malformed-base64"),
            ("X-Other", "Mutual version=-draft05", "unknown-header"),
            ("Authentication-Info", "Mutual version=-draft05, sid=xyz, ob=\"AA==\"", "invalid-value"),
        ];
        for (name, text, code) in cases {
            assert_eq!(parse_header(name, text).unwrap_err().code(), code, "{text}");
        }
    }

    #[test]
    fn scheme_is_case_insensitive() {
        let lower = CHALLENGE.replacen("Mutual", "mUTUAL", 1);
        assert!(parse_header("WWW-Authenticate", &lower).is_ok());
    }

    #[test]
    fn control_header_forms() {
        let h = MutualHeader::AuthControl(AuthControl {
            logout_timeout: Some(300),
            unauthenticated_redirect: None,
        });
        assert_eq!(serialize_header(&h).unwrap(), "logout-timeout=300");
        assert_eq!(parse_header("Authentication-Control", "logout-timeout=300").unwrap(), h);
        assert_eq!(
            parse_header("Authentication-Control", "Mutual version=-draft05, logout-timeout=300").unwrap(),
            h
        );
        let empty = MutualHeader::AuthControl(AuthControl::default());
        assert!(serialize_header(&empty).is_err());
        assert!(parse_header("Authentication-Control", "Mutual version=-draft05").is_err());
    }

    #[test]
    fn confirmation_length_is_checked() {
        let text = "Mutual version=-draft05, sid=d9ea626480044abd, ob=\"AAAA\"";
        assert_eq!(
            parse_header("Authentication-Info", text).unwrap_err(),
            WireError::WrongLength { expected: 32, got: 3 }
        );
    }

    #[test]
    fn sid_format() {
        assert_eq!("d9ea626480044abd".parse::<Sid>().unwrap().to_string(), "d9ea626480044abd");
        assert!("D9EA626480044ABD".parse::<Sid>().is_err());
        assert!("d9ea62648004".parse::<Sid>().is_err());
        assert_eq!(Sid(1).to_string(), "0000000000000001");
    }

    #[test]
    fn element_codec() {
        let toy = named_group(TOY_DL_23).unwrap();
        assert_eq!(encode_element(&BigUint::from(8u8), toy).unwrap(), "CA==");
        assert_eq!(decode_element("CA==", toy).unwrap(), BigUint::from(8u8));
        assert_eq!(encode_element(&BigUint::from(23u8), toy), Err(WireError::OutOfRange));
        assert_eq!(decode_element("Fw==", toy), Err(WireError::OutOfRange));
        let big = named_group(DL_2048).unwrap();
        let enc = encode_element(&BigUint::from(8u8), big).unwrap();
        let truncated = &enc[..enc.len() - 8];
        assert!(decode_element(truncated, big).is_err());
        assert_eq!(
            decode_element("CA==", big),
            Err(WireError::WrongLength { expected: 256, got: 1 })
        );
    }
}
