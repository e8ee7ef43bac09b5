use std::fmt;
use std::str::FromStr;

use crate::error::WireError;

/// Which of the three auth-domain syntaxes a pattern uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuthDomainForm {
    /// `www.example.com`: that host on any scheme and port.
    Host,
    /// `https://www.example.com:443`: exactly that triple.
    SchemeHostPort,
    /// `*.example.com`: every host strictly below `example.com`.
    WildcardDomain,
}

/// The range of hosts sharing one set of credentials.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AuthDomainPattern {
    raw: String,
    form: AuthDomainForm,
    scheme: Option<String>,
    /// Lowercased host, or the suffix after `*.` for wildcards.
    host: String,
    port: Option<u16>,
}

impl AuthDomainPattern {
    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn form(&self) -> AuthDomainForm {
        self.form
    }

    /// Whether a request to `scheme://host:port` falls inside this domain.
    /// Host comparison is case-insensitive; a wildcard never matches its
    /// apex (`*.example.com` does not cover `example.com`).
    pub fn matches(&self, scheme: &str, host: &str, port: u16) -> bool {
        let host = host.to_ascii_lowercase();
        match self.form {
            AuthDomainForm::Host => host == self.host,
            AuthDomainForm::SchemeHostPort => {
                host == self.host
                    && Some(port) == self.port
                    && self.scheme.as_deref() == Some(scheme.to_ascii_lowercase().as_str())
            }
            AuthDomainForm::WildcardDomain => host
                .strip_suffix(self.host.as_str())
                .is_some_and(|prefix| prefix.len() > 1 && prefix.ends_with('.')),
        }
    }

    /// Case-insensitive comparison of the textual patterns.
    pub fn same_domain(&self, other: &AuthDomainPattern) -> bool {
        self.raw.eq_ignore_ascii_case(&other.raw)
    }
}

/// Free-function form of [`AuthDomainPattern::matches`].
pub fn match_auth_domain(pattern: &AuthDomainPattern, scheme: &str, host: &str, port: u16) -> bool {
    pattern.matches(scheme, host, port)
}

impl fmt::Display for AuthDomainPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

fn valid_hostname(host: &str) -> bool {
    !host.is_empty()
        && host.len() <= 253
        && host.split('.').all(|label| {
            !label.is_empty()
                && label.len() <= 63
                && label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-')
                && !label.starts_with('-')
                && !label.ends_with('-')
        })
}

impl FromStr for AuthDomainPattern {
    type Err = WireError;

    fn from_str(raw: &str) -> Result<Self, Self::Err> {
        let bad = |why: &str| WireError::invalid("auth-domain", format!("{why}: `{raw}`"));
        if let Some(suffix) = raw.strip_prefix("*.") {
            if !valid_hostname(suffix) {
                return Err(bad("invalid wildcard domain"));
            }
            return Ok(AuthDomainPattern {
                raw: raw.to_owned(),
                form: AuthDomainForm::WildcardDomain,
                scheme: None,
                host: suffix.to_ascii_lowercase(),
                port: None,
            });
        }
        if let Some((scheme, rest)) = raw.split_once("://") {
            let scheme = scheme.to_ascii_lowercase();
            if scheme != "http" && scheme != "https" {
                return Err(bad("scheme must be http or https"));
            }
            let (host, port) = rest.rsplit_once(':').ok_or_else(|| bad("port is required"))?;
            let port: u16 = port
                .parse()
                .ok()
                .filter(|_| port.bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| bad("invalid port"))?;
            if !valid_hostname(host) {
                return Err(bad("invalid host"));
            }
            return Ok(AuthDomainPattern {
                raw: raw.to_owned(),
                form: AuthDomainForm::SchemeHostPort,
                scheme: Some(scheme),
                host: host.to_ascii_lowercase(),
                port: Some(port),
            });
        }
        if !valid_hostname(raw) {
            return Err(bad("invalid host"));
        }
        Ok(AuthDomainPattern {
            raw: raw.to_owned(),
            form: AuthDomainForm::Host,
            scheme: None,
            host: raw.to_ascii_lowercase(),
            port: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> AuthDomainPattern {
        s.parse().unwrap()
    }

    #[test]
    fn forms() {
        assert_eq!(p("www.example.com").form(), AuthDomainForm::Host);
        assert_eq!(p("https://www.example.com:443").form(), AuthDomainForm::SchemeHostPort);
        assert_eq!(p("*.example.com").form(), AuthDomainForm::WildcardDomain);
    }

    #[test]
    fn host_form_matches_any_scheme_and_port() {
        let d = p("www.example.com");
        assert!(d.matches("http", "www.example.com", 80));
        assert!(d.matches("https", "www.example.com", 8443));
        assert!(d.matches("http", "WWW.EXAMPLE.COM", 80));
        assert!(!d.matches("http", "mail.example.com", 80));
    }

    #[test]
    fn scheme_host_port_is_exact() {
        let d = p("https://www.example.com:443");
        assert!(d.matches("https", "www.example.com", 443));
        assert!(d.matches("HTTPS", "Www.Example.Com", 443));
        assert!(!d.matches("http", "www.example.com", 443));
        assert!(!d.matches("https", "www.example.com", 8443));
    }

    #[test]
    fn wildcard() {
        let d = p("*.example.com");
        assert!(d.matches("https", "mail.example.com", 443));
        assert!(d.matches("http", "a.b.example.com", 80));
        assert!(d.matches("http", "MAIL.Example.com", 80));
        assert!(!d.matches("https", "example.org", 443));
        assert!(!d.matches("https", "example.com", 443));
        assert!(!d.matches("https", "badexample.com", 443));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "*.", "*", "a..b", "http://h", "ftp://h:1", "http://h:99999", "*.*.com", "-a.com", "h:80", "http://h:+80"] {
            assert!(bad.parse::<AuthDomainPattern>().is_err(), "{bad}");
        }
    }
}
